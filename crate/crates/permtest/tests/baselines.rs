use permtest::commands::cmd_simulate;
use permtest::config::{GeneratorName, LengthSpec, RunConfig, StreamSel, SyntheticConfig};
use permtest::emit::ReportFile;

fn simulate(generator: GeneratorName, out: &std::path::Path) -> ReportFile {
    let config = RunConfig {
        streams: vec![StreamSel::Firm],
        synthetic: Some(SyntheticConfig {
            generator,
            firm: LengthSpec::Constant {
                count: 1000,
                length: 227,
            },
            ..Default::default()
        }),
        output_dir: out.to_path_buf(),
        ..Default::default()
    };
    let dirs = cmd_simulate(&config).unwrap();
    ReportFile::read(&dirs[0].join("report.json")).unwrap()
}

#[test]
fn logistic_map_is_detectably_weaker_than_pcg() {
    let dir = tempfile::tempdir().unwrap();
    let pcg = simulate(GeneratorName::Pcg64, &dir.path().join("pcg")).stream;
    let logistic = simulate(GeneratorName::Logistic, &dir.path().join("logistic")).stream;
    let last = |r: &permtest_core::StreamReport| r.d2_summary.last().unwrap().combined;
    assert!(last(&logistic).statistic > last(&pcg).statistic);
    assert!(last(&logistic).significant);
    assert!(!last(&pcg).significant);
    for d in &pcg.d2_summary {
        assert!(!d.combined.significant, "ν={}", d.column.nu);
    }
}
