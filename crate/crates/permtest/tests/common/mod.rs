#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;

use permtest_core::Pcg64;

/// One instrument in a generated monthly price file.
#[derive(Debug, Clone)]
pub struct FirmPlan {
    pub id: String,
    /// First month as `year * 12 + month0`.
    pub start: i32,
    pub months: usize,
    /// Month offset left out, producing a gap.
    pub hole: Option<usize>,
    /// Prices alternate up and down every month.
    pub periodic: bool,
}

impl FirmPlan {
    pub fn new(id: impl Into<String>, start_year: i32, months: usize) -> Self {
        Self {
            id: id.into(),
            start: start_year * 12,
            months,
            hole: None,
            periodic: false,
        }
    }

    pub fn with_hole(mut self, at: usize) -> Self {
        self.hole = Some(at);
        self
    }

    pub fn periodic(mut self) -> Self {
        self.periodic = true;
        self
    }
}

pub fn month_end(total: i32) -> String {
    let (y, m) = (total / 12, total % 12 + 1);
    let days = match m {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        _ if (y % 4 == 0 && y % 100 != 0) || y % 400 == 0 => 29,
        _ => 28,
    };
    format!("{y:04}-{m:02}-{days:02}")
}

/// Price CSV text for the given firms; random-walk prices from `seed`.
pub fn panel_csv(firms: &[FirmPlan], seed: u64) -> String {
    let mut out = String::from("id,date,close,adjfactor,retfactor\n");
    for (f, plan) in firms.iter().enumerate() {
        let mut rng = Pcg64::new(seed as u128, f as u128);
        let mut price = 20.0 + 80.0 * rng.next_f64();
        for k in 0..plan.months {
            price *= if plan.periodic {
                if k % 2 == 0 { 1.05 } else { 0.97 }
            } else {
                (0.15 * (rng.next_f64() - 0.5)).exp()
            };
            if plan.hole == Some(k) {
                continue;
            }
            let adj = if k >= plan.months / 2 { 2.0 } else { 1.0 };
            writeln!(
                out,
                "{},{},{},{},1",
                plan.id,
                month_end(plan.start + k as i32),
                price / adj,
                adj
            )
            .unwrap();
        }
    }
    out
}

pub fn write_panel(path: &Path, firms: &[FirmPlan], seed: u64) {
    std::fs::write(path, panel_csv(firms, seed)).unwrap();
}

/// Firms with ids `F0000..`, all spanning `months` from `start_year`.
pub fn random_firms(count: usize, start_year: i32, months: usize) -> Vec<FirmPlan> {
    (0..count)
        .map(|i| FirmPlan::new(format!("F{i:04}"), start_year, months))
        .collect()
}

pub fn permtest_bin() -> std::process::Command {
    std::process::Command::new(env!("CARGO_BIN_EXE_permtest"))
}
