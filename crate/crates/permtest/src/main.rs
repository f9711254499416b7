fn main() {
    std::process::exit(permtest::cli::run(std::env::args_os()));
}
