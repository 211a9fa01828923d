fn main() {
    std::process::exit(lyapflow::cli::run_cli(std::env::args().skip(1)));
}
