fn main() {
    std::process::exit(holant::cli::run_cli(std::env::args_os()));
}
