fn main() {
    std::process::exit(cqnls::cli::run(std::env::args_os()));
}
