fn main() {
    std::process::exit(logsp::cli::run(std::env::args_os()));
}
