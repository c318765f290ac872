fn main() {
    std::process::exit(paralaw::cli::run(std::env::args_os()));
}
