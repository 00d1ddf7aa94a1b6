fn main() {
    std::process::exit(codazzi::cli::run(std::env::args_os()));
}
