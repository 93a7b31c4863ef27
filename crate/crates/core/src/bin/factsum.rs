fn main() {
    std::process::exit(factsum::cli::run(std::env::args_os()));
}
