fn main() {
    std::process::exit(dul::cli::run(std::env::args_os()));
}
