fn main() {
    std::process::exit(lacm::cli::run(std::env::args_os()));
}
