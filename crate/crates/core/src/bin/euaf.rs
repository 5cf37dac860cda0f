fn main() {
    std::process::exit(euaf::cli::run(std::env::args_os()));
}
