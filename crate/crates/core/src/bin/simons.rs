fn main() {
    std::process::exit(simons_core::cli::run(std::env::args_os()));
}
