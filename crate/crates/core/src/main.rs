fn main() {
    std::process::exit(larfi::cli::run(std::env::args_os()));
}
