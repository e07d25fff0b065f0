fn main() {
    std::process::exit(multiway::cli::run(std::env::args_os()));
}
