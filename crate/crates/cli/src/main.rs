fn main() {
    std::process::exit(bevtrack::cli::run(std::env::args_os()));
}
