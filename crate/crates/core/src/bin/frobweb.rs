fn main() {
    std::process::exit(frobweb::cli::run(std::env::args_os()));
}
