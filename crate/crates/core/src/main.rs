fn main() {
    std::process::exit(optquad::cli::run(std::env::args_os()));
}
