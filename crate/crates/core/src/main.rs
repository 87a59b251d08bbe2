fn main() {
    std::process::exit(lowrankseg::cli::run(std::env::args_os()));
}
