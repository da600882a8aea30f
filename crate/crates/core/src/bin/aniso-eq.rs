fn main() {
    std::process::exit(aniso_eq::cli::run(std::env::args_os()));
}
