fn main() {
    std::process::exit(xdvae::cli::run(std::env::args_os()));
}
