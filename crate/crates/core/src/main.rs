fn main() {
    std::process::exit(density_lab::cli::run(std::env::args_os()));
}
