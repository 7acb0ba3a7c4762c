fn main() {
    std::process::exit(furthlab_cli::run(std::env::args_os()));
}
