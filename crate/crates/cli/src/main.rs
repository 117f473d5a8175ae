fn main() {
    std::process::exit(turanlab_cli::run(std::env::args_os()));
}
