fn main() {
    std::process::exit(mplab_cli::run(std::env::args_os()));
}
