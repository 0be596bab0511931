fn main() {
    std::process::exit(spinres_cli::run(std::env::args_os()));
}
