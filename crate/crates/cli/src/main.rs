fn main() {
    std::process::exit(expost_cli::main_with_args(std::env::args_os()));
}
