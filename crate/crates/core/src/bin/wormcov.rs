fn main() {
    std::process::exit(wormcov::cli::main_with_args(std::env::args_os()));
}
