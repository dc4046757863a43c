fn main() {
    std::process::exit(ras::cli::main_with_args(std::env::args_os()));
}
