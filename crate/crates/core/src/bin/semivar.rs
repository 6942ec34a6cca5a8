fn main() {
    std::process::exit(semivar::cli::main_with_args(std::env::args_os()));
}
