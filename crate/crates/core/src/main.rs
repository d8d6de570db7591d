fn main() {
    std::process::exit(alp::cli::main_with_args(std::env::args_os()));
}
