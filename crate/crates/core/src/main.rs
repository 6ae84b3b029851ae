fn main() {
    std::process::exit(qpoincare::cli::main_with_args(std::env::args_os()));
}
