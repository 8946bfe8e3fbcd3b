fn main() {
    std::process::exit(stratsim::cli::main_with_args(std::env::args_os()));
}
