fn main() {
    std::process::exit(qnls::cli::main_with(std::env::args_os()));
}
