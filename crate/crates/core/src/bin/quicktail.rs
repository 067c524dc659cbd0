fn main() {
    std::process::exit(quicktail::cli::main_with_args(std::env::args_os()));
}
