fn main() {
    std::process::exit(tsvnet::cli::main_with_args(std::env::args_os()));
}
