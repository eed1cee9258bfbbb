fn main() {
    std::process::exit(jiuchan::cli::main_with_args(std::env::args_os()));
}
