fn main() {
    std::process::exit(symlab_cli::main_with_args(std::env::args_os()));
}
