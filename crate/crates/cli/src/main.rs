fn main() {
    std::process::exit(svlab_cli::main_with(std::env::args_os()));
}
