fn main() {
    std::process::exit(statesum::cli::main_with(std::env::args_os()));
}
