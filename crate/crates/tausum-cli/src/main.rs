fn main() {
    std::process::exit(tausum_cli::main_with(std::env::args_os()));
}
