fn main() {
    std::process::exit(trimode_cli::cli::main_with(std::env::args_os()));
}
