fn main() {
    std::process::exit(varsel::cli::main_with_args(std::env::args_os()));
}
