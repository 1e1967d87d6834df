fn main() {
    let code = trispirit::cli::run_cli(std::env::args_os());
    std::process::exit(code);
}
