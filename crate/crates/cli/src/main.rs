fn main() {
    let code = prk_cli::run(std::env::args_os());
    std::process::exit(code);
}
