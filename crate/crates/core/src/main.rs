fn main() {
    let code = evolflow::cli::run(std::env::args_os());
    std::process::exit(code);
}
