fn main() {
    let code = gxlfirm::cli::run(std::env::args_os());
    std::process::exit(code);
}
