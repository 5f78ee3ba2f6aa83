fn main() {
    let code = toda_mirror::cli::run(std::env::args_os());
    std::process::exit(code);
}
