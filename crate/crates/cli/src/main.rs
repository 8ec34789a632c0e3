fn main() {
    std::process::exit(pkpz_cli::run(std::env::args_os()));
}
