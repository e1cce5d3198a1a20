fn main() {
    std::process::exit(vinepd_cli::run(std::env::args_os()));
}
