fn main() {
    std::process::exit(pime::cli::run(std::env::args_os()));
}
