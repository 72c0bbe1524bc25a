fn main() {
    std::process::exit(mbfr::cli::run(std::env::args_os()));
}
