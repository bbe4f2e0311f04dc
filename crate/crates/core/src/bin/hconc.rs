fn main() {
    std::process::exit(hconc::cli::run(std::env::args_os()));
}
