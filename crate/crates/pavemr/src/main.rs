fn main() {
    std::process::exit(pavemr::cli::run(std::env::args_os()));
}
