fn main() {
    std::process::exit(plrank::cli::run(std::env::args_os()));
}
