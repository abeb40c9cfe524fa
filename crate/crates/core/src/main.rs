fn main() {
    std::process::exit(robord::app::cli::run(std::env::args_os()));
}
