fn main() {
    std::process::exit(planforge::cli::run(std::env::args_os()));
}
