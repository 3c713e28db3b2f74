fn main() {
    std::process::exit(leadlag::cli::run(std::env::args_os()));
}
