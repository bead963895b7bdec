fn main() {
    std::process::exit(dualap::cli::run(std::env::args_os()));
}
