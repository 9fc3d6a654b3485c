fn main() {
    std::process::exit(ergolab::cli::run_from(std::env::args()));
}
