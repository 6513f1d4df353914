fn main() {
    std::process::exit(cqdist::cli::run());
}
