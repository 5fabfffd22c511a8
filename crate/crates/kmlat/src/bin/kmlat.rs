fn main() {
    std::process::exit(kmlat::cli::run());
}
