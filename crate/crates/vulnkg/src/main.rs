fn main() {
    std::process::exit(vulnkg::cli::run());
}
