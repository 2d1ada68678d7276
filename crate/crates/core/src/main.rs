fn main() {
    std::process::exit(ple::cli::run());
}
