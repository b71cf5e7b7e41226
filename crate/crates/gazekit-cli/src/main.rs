fn main() {
    std::process::exit(gazekit_cli::run());
}
