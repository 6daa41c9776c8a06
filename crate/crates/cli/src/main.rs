fn main() {
    std::process::exit(scramblab_cli::run_from(std::env::args()));
}
