fn main() {
    std::process::exit(kdm_cli::run());
}
