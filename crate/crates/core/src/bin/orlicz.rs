fn main() {
    std::process::exit(orlicz_core::cli::main());
}
