fn main() {
    std::process::exit(ace_core::cli::main());
}
