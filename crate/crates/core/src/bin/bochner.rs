fn main() {
    std::process::exit(bochner::harness::cli::main());
}
