fn main() {
    std::process::exit(hatesynth::cli::main());
}
