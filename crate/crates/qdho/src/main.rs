fn main() {
    std::process::exit(qdho::cli::main_entry());
}
