fn main() {
    std::process::exit(stardev::cli::main_entry());
}
