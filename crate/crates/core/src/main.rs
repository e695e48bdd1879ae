fn main() {
    std::process::exit(qlmass::cli::main_entry());
}
