fn main() {
    std::process::exit(captrans::cli::main_entry(std::env::args_os()));
}
