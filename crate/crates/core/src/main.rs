fn main() {
    std::process::exit(systole_core::cli::main_with_args(std::env::args_os()));
}
