fn main() {
    std::process::exit(slag_cli::main_with_env());
}
