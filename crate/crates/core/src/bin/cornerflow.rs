fn main() {
    std::process::exit(cornerflow::cli::main_from_env());
}
