fn main() {
    std::process::exit(netsense::cli::main_with_env());
}
