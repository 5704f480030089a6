fn main() {
    std::process::exit(sirenv::cli::main(std::env::args_os()));
}
