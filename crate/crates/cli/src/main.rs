fn main() {
    std::process::exit(bounded_cycles_cli::run(std::env::args_os()));
}
