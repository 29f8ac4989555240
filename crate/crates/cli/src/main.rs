fn main() {
    std::process::exit(trifree_cli::run(std::env::args_os()));
}
