fn main() {
    std::process::exit(qcash_cli::run(std::env::args_os()));
}
