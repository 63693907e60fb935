fn main() {
    std::process::exit(purcell_cli::run(std::env::args_os()));
}
