fn main() {
    std::process::exit(tsmorph_cli::run(std::env::args_os()));
}
