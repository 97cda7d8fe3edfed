fn main() {
    std::process::exit(mshape_cli::run(std::env::args_os()));
}
