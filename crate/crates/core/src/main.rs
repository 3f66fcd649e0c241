fn main() {
    std::process::exit(docxchain::cli::run_cli(std::env::args_os()));
}
