fn main() {
    std::process::exit(waldschmidt::cli::cli_main(std::env::args_os()));
}
