fn main() {
    std::process::exit(craquelure::cli::cli_main(std::env::args_os()));
}
