fn main() {
    std::process::exit(modal_lift::cli::cli_main(std::env::args_os()));
}
