fn main() {
    std::process::exit(fran_sdcp::cli::run(std::env::args_os()));
}
