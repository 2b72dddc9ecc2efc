fn main() {
    std::process::exit(nldid::cli::run(std::env::args_os()));
}
