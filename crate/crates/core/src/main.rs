fn main() {
    std::process::exit(bigjump::cli::run(std::env::args_os()));
}
