fn main() {
    std::process::exit(sinf::cli::run(std::env::args_os()));
}
