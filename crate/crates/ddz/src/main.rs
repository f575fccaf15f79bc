fn main() {
    std::process::exit(ddz::cli::run(std::env::args_os()));
}
