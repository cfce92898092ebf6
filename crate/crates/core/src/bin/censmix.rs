fn main() {
    std::process::exit(censmix::cli::run(std::env::args_os()));
}
