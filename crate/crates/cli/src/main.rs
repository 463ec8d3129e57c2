fn main() {
    std::process::exit(espeed::run(std::env::args_os()));
}
