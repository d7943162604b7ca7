fn main() {
    std::process::exit(axb_kaczmarz::harness::cli(std::env::args_os()));
}
