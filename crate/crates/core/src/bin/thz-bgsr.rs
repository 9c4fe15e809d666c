fn main() {
    std::process::exit(thz_bgsr::harness::run_cli(std::env::args_os()));
}
