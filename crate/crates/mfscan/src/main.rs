fn main() {
    std::process::exit(mfscan::run_cli(std::env::args_os()));
}
