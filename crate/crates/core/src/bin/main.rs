fn main() {
    std::process::exit(hopf_delay::cli::main_with_args(std::env::args_os()));
}
