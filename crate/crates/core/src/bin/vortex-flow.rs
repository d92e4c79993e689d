fn main() {
    std::process::exit(vortex_flow::cli::run(std::env::args_os()));
}
