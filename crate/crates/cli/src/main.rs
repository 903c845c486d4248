fn main() {
    std::process::exit(rank_engine_cli::run_cli(std::env::args_os()));
}
