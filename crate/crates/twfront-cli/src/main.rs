fn main() {
    std::process::exit(twfront_cli::dispatch(std::env::args()));
}
