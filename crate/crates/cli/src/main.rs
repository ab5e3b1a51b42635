fn main() {
    std::process::exit(wsnloc_cli::dispatch(std::env::args_os()));
}
