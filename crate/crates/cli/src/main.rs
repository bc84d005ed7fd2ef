fn main() {
    std::process::exit(lyrval_cli::run(std::env::args_os()));
}
