fn main() {
    std::process::exit(lexbias::cli::run(std::env::args_os()));
}
