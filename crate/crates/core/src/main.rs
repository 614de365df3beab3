fn main() {
    std::process::exit(ordfair::cli::run(std::env::args_os()));
}
