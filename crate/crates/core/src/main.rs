fn main() {
    std::process::exit(sandpile::cli::run(std::env::args_os()));
}
