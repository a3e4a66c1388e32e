fn main() {
    std::process::exit(gek_cli::run(std::env::args()));
}
