fn main() {
    std::process::exit(polargrass_cli::run(std::env::args_os()));
}
