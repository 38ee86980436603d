fn main() {
    std::process::exit(nullsurf::cli::run(std::env::args_os()));
}
