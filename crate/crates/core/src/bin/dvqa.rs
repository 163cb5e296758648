fn main() {
    std::process::exit(dvqa::cli::run(std::env::args_os()));
}
