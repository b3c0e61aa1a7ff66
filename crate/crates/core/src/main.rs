fn main() {
    std::process::exit(lpnml::cli::run(std::env::args_os()));
}
