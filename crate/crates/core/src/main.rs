fn main() {
    std::process::exit(qgeokit::cli::main_with_args(std::env::args_os()));
}
