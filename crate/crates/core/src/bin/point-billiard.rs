fn main() {
    std::process::exit(point_billiard::cli::main_with_args(std::env::args_os()));
}
