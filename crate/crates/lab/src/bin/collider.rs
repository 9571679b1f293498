fn main() {
    std::process::exit(collider_lab::cli::main_with_args(std::env::args_os()));
}
