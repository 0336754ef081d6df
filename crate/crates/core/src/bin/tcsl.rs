fn main() {
    std::process::exit(stationary_light::cli::main_with(std::env::args_os()));
}
