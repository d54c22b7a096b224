fn main() {
    std::process::exit(jetgeom::cli::main_with_args(std::env::args_os()));
}
