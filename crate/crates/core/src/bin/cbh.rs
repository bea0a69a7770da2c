fn main() {
    std::process::exit(zonal_bm::cli::main_with_args(std::env::args_os()));
}
