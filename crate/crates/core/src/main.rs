fn main() {
    std::process::exit(lst_core::cli::run(std::env::args_os()));
}
