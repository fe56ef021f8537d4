fn main() {
    std::process::exit(nseobs::main_with_args(std::env::args_os()));
}
