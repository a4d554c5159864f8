fn main() {
    std::process::exit(symmeq::cli::run(std::env::args_os()));
}
