fn main() {
    std::process::exit(modcop::cli::run());
}
