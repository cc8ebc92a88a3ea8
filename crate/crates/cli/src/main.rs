fn main() {
    std::process::exit(vnet_cli::run(std::env::args_os()));
}
