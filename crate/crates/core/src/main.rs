fn main() {
    env_logger::init();
    std::process::exit(risbal::sim::cli_main(std::env::args_os()));
}
