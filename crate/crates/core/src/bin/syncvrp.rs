fn main() {
    std::process::exit(syncvrp::bench::cli_main(std::env::args_os()));
}
