fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(canonalg_cli::run(&argv));
}
