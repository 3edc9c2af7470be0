fn main() {
    std::process::exit(selbound::run(std::env::args_os()));
}
