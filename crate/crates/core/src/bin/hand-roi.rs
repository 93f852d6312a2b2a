fn main() {
    std::process::exit(hand_roi::cli::run(std::env::args_os()));
}
