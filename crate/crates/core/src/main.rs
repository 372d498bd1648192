fn main() {
    std::process::exit(imperfect_duel::cli::dispatch(std::env::args_os()));
}
