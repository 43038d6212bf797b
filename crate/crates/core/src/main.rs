use fedcontrib::cli;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(cli::LOG_ENV, "warn")).init();
    std::process::exit(cli::run(std::env::args_os()));
}
