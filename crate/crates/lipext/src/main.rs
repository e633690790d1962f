fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EXT_LOG", "warn")).init();
    std::process::exit(lipext::cli::run(std::env::args_os()));
}
