fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("ROESSER_LOG")).init();
    std::process::exit(roesser::cli::run(std::env::args_os()));
}
