use clap::Parser;

mod commands;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = commands::Cli::parse();
    std::process::exit(commands::run(cli));
}
