use clap::Parser;
use gic_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GIC_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("gic: {e}");
        std::process::exit(e.exit_code());
    }
}
