use clap::Parser;
use weihrauch::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = execute(&cli, &mut out);
    print!("{out}");
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
