use clap::Parser;
use tvsched_cli::cli::{emit, execute, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match execute(&cli).and_then(|text| emit(&text, cli.output.as_deref())) {
        Ok(()) => tvsched_cli::exit::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
