use clap::Parser;
use malpha_cli::{exit, run, write_output, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(outcome) => match write_output(&cli.output, &outcome.output) {
            Ok(()) => outcome.code,
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", cli.output);
                exit::CONFIG
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
