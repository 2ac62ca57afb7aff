use std::process::ExitCode;

use clap::Parser;
use dsp_cli::{run, summary_table, Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(report) => {
            if matches!(cli.command, Command::Batch { .. }) {
                eprint!("{}", summary_table(&report["result"]));
            }
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("dsp: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
