use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::Parser;

use sdnn_bench::config::FormatArg;
use sdnn_bench::{Cli, Report};

fn write_report(report: &Report, out: Option<&Path>, format: FormatArg) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    match out {
        Some(path) => {
            std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
            if format == FormatArg::Csv {
                let csv = path.with_extension("csv");
                report.write_csv(BufWriter::new(File::create(&csv)?))?;
            }
        }
        None => {
            let mut stdout = io::stdout().lock();
            match format {
                FormatArg::Json => writeln!(stdout, "{json}")?,
                FormatArg::Csv => report.write_csv(stdout)?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let flags = cli.command.flags().clone();
    let report = match cli.command.run() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let Some(report) = report else {
        return ExitCode::SUCCESS;
    };
    if let Err(e) = write_report(&report, flags.out.as_deref(), flags.format) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {} = {} (want {:?} {})", c.name, c.value, c.op, c.threshold);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
