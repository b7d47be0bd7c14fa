use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hyperstab::cli::{self, CheckStatus, RunStatus};
use hyperstab::graphgeo::builder_catalog;

#[derive(Parser)]
#[command(
    name = "hyperstab",
    version,
    about = "Curvature identities, stability index and growth scans for hypersurface patches"
)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write report.json, CSV tables and plot data.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// List patch builders and their parameters.
    Builders {
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let env = std::env::var(cli::THREADS_ENV).ok();
    match cli::thread_cap(env.as_deref()) {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                eprintln!("cannot configure thread pool: {e}");
                return ExitCode::from(RunStatus::InvalidConfig.exit_code() as u8);
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("{}", e.message());
            return ExitCode::from(RunStatus::InvalidConfig.exit_code() as u8);
        }
    }
    match args.command {
        Cmd::Builders { json } => {
            let catalog = builder_catalog();
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&catalog).expect("catalog serializes")
                );
            } else {
                for b in &catalog {
                    let domain = if b.needs_domain {
                        " (needs domain)"
                    } else {
                        ""
                    };
                    println!("{}{domain}: {}", b.name, b.summary);
                    for p in &b.params {
                        println!("    {} [{}]: {}", p.name, p.ty, p.description);
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Cmd::Run { config, out } => {
            let report = cli::run(&config, &out);
            for c in &report.checks {
                let tag = match c.status {
                    CheckStatus::Pass => "PASS",
                    CheckStatus::Fail => "FAIL",
                    CheckStatus::ReportOnly => "INFO",
                    CheckStatus::Skipped => "SKIP",
                };
                println!("{tag:4} {}: {}", c.name, c.detail);
            }
            if let Some(e) = &report.error {
                eprintln!("error: {e}");
            }
            println!(
                "{} {:?} in {:.2}s -> {}",
                report.scenario.as_deref().unwrap_or("<unparsed>"),
                report.status,
                report.wall_time_s,
                out.join("report.json").display()
            );
            ExitCode::from(report.exit_code as u8)
        }
    }
}
