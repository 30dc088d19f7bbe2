use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use riverhelm::config::ApiConfig;
use riverhelm::journal::read_log;
use riverhelm::replay::replay_log;
use riverhelm::scenario::run_scenario_files;
use riverhelm::validate::validate_file;

#[derive(Parser)]
#[command(name = "riverhelm", version, about = "Fleet control for simulated river submarines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API and push stream.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check an MDL map and print diagnostics.
    Validate { map: PathBuf },
    /// Run a JSON-lines scenario script on the simulated clock.
    Scenario {
        map: PathBuf,
        script: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the event log here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Rebuild the fleet from an event log and print its registry.
    Replay { log: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Serve { config } => serve(config),
        Command::Validate { map } => {
            let (code, lines) = validate_file(&map);
            for l in lines {
                if code == 0 {
                    println!("{l}");
                } else {
                    eprintln!("{l}");
                }
            }
            if code == 0 {
                println!("{}: ok", map.display());
            }
            ExitCode::from(code as u8)
        }
        Command::Scenario { map, script, report, log } => match run_scenario_files(&map, &script, log.as_deref()) {
            Ok(r) => {
                let text = serde_json::to_string_pretty(&r).expect("report serializes");
                match report {
                    Some(p) => {
                        if let Err(e) = std::fs::write(&p, text + "\n") {
                            eprintln!("{}: {e}", p.display());
                            return ExitCode::from(2);
                        }
                    }
                    None => println!("{text}"),
                }
                ExitCode::from(r.exit_code() as u8)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Replay { log } => {
            let fleet = read_log(&log)
                .map_err(|e| e.to_string())
                .and_then(|records| replay_log(&records).map_err(|e| e.to_string()));
            match fleet {
                Ok(f) => {
                    let robots: Vec<_> = f.registry().iter().collect();
                    println!("{}", serde_json::to_string_pretty(&robots).expect("registry serializes"));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}

fn serve(config: PathBuf) -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "riverhelm=info".into()),
        )
        .init();
    let cfg = match ApiConfig::load(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
    match rt.block_on(riverhelm::service::serve(cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
