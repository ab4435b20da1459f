use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use ris_control::broker::BrokerConfig;
use ris_control::Client;
use ris_lab::error::{CliError, EXIT_PROTOCOL};
use ris_lab::repl::run_repl;
use ris_lab::service::{connect, run_agent, serve, AgentRole, AgentSetup};
use ris_lab::sweep::{cross_locations, run_sweep, write_run_csv, RunRow};
use ris_lab::Scenario;

#[derive(Parser)]
#[command(name = "ris-lab", version, about = "RSSI-driven RIS codebook search: experiments and control plane")]
struct Cli {
    /// Log filter (error, warn, info, debug, trace); RIS_LAB_LOG overrides it.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (seed, algorithm) cell of a scenario and write CSV.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Output CSV; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one JSON search report per line.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate a codebook per location and evaluate each everywhere.
    Locations {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the broker on a TCP address.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: String,
        /// Per-request agent timeout.
        #[arg(long, default_value_t = 5000)]
        timeout_ms: u64,
        /// Scenario supplying search options (random budget, bench2 variant).
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Connect a field agent to a broker.
    Agent {
        #[arg(long, value_enum)]
        role: RoleArg,
        #[arg(long)]
        connect: String,
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Codebook store file (ris); kept in memory if omitted.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Live-codebook file shared by separate ris and rx processes.
        #[arg(long)]
        surface: Option<PathBuf>,
        /// Scenario location whose channel the receiver sees.
        #[arg(long)]
        location: Option<String>,
    },
    /// Interactive user client; reads commands from stdin.
    Repl {
        #[arg(long)]
        connect: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    Ris,
    Rx,
    Field,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .parse_env("RIS_LAB_LOG")
        .init();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("ris-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Run { scenario, out, report } => {
            let scenario = Scenario::load(&scenario)?;
            let results = run_sweep(&scenario)?;
            let rows: Vec<RunRow> = results.iter().map(|(r, _)| r.clone()).collect();
            write_output(out.as_deref(), |w| write_run_csv(&rows, w))?;
            if let Some(path) = report {
                write_output(Some(&path), |w| {
                    for (row, rep) in &results {
                        let line = serde_json::json!({ "seed": row.seed, "report": rep });
                        writeln!(w, "{line}")?;
                    }
                    w.flush()
                })?;
            }
        }
        Command::Locations { scenario, out } => {
            let scenario = Scenario::load(&scenario)?;
            let matrix = cross_locations(&scenario)?;
            write_output(out.as_deref(), |w| matrix.write_csv(w))?;
        }
        Command::Serve {
            listen,
            timeout_ms,
            scenario,
        } => {
            let search = match scenario {
                Some(p) => Scenario::load(&p)?.search_options(0),
                None => Default::default(),
            };
            let config = BrokerConfig {
                request_timeout: Duration::from_millis(timeout_ms),
                search,
                ..BrokerConfig::default()
            };
            serve(&listen, config, |addr| {
                println!("listening on {addr}");
                let _ = io::stdout().flush();
            })?;
        }
        Command::Agent {
            role,
            connect,
            scenario,
            store,
            surface,
            location,
        } => {
            let scenario = match scenario {
                Some(p) => Scenario::load(&p)?,
                None => Scenario::default(),
            };
            let role = match role {
                RoleArg::Ris => AgentRole::Ris,
                RoleArg::Rx => AgentRole::Rx,
                RoleArg::Field => AgentRole::Field,
            };
            run_agent(&AgentSetup {
                role,
                connect,
                scenario,
                store,
                surface,
                location,
            })?;
        }
        Command::Repl { connect: addr } => {
            let mut client = Client::connect(connect(&addr)?)?;
            let summary = run_repl(&mut client, io::stdin().lock(), io::stdout().lock())?;
            if summary.busy > 0 {
                eprintln!("ris-lab: {} request(s) refused because the broker was busy", summary.busy);
                return Ok(EXIT_PROTOCOL);
            }
        }
    }
    Ok(0)
}

fn write_output(
    path: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::io(p, e))?;
            let mut w = BufWriter::new(file);
            write(&mut w).map_err(|e| CliError::io(p, e))
        }
        None => write(&mut io::stdout().lock()).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}
