use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jason_rs::bench::{self, BenchMethod};
use jason_rs::platform::{self, Platform};
use jason_rs::scenario::{run_scenario, ScenarioSpec};
use jason_rs::server;
use jason_rs::Runtime;

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

#[derive(Parser)]
#[command(name = "jason-rs", version, about = "BDI agents behind a REST gateway")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the agent gateway and the platform emulator
    Serve {
        #[arg(long, env = "JASON_RS_LISTEN", default_value = "127.0.0.1:8080")]
        listen: String,
        /// `username:password:service` lines
        #[arg(long)]
        accounts: Option<PathBuf>,
        /// Directory of `.asl` programs; each file becomes an agent named after its stem
        #[arg(long)]
        agents: Option<PathBuf>,
    },
    /// Run the waste-disposal scenario and print the decider's decisions
    RunScenario {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Time sequential requests against a running server
    Bench {
        #[arg(long, default_value = "GET")]
        method: BenchMethod,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long)]
        url: String,
        /// Also write per-sample durations as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Parse and lint an agent program
    Check { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let level = if matches!(cli.command, Command::Serve { .. }) { tracing::Level::INFO } else { tracing::Level::WARN };
    tracing_subscriber::fmt().with_max_level(level).with_writer(std::io::stderr).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn run(command: Command) -> Result<(), String> {
    match command {
        Command::Serve { listen, accounts, agents } => serve(&listen, accounts, agents),
        Command::RunScenario { spec } => {
            let text = std::fs::read_to_string(&spec).map_err(|e| format!("{}: {e}", spec.display()))?;
            let spec = ScenarioSpec::from_json(&text).map_err(|e| e.to_string())?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            let outcome = rt.block_on(run_scenario(&spec, &spec.script)).map_err(|e| e.to_string())?;
            print!("{}", outcome.render_decisions());
            Ok(())
        }
        Command::Bench { method, n, url, csv } => {
            let report = bench::bench(method, n, &url).map_err(|e| e.to_string())?;
            println!("{report}");
            if let Some(path) = csv {
                let file = std::fs::File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                report.write_csv(std::io::BufWriter::new(file)).map_err(|e| e.to_string())?;
            }
            Ok(())
        }
        Command::Check { file } => {
            let program = server::load_program(&file).map_err(|e| e.to_string())?;
            for w in program.lint() {
                eprintln!("{}: {w}", file.display());
            }
            println!(
                "{}: ok ({} beliefs, {} rules, {} plans)",
                file.display(),
                program.initial_beliefs.len(),
                program.rules.len(),
                program.plans.len()
            );
            Ok(())
        }
    }
}

fn serve(listen: &str, accounts: Option<PathBuf>, agents: Option<PathBuf>) -> Result<(), String> {
    let accounts = match accounts {
        Some(path) => platform::load_accounts(&path).map_err(|e| format!("{}: {e}", path.display()))?,
        None => {
            tracing::warn!("no --accounts file given; every login will be refused");
            Vec::new()
        }
    };
    let runtime = Runtime::default();
    if let Some(dir) = agents {
        let programs = server::load_agent_dir(&dir).map_err(|e| e.to_string())?;
        server::install(&runtime, programs).map_err(|e| e.to_string())?;
    }
    tracing::info!("agents: {:?}", runtime.agent_names());
    let _driver = runtime.spawn_driver();
    let app = server::app(Platform::new(accounts, runtime));
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(listen).await.map_err(|e| format!("cannot listen on {listen}: {e}"))?;
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        server::serve(listener, app, shutdown).await.map_err(|e| e.to_string())
    })
}
