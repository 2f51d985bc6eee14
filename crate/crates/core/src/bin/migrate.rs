use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sqlmigrate::baseline::Converter;
use sqlmigrate::corpus::{run_eval, Corpus};
use sqlmigrate::engine::RuleLibrary;
use sqlmigrate::server::{serve, AppState};
use sqlmigrate::session::{
    run_migration, write_output, MigrationReport, SessionState, SessionStore,
};
use sqlmigrate::verify::{VerifyConfig, DEFAULT_SEED};
use sqlmigrate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "migrate",
    version,
    about = "Convert SQL scripts between dialects and learn fixes from examples"
)]
struct Cli {
    /// Where sessions are stored.
    #[arg(long, global = true, default_value = SessionStore::DEFAULT_DIR)]
    state_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert every .sql file under a directory. Exits 0 iff nothing is left unconverted.
    Run {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Rule library; a missing file means no learned rules.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Submit an expert target for a residual error and preview the learned rule.
    Teach {
        #[arg(long)]
        session: String,
        #[arg(long)]
        error: String,
        #[arg(long)]
        target: PathBuf,
        /// Residual segment the target fixes; defaults to the one closest to the target.
        #[arg(long)]
        segment: Option<String>,
        /// Accept the rule right away.
        #[arg(long)]
        accept: bool,
        /// Save the library here after accepting.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Rewrite converted files here after accepting.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn one rule per error class from a corpus and score it on held-out segments.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Serve the session API on localhost.
    Serve {
        #[arg(long)]
        session: Option<String>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: std::net::SocketAddr,
        /// Static files served under /ui.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
}

fn config(seed: u64) -> VerifyConfig {
    VerifyConfig {
        seed,
        ..VerifyConfig::default()
    }
}

fn load_library(rules: Option<&Path>) -> Result<RuleLibrary> {
    rules.map_or_else(|| Ok(RuleLibrary::new()), RuleLibrary::load_or_empty)
}

fn print_report(report: &MigrationReport) {
    println!(
        "segments {}: baseline {}, learned {}, failed {}",
        report.total_segments, report.baseline_converted, report.learned_converted, report.failed
    );
    for (code, n) in &report.residuals_by_code {
        println!("  {code} {n}");
    }
    for f in &report.io_failures {
        eprintln!("unreadable {}: {}", f.path, f.message);
    }
}

fn exit_for(state: &SessionState) -> ExitCode {
    if state.residual_count() == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let converter = Converter::default();
    let store = SessionStore::new(&cli.state_dir);
    match cli.command {
        Command::Run {
            input,
            out,
            rules,
            seed,
            report,
        } => {
            let state = run_migration(
                &converter,
                &input,
                load_library(rules.as_deref())?,
                config(seed),
            )?;
            write_output(&state, &out)?;
            let summary = MigrationReport::from_state(&state);
            if let Some(path) = report {
                std::fs::write(&path, summary.to_json()).map_err(|e| Error::io(&path, e))?;
            }
            store.save(&state)?;
            println!("session {}", state.session_id);
            print_report(&summary);
            Ok(exit_for(&state))
        }
        Command::Teach {
            session,
            error,
            target,
            segment,
            accept,
            rules,
            out,
        } => {
            let mut state = store.load(&session)?;
            let text = std::fs::read_to_string(&target).map_err(|e| Error::io(&target, e))?;
            let preview =
                state.submit_demonstration(&converter, &error, &text, segment.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&preview)?);
            if accept {
                state.accept_rule(&converter, &preview)?;
                if let Some(path) = rules {
                    state.library.save(&path)?;
                }
                if let Some(dir) = out {
                    write_output(&state, &dir)?;
                }
                print_report(&MigrationReport::from_state(&state));
            }
            store.save(&state)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { corpus, seed } => {
            let corpus = Corpus::load(&corpus)?;
            let result = run_eval(&corpus, &converter, config(seed));
            print!("{}", result.table());
            Ok(if result.regression_count == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Serve {
            session,
            input,
            rules,
            addr,
            ui,
        } => {
            let state = match (session, input) {
                (Some(id), _) => store.load(&id)?,
                (None, Some(dir)) => {
                    let state = run_migration(
                        &converter,
                        &dir,
                        load_library(rules.as_deref())?,
                        config(DEFAULT_SEED),
                    )?;
                    store.save(&state)?;
                    state
                }
                (None, None) => return Err(Error::Invalid("serve needs --session or --in".into())),
            };
            println!("session {} on http://{addr}", state.session_id);
            let app = AppState::new(converter, state, Some(store));
            let runtime =
                tokio::runtime::Runtime::new().map_err(|e| Error::io(Path::new("tokio"), e))?;
            runtime
                .block_on(serve(app, ui, addr))
                .map_err(|e| Error::io(Path::new(&addr.to_string()), e))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
