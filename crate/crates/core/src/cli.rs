//! Command-line front end: batch analysis, replay, export, serving and
//! lexicon validation.

use std::collections::BTreeMap;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use crate::canonical;
use crate::error::{Error, Result};
use crate::ingest::{read_transcript, Lexicon};
use crate::service::{serve, AppState};
use crate::session::{open_session, read_log, replay_session, write_log, Session, SessionConfig, Snapshot};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "icn", version, about = "Idea cluster analysis of problem-solving discussions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a transcript through a fresh session and write its outputs
    Analyze {
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, env = "ICN_CONFIG")]
        config: Option<PathBuf>,
        /// file holding the problem statement
        #[arg(long)]
        problem_file: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Rebuild a session from its event log and verify it regenerates the log
    Replay {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, env = "ICN_CONFIG")]
        config: Option<PathBuf>,
        /// also print the log from this sequence number on
        #[arg(long)]
        from_seq: Option<u64>,
        /// write the rebuilt snapshot here instead of standard output
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Render a snapshot file as DOT or canonical JSON
    Export {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
    },
    /// Serve the HTTP API
    Serve {
        /// lexicon files; each is addressed by its file stem
        #[arg(long, required = true)]
        lexicon: Vec<PathBuf>,
        #[arg(long, env = "ICN_CONFIG")]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Parse and validate a lexicon file
    ValidateLexicon {
        #[arg(long)]
        lexicon: PathBuf,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invariant(_) | Error::DetailingCycle { .. } | Error::ReplayDivergence { .. } => EXIT_INVARIANT,
        _ => EXIT_INPUT,
    }
}

fn load_config(path: Option<&Path>) -> Result<SessionConfig> {
    path.map(SessionConfig::load).unwrap_or_else(|| Ok(SessionConfig::default()))
}

fn summary(session: &Session) -> String {
    let snap = session.snapshot();
    let m = &snap.metrics;
    let mut out = String::new();
    out.push_str(&format!("utterances: {}\nideas: {}\nclusters: {}\nedges: {}\n", snap.utterance_count, snap.history.len(), snap.graph.icns.len(), snap.graph.edges.len()));
    for icn in snap.graph.icns.values() {
        let ideas: Vec<String> = icn.members.iter().map(|m| format!("{}.{}", m.utterance, m.ordinal)).collect();
        out.push_str(&format!("  {} [{}] ideas {}\n", icn.id, icn.image, ideas.join(" ")));
    }
    out.push_str(&format!(
        "fulfilled requirements: {} ({:.2})\nalternatives: {}, switches: {}\nsubstantiated: {:.2}, orphans: {}\n\
         backtracking: {} ({} resolved)\ncontradictions: {}\nrepetitions: {} ({} productive)\n\
         unconsidered needs: {}\nunexplored items: {}\nconverged: {}\n",
        m.fulfilled_requirements.count,
        m.fulfilled_requirements.ratio,
        m.exploration.alternative_count,
        m.exploration.switch_count,
        m.substantiated_decisions.ratio,
        m.substantiated_decisions.orphan_count,
        m.backtracking.count,
        m.backtracking.resolved_count,
        m.contradictions.count,
        m.repetitions.count,
        m.repetitions.productive_count,
        m.unconsidered_needs.count,
        m.unexplored_items.count,
        snap.converged,
    ));
    out
}

/// Run a transcript through a new session.
pub fn analyze(transcript: &Path, lexicon: Arc<Lexicon>, config: SessionConfig, problem: &str) -> Result<Session> {
    let mut session = open_session(config, lexicon, problem)?;
    for u in read_transcript(transcript)? {
        session.process_utterance(&u)?;
    }
    Ok(session)
}

/// Write `snapshot.json`, `metrics.json`, `events.jsonl` and `summary.txt`.
pub fn write_outputs(session: &Session, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let snap = session.snapshot();
    std::fs::write(out_dir.join("snapshot.json"), snap.to_json() + "\n")?;
    std::fs::write(out_dir.join("metrics.json"), canonical::to_string_pretty(&snap.metrics)? + "\n")?;
    let mut log = std::fs::File::create(out_dir.join("events.jsonl"))?;
    write_log(&mut log, session.events())?;
    std::fs::write(out_dir.join("summary.txt"), summary(session))?;
    Ok(())
}

pub fn export(snapshot: &Path, format: Format) -> Result<String> {
    let snap = Snapshot::from_json(&std::fs::read_to_string(snapshot)?)?;
    Ok(match format {
        Format::Json => snap.to_json() + "\n",
        Format::Dot => snap.to_dot(),
    })
}

fn run_command(cmd: Command) -> Result<()> {
    match cmd {
        Command::Analyze { transcript, lexicon, config, problem_file, out_dir } => {
            let lex = Arc::new(Lexicon::load(&lexicon)?);
            let config = load_config(config.as_deref())?;
            let problem = match problem_file {
                Some(p) => std::fs::read_to_string(p)?.trim().to_string(),
                None => String::new(),
            };
            let session = analyze(&transcript, lex, config, &problem)?;
            write_outputs(&session, &out_dir)?;
            print!("{}", summary(&session));
        }
        Command::Replay { events, lexicon, config, from_seq, out_dir } => {
            let lex = Arc::new(Lexicon::load(&lexicon)?);
            let config = load_config(config.as_deref())?;
            let log = read_log(&events)?;
            let session = replay_session(&log, config, lex)?;
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            if let Some(from) = from_seq {
                write_log(&mut out, session.events_from(from))?;
            }
            match out_dir {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    std::fs::write(dir.join("snapshot.json"), session.snapshot().to_json() + "\n")?;
                }
                None if from_seq.is_none() => writeln!(out, "{}", session.snapshot().to_json())?,
                None => {}
            }
        }
        Command::Export { snapshot, format } => print!("{}", export(&snapshot, format)?),
        Command::Serve { lexicon, config, port, host } => {
            let config = load_config(config.as_deref())?;
            let mut lexicons = BTreeMap::new();
            for path in &lexicon {
                let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("default").to_string();
                lexicons.insert(name, Arc::new(Lexicon::load(path)?));
            }
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .map_err(|e| Error::Config(format!("bad listen address: {e}")))?;
            let app = Arc::new(AppState::new(lexicons, config));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(addr, app))?;
        }
        Command::ValidateLexicon { lexicon } => {
            let lex = Lexicon::load(&lexicon)?;
            println!(
                "ok: {} surface forms, {} synonym sets, {} antonym pairs, {} verbs, {} image cues",
                lex.lemmas.len(),
                lex.synonym_sets.len(),
                lex.antonym_pairs.len(),
                lex.verb_relations.len(),
                lex.image_cues.len()
            );
        }
    }
    Ok(())
}

/// Parse arguments, run, and map the outcome to an exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_command(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
