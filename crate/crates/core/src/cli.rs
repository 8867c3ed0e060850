//! The `ace` command line.
//!
//! Exit codes: 0 on success, 1 when a task (or any task of a suite) fails
//! or a replay diverges, 2 on usage or configuration errors. Diagnostics go
//! to standard error; traces and reports go to files under `--out` or to
//! standard output.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::action::parse;
use crate::bridge::{serve, RemoteEnv, ServeConfig, DEFAULT_PORT};
use crate::env::{Environment, LocalEnv};
use crate::eval::{
    render_table, replay, run_episode, run_suite, Ablation, BackendSource, EnvSource, EpisodeTrace, Fixture,
    MetricsReport, RunConfig, SuiteConfig, TaskPack,
};
use crate::llm::{HttpConfig, RuleSet};

/// The pack shipped with the crate.
pub const BUNDLED_PACK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/packs/bundled");

#[derive(Debug, Parser)]
#[command(name = "ace", version, about = "Run GUI automation agents against simulated desktops")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct PackArg {
    /// Task pack directory.
    #[arg(long, default_value = BUNDLED_PACK)]
    pub pack: PathBuf,
}

#[derive(Debug, Args)]
pub struct AgentArgs {
    /// scripted:golden, scripted:lesioned, scripted:<rules.json> or http.
    #[arg(long, default_value = "scripted:golden")]
    pub backend: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Drive a bridge server at this address instead of an in-process
    /// simulator.
    #[arg(long)]
    pub connect: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one task and write its trace.
    Run {
        #[arg(long)]
        task: String,
        #[command(flatten)]
        pack: PackArg,
        #[command(flatten)]
        agent: AgentArgs,
        #[arg(long, value_parser = parse_ablation)]
        ablate: Option<Ablation>,
        /// Directory for the trace; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every task of a pack: the full configuration plus one row per
    /// `--ablate`.
    Suite {
        #[command(flatten)]
        pack: PackArg,
        #[command(flatten)]
        agent: AgentArgs,
        #[arg(long, value_parser = parse_ablation)]
        ablate: Vec<Ablation>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Host a pack's environments over TCP.
    Serve {
        #[command(flatten)]
        pack: PackArg,
        #[arg(long, default_value_t = format!("127.0.0.1:{DEFAULT_PORT}"))]
        listen: String,
    },
    /// Re-execute a trace's actions and compare state hashes.
    Replay {
        trace: PathBuf,
        #[command(flatten)]
        pack: PackArg,
        #[arg(long)]
        connect: Option<String>,
    },
    /// Tabulate success rates from trace files or directories of them.
    Report {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Also write report.json and report.txt here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse an action script and print its canonical form.
    ParseActions {
        /// Script text; read from standard input when absent.
        text: Option<String>,
    },
    /// List the tasks in a pack.
    ListTasks {
        #[command(flatten)]
        pack: PackArg,
    },
}

fn parse_ablation(s: &str) -> Result<Ablation, String> {
    s.parse()
}

/// A failure that is the user's fault, reported with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn backend_source(spec: &str) -> Result<BackendSource> {
    match spec {
        "http" => Ok(BackendSource::Http(HttpConfig::from_env())),
        "scripted:golden" => Ok(BackendSource::Fixture(Fixture::Golden)),
        "scripted:lesioned" => Ok(BackendSource::Fixture(Fixture::Lesioned)),
        other => {
            let Some(path) = other.strip_prefix("scripted:") else {
                return Err(usage(format!("unknown backend `{other}`")));
            };
            let text =
                std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read rules file {path}: {e}")))?;
            let rules: RuleSet =
                serde_json::from_str(&text).map_err(|e| usage(format!("bad rules file {path}: {e}")))?;
            Ok(BackendSource::Rules(rules))
        }
    }
}

fn load_pack(arg: &PackArg) -> Result<TaskPack> {
    TaskPack::load(&arg.pack).map_err(|e| usage(e.to_string()))
}

fn trace_path(dir: &Path, task_id: &str) -> PathBuf {
    dir.join(format!("{task_id}.jsonl"))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn env_for(pack: &TaskPack, connect: &Option<String>) -> Result<Box<dyn Environment>> {
    Ok(match connect {
        Some(addr) => Box::new(RemoteEnv::connect(addr.as_str()).with_context(|| format!("connecting to {addr}"))?),
        None => Box::new(LocalEnv::new(Arc::new(pack.factory()))),
    })
}

fn collect_traces(paths: &[PathBuf], out: &mut Vec<PathBuf>) -> Result<()> {
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> =
                std::fs::read_dir(p)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
            entries.sort();
            let files: Vec<PathBuf> =
                entries.into_iter().filter(|e| e.is_dir() || e.extension().is_some_and(|x| x == "jsonl")).collect();
            collect_traces(&files, out)?;
        } else if p.exists() {
            out.push(p.clone());
        } else {
            return Err(usage(format!("no such file: {}", p.display())));
        }
    }
    Ok(())
}

fn read_trace(path: &Path) -> Result<EpisodeTrace> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    EpisodeTrace::from_jsonl(&text).with_context(|| format!("parsing {}", path.display()))
}

fn reports_from(traces: &[EpisodeTrace]) -> Vec<MetricsReport> {
    let mut names: Vec<&str> = Vec::new();
    for t in traces {
        if !names.contains(&t.header.configuration.as_str()) {
            names.push(&t.header.configuration);
        }
    }
    let rank = |n: &str| Ablation::ALL.iter().position(|a| a.name() == n).unwrap_or(usize::MAX);
    names.sort_by_key(|n| rank(n));
    names
        .into_iter()
        .map(|n| MetricsReport::from_traces(n, traces.iter().filter(|t| t.header.configuration == n)))
        .collect()
}

fn write_reports(dir: &Path, reports: &[MetricsReport]) -> Result<()> {
    write_file(&dir.join("report.json"), &(serde_json::to_string_pretty(reports)? + "\n"))?;
    write_file(&dir.join("report.txt"), &render_table(reports))
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Run { task, pack, agent, ablate, out: dir } => {
            let pack = load_pack(&pack)?;
            let spec = pack.task(&task).ok_or_else(|| usage(format!("no task `{task}` in {}", pack.root.display())))?;
            let backend = backend_source(&agent.backend)?.make(spec).map_err(|e| usage(e.to_string()))?;
            let mut env = env_for(&pack, &agent.connect)?;
            let config = RunConfig { ablation: ablate.unwrap_or_default(), seed: agent.seed, ..RunConfig::default() };
            let trace = run_episode(spec, backend.as_ref(), env.as_mut(), &config);
            match dir {
                Some(dir) => {
                    let path = trace_path(&dir, &spec.id);
                    write_file(&path, &trace.to_jsonl())?;
                    writeln!(err, "trace written to {}", path.display())?;
                }
                None => out.write_all(trace.to_jsonl().as_bytes())?,
            }
            let o = &trace.outcome;
            let verdict = if o.success { "success" } else { "failure" };
            writeln!(err, "{}: {verdict} ({}) after {} step(s): {}", spec.id, o.reason, o.steps, o.detail)?;
            Ok(if o.success { 0 } else { 1 })
        }
        Command::Suite { pack, agent, ablate, jobs, out: dir } => {
            let pack = load_pack(&pack)?;
            let backends = backend_source(&agent.backend)?;
            let env = agent.connect.map_or(EnvSource::Local, EnvSource::Remote);
            let mut configs = vec![Ablation::Full];
            configs.extend(ablate.into_iter().filter(|a| *a != Ablation::Full));
            configs.dedup();
            let mut reports = Vec::new();
            let mut failed = 0;
            for ablation in configs {
                let run = RunConfig { ablation, seed: agent.seed, ..RunConfig::default() };
                let result = run_suite(&pack, &backends, &SuiteConfig { run, env: env.clone(), jobs });
                for t in &result.traces {
                    if !t.outcome.success {
                        writeln!(
                            err,
                            "[{ablation}] {}: {} ({})",
                            t.header.task_id, t.outcome.reason, t.outcome.detail
                        )?;
                    }
                    if let Some(dir) = &dir {
                        write_file(&trace_path(&dir.join(ablation.name()), &t.header.task_id), &t.to_jsonl())?;
                    }
                }
                failed += result.report.failures();
                reports.push(result.report);
            }
            if let Some(dir) = &dir {
                write_reports(dir, &reports)?;
            }
            write!(out, "{}", render_table(&reports))?;
            Ok(if failed == 0 { 0 } else { 1 })
        }
        Command::Serve { pack, listen } => {
            let pack = load_pack(&pack)?;
            let handle = serve(Arc::new(pack.factory()), listen.as_str(), ServeConfig::default())
                .with_context(|| format!("listening on {listen}"))?;
            writeln!(err, "serving {} task(s) on {}", pack.tasks.len(), handle.addr())?;
            err.flush()?;
            handle.wait();
            Ok(0)
        }
        Command::Replay { trace, pack, connect } => {
            let trace = read_trace(&trace)?;
            let pack = load_pack(&pack)?;
            let mut env = env_for(&pack, &connect)?;
            let report = replay(&trace, env.as_mut())?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            Ok(if report.is_faithful() { 0 } else { 1 })
        }
        Command::Report { traces, out: dir } => {
            let mut files = Vec::new();
            collect_traces(&traces, &mut files)?;
            let traces = files.iter().map(|p| read_trace(p)).collect::<Result<Vec<_>>>()?;
            let reports = reports_from(&traces);
            if let Some(dir) = &dir {
                write_reports(dir, &reports)?;
            }
            write!(out, "{}", render_table(&reports))?;
            Ok(0)
        }
        Command::ParseActions { text } => {
            let text = match text {
                Some(t) => t,
                None => {
                    let mut buf = String::new();
                    std::io::stdin().read_to_string(&mut buf)?;
                    buf
                }
            };
            match parse(&text) {
                Ok(script) => {
                    writeln!(out, "{}", script.render())?;
                    Ok(0)
                }
                Err(e) => {
                    writeln!(err, "error: {e}")?;
                    Ok(1)
                }
            }
        }
        Command::ListTasks { pack } => {
            let pack = load_pack(&pack)?;
            for t in &pack.tasks {
                writeln!(out, "{}\t{}\t{}", t.id, t.category.label(), t.query)?;
            }
            Ok(0)
        }
    }
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
