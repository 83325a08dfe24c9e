//! `clinitime` command line.

use std::io::{IsTerminal, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use clinitime_core::domain::MeasureId;
use clinitime_core::{
    assemble_dashboard, DashboardOptions, DashboardScope, DashboardView, EntityBatch, Profession,
    TimeInstant, Viewport,
};

use crate::api;
use crate::config::Config;
use crate::store::Store;

#[derive(Debug, Parser)]
#[command(
    name = "clinitime",
    version,
    about = "Deadline-driven clinical timeline dashboards"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        /// Address to bind.
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[command(flatten)]
        common: Common,
    },
    /// Ingest a batch file into a running server or directly into a data directory.
    Load {
        batch_file: PathBuf,
        /// Base URL of a running server, e.g. http://127.0.0.1:8080.
        #[arg(long, conflicts_with = "data_dir")]
        server: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Write a dashboard document to standard output.
    ExportDashboard {
        #[command(flatten)]
        scope: ScopeArgs,
        #[arg(long, default_value = "isopsy", value_parser = api::parse_view)]
        view: DashboardView,
        #[arg(long, value_parser = parse_instant)]
        as_of: TimeInstant,
        /// Place anticipated tasks at their anticipated instant.
        #[arg(long)]
        anticipate: bool,
        #[arg(long)]
        profession: Option<String>,
        /// Viewport start; requires --end.
        #[arg(long, value_parser = parse_instant, requires = "end")]
        start: Option<TimeInstant>,
        #[arg(long, value_parser = parse_instant, requires = "start")]
        end: Option<TimeInstant>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the tasks generated for one stored measure.
    ComputeDeadlines {
        #[arg(long)]
        measure: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory holding the store snapshot.
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ScopeArgs {
    #[arg(long)]
    patient: Option<String>,
    #[arg(long)]
    unit: Option<String>,
    #[arg(long)]
    establishment: bool,
}

impl ScopeArgs {
    fn scope(&self) -> DashboardScope {
        match (&self.patient, &self.unit) {
            (Some(p), _) => DashboardScope::Patient(p.as_str().into()),
            (_, Some(u)) => DashboardScope::Unit(u.as_str().into()),
            _ => DashboardScope::Establishment,
        }
    }
}

fn parse_instant(s: &str) -> Result<TimeInstant, String> {
    TimeInstant::parse_iso(s).map_err(|e| e.to_string())
}

impl Common {
    fn load(&self) -> anyhow::Result<(Config, PathBuf)> {
        let config = Config::load_or_default(self.config.as_deref())?;
        let dir = self
            .data_dir
            .clone()
            .unwrap_or_else(|| config.data_dir.clone());
        Ok((config, dir))
    }

    fn open_store(&self) -> anyhow::Result<Store> {
        let (config, dir) = self.load()?;
        Store::open(config.settings, &dir)
            .with_context(|| format!("opening data directory {}", dir.display()))
    }
}

/// Parses the process arguments and runs; returns the exit status.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    init_tracing();
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn init_tracing() {
    let _ = tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .with_max_level(tracing::Level::INFO)
        .try_init();
}

pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Serve { port, host, common } => {
            let (config, dir) = common.load()?;
            let port = port.unwrap_or(config.port);
            let store = Store::open(config.settings, &dir)?;
            serve(Arc::new(store), SocketAddr::new(host, port))
        }
        Command::Load {
            batch_file,
            server,
            common,
        } => {
            let text = std::fs::read_to_string(&batch_file)
                .with_context(|| format!("reading {}", batch_file.display()))?;
            let receipt = match server {
                Some(url) => serde_json::to_string_pretty(&post_batch(&url, text)?)?,
                None => {
                    let batch: EntityBatch = serde_json::from_str(&text)
                        .with_context(|| format!("parsing {}", batch_file.display()))?;
                    let store = common.open_store()?;
                    let receipt = store.ingest(batch).map_err(|e| rejection(&e))?;
                    serde_json::to_string_pretty(&receipt)?
                }
            };
            writeln!(out, "{receipt}")?;
            Ok(())
        }
        Command::ExportDashboard {
            scope,
            view,
            as_of,
            anticipate,
            profession,
            start,
            end,
            common,
        } => {
            let store = common.open_store()?;
            let viewport = match (start, end) {
                (Some(s), Some(e)) => Some(Viewport::new(s, e)?),
                _ => None,
            };
            let options = DashboardOptions {
                use_anticipated: anticipate,
                profession_filter: profession.map(Profession::from),
                viewport,
            };
            let snap = store.snapshot();
            let doc = assemble_dashboard(
                &snap.state,
                store.settings(),
                &scope.scope(),
                view,
                as_of,
                &options,
            )?;
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
            Ok(())
        }
        Command::ComputeDeadlines { measure, common } => {
            let store = common.open_store()?;
            let snap = store.snapshot();
            let id = MeasureId::from(measure);
            if snap.state.measure(&id).is_none() {
                bail!("measure {id} not found");
            }
            let mut tasks: Vec<_> = snap
                .state
                .tasks()
                .iter()
                .filter(|t| t.measure_id == id)
                .collect();
            tasks.sort_by(|a, b| {
                (a.due_at, &a.rule_id, a.sequence).cmp(&(b.due_at, &b.rule_id, b.sequence))
            });
            print_table(out, &tasks)
        }
    }
}

fn rejection(e: &crate::store::StoreError) -> anyhow::Error {
    match e {
        crate::store::StoreError::Ingest(clinitime_core::IngestError::Rejected(report)) => anyhow!(
            "{e}\n{}",
            serde_json::to_string_pretty(report).unwrap_or_default()
        ),
        other => anyhow!("{other}"),
    }
}

fn print_table(out: &mut dyn Write, tasks: &[&clinitime_core::TaskInstance]) -> anyhow::Result<()> {
    let rows: Vec<[String; 7]> = tasks
        .iter()
        .map(|t| {
            [
                t.id.to_string(),
                t.rule_id.to_string(),
                t.sequence.to_string(),
                t.profession.to_string(),
                t.due_at.to_iso(),
                t.anticipated_due_at.to_iso(),
                t.status().as_str().to_owned(),
            ]
        })
        .collect();
    let header = [
        "TASK",
        "RULE",
        "SEQ",
        "PROFESSION",
        "DUE",
        "ANTICIPATED",
        "STATUS",
    ];
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[&str]| {
        cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_owned()
    };
    writeln!(out, "{}", line(&header))?;
    for row in &rows {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        writeln!(out, "{}", line(&cells))?;
    }
    Ok(())
}

fn post_batch(base: &str, body: String) -> anyhow::Result<serde_json::Value> {
    let url = format!("{}/api/ingest", base.trim_end_matches('/'));
    let resp = reqwest::blocking::Client::new()
        .post(&url)
        .header(reqwest::header::CONTENT_TYPE, "application/json")
        .body(body)
        .send()
        .with_context(|| format!("posting to {url}"))?;
    let status = resp.status();
    let text = resp.text()?;
    let value: serde_json::Value =
        serde_json::from_str(&text).unwrap_or_else(|_| serde_json::Value::String(text.clone()));
    if !status.is_success() {
        bail!(
            "server answered {status}: {}",
            serde_json::to_string_pretty(&value)?
        );
    }
    Ok(value)
}

fn serve(store: Arc<Store>, addr: SocketAddr) -> anyhow::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        tracing::info!(addr = %listener.local_addr()?, revision = store.revision(), "listening");
        axum::serve(listener, api::router(store))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
