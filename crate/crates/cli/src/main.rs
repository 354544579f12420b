use std::io::{self, BufReader};
use std::net::SocketAddr;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use axum::extract::State;
use axum::http::header;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::Router;
use clap::{Parser, Subcommand};
use plaidy::check::{check, CheckError};
use plaidy::protocol::{rule_table, Server};
use plaidy::session::Session;
use tower_http::services::ServeDir;

#[derive(Parser)]
#[command(name = "plaidy", version, about = "Proof assistant for differential dynamic logic")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay a proof script against every goal of a specification.
    Check {
        spec: String,
        #[arg(long)]
        script: String,
    },
    /// Prove a goal interactively.
    Repl {
        spec: String,
        /// Goal name; the first goal by default.
        #[arg(long)]
        goal: Option<String>,
    },
    /// Serve the JSON session protocol on POST /api.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory of static files for the browser front end.
        #[arg(long)]
        assets: Option<String>,
    },
    /// Check the kernel against the executable semantics on random instances.
    Oracle {
        #[arg(long, default_value_t = 100)]
        fuzz: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run_check(spec: &str, script: &str) -> anyhow::Result<ExitCode> {
    let spec_src = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    let script_src = std::fs::read_to_string(script).with_context(|| format!("reading {script}"))?;
    match check(spec, &spec_src, script, &script_src) {
        Ok(report) => {
            print!("{}", report.render());
            Ok(ExitCode::from(if report.all_closed() { 0 } else { 1 }))
        }
        Err(e @ (CheckError::Spec { .. } | CheckError::Script { .. })) => {
            eprintln!("{e}");
            Ok(ExitCode::from(2))
        }
    }
}

fn run_repl(spec: &str, goal: Option<&str>) -> anyhow::Result<ExitCode> {
    let src = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    let session = match Session::open(&src, goal) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{spec}: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    plaidy::repl::repl(session, BufReader::new(io::stdin()), &mut io::stdout())?;
    Ok(ExitCode::SUCCESS)
}

async fn api(State(server): State<Arc<Server>>, body: String) -> impl IntoResponse {
    let response = tokio::task::spawn_blocking(move || server.handle(&body))
        .await
        .unwrap_or_else(|_| r#"{"error":{"code":"internal","message":"handler failed"}}"#.to_string());
    ([(header::CONTENT_TYPE, "application/json")], response)
}

async fn rules() -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], rule_table().to_string())
}

fn run_serve(port: u16, assets: Option<String>) -> anyhow::Result<ExitCode> {
    let server = Arc::new(Server::new());
    let mut app = Router::new().route("/api", post(api)).route("/rules", get(rules)).with_state(server);
    if let Some(dir) = assets {
        anyhow::ensure!(std::path::Path::new(&dir).is_dir(), "assets directory {dir} does not exist");
        app = app.fallback_service(ServeDir::new(dir));
    }
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let addr = SocketAddr::from(([127, 0, 0, 1], port));
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        eprintln!("listening on http://{addr}");
        axum::serve(listener, app).await?;
        anyhow::Ok(())
    })?;
    Ok(ExitCode::SUCCESS)
}

fn run_oracle(fuzz: usize, seed: u64) -> anyhow::Result<ExitCode> {
    let star = plaidy::oracle::star_budget().map_err(anyhow::Error::msg)?;
    let report = plaidy::oracle::run(fuzz, seed, star);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::from(if report.ok { 0 } else { 1 }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Check { spec, script } => run_check(&spec, &script),
        Cmd::Repl { spec, goal } => run_repl(&spec, goal.as_deref()),
        Cmd::Serve { port, assets } => run_serve(port, assets),
        Cmd::Oracle { fuzz, seed } => run_oracle(fuzz, seed),
    };
    result.unwrap_or_else(|e| {
        eprintln!("internal error: {e:#}");
        ExitCode::from(3)
    })
}
