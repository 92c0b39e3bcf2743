use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;
use flock_harness::Scenario;
use flock_steerd::server::{router, spawn_simulation, AppState};
use flock_steerd::session::{Session, MAX_EPS};
use serde_json::json;

#[derive(Parser)]
#[command(name = "steerd", about = "Serve one live flocking simulation over a WebSocket")]
struct Cli {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Simulation events per second.
    #[arg(long, default_value_t = 200.0)]
    eps: f64,
    /// Start paused.
    #[arg(long)]
    paused: bool,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt().with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into())).init();
    let cli = Cli::parse();
    anyhow::ensure!(cli.eps > 0.0 && cli.eps <= MAX_EPS, "--eps must be in (0, {MAX_EPS}]");
    let loaded = Scenario::load(&cli.scenario)?;
    if loaded.scenario.steering.is_some() || !loaded.scenario.faults.is_empty() {
        tracing::warn!("scripted steering and faults are ignored; the operator drives this session");
    }
    let mut session = Session::new(&loaded, cli.eps)?;
    session.set_paused(cli.paused);
    let meta = json!({
        "scenario": cli.scenario.display().to_string(),
        "seed": loaded.scenario.seed,
        "robots": session.world().robots().len(),
        "scheduler": session.world().config(),
        "params": session.params(),
    });
    let (commands, states, _sim) = spawn_simulation(session);
    let app = router(AppState { commands, states, meta });
    let listener = tokio::net::TcpListener::bind(cli.addr).await.with_context(|| format!("binding {}", cli.addr))?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app).await?;
    Ok(())
}
