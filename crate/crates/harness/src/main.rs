use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use flock_core::verify::{report_json, verify_all, VerifyOptions};
use flock_core::Trace;
use flock_harness::acceptance;
use flock_harness::batch::run_batch;
use flock_harness::plot::render_svg;
use flock_harness::{run_scenario, Scenario};

#[derive(Parser)]
#[command(name = "flock", about = "Run, batch and verify flocking simulations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        verdicts: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Run every scenario in a directory.
    Batch {
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Directory for the traces.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify a recorded trace against the scenario that produced it.
    Check {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Run acceptance criteria (all of them when none is given).
    Accept { criteria: Vec<u32> },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<bool> {
    match Cli::parse().cmd {
        Cmd::Run {
            scenario,
            trace,
            verdicts,
            plot,
            metrics,
        } => {
            let loaded = Scenario::load(&scenario)?;
            let out = run_scenario(&loaded)?;
            if let Some(p) = trace {
                std::fs::write(&p, out.trace.to_jsonl()).with_context(|| format!("writing {}", p.display()))?;
            }
            if let Some(p) = verdicts {
                std::fs::write(&p, serde_json::to_string_pretty(&report_json(&out.verdicts))?)?;
            }
            if let Some(p) = plot {
                std::fs::write(&p, render_svg(&out.trace, &loaded.params))?;
            }
            if let Some(p) = metrics {
                std::fs::write(&p, serde_json::to_string_pretty(&out.metrics)?)?;
            }
            for v in &out.verdicts {
                println!("{:<26} {} margin {:.3e}", v.check, if v.pass { "pass" } else { "FAIL" }, v.margin);
            }
            let m = &out.metrics;
            println!(
                "events {} rounds {} reformations {} max_far {} flocking {}",
                m.events, m.rounds, m.reformations, m.max_far, m.reached_flocking
            );
            for w in &m.warnings {
                eprintln!("warning: {w}");
            }
            Ok(out.all_pass() && m.reached_flocking)
        }
        Cmd::Batch { scenarios, jobs, out } => {
            let rows = run_batch(&scenarios, jobs, out.as_deref())?;
            for r in &rows {
                let detail = match (&r.error, r.failed_checks.is_empty()) {
                    (Some(e), _) => e.clone(),
                    (None, false) => r.failed_checks.join(","),
                    (None, true) => String::new(),
                };
                println!("{:<32} {} {detail}", r.scenario, if r.pass { "pass" } else { "FAIL" });
            }
            if let Some(o) = out {
                std::fs::write(o.join("summary.json"), serde_json::to_string_pretty(&rows)?)?;
            }
            Ok(rows.iter().all(|r| r.pass))
        }
        Cmd::Check { trace, scenario } => {
            let loaded = Scenario::load(&scenario)?;
            let file = std::fs::File::open(&trace).with_context(|| format!("opening {}", trace.display()))?;
            let t = Trace::read_jsonl(std::io::BufReader::new(file))?;
            let verdicts = verify_all(&t, &loaded.params, VerifyOptions::default())?;
            println!("{}", serde_json::to_string_pretty(&report_json(&verdicts))?);
            Ok(verdicts.iter().all(|v| v.pass))
        }
        Cmd::Accept { criteria } => {
            let list = if criteria.is_empty() { (1..=9).collect() } else { criteria };
            let mut ok = true;
            for c in list {
                let r = acceptance::run_criterion(c).with_context(|| format!("criterion {c}"))?;
                println!("{r}");
                ok &= r.pass;
            }
            Ok(ok)
        }
    }
}
