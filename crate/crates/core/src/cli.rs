//! Command-line front end: `simulate`, `ablate`, `sweep`, `report` and
//! `gen-tasks`.
//!
//! Exit codes: 0 on success, 1 for invalid configuration or I/O failures,
//! 2 for usage errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{OutputFormat, RunConfig};
use crate::sim::output::{attribution_csv, json_document, read_records_jsonl, records_jsonl, summary_csv, sweep_csv};
use crate::sim::{ablation_suite, run_variant, sensitivity_sweep, summarize, SweepFamily, SweepGrids, SystemVariant, Workload};
use crate::task::{sample_tasks, write_task_set};

#[derive(Debug, Parser)]
#[command(name = "trispirit", version, about = "Seeded evaluation harness for the three-layer runtime")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one system variant and summarise it.
    Simulate(Common),
    /// Run every variant on a shared workload and attribute the savings.
    Ablate(Common),
    /// Sweep routing thresholds for the main configuration.
    Sweep(Common),
    /// Re-summarise records written by `simulate`.
    Report {
        /// Records file (`records.jsonl`) produced by `simulate`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Write the sampled task set as text.
    GenTasks(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bootstrap_seed: Option<u64>,
    /// Number of tasks.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    tau_r: Option<f64>,
    #[arg(long)]
    gamma_r: Option<f64>,
    #[arg(long)]
    tau_a: Option<f64>,
    #[arg(long)]
    gamma_a: Option<f64>,
    #[arg(long, value_parser = parse_variant)]
    variant: Option<SystemVariant>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn parse_variant(s: &str) -> Result<SystemVariant, String> {
    s.parse().map_err(|e: crate::config::ConfigError| e.to_string())
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                RunConfig::from_toml(&text).map_err(|e| e.to_string())?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seeds.primary_seed = v;
        }
        if let Some(v) = self.bootstrap_seed {
            cfg.seeds.bootstrap_seed = v;
        }
        if let Some(v) = self.n {
            cfg.n_tasks = v;
        }
        if let Some(v) = self.tau_r {
            cfg.thresholds.reflex_urgency = v;
        }
        if let Some(v) = self.gamma_r {
            cfg.thresholds.reflex_complexity = v;
        }
        if let Some(v) = self.tau_a {
            cfg.thresholds.agent_urgency = v;
        }
        if let Some(v) = self.gamma_a {
            cfg.thresholds.agent_complexity = v;
        }
        if let Some(v) = self.variant {
            cfg.variant = v;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn out_dir(cfg: &RunConfig, sub: &str) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from(format!("./out/{sub}-{}", cfg.seeds.primary_seed)))
}

fn write_files(dir: &FsPath, files: &[(&str, String)]) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    for (name, content) in files {
        let path = dir.join(name);
        fs::write(&path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn echo_config(cfg: &RunConfig) {
    println!("# resolved config");
    print!("{}", cfg.to_toml());
}

fn run(command: Command) -> Result<(), String> {
    match command {
        Command::Simulate(common) => {
            let cfg = common.resolve()?;
            echo_config(&cfg);
            let workload = Workload::generate(cfg.n_tasks, &cfg.mixture, cfg.seeds).map_err(|e| e.to_string())?;
            let records = run_variant(&workload, cfg.variant, &cfg.thresholds, &cfg.cost).map_err(|e| e.to_string())?;
            let summary = summarize(&records, cfg.bootstrap_resamples, cfg.seeds.bootstrap_seed).map_err(|e| e.to_string())?;
            let mut files = vec![("records.jsonl", records_jsonl(&records, &cfg))];
            if cfg.format.csv() {
                files.push(("summary.csv", summary_csv(&[(cfg.variant, &summary)], &cfg)));
            }
            if cfg.format.json() {
                files.push(("summary.json", json_document("summary", &cfg, &summary)));
            }
            let dir = out_dir(&cfg, "simulate");
            write_files(&dir, &files)?;
            println!(
                "summary: variant={} n={} mean_latency_ms={:.1} [{:.1}, {:.1}] mean_energy_mj={:.2} mean_calls={:.3} offline_pct={:.1} -> {}",
                cfg.variant,
                summary.n,
                summary.latency_ms.mean,
                summary.latency_ms.lo,
                summary.latency_ms.hi,
                summary.energy_mj.mean,
                summary.calls.mean,
                summary.offline_pct,
                dir.display()
            );
            Ok(())
        }
        Command::Ablate(common) => {
            let cfg = common.resolve()?;
            echo_config(&cfg);
            let workload = Workload::generate(cfg.n_tasks, &cfg.mixture, cfg.seeds).map_err(|e| e.to_string())?;
            let report = ablation_suite(&workload, &cfg.thresholds, &cfg.cost, cfg.bootstrap_resamples).map_err(|e| e.to_string())?;
            let rows: Vec<_> = report.rows.iter().map(|r| (r.variant, &r.summary)).collect();
            let mut files = Vec::new();
            if cfg.format.csv() {
                files.push(("ablation.csv", summary_csv(&rows, &cfg)));
                files.push(("attribution.csv", attribution_csv(&report, &cfg)));
            }
            if cfg.format.json() {
                files.push(("ablation.json", json_document("ablation", &cfg, &report)));
            }
            let dir = out_dir(&cfg, "ablate");
            write_files(&dir, &files)?;
            println!("ablation: {} variants on {} tasks -> {}", report.rows.len(), cfg.n_tasks, dir.display());
            let total = report.attribution.rows.iter().find(|r| r.component == "total").expect("total row");
            println!(
                "attribution: {} components, total saving {:.1} ms ({:.1}% of cloud)",
                report.attribution.rows.len(),
                total.delta_latency_ms,
                total.pct_of_cloud
            );
            Ok(())
        }
        Command::Sweep(common) => {
            let cfg = common.resolve()?;
            echo_config(&cfg);
            let workload = Workload::generate(cfg.n_tasks, &cfg.mixture, cfg.seeds).map_err(|e| e.to_string())?;
            let table = sensitivity_sweep(&workload, &SweepGrids::default(), &cfg.thresholds, &cfg.cost).map_err(|e| e.to_string())?;
            let mut files = Vec::new();
            if cfg.format.csv() {
                files.push(("sweep.csv", sweep_csv(&table, &cfg)));
            }
            if cfg.format.json() {
                files.push(("sweep.json", json_document("sweep", &cfg, &table)));
            }
            let dir = out_dir(&cfg, "sweep");
            write_files(&dir, &files)?;
            for family in [SweepFamily::Reflex, SweepFamily::Agent, SweepFamily::Heatmap] {
                let worst = table.worst_latency(Some(family)).expect("grids are non-empty");
                println!(
                    "sweep {:?}: {} cells, worst mean latency {:.1} ms at tau_r={} gamma_r={} tau_a={} gamma_a={}",
                    family,
                    table.family(family).count(),
                    worst.mean_latency_ms,
                    worst.thresholds.reflex_urgency,
                    worst.thresholds.reflex_complexity,
                    worst.thresholds.agent_urgency,
                    worst.thresholds.agent_complexity
                );
            }
            println!("sweep written to {}", dir.display());
            Ok(())
        }
        Command::Report { input, out, format } => {
            let text = fs::read_to_string(&input).map_err(|e| format!("cannot read {}: {e}", input.display()))?;
            let stored = read_records_jsonl(&text).map_err(|e| e.to_string())?;
            let mut cfg = stored.config.unwrap_or_default();
            cfg.out = out;
            if let Some(f) = format {
                cfg.format = f;
            }
            cfg.validate().map_err(|e| e.to_string())?;
            echo_config(&cfg);
            let summary = summarize(&stored.records, cfg.bootstrap_resamples, cfg.seeds.bootstrap_seed).map_err(|e| e.to_string())?;
            let mut files = Vec::new();
            if cfg.format.csv() {
                files.push(("summary.csv", summary_csv(&[(cfg.variant, &summary)], &cfg)));
            }
            if cfg.format.json() {
                files.push(("summary.json", json_document("summary", &cfg, &summary)));
            }
            let dir = out_dir(&cfg, "report");
            write_files(&dir, &files)?;
            println!(
                "report: {} records, mean_latency_ms={:.1} offline_pct={:.1} -> {}",
                summary.n,
                summary.latency_ms.mean,
                summary.offline_pct,
                dir.display()
            );
            Ok(())
        }
        Command::GenTasks(common) => {
            let cfg = common.resolve()?;
            echo_config(&cfg);
            let tasks = sample_tasks(cfg.n_tasks, &cfg.mixture, &cfg.seeds).map_err(|e| e.to_string())?;
            let dir = out_dir(&cfg, "gen-tasks");
            write_files(&dir, &[("tasks.tsv", write_task_set(&tasks))])?;
            println!("tasks: {} written to {}", tasks.len(), dir.join("tasks.tsv").display());
            Ok(())
        }
    }
}
