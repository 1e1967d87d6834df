//! Deterministic text renderings of simulation results.
//!
//! Every document starts with a format line and the resolved configuration,
//! so any output can be regenerated from its own header. Floats use Rust's
//! shortest round-trip formatting, so identical inputs give identical bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ablation::AblationReport;
use super::cost::Path;
use super::stats::Summary;
use super::sweep::SweepTable;
use super::variant::{SimRecord, SystemVariant};
use crate::config::RunConfig;
use crate::task::TaskType;

fn header(kind: &str, cfg: &RunConfig) -> String {
    format!("# trispirit {kind} v1\n# config={}\n", cfg.provenance_json())
}

/// One CSV row per variant: means with CI bounds, P95, offline share, path
/// shares and per-type mean latency.
pub fn summary_csv(rows: &[(SystemVariant, &Summary)], cfg: &RunConfig) -> String {
    let mut out = header("summary", cfg);
    out.push_str("variant,n,mean_latency_ms,latency_lo,latency_hi,p95_latency_ms,mean_energy_mj,energy_lo,energy_hi,mean_calls,calls_lo,calls_hi,offline_pct,quality_penalty_rate");
    for p in Path::ALL {
        write!(out, ",pct_{}", p.as_str().replace('-', "_")).unwrap();
    }
    for t in TaskType::ALL {
        write!(out, ",type_{}_latency_ms", t.class_key().to_lowercase()).unwrap();
    }
    out.push('\n');
    for (variant, s) in rows {
        write!(
            out,
            "{variant},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.n,
            s.latency_ms.mean,
            s.latency_ms.lo,
            s.latency_ms.hi,
            s.p95_latency_ms,
            s.energy_mj.mean,
            s.energy_mj.lo,
            s.energy_mj.hi,
            s.calls.mean,
            s.calls.lo,
            s.calls.hi,
            s.offline_pct,
            s.quality_penalty_rate
        )
        .unwrap();
        for p in Path::ALL {
            write!(out, ",{}", s.path_pct.get(&p).copied().unwrap_or(0.0)).unwrap();
        }
        for t in TaskType::ALL {
            match s.per_type.get(&t) {
                Some(b) => write!(out, ",{}", b.mean_latency_ms).unwrap(),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

pub fn attribution_csv(report: &AblationReport, cfg: &RunConfig) -> String {
    let mut out = header("attribution", cfg);
    out.push_str("component,without,with,delta_latency_ms,pct_of_cloud,delta_energy_mj,delta_calls\n");
    for r in &report.attribution.rows {
        writeln!(out, "{},{},{},{},{},{},{}", r.component, r.without, r.with, r.delta_latency_ms, r.pct_of_cloud, r.delta_energy_mj, r.delta_calls)
            .unwrap();
    }
    out
}

/// One row per grid cell; columns are the four thresholds plus the metrics,
/// ready for line plots (per family) or a heatmap (`heatmap` rows).
pub fn sweep_csv(table: &SweepTable, cfg: &RunConfig) -> String {
    let mut out = header("sweep", cfg);
    out.push_str("family,tau_r,gamma_r,tau_a,gamma_a,mean_latency_ms,mean_energy_mj,mean_calls,offline_pct\n");
    for c in &table.cells {
        let th = &c.thresholds;
        let family = serde_json::to_value(c.family).unwrap();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            family.as_str().unwrap(),
            th.reflex_urgency,
            th.reflex_complexity,
            th.agent_urgency,
            th.agent_complexity,
            c.mean_latency_ms,
            c.mean_energy_mj,
            c.mean_calls,
            c.offline_pct
        )
        .unwrap();
    }
    out
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    format: String,
    config: &'a RunConfig,
    result: &'a T,
}

/// Pretty JSON document wrapping `result` with its format tag and config.
pub fn json_document<T: Serialize>(kind: &str, cfg: &RunConfig, result: &T) -> String {
    let mut c = cfg.clone();
    c.out = None;
    let doc = Document { format: format!("trispirit {kind} v1"), config: &c, result };
    let mut s = serde_json::to_string_pretty(&doc).expect("results are always representable as JSON");
    s.push('\n');
    s
}

/// Raw records, one JSON object per line, after the provenance header.
pub fn records_jsonl(records: &[SimRecord], cfg: &RunConfig) -> String {
    let mut out = header("records", cfg);
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records are always representable as JSON"));
        out.push('\n');
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum RecordsParseError {
    #[error("missing `# trispirit records v1` header")]
    MissingHeader,
    #[error("bad embedded config: {0}")]
    Config(String),
    #[error("record line {line}: {reason}")]
    Record { line: usize, reason: String },
}

/// Stored records plus the configuration they were produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRecords {
    pub config: Option<RunConfig>,
    pub records: Vec<SimRecord>,
}

pub fn read_records_jsonl(text: &str) -> Result<StoredRecords, RecordsParseError> {
    let mut lines = text.lines().enumerate();
    if lines.next().map(|(_, l)| l) != Some("# trispirit records v1") {
        return Err(RecordsParseError::MissingHeader);
    }
    let mut config = None;
    let mut records = Vec::new();
    for (idx, line) in lines {
        if let Some(json) = line.strip_prefix("# config=") {
            config = Some(serde_json::from_str(json).map_err(|e| RecordsParseError::Config(e.to_string()))?);
        } else if line.starts_with('#') || line.trim().is_empty() {
            continue;
        } else {
            let r = serde_json::from_str(line).map_err(|e| RecordsParseError::Record { line: idx + 1, reason: e.to_string() })?;
            records.push(r);
        }
    }
    Ok(StoredRecords { config, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::Thresholds;
    use crate::sim::{run_variant, CostModel, Workload};
    use crate::task::Mixture;

    #[test]
    fn records_round_trip_with_config() {
        let cfg = RunConfig { n_tasks: 50, ..RunConfig::default() };
        let w = Workload::generate(cfg.n_tasks, &Mixture::default(), cfg.seeds).unwrap();
        let records = run_variant(&w, SystemVariant::TsFull, &Thresholds::default(), &CostModel::default()).unwrap();
        let text = records_jsonl(&records, &cfg);
        let back = read_records_jsonl(&text).unwrap();
        assert_eq!(back.records, records);
        assert_eq!(back.config, Some(cfg));
    }

    #[test]
    fn bad_record_line_is_located() {
        let text = "# trispirit records v1\n{\"task_id\": 0}\n";
        assert!(matches!(read_records_jsonl(text), Err(RecordsParseError::Record { line: 2, .. })));
        assert!(matches!(read_records_jsonl("junk"), Err(RecordsParseError::MissingHeader)));
    }
}
