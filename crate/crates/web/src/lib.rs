//! Browser demo: routing thresholds, the latency heatmap and the drift
//! detector, exported through `wasm-bindgen`.
//!
//! Each export is a thin wrapper over a plain function returning JSON text,
//! so the logic is testable natively.

use serde_json::json;
use wasm_bindgen::prelude::*;

use trispirit::habit::{median_bandwidth, mmd2_unbiased, DEFAULT_DRIFT_THRESHOLD};
use trispirit::sim::{linspace, run_variant, summarize, CostModel, Path, SystemVariant, Workload};
use trispirit::task::{presample_noise, Mixture, RngStreams};
use trispirit::Thresholds;

/// Bootstrap resamples used by the demo; fewer than the CLI default so the
/// page stays responsive.
const DEMO_RESAMPLES: usize = 400;

fn workload(seed: u64, n: usize) -> Result<Workload, String> {
    Workload::generate(n, &Mixture::default(), RngStreams::new(seed, 99)).map_err(|e| e.to_string())
}

fn mean_latency(w: &Workload, variant: SystemVariant, th: &Thresholds) -> Result<f64, String> {
    let records = run_variant(w, variant, th, &CostModel::default()).map_err(|e| e.to_string())?;
    Ok(records.iter().map(|r| r.latency_ms).sum::<f64>() / records.len() as f64)
}

/// Summary of one threshold setting against the cloud-centric baseline.
pub fn routing_summary(seed: u64, n: usize, th: Thresholds, habit: bool) -> Result<String, String> {
    th.validate().map_err(|e| e.to_string())?;
    let w = workload(seed, n)?;
    let variant = if habit { SystemVariant::TsFull } else { SystemVariant::TsMainNoHabit };
    let records = run_variant(&w, variant, &th, &CostModel::default()).map_err(|e| e.to_string())?;
    let s = summarize(&records, DEMO_RESAMPLES, 99).map_err(|e| e.to_string())?;
    let cloud = mean_latency(&w, SystemVariant::CloudCentric, &th)?;
    let paths: serde_json::Map<String, serde_json::Value> = [Path::Reflex, Path::Habit, Path::Agent, Path::Super]
        .iter()
        .map(|p| (p.as_str().to_string(), json!(s.path_pct.get(p).copied().unwrap_or(0.0))))
        .collect();
    Ok(json!({
        "variant": variant.as_str(),
        "mean_latency_ms": s.latency_ms.mean,
        "latency_ci": [s.latency_ms.lo, s.latency_ms.hi],
        "mean_energy_mj": s.energy_mj.mean,
        "mean_calls": s.calls.mean,
        "offline_pct": s.offline_pct,
        "cloud_latency_ms": cloud,
        "reduction_pct": 100.0 * (1.0 - s.latency_ms.mean / cloud),
        "path_pct": paths,
    })
    .to_string())
}

/// Mean latency over a 10×10 grid of reflex urgency (columns) and agent
/// urgency (rows) thresholds at the given complexity thresholds.
pub fn latency_heatmap(seed: u64, n: usize, gamma_r: f64, gamma_a: f64) -> Result<String, String> {
    let w = workload(seed, n)?;
    let tau_r = linspace(0.10, 0.40, 10);
    let tau_a = linspace(0.50, 0.90, 10);
    let mut cells = Vec::with_capacity(100);
    for &a in &tau_a {
        for &r in &tau_r {
            let th = Thresholds::new(r, gamma_r, a, gamma_a).map_err(|e| e.to_string())?;
            cells.push(mean_latency(&w, SystemVariant::TsMainNoHabit, &th)?);
        }
    }
    let cloud = mean_latency(&w, SystemVariant::CloudCentric, &Thresholds::default())?;
    Ok(json!({ "tau_r": tau_r, "tau_a": tau_a, "latency_ms": cells, "cloud_latency_ms": cloud }).to_string())
}

/// Two-sample drift test between a standard-normal baseline and a sample
/// shifted by `shift` standard deviations in every dimension.
pub fn drift_demo(seed: u64, samples: usize, dims: usize, shift: f64) -> Result<String, String> {
    if samples < 10 || dims == 0 {
        return Err("need at least 10 samples and 1 dimension".into());
    }
    let rows = |s: u64, offset: f64| -> Vec<Vec<f64>> {
        let t = presample_noise(samples, dims, &RngStreams::new(s, 0));
        (0..samples).map(|i| t.row(i).expect("row in range").iter().map(|z| z + offset).collect()).collect()
    };
    let baseline = rows(seed, 0.0);
    let recent = rows(seed.wrapping_add(1), shift);
    let pooled: Vec<&[f64]> = baseline.iter().chain(&recent).map(Vec::as_slice).collect();
    let bandwidth = median_bandwidth(&pooled);
    let mmd2 = mmd2_unbiased(&baseline, &recent, bandwidth);
    Ok(json!({
        "mmd2": mmd2,
        "bandwidth": bandwidth,
        "threshold": DEFAULT_DRIFT_THRESHOLD,
        "drifted": mmd2 > DEFAULT_DRIFT_THRESHOLD,
    })
    .to_string())
}

#[wasm_bindgen(js_name = routingSummary)]
pub fn routing_summary_js(seed: u32, n: u32, tau_r: f64, gamma_r: f64, tau_a: f64, gamma_a: f64, habit: bool) -> Result<String, JsValue> {
    let th = Thresholds { reflex_urgency: tau_r, reflex_complexity: gamma_r, agent_urgency: tau_a, agent_complexity: gamma_a };
    routing_summary(u64::from(seed), n as usize, th, habit).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = latencyHeatmap)]
pub fn latency_heatmap_js(seed: u32, n: u32, gamma_r: f64, gamma_a: f64) -> Result<String, JsValue> {
    latency_heatmap(u64::from(seed), n as usize, gamma_r, gamma_a).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = driftDemo)]
pub fn drift_demo_js(seed: u32, samples: u32, dims: u32, shift: f64) -> Result<String, JsValue> {
    drift_demo(u64::from(seed), samples as usize, dims as usize, shift).map_err(|e| JsValue::from_str(&e))
}
