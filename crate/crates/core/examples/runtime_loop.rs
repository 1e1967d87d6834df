//! Drives the runtime with a scheduled routine interleaved with sampled
//! tasks. The routine is promoted to a habit, served without model calls,
//! revoked once its context distribution shifts, and promoted again once
//! the new pattern is established.

use std::collections::BTreeMap;

use trispirit::runtime::{Request, RuntimeConfig, SimulatedExecutor, TriSpirit};
use trispirit::sim::CostModel;
use trispirit::task::presample_noise;
use trispirit::{sample_tasks, Mixture, RngStreams, Task, TaskType};

/// Requests arrive on a fixed five-second cadence.
const CADENCE_US: u64 = 5_000_000;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let streams = RngStreams::new(42, 99);
    let n = 1600;
    // Background traffic is reactive and reasoning work only, so the
    // repeated class consists of the routine alone.
    let sampled = sample_tasks(n, &Mixture::new(0.6, 0.4, 0.0)?, &streams)?;
    let noise = presample_noise(n, 4, &streams);
    let mut rt = TriSpirit::new(RuntimeConfig::default(), SimulatedExecutor::new(CostModel::default(), noise.clone()))?;

    let mut served: BTreeMap<String, (usize, u32)> = BTreeMap::new();
    for (i, task) in sampled.into_iter().enumerate() {
        rt.advance(((i as u64 + 1) * CADENCE_US).saturating_sub(rt.now()));
        let row = noise.row(i).expect("one noise row per task");
        let request = if i % 2 == 0 {
            // The routine: a thermostat set-point whose environment changes
            // after 600 requests.
            let context = if i < 600 { vec![21.0 + 0.2 * row[0], 1.0 + 0.05 * row[1]] } else { vec![-4.0 + 0.2 * row[0], 9.0 + 0.05 * row[1]] };
            Request::Task { task: Task { id: i, kind: TaskType::RepeatedC, urgency: 0.3, complexity: 0.35 }, context }
        } else {
            Request::Task { task, context: row[..2].to_vec() }
        };
        let out = rt.handle_request(request)?;
        let entry = served.entry(out.path.map_or("none".to_string(), |p| p.to_string())).or_default();
        entry.0 += 1;
        entry.1 += out.calls;
        if i % 100 == 99 {
            let report = rt.habit_maintenance()?;
            for key in &report.promoted {
                println!("request {:>4}: class {key} promoted to a habit", i + 1);
            }
            for key in &report.revoked {
                println!("request {:>4}: class {key} revoked after drift", i + 1);
            }
        }
    }
    for (path, (count, calls)) in &served {
        println!("{path:>8}: {count:>4} requests, {calls:>4} model calls");
    }
    let bus = rt.bus().stats();
    println!("bus: published {} delivered {} expired {}", bus.published, bus.delivered, bus.expired);
    Ok(())
}
