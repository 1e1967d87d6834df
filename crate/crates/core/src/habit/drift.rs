//! Kernel two-sample drift test on context vectors.

use super::policy::HabitPolicy;

pub const DEFAULT_DRIFT_THRESHOLD: f64 = 0.05;

/// Minimum sample size on each side of the test.
const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftVerdict {
    InDistribution { mmd2: f64, bandwidth: f64 },
    Drifted { mmd2: f64, bandwidth: f64 },
}

impl DriftVerdict {
    pub fn is_drifted(&self) -> bool {
        matches!(self, DriftVerdict::Drifted { .. })
    }

    pub fn mmd2(&self) -> f64 {
        match *self {
            DriftVerdict::InDistribution { mmd2, .. } | DriftVerdict::Drifted { mmd2, .. } => mmd2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DriftError {
    #[error("{which} sample has {got} vectors, need at least {MIN_SAMPLES}")]
    TooFewSamples { which: &'static str, got: usize },
    #[error("context dimension mismatch: baseline {baseline}, recent {recent}")]
    DimensionMismatch { baseline: usize, recent: usize },
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Median pairwise Euclidean distance over the pooled sample, falling back
/// to 1.0 when it is zero.
pub fn median_bandwidth(pooled: &[&[f64]]) -> f64 {
    let n = pooled.len();
    let mut d = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            d.push(sq_dist(pooled[i], pooled[j]).sqrt());
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    let mid = d.len() / 2;
    let median = if d.len() % 2 == 0 { 0.5 * (d[mid - 1] + d[mid]) } else { d[mid] };
    if median > 0.0 && median.is_finite() {
        median
    } else {
        1.0
    }
}

/// Unbiased estimate of squared MMD with kernel `exp(-|a-b|² / (2h²))`.
pub fn mmd2_unbiased<A: AsRef<[f64]>, B: AsRef<[f64]>>(x: &[A], y: &[B], bandwidth: f64) -> f64 {
    let k = |a: &[f64], b: &[f64]| (-sq_dist(a, b) / (2.0 * bandwidth * bandwidth)).exp();
    let within = |s: &[&[f64]]| {
        let n = s.len() as f64;
        let mut sum = 0.0;
        for i in 0..s.len() {
            for j in 0..s.len() {
                if i != j {
                    sum += k(s[i], s[j]);
                }
            }
        }
        sum / (n * (n - 1.0))
    };
    let xs: Vec<&[f64]> = x.iter().map(AsRef::as_ref).collect();
    let ys: Vec<&[f64]> = y.iter().map(AsRef::as_ref).collect();
    let mut cross = 0.0;
    for a in &xs {
        for b in &ys {
            cross += k(a, b);
        }
    }
    within(&xs) + within(&ys) - 2.0 * cross / (xs.len() as f64 * ys.len() as f64)
}

/// Tests `recent` against the policy's compile-time contexts. A statistic
/// above `threshold` revokes the policy.
pub fn drift_check(policy: &mut HabitPolicy, recent: &[Vec<f64>], threshold: f64) -> Result<DriftVerdict, DriftError> {
    let baseline = &policy.baseline_contexts;
    if baseline.len() < MIN_SAMPLES {
        return Err(DriftError::TooFewSamples { which: "baseline", got: baseline.len() });
    }
    if recent.len() < MIN_SAMPLES {
        return Err(DriftError::TooFewSamples { which: "recent", got: recent.len() });
    }
    let dims = baseline[0].len();
    if let Some(bad) = recent.iter().find(|r| r.len() != dims) {
        return Err(DriftError::DimensionMismatch { baseline: dims, recent: bad.len() });
    }
    let pooled: Vec<&[f64]> = baseline.iter().chain(recent).map(Vec::as_slice).collect();
    let bandwidth = median_bandwidth(&pooled);
    let mmd2 = mmd2_unbiased(baseline, recent, bandwidth);
    if mmd2 > threshold {
        policy.invalidate();
        Ok(DriftVerdict::Drifted { mmd2, bandwidth })
    } else {
        Ok(DriftVerdict::InDistribution { mmd2, bandwidth })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::habit::{compile_policy, ActionTemplate, CanonicalTrace, PolicyError};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;
    use std::collections::BTreeMap;

    fn normal_sample(rng: &mut ChaCha8Rng, n: usize, d: usize, shift: f64) -> Vec<Vec<f64>> {
        (0..n).map(|_| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal) + shift).collect()).collect()
    }

    fn policy_with(baseline: Vec<Vec<f64>>) -> HabitPolicy {
        let canon =
            CanonicalTrace { class_key: "C".into(), templates: vec![ActionTemplate { name: "go".into(), params: BTreeMap::new() }], slot_count: 0 };
        compile_policy(&canon, &baseline).unwrap()
    }

    /// Plain double loop over every ordered pair, written independently of
    /// the estimator above.
    fn reference_mmd2(x: &[Vec<f64>], y: &[Vec<f64>], h: f64) -> f64 {
        let k = |a: &Vec<f64>, b: &Vec<f64>| {
            let d: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
            (-d / (2.0 * h * h)).exp()
        };
        let (m, n) = (x.len() as f64, y.len() as f64);
        let mut kxx = 0.0;
        for (i, a) in x.iter().enumerate() {
            for (j, b) in x.iter().enumerate() {
                if i != j {
                    kxx += k(a, b);
                }
            }
        }
        let mut kyy = 0.0;
        for (i, a) in y.iter().enumerate() {
            for (j, b) in y.iter().enumerate() {
                if i != j {
                    kyy += k(a, b);
                }
            }
        }
        let kxy: f64 = x.iter().flat_map(|a| y.iter().map(move |b| (a, b))).map(|(a, b)| k(a, b)).sum();
        kxx / (m * (m - 1.0)) + kyy / (n * (n - 1.0)) - 2.0 * kxy / (m * n)
    }

    #[test]
    fn estimator_agrees_with_reference_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = normal_sample(&mut rng, 30, 2, 0.0);
        let y = normal_sample(&mut rng, 25, 2, 0.5);
        let got = mmd2_unbiased(&x, &y, 1.3);
        assert!((got - reference_mmd2(&x, &y, 1.3)).abs() < 1e-12);
    }

    #[test]
    fn identical_samples_are_in_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let base = normal_sample(&mut rng, 50, 3, 0.0);
        let mut p = policy_with(base.clone());
        let v = drift_check(&mut p, &base, DEFAULT_DRIFT_THRESHOLD).unwrap();
        assert!(!v.is_drifted());
        assert!(v.mmd2() <= 1e-9);
        assert!(p.is_deployed());
    }

    #[test]
    fn shifted_sample_drifts_and_revokes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let base = normal_sample(&mut rng, 100, 2, 0.0);
        let recent = normal_sample(&mut rng, 100, 2, 3.0);
        // Large independent sample: the population statistic is far above 0.05.
        let big_x = normal_sample(&mut rng, 400, 2, 0.0);
        let big_y = normal_sample(&mut rng, 400, 2, 3.0);
        let pooled: Vec<&[f64]> = big_x.iter().chain(&big_y).map(Vec::as_slice).collect();
        assert!(reference_mmd2(&big_x, &big_y, median_bandwidth(&pooled)) > 0.3);

        let mut p = policy_with(base);
        let v = drift_check(&mut p, &recent, DEFAULT_DRIFT_THRESHOLD).unwrap();
        assert!(v.is_drifted());
        assert!(!p.is_deployed());
        assert!(matches!(p.step(0, &[]), Err(PolicyError::Revoked(_))));
    }

    #[test]
    fn degenerate_samples_fall_back_to_unit_bandwidth() {
        let same = vec![vec![2.0, 2.0]; 12];
        let pooled: Vec<&[f64]> = same.iter().map(Vec::as_slice).collect();
        assert_eq!(median_bandwidth(&pooled), 1.0);
        let mut p = policy_with(same.clone());
        match drift_check(&mut p, &same, 0.05).unwrap() {
            DriftVerdict::InDistribution { bandwidth, .. } => assert_eq!(bandwidth, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sample_size_and_shape_errors() {
        let mut p = policy_with(vec![vec![0.0]; 5]);
        assert!(matches!(drift_check(&mut p, &vec![vec![0.0]; 20], 0.05), Err(DriftError::TooFewSamples { which: "baseline", .. })));
        let mut p = policy_with(vec![vec![0.0]; 20]);
        assert!(matches!(drift_check(&mut p, &vec![vec![0.0]; 3], 0.05), Err(DriftError::TooFewSamples { which: "recent", .. })));
        assert!(matches!(drift_check(&mut p, &vec![vec![0.0, 1.0]; 12], 0.05), Err(DriftError::DimensionMismatch { .. })));
    }
}
