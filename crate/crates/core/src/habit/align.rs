use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::policy::{Action, ParamValue};

/// One observed execution of a task class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub class_key: String,
    pub actions: Vec<Action>,
    pub context: Vec<f64>,
}

/// A template parameter is either fixed across all traces or read from the
/// context vector at the given slot index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateParam {
    Literal(ParamValue),
    Slot(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionTemplate {
    pub name: String,
    pub params: BTreeMap<String, TemplateParam>,
}

impl ActionTemplate {
    pub fn slots(&self) -> impl Iterator<Item = (&str, usize)> {
        self.params.iter().filter_map(|(k, p)| match p {
            TemplateParam::Slot(i) => Some((k.as_str(), *i)),
            TemplateParam::Literal(_) => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalTrace {
    pub class_key: String,
    pub templates: Vec<ActionTemplate>,
    /// Number of distinct slots; slot `i` binds context component `i`.
    pub slot_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AbstractionError {
    #[error("need at least two traces, got {0}")]
    TooFewTraces(usize),
    #[error("trace {index} belongs to class `{found}`, expected `{expected}`")]
    ClassMismatch { index: usize, expected: String, found: String },
    #[error("trace {0} has no actions")]
    EmptyTrace(usize),
    #[error("traces of class `{0}` share no common action")]
    NoCommonActions(String),
}

/// Result of aligning two action-name sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DtwAlignment {
    pub cost: usize,
    /// Warping path of `(index in a, index in b)` pairs, both non-decreasing.
    pub path: Vec<(usize, usize)>,
}

/// Dynamic time warping with cost 0 for equal names and 1 otherwise.
///
/// Among paths of equal cost the shortest wins, which keeps warping to the
/// minimum needed. Remaining ties prefer the diagonal step, then a step in
/// `a`, then a step in `b`, so the path is deterministic.
pub fn dtw<S: AsRef<str>>(a: &[S], b: &[S]) -> DtwAlignment {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return DtwAlignment { cost: n.max(m), path: Vec::new() };
    }
    let same = |i: usize, j: usize| a[i].as_ref() == b[j].as_ref();
    // (cost, path length), compared lexicographically.
    let better = |x: (usize, usize), y: (usize, usize)| if y < x { y } else { x };
    let mut acc = vec![vec![(0usize, 0usize); m]; n];
    for i in 0..n {
        for j in 0..m {
            let prev = match (i, j) {
                (0, 0) => (0, 0),
                (0, _) => acc[0][j - 1],
                (_, 0) => acc[i - 1][0],
                _ => better(better(acc[i - 1][j - 1], acc[i - 1][j]), acc[i][j - 1]),
            };
            acc[i][j] = (prev.0 + usize::from(!same(i, j)), prev.1 + 1);
        }
    }
    let mut path = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while (i, j) != (0, 0) {
        (i, j) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let (diag, up, left) = (acc[i - 1][j - 1], acc[i - 1][j], acc[i][j - 1]);
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        path.push((i, j));
    }
    path.reverse();
    DtwAlignment { cost: acc[n - 1][m - 1].0, path }
}

fn names(trace: &ExecutionTrace) -> Vec<&str> {
    trace.actions.iter().map(|a| a.name.as_str()).collect()
}

/// Aligns every trace against the medoid and keeps the reference positions
/// matched by an equally named action in every other trace.
///
/// Each action of a non-reference trace is claimed by at most one reference
/// position, in order, so the canonical trace is a common subsequence of all
/// inputs. Claims follow the warping path first; reference actions the path
/// left unpaired may then claim an equal action between their neighbours'
/// claims. Parameters that agree everywhere become literals; the rest become
/// slots numbered in discovery order.
pub fn abstract_traces(traces: &[ExecutionTrace]) -> Result<CanonicalTrace, AbstractionError> {
    if traces.len() < 2 {
        return Err(AbstractionError::TooFewTraces(traces.len()));
    }
    let class_key = traces[0].class_key.clone();
    for (index, t) in traces.iter().enumerate() {
        if t.class_key != class_key {
            return Err(AbstractionError::ClassMismatch { index, expected: class_key, found: t.class_key.clone() });
        }
        if t.actions.is_empty() {
            return Err(AbstractionError::EmptyTrace(index));
        }
    }

    let seqs: Vec<Vec<&str>> = traces.iter().map(names).collect();
    let n = traces.len();
    let mut dist = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let c = dtw(&seqs[i], &seqs[j]).cost;
            dist[i][j] = c;
            dist[j][i] = c;
        }
    }
    let medoid = (0..n).min_by_key(|&i| (dist[i].iter().sum::<usize>(), i)).unwrap();
    let reference = &seqs[medoid];

    // matches[t][i] = index into trace t claimed by reference position i
    let mut matches: Vec<Vec<Option<usize>>> = Vec::with_capacity(n);
    for (t, seq) in seqs.iter().enumerate() {
        if t == medoid {
            matches.push((0..reference.len()).map(Some).collect());
            continue;
        }
        let path = dtw(reference, seq).path;
        let mut claimed: Vec<Option<usize>> = vec![None; reference.len()];
        let mut next_free = 0usize;
        for (i, slot) in claimed.iter_mut().enumerate() {
            let hit = path.iter().filter(|&&(ri, _)| ri == i).map(|&(_, j)| j).find(|&j| j >= next_free && seq[j] == reference[i]);
            if let Some(j) = hit {
                *slot = Some(j);
                next_free = j + 1;
            }
        }
        // Warping can pair one reference action with several equal actions
        // of the other trace, leaving a later reference action of the same
        // name without a partner. Fill such gaps with an unclaimed, equally
        // named action lying between the neighbouring claims.
        for i in 0..reference.len() {
            if claimed[i].is_some() {
                continue;
            }
            let lo = claimed[..i].iter().rev().find_map(|c| *c).map_or(0, |j| j + 1);
            let hi = claimed[i + 1..].iter().find_map(|c| *c).unwrap_or(seq.len());
            claimed[i] = (lo..hi).find(|&j| seq[j] == reference[i]);
        }
        matches.push(claimed);
    }

    let mut templates = Vec::new();
    let mut slot_count = 0usize;
    for i in 0..reference.len() {
        let aligned: Option<Vec<&Action>> = (0..n).map(|t| matches[t][i].map(|j| &traces[t].actions[j])).collect();
        let Some(aligned) = aligned else { continue };
        let keys: BTreeSet<&String> = aligned.iter().flat_map(|a| a.params.keys()).collect();
        let mut params = BTreeMap::new();
        for key in keys {
            let first = aligned[0].params.get(key);
            let uniform = first.is_some() && aligned.iter().all(|a| a.params.get(key) == first);
            let param = if uniform {
                TemplateParam::Literal(first.unwrap().clone())
            } else {
                slot_count += 1;
                TemplateParam::Slot(slot_count - 1)
            };
            params.insert(key.clone(), param);
        }
        templates.push(ActionTemplate { name: reference[i].to_string(), params });
    }
    if templates.is_empty() {
        return Err(AbstractionError::NoCommonActions(class_key));
    }
    Ok(CanonicalTrace { class_key, templates, slot_count })
}
