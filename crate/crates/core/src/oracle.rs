//! Brute-force enumeration of first-return cycles on a finite truncation.
//!
//! Truncating every infinite family to its first N indices yields a finite
//! sub-graph of G whose paths are all paths of G, so the enumerated cycle
//! polynomial evaluates to a lower bound of `phi` at every x. This is the
//! independent ground truth the analytic pipeline is checked against on
//! small instances; it is a test harness, not a production evaluator.

use crate::model::{ClassKind, ModelError, RftSpec, VertexRef};
use crate::quotient::QuotientGraph;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("cycle enumeration exceeded the step budget of {budget}")]
    BudgetExceeded { budget: usize },
    #[error("truncation would create {count} vertices (cap {cap})")]
    TruncationTooLarge { count: usize, cap: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("vertex `{0}` not present in the truncation")]
    UnknownVertex(String),
}

/// Weight bucketing quantum. Heights are often irrational, so cycle weights
/// are bucketed to keep the polynomial finite; the evaluation error this
/// introduces is below `|ln x| * quantum` per cycle.
pub const WEIGHT_QUANTUM: f64 = 1e-12;

/// Finite truncation of the graph: all named vertices plus the first N
/// indices of each family, expanded by multiplicity.
#[derive(Debug, Clone)]
pub struct TruncatedGraph {
    pub labels: Vec<String>,
    pub heights: Vec<f64>,
    /// Successor lists.
    pub succ: Vec<Vec<usize>>,
}

impl TruncatedGraph {
    /// Build the truncation keeping family indices `k0 .. k0+depth-1`.
    pub fn build(spec: &RftSpec, depth: i64) -> Result<TruncatedGraph, OracleError> {
        const VERTEX_CAP: usize = 200_000;
        let mut labels = Vec::new();
        let mut heights = Vec::new();
        let mut class_of = Vec::new();
        // Identity of a vertex for checking the exception set.
        let mut keys: Vec<Option<VertexRef>> = Vec::new();

        for (ci, class) in spec.classes.iter().enumerate() {
            match &class.kind {
                ClassKind::Finite(vs) => {
                    for v in vs {
                        labels.push(v.label.clone());
                        heights.push(v.height);
                        class_of.push(ci);
                        keys.push(Some(VertexRef::Label(v.label.clone())));
                    }
                }
                ClassKind::Family { k0, height, mult } => {
                    for k in *k0..*k0 + depth {
                        let g = height.eval(k).map_err(|e| ModelError::FamilyEval {
                            class: class.name.clone(),
                            source: e,
                        })?;
                        let copies = match mult {
                            None => 1,
                            Some(m) => {
                                let mv = m.eval(k).map_err(|e| ModelError::FamilyEval {
                                    class: class.name.clone(),
                                    source: e,
                                })?;
                                mv.max(0.0).round() as usize
                            }
                        };
                        for c in 0..copies {
                            labels.push(format!("{}[{}]#{}", class.name, k, c));
                            heights.push(g);
                            class_of.push(ci);
                            keys.push(Some(VertexRef::Member {
                                class: class.name.clone(),
                                k,
                            }));
                        }
                        if labels.len() > VERTEX_CAP {
                            return Err(OracleError::TruncationTooLarge {
                                count: labels.len(),
                                cap: VERTEX_CAP,
                            });
                        }
                    }
                }
            }
        }

        let forbidden = |a: &Option<VertexRef>, b: &Option<VertexRef>| -> bool {
            match (a, b) {
                (Some(a), Some(b)) => spec
                    .edges
                    .forbidden
                    .iter()
                    .any(|(u, v)| ref_matches(u, a) && ref_matches(v, b)),
                _ => false,
            }
        };

        let n = labels.len();
        let mut succ = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if spec.class_pair_allowed(class_of[i], class_of[j])
                    && !forbidden(&keys[i], &keys[j])
                {
                    succ[i].push(j);
                }
            }
        }
        Ok(TruncatedGraph {
            labels,
            heights,
            succ,
        })
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

fn ref_matches(pattern: &VertexRef, actual: &VertexRef) -> bool {
    match (pattern, actual) {
        (VertexRef::Label(a), VertexRef::Label(b)) => a == b,
        (
            VertexRef::Member { class: ca, k: ka },
            VertexRef::Member { class: cb, k: kb },
        ) => ca == cb && ka == kb,
        _ => false,
    }
}

/// Cycle weights bucketed to [`WEIGHT_QUANTUM`], mapped to exact counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CyclePoly {
    pub terms: BTreeMap<i64, u64>,
}

impl CyclePoly {
    fn record(&mut self, weight: f64) {
        let bucket = (weight / WEIGHT_QUANTUM).round() as i64;
        *self.terms.entry(bucket).or_insert(0) += 1;
    }

    fn merge(mut self, other: CyclePoly) -> CyclePoly {
        for (k, v) in other.terms {
            *self.terms.entry(k).or_insert(0) += v;
        }
        self
    }

    pub fn total_cycles(&self) -> u64 {
        self.terms.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Counts keyed by real weight.
    pub fn weights(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.terms
            .iter()
            .map(|(&b, &c)| (b as f64 * WEIGHT_QUANTUM, c))
    }
}

/// Evaluate the truncated cycle sum at `x`; a lower bound for `phi(x)`.
pub fn phi_truncated(poly: &CyclePoly, x: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&x) || x == 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let ln_x = x.ln();
    poly.weights().map(|(w, c)| c as f64 * (w * ln_x).exp()).sum()
}

/// Enumerate first-return cycles through `root` of length at most `max_len`
/// by depth-first search. Interior vertices may repeat; only the root is
/// excluded from the interior. Fans out over the root's first edges when
/// the `parallel` feature is enabled.
///
/// A shared step budget aborts the enumeration rather than returning a
/// silently truncated polynomial.
pub fn enumerate_cycles(
    tg: &TruncatedGraph,
    root: &str,
    max_len: usize,
    budget: usize,
) -> Result<CyclePoly, OracleError> {
    let w = tg
        .index_of(root)
        .ok_or_else(|| OracleError::UnknownVertex(root.to_string()))?;
    let steps = AtomicUsize::new(0);
    let first: Vec<usize> = tg.succ[w].clone();
    let results = crate::par::map(&first, |&s| {
        dfs_branch(tg, w, s, max_len, budget, &steps)
    });
    let mut poly = CyclePoly::default();
    for r in results {
        poly = poly.merge(r?);
    }
    Ok(poly)
}

/// Sequential reference enumeration; used by the benches to measure the
/// parallel fan-out against single-threaded traversal.
pub fn enumerate_cycles_seq(
    tg: &TruncatedGraph,
    root: &str,
    max_len: usize,
    budget: usize,
) -> Result<CyclePoly, OracleError> {
    let w = tg
        .index_of(root)
        .ok_or_else(|| OracleError::UnknownVertex(root.to_string()))?;
    let steps = AtomicUsize::new(0);
    let mut poly = CyclePoly::default();
    for &s in &tg.succ[w] {
        poly = poly.merge(dfs_branch(tg, w, s, max_len, budget, &steps)?);
    }
    Ok(poly)
}

fn dfs_branch(
    tg: &TruncatedGraph,
    w: usize,
    first: usize,
    max_len: usize,
    budget: usize,
    steps: &AtomicUsize,
) -> Result<CyclePoly, OracleError> {
    let mut poly = CyclePoly::default();
    if max_len < 1 {
        return Ok(poly);
    }
    let root_weight = tg.heights[w];
    if first == w {
        poly.record(root_weight);
        return Ok(poly);
    }
    // Stack of (vertex, steps-from-root, accumulated weight incl. vertex).
    let mut stack: Vec<(usize, usize, f64)> = Vec::new();
    if max_len >= 2 {
        stack.push((first, 1, root_weight + tg.heights[first]));
    }
    // Budget accounting syncs to the shared counter in batches so parallel
    // branches do not contend on every node.
    const FLUSH: usize = 4096;
    let mut local = 0usize;
    while let Some((v, len, weight)) = stack.pop() {
        local += 1;
        if local == FLUSH {
            if steps.fetch_add(local, Ordering::Relaxed) + local > budget {
                return Err(OracleError::BudgetExceeded { budget });
            }
            local = 0;
        }
        for &s in &tg.succ[v] {
            if s == w {
                poly.record(weight);
            } else if len < max_len - 1 {
                stack.push((s, len + 1, weight + tg.heights[s]));
            }
        }
    }
    if steps.fetch_add(local, Ordering::Relaxed) + local > budget {
        return Err(OracleError::BudgetExceeded { budget });
    }
    Ok(poly)
}

/// Smallest first-return length after which, on a fully finite graph, the
/// remaining cycle series at `x` is below `tol`; a crude transient bound
/// from the contraction of the interior transfer matrix.
pub fn transient_length_bound(q: &QuotientGraph, x: f64, x_hat: f64, tol: f64) -> usize {
    // Contribution of cycles longer than L is at most sum_{n>L} (x/x_hat)^{n h_min}.
    let h_min = q
        .classes
        .iter()
        .flat_map(|c| c.atoms.iter())
        .filter_map(|a| match a {
            crate::quotient::QAtom::Named { height, .. } => Some(*height),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min);
    let ratio = (x / x_hat).powf(h_min);
    if ratio >= 1.0 {
        return usize::MAX;
    }
    let mut l = 1usize;
    while ratio.powi(l as i32 + 1) / (1.0 - ratio) > tol && l < 10_000 {
        l += 1;
    }
    l
}
