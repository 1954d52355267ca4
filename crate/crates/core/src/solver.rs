//! Entropy of the suspension flow from the cycle generating function.
//!
//! `phi` is increasing with `phi(0) = 0`, so the flow entropy is
//! `h = -ln(x_hat)` where `x_hat` is either the unique solution of
//! `phi(x) = 1` or, when `phi` stays below one on its whole domain, the
//! radius of convergence of `phi`. That radius equals the first zero of
//! `det M(x)` below the radius of the vertex series `F`, or the radius of
//! `F` itself when `M` stays invertible.
//!
//! A measure of maximal entropy exists for the flow exactly when `phi`
//! attains the value one. The solver certifies that either way when it can:
//! a bracketed sign change of `phi - 1` or a vanishing `det M` below the
//! radius certifies existence, a rigorous evaluation `phi(r) < 1` at the
//! boundary certifies non-existence, and everything else is reported as
//! undetermined rather than guessed.

use crate::genfun::{self, EvalStatus, GenFunError};
use crate::quotient::QuotientGraph;
use crate::series::{self, BoundaryBehavior, RadiusEstimate, SeriesError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("the vertex series diverges for every x > 0: entropy is infinite")]
    InfiniteEntropy,
    #[error("bisection stalled before reaching the requested tolerance (width {width})")]
    ToleranceUnreachable { width: f64 },
    #[error(transparent)]
    GenFun(#[from] GenFunError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Absolute truncation tolerance for series evaluation.
    pub series_tol: f64,
    /// Width of the final bracket around roots and singularities.
    pub x_tol: f64,
    /// Points in the singularity scan grid.
    pub grid: usize,
    /// Tolerance used for the loose boundary evaluation that certifies the
    /// no-measure case.
    pub certificate_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            series_tol: 1e-12,
            x_tol: 1e-12,
            grid: 512,
            certificate_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mme {
    Exists,
    DoesNotExist,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    LinearSystem,
    ClosedForm,
    LocalPerturbation,
}

/// Everything the entropy computation produced.
#[derive(Debug, Clone)]
pub struct EntropyReport {
    pub x_hat: f64,
    pub entropy: f64,
    pub r_f: RadiusEstimate,
    /// First zero of `det M` below the scan ceiling, when one was found.
    pub x_tilde0: Option<f64>,
    pub phi_at_xhat: f64,
    pub mme: Mme,
    /// Bracket `[lo, hi]` around `x_hat`; in the root case
    /// `phi(lo) <= 1 <= phi(hi)`.
    pub bracket: (f64, f64),
    pub path: EvalPath,
}

/// Inputs to the measure-of-maximal-entropy verdict.
#[derive(Debug, Clone, Copy, Default)]
pub struct VerdictInputs {
    /// A sign change of `phi - 1` was bracketed to tolerance.
    pub certified_root: bool,
    /// The bracketed root is within tolerance of the domain edge, so the
    /// root-vs-supremum distinction is numerically ambiguous.
    pub root_near_domain_edge: bool,
    /// `det M` vanishes strictly below the radius of `F`.
    pub x_tilde0_below_radius: bool,
    /// `F` certified divergent at its radius.
    pub f_diverges_at_radius: bool,
    /// `phi(r)` certified strictly below one.
    pub boundary_phi_below_one: bool,
}

/// Decide existence of a measure with maximal entropy from certificates.
/// Undetermined is the fallback whenever nothing was certified.
pub fn mme_verdict(v: &VerdictInputs) -> Mme {
    if v.certified_root && !v.root_near_domain_edge {
        return Mme::Exists;
    }
    if v.x_tilde0_below_radius || v.f_diverges_at_radius {
        return Mme::Exists;
    }
    if v.boundary_phi_below_one && !v.certified_root {
        return Mme::DoesNotExist;
    }
    Mme::Undetermined
}

/// First zero of `det M` on `[0, min(r_F, 1))`, refined by bisection.
/// Returns `None` when the determinant keeps its sign over the whole scan.
pub fn find_x_tilde0(q: &QuotientGraph, cfg: &SolverConfig) -> Result<Option<f64>, SolveError> {
    let r = series::radius_of_quotient(q);
    if r.safe() <= 0.0 {
        return Err(SolveError::InfiniteEntropy);
    }
    let capped_by_r = r.safe() <= 1.0;
    let hi = r.safe().min(1.0);
    let xs = scan_grid(hi, cfg.grid, !capped_by_r);
    // Looser tolerance is plenty for locating a sign change.
    let scan_tol = cfg.series_tol.max(1e-10);
    let dets = crate::par::map(&xs, |&x| genfun::det_m(q, x, scan_tol));

    // det M(0) = (-1)^m.
    let mut prev_x = 0.0;
    let mut prev: f64 = if q.m().is_multiple_of(2) { 1.0 } else { -1.0 };
    for (i, d) in dets.iter().enumerate() {
        let d = match d {
            Ok(d) => *d,
            // Series failure near the top of the scan: report what was
            // scanned instead of failing the whole solve.
            Err(SeriesError::Divergent { .. }) | Err(SeriesError::Budget { .. }) => break,
            Err(e) => return Err(e.clone().into()),
        };
        if d == 0.0 {
            return Ok(Some(xs[i]));
        }
        if d.signum() != prev.signum() {
            return Ok(Some(bisect_det(q, prev_x, xs[i], scan_tol, cfg.x_tol)));
        }
        prev = d;
        prev_x = xs[i];
    }
    Ok(None)
}

fn bisect_det(q: &QuotientGraph, mut lo: f64, mut hi: f64, tol: f64, x_tol: f64) -> f64 {
    let sign_lo = genfun::det_m(q, lo, tol).map(|d| d.signum()).unwrap_or(1.0);
    for _ in 0..200 {
        if hi - lo <= x_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match genfun::det_m(q, mid, tol) {
            Ok(d) if d.signum() == sign_lo && d != 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    0.5 * (lo + hi)
}

/// Scan grid on `(0, hi]`: log-spaced low section, uniform middle, then a
/// geometric approach to the ceiling (or the exact ceiling when the series
/// remain evaluable there).
fn scan_grid(hi: f64, n: usize, include_hi: bool) -> Vec<f64> {
    let n = n.max(16);
    let n_low = n / 4;
    let n_mid = n / 2;
    let mut xs = Vec::with_capacity(n);
    let lo0 = hi * 1e-6;
    for j in 0..n_low {
        let t = j as f64 / (n_low - 1) as f64;
        xs.push(lo0 * (hi / (2.0 * lo0)).powf(t));
    }
    let top = hi * (1.0 - 1e-3);
    for j in 1..=n_mid {
        xs.push(hi / 2.0 + (top - hi / 2.0) * j as f64 / n_mid as f64);
    }
    if include_hi {
        let rest = n.saturating_sub(xs.len()).max(2);
        for j in 1..=rest {
            xs.push(top + (hi - top) * j as f64 / rest as f64);
        }
    } else {
        // Geometric approach to the ceiling. The floor on the gap keeps the
        // scan affordable for families whose tails flatten out near their
        // radius; a zero of det M hiding closer than that to the radius is
        // caught later by the phi hunt's own domain shrinking.
        let mut gap = 1e-3;
        while gap > 3e-6 {
            gap *= 0.25;
            xs.push(hi * (1.0 - gap));
        }
    }
    xs.dedup();
    xs
}

/// Compute the entropy report for the quotient graph.
pub fn solve_entropy(q: &QuotientGraph, cfg: &SolverConfig) -> Result<EntropyReport, SolveError> {
    let r = series::radius_of_quotient(q);
    if r.safe() <= 0.0 {
        return Err(SolveError::InfiniteEntropy);
    }
    let x_tilde0 = find_x_tilde0(q, cfg)?;
    let cap = r.safe().min(1.0);
    let domain_hi = x_tilde0.map(|x0| x0.min(cap)).unwrap_or(cap);
    // Whether the search ceiling is a genuine domain edge of phi, as opposed
    // to the entropy cap at x = 1 with the series still wide open.
    let hi_is_domain_edge = x_tilde0.is_some_and(|x0| x0 <= cap) || r.safe() <= 1.0;

    // Evaluation outcome for the hunt: series failures near the ceiling
    // shrink the usable range instead of aborting the solve.
    enum Point {
        Below(f64),
        AtOrAbove(f64),
        Edge,
    }
    let eval = |x: f64| -> Result<Point, SolveError> {
        match genfun::solve_phi(q, x, cfg.series_tol) {
            Ok(e) if e.status == EvalStatus::InDomain && e.phi < 1.0 => Ok(Point::Below(e.phi)),
            Ok(e) if e.status == EvalStatus::InDomain => Ok(Point::AtOrAbove(e.phi)),
            Ok(_) => Ok(Point::Edge),
            Err(GenFunError::Series(SeriesError::Budget { .. }))
            | Err(GenFunError::Series(SeriesError::Inconclusive { .. })) => Ok(Point::Edge),
            Err(e) => Err(e.into()),
        }
    };

    // Walk up; keep the last in-domain point with phi < 1.
    let mut lo = 0.0;
    let mut phi_lo = 0.0;
    let mut bracket_hi: Option<(f64, f64)> = None;
    let mut ceiling = domain_hi;
    let steps = 64;
    'hunt: for j in 1..=steps {
        let x = domain_hi * j as f64 / steps as f64;
        if !hi_is_domain_edge || j < steps {
            match eval(x)? {
                Point::Below(p) => {
                    lo = x;
                    phi_lo = p;
                }
                Point::AtOrAbove(p) => {
                    bracket_hi = Some((x, p));
                    break 'hunt;
                }
                Point::Edge => {
                    ceiling = x;
                    break 'hunt;
                }
            }
        }
    }

    // When the ceiling is the radius of F itself, a rigorous boundary
    // evaluation settles the supremum case outright and avoids creeping
    // toward the radius through ever more expensive tails.
    let mut boundary = BoundaryPhi::Unknown;
    if bracket_hi.is_none() && x_tilde0.is_none() && r.safe() <= 1.0 {
        boundary = boundary_phi(q, domain_hi, cfg);
        if let BoundaryPhi::Value(v) = boundary {
            if v < 1.0 - cfg.certificate_tol {
                // phi is increasing and stays below one on the whole domain.
                return Ok(EntropyReport {
                    x_hat: domain_hi,
                    entropy: -domain_hi.ln(),
                    r_f: r,
                    x_tilde0,
                    phi_at_xhat: v,
                    mme: mme_verdict(&VerdictInputs {
                        boundary_phi_below_one: true,
                        ..Default::default()
                    }),
                    bracket: (lo, domain_hi),
                    path: EvalPath::LinearSystem,
                });
            }
        }
    }

    if bracket_hi.is_none() {
        // Approach the ceiling geometrically.
        for _ in 0..48 {
            let x = ceiling - (ceiling - lo) * 0.5;
            if x <= lo || x >= ceiling {
                break;
            }
            match eval(x)? {
                Point::Below(p) => {
                    lo = x;
                    phi_lo = p;
                }
                Point::AtOrAbove(p) => {
                    bracket_hi = Some((x, p));
                    break;
                }
                Point::Edge => ceiling = x,
            }
        }
    }
    // Exact endpoint for all-finite graphs: phi(1) is a finite sum.
    if bracket_hi.is_none() && !hi_is_domain_edge {
        if let Point::AtOrAbove(p) = eval(domain_hi)? {
            bracket_hi = Some((domain_hi, p));
        }
    }

    if let Some((mut hi, mut phi_hi)) = bracket_hi {
        // Root case: bisect phi = 1 on [lo, hi].
        for _ in 0..200 {
            if hi - lo <= cfg.x_tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match eval(mid)? {
                Point::Below(p) => {
                    lo = mid;
                    phi_lo = p;
                }
                Point::AtOrAbove(p) => {
                    hi = mid;
                    phi_hi = p;
                }
                Point::Edge => hi = mid,
            }
        }
        if hi - lo > cfg.x_tol * 4.0 {
            return Err(SolveError::ToleranceUnreachable { width: hi - lo });
        }
        let x_hat = 0.5 * (lo + hi);
        let near_edge =
            hi_is_domain_edge && (domain_hi - x_hat) <= (10.0 * cfg.x_tol).max(1e-9);
        let verdict = mme_verdict(&VerdictInputs {
            certified_root: true,
            root_near_domain_edge: near_edge,
            x_tilde0_below_radius: x_tilde0.is_some_and(|x0| x0 < r.safe()),
            ..Default::default()
        });
        return Ok(EntropyReport {
            x_hat,
            entropy: -x_hat.ln(),
            r_f: r,
            x_tilde0,
            phi_at_xhat: 0.5 * (phi_lo + phi_hi),
            mme: verdict,
            bracket: (lo, hi),
            path: EvalPath::LinearSystem,
        });
    }

    // Supremum case: phi stayed below one everywhere we could evaluate.
    let x_hat = domain_hi;
    let mut inputs = VerdictInputs {
        x_tilde0_below_radius: x_tilde0.is_some_and(|x0| x0 < r.safe()),
        ..Default::default()
    };
    let mut phi_at = phi_lo;
    match boundary {
        BoundaryPhi::Value(v) => phi_at = v,
        BoundaryPhi::Diverges => inputs.f_diverges_at_radius = true,
        BoundaryPhi::Unknown => {}
    }
    Ok(EntropyReport {
        x_hat,
        entropy: -x_hat.ln(),
        r_f: r,
        x_tilde0,
        phi_at_xhat: phi_at,
        mme: mme_verdict(&inputs),
        bracket: (lo, x_hat),
        path: EvalPath::LinearSystem,
    })
}

enum BoundaryPhi {
    Value(f64),
    Diverges,
    Unknown,
}

/// Evaluate `phi` at the radius of `F` when the binding families certify
/// convergence there; certify divergence when they diverge.
fn boundary_phi(q: &QuotientGraph, r: f64, cfg: &SolverConfig) -> BoundaryPhi {
    let mut any_unknown = false;
    for fam in &q.families {
        let fr = fam.radius().safe();
        if fr <= r * (1.0 + 1e-9) {
            match fam.boundary_behavior() {
                BoundaryBehavior::Diverges => return BoundaryPhi::Diverges,
                BoundaryBehavior::ConvergesFinite => {}
                BoundaryBehavior::Unknown => any_unknown = true,
            }
        }
    }
    if any_unknown {
        return BoundaryPhi::Unknown;
    }
    match genfun::solve_phi_boundary(q, r, cfg.certificate_tol) {
        Ok(e) if e.status == EvalStatus::InDomain => BoundaryPhi::Value(e.phi),
        Ok(_) => BoundaryPhi::Unknown,
        Err(_) => BoundaryPhi::Unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_spec;
    use crate::quotient::build_quotient;

    fn full_shift(n: usize) -> QuotientGraph {
        let body = (0..n)
            .map(|i| format!("v{i}: 1"))
            .collect::<Vec<_>>()
            .join(", ");
        let spec = parse_spec(&format!(
            "class all finite {{ {body} }}\nedges complete_minus_D\nroot v0\n"
        ))
        .unwrap();
        build_quotient(&spec, "v0").unwrap()
    }

    #[test]
    fn full_shift_entropy_is_log_n() {
        for n in 2..=6usize {
            let q = full_shift(n);
            let rep = solve_entropy(&q, &SolverConfig::default()).unwrap();
            let expect = (n as f64).ln();
            assert!(
                (rep.entropy - expect).abs() < 1e-9,
                "n={n}: {} vs {}",
                rep.entropy,
                expect
            );
            assert_eq!(rep.mme, Mme::Exists);
            assert!(rep.bracket.1 - rep.bracket.0 <= 1e-11);
        }
    }

    #[test]
    fn full_shift_first_singularity() {
        // One non-root class with alpha_{11} = (n-1)x: det M = (n-1)x - 1.
        for n in 3..=5usize {
            let q = full_shift(n);
            let x0 = find_x_tilde0(&q, &SolverConfig::default())
                .unwrap()
                .expect("sign change");
            assert!((x0 - 1.0 / (n as f64 - 1.0)).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn single_loop_has_zero_entropy() {
        let spec =
            parse_spec("class a finite { a: 1.0 }\nedges complete_minus_D\nroot a\n").unwrap();
        let q = build_quotient(&spec, "a").unwrap();
        let rep = solve_entropy(&q, &SolverConfig::default()).unwrap();
        assert!(rep.entropy.abs() < 1e-9);
        assert_eq!(rep.mme, Mme::Exists);
    }

    #[test]
    fn two_cycle_has_zero_entropy() {
        let spec = parse_spec(
            "class a finite { a: 1.0 }\nclass b finite { b: 0.7 }\nedges pairs { (a,b), (b,a) }\nroot a\n",
        )
        .unwrap();
        let q = build_quotient(&spec, "a").unwrap();
        let rep = solve_entropy(&q, &SolverConfig::default()).unwrap();
        assert!(rep.entropy.abs() < 1e-9);
    }

    #[test]
    fn star_with_heavy_family_hits_the_radius() {
        let spec = parse_spec(
            "class origin finite { 1: 1 }\nclass arms family k from 2 height k mult floor(2^k / k^2)\nedges pairs { (origin,arms), (arms,origin) }\nroot 1\n",
        )
        .unwrap();
        let q = build_quotient(&spec, "1").unwrap();
        let rep = solve_entropy(&q, &SolverConfig::default()).unwrap();
        assert_eq!(rep.x_tilde0, None);
        assert_eq!(rep.x_hat, 0.5);
        assert!((rep.entropy - 2f64.ln()).abs() < 1e-12);
        assert_eq!(rep.mme, Mme::DoesNotExist);
        assert!(rep.phi_at_xhat < 0.85);
    }

    #[test]
    fn infinite_entropy_is_reported() {
        let spec = parse_spec(
            "class a finite { a: 1 }\nclass f family k from 1 height 2\nedges complete_minus_D\nroot a\n",
        )
        .unwrap();
        let q = build_quotient(&spec, "a").unwrap();
        assert!(matches!(
            solve_entropy(&q, &SolverConfig::default()),
            Err(SolveError::InfiniteEntropy)
        ));
    }

    #[test]
    fn verdict_prefers_certificates() {
        assert_eq!(
            mme_verdict(&VerdictInputs {
                certified_root: true,
                ..Default::default()
            }),
            Mme::Exists
        );
        assert_eq!(
            mme_verdict(&VerdictInputs {
                certified_root: true,
                root_near_domain_edge: true,
                ..Default::default()
            }),
            Mme::Undetermined
        );
        assert_eq!(
            mme_verdict(&VerdictInputs {
                boundary_phi_below_one: true,
                ..Default::default()
            }),
            Mme::DoesNotExist
        );
        assert_eq!(mme_verdict(&VerdictInputs::default()), Mme::Undetermined);
    }
}
