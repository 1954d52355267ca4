//! The first-return cycle generating function and its evaluation paths.
//!
//! For a root vertex `w`, let `phi(x)` be the sum of `x^{f*(c)}` over all
//! cycles `c` through `w` whose interior avoids `w`, where `f*` accumulates
//! the heights along the cycle. On the quotient graph the path series
//! `A_i(x)` (paths from class `V_i` to the root) satisfy the linear system
//!
//! ```text
//! A_i = alpha_{i0} + sum_j alpha_{ij} A_j,      M(x) A(x) = -alpha_0(x)
//! ```
//!
//! with `M = [alpha_{ij} - delta_{ij}]`, and
//! `phi = alpha_{00} + sum_j alpha_{0j} A_j`.
//!
//! Three independent evaluation routes are provided and cross-checked:
//! the dense linear solve, a closed form that only inverts the constrained
//! upper-left block `C` of `M`, and (for complete-minus-exceptions graphs)
//! a vertex-level resolvent form over the finitely many constrained
//! vertices. A determinant identity relating `det M`, `det C`, and the
//! closed-form denominator serves as a consistency diagnostic.

use crate::linalg::Lu;
use crate::model::{EdgeMode, ModelError, RftSpec, VertexRef};
use crate::quotient::QuotientGraph;
use crate::series::{self, SeriesError, SeriesValue};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenFunError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("constrained block C is singular at x = {x}")]
    CSingular { x: f64 },
    #[error("closed-form validity condition fails at x = {x} (denominator {denom})")]
    ConditionViolated { x: f64, denom: f64 },
    #[error("not a local perturbation of a complete graph")]
    NotLocalPerturbation,
    #[error("local-perturbation denominator is non-positive at x = {x}")]
    PerturbationDenominator { x: f64 },
}

/// Where a requested evaluation point sits relative to the function's
/// domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EvalStatus {
    InDomain,
    /// `det M` vanishes at or before this point (the path series diverge).
    SingularAtOrBefore,
    /// Some class series diverges at this point.
    BeyondSeriesRadius,
}

/// Evaluated weighted system at a fixed `x`: class series plus the sparsity
/// pattern of the quotient adjacency.
#[derive(Debug, Clone)]
pub struct WeightedSystem {
    pub m: usize,
    /// alpha_1 .. alpha_m.
    pub alpha: Vec<SeriesValue>,
    /// alpha_0 = x^{f(w)}.
    pub alpha_root: f64,
    /// Quotient adjacency, (m+1) x (m+1).
    pub adjacency: Vec<Vec<bool>>,
}

impl WeightedSystem {
    /// Matrix entry `alpha_{ij}` for i, j in 0..=m.
    pub fn a(&self, i: usize, j: usize) -> f64 {
        if !self.adjacency[i][j] {
            return 0.0;
        }
        if i == 0 {
            self.alpha_root
        } else {
            self.alpha[i - 1].value
        }
    }

    /// `M = [alpha_{ij} - delta_{ij}]` over classes 1..=m, row-major.
    pub fn m_matrix(&self) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m * m];
        for i in 1..=m {
            for j in 1..=m {
                out[(i - 1) * m + (j - 1)] = self.a(i, j) - if i == j { 1.0 } else { 0.0 };
            }
        }
        out
    }

    /// Right-hand side `-alpha_{i0}` of the path system.
    pub fn rhs(&self) -> Vec<f64> {
        (1..=self.m).map(|i| -self.a(i, 0)).collect()
    }
}

/// Evaluate all class series of the quotient at `x`.
pub fn assemble(q: &QuotientGraph, x: f64, tol: f64) -> Result<WeightedSystem, SeriesError> {
    assemble_at(q, x, tol, false)
}

pub(crate) fn assemble_at(
    q: &QuotientGraph,
    x: f64,
    tol: f64,
    at_boundary: bool,
) -> Result<WeightedSystem, SeriesError> {
    let m = q.m();
    let per = tol / (m.max(1) as f64);
    let mut alpha = Vec::with_capacity(m);
    for i in 1..=m {
        alpha.push(series::class_alpha(q, i, x, per, at_boundary)?);
    }
    Ok(WeightedSystem {
        m,
        alpha,
        alpha_root: x.powf(q.root_height),
        adjacency: q.adjacency.clone(),
    })
}

/// One evaluated point of the generating function.
#[derive(Debug, Clone)]
pub struct GenFunEval {
    pub x: f64,
    pub phi: f64,
    /// Path series A_1 .. A_m (empty unless `InDomain`).
    pub a: Vec<f64>,
    pub det_m: f64,
    pub status: EvalStatus,
}

/// Evaluate `phi(x)` through the dense linear solve.
///
/// Series divergence and a singular (or sign-crossed) system are reported
/// through `status` rather than as hard errors, so grids over x can keep
/// going past the domain.
pub fn solve_phi(q: &QuotientGraph, x: f64, tol: f64) -> Result<GenFunEval, GenFunError> {
    solve_phi_at(q, x, tol, false)
}

/// Evaluate at a point that may sit exactly on the radius of the vertex
/// series; only usable when the binding family tails converge there.
pub(crate) fn solve_phi_boundary(
    q: &QuotientGraph,
    x: f64,
    tol: f64,
) -> Result<GenFunEval, GenFunError> {
    solve_phi_at(q, x, tol, true)
}

fn solve_phi_at(
    q: &QuotientGraph,
    x: f64,
    tol: f64,
    at_boundary: bool,
) -> Result<GenFunEval, GenFunError> {
    // Entropy arguments live in [0, 1]; everything outside is out of domain.
    if !(0.0..=1.0).contains(&x) {
        return Ok(GenFunEval {
            x,
            phi: f64::NAN,
            a: Vec::new(),
            det_m: f64::NAN,
            status: EvalStatus::BeyondSeriesRadius,
        });
    }
    let sys = match assemble_at(q, x, tol, at_boundary) {
        Ok(s) => s,
        Err(SeriesError::Divergent { .. }) => {
            return Ok(GenFunEval {
                x,
                phi: f64::NAN,
                a: Vec::new(),
                det_m: f64::NAN,
                status: EvalStatus::BeyondSeriesRadius,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let m = sys.m;
    let lu = Lu::factor(&sys.m_matrix(), m);
    let det_m = lu.det();
    if lu.is_singular() {
        return Ok(GenFunEval {
            x,
            phi: f64::NAN,
            a: Vec::new(),
            det_m,
            status: EvalStatus::SingularAtOrBefore,
        });
    }
    let a = lu.solve(&sys.rhs());
    // Valid solutions of the path system are strictly positive for x > 0;
    // a non-positive component means x is at or past the first singularity.
    if x > 0.0 && a.iter().any(|&v| v <= 0.0) {
        return Ok(GenFunEval {
            x,
            phi: f64::NAN,
            a,
            det_m,
            status: EvalStatus::SingularAtOrBefore,
        });
    }
    let mut phi = sys.a(0, 0);
    for j in 1..=m {
        phi += sys.a(0, j) * a[j - 1];
    }
    Ok(GenFunEval {
        x,
        phi,
        a,
        det_m,
        status: EvalStatus::InDomain,
    })
}

/// `det M(x)`, for singularity scans.
pub fn det_m(q: &QuotientGraph, x: f64, tol: f64) -> Result<f64, SeriesError> {
    let sys = assemble(q, x, tol)?;
    Ok(Lu::factor(&sys.m_matrix(), sys.m).det())
}

/// Evaluate `phi` over a grid of points. Runs data-parallel when the
/// `parallel` feature is enabled; output order matches the input order.
pub fn phi_grid(q: &QuotientGraph, xs: &[f64], tol: f64) -> Vec<Result<GenFunEval, GenFunError>> {
    crate::par::map(xs, |&x| solve_phi(q, x, tol))
}

/// The pieces of the closed-form evaluation: the constrained block and the
/// four aggregates built from its inverse.
#[derive(Debug, Clone)]
pub struct ClosedFormParts {
    pub ell: usize,
    /// Row-major ell x ell constrained block of M.
    pub c_matrix: Vec<f64>,
    pub det_c: f64,
    /// Sum of alpha over free classes except the last.
    pub zeta: f64,
    /// alpha of the last free class (zero when every class is constrained).
    pub alpha_m: f64,
    /// Per constrained class i: weight of its followers among free classes.
    pub free_follow: Vec<f64>,
    /// Root's follower weight among free classes.
    pub free_follow_root: f64,
    /// Aggregate over constrained classes reachable from the root.
    pub alpha_h_root: f64,
    /// Aggregate over all constrained classes.
    pub alpha_h_all: f64,
    /// Return-weight aggregate over all constrained classes.
    pub sigma_h: f64,
    /// Generating function of cycles confined to constrained classes.
    pub phi_confined: f64,
}

/// Build the closed-form pieces at `x`.
pub fn closed_form_parts(
    q: &QuotientGraph,
    x: f64,
    tol: f64,
) -> Result<ClosedFormParts, GenFunError> {
    let sys = assemble(q, x, tol)?;
    let m = sys.m;
    let ell = q.ell;

    let mut c_matrix = vec![0.0; ell * ell];
    for i in 1..=ell {
        for j in 1..=ell {
            c_matrix[(i - 1) * ell + (j - 1)] = sys.a(i, j) - if i == j { 1.0 } else { 0.0 };
        }
    }
    let lu = Lu::factor(&c_matrix, ell);
    let det_c = lu.det();
    if lu.is_singular() {
        return Err(GenFunError::CSingular { x });
    }
    let inv_rows = lu.inverse_rows();

    let zeta: f64 = if m > ell {
        (ell + 1..m).map(|i| sys.alpha[i - 1].value).sum()
    } else {
        0.0
    };
    let alpha_m = if m > ell { sys.alpha[m - 1].value } else { 0.0 };

    // Follower weight among free classes (indices > ell); the root class is
    // never counted here.
    let free_weight = |i: usize| -> f64 {
        (ell + 1..=m)
            .filter(|&t| q.adjacency[i][t])
            .map(|t| sys.alpha[t - 1].value)
            .sum()
    };
    let free_follow: Vec<f64> = (1..=ell).map(free_weight).collect();
    let free_follow_root = free_weight(0);

    // b_j = -alpha_j * free_follow_j ; c_j = -alpha_{j0}.
    let b: Vec<f64> = (1..=ell)
        .map(|j| -sys.alpha[j - 1].value * free_follow[j - 1])
        .collect();
    let c: Vec<f64> = (1..=ell).map(|j| -sys.a(j, 0)).collect();

    let dot = |row: &[f64], v: &[f64]| -> f64 { row.iter().zip(v).map(|(a, b)| a * b).sum() };

    let mut alpha_h_root = 0.0;
    let mut alpha_h_all = 0.0;
    let mut sigma_h = 0.0;
    let mut confined = 0.0;
    for i in 1..=ell {
        let row = &inv_rows[i - 1];
        alpha_h_all += dot(row, &b);
        sigma_h += dot(row, &c);
        if q.adjacency[0][i] {
            alpha_h_root += dot(row, &b);
            confined += dot(row, &c);
        }
    }
    let phi_confined = sys.alpha_root * confined + sys.a(0, 0);

    Ok(ClosedFormParts {
        ell,
        c_matrix,
        det_c,
        zeta,
        alpha_m,
        free_follow,
        free_follow_root,
        alpha_h_root,
        alpha_h_all,
        sigma_h,
        phi_confined,
    })
}

/// Evaluate `phi(x)` through the closed form. Requires the validity
/// condition `1 - zeta - alpha_m - alpha_h_all > 0`.
///
/// With no constrained classes this degenerates to the complete-graph form
/// `x^{f(w)} / (1 + x^{f(w)} - F(x))`; with every class constrained it
/// reduces to inverting `C = M` directly.
pub fn phi_closed_form(q: &QuotientGraph, x: f64, tol: f64) -> Result<f64, GenFunError> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let parts = closed_form_parts(q, x, tol)?;
    let denom = 1.0 - parts.zeta - parts.alpha_m - parts.alpha_h_all;
    if denom <= 0.0 {
        return Err(GenFunError::ConditionViolated { x, denom });
    }
    let root_w = x.powf(q.root_height);
    Ok(root_w * (parts.free_follow_root + parts.alpha_h_root) * (parts.sigma_h + 1.0) / denom
        + parts.phi_confined)
}

/// Both sides of the determinant identity
/// `det M / ((-1)^{m-ell} det C) = 1 - zeta - alpha_m - alpha_h_all`.
pub fn det_identity(q: &QuotientGraph, x: f64, tol: f64) -> Result<(f64, f64), GenFunError> {
    let sys = assemble(q, x, tol)?;
    let parts = closed_form_parts(q, x, tol)?;
    let det_m = Lu::factor(&sys.m_matrix(), sys.m).det();
    let sign = if (sys.m - parts.ell) % 2 == 0 { 1.0 } else { -1.0 };
    let lhs = det_m / (sign * parts.det_c);
    let rhs = 1.0 - parts.zeta - parts.alpha_m - parts.alpha_h_all;
    Ok((lhs, rhs))
}

/// Evaluate `phi(x)` through the vertex-level resolvent form, available when
/// the specification is a complete graph minus a finite exception set.
///
/// The constrained vertices (those with a missing out-edge, root excluded)
/// form a finite sub-graph; `(Id - B)^{-1}` over that sub-graph plays the
/// role of the class-level inverse of `-C`.
pub fn phi_local_perturbation(
    spec: &RftSpec,
    w: &str,
    x: f64,
    tol: f64,
) -> Result<f64, GenFunError> {
    if spec.edges.mode != EdgeMode::CompleteMinusD {
        return Err(GenFunError::NotLocalPerturbation);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let fw = spec
        .height_of_label(w)
        .ok_or(ModelError::RootNotFound(w.to_string()))?;
    let root_w = x.powf(fw);

    // D references named vertices only in this mode; it is a set, so
    // repeated pairs in the declaration collapse.
    let mut forb: Vec<(&str, &str)> = Vec::new();
    for (a, b) in &spec.edges.forbidden {
        match (a, b) {
            (VertexRef::Label(a), VertexRef::Label(b)) => forb.push((a, b)),
            _ => return Err(GenFunError::NotLocalPerturbation),
        }
    }
    forb.sort_unstable();
    forb.dedup();
    let edge = |a: &str, b: &str| !forb.iter().any(|&(u, v)| u == a && v == b);

    // Constrained vertices: sources of exceptions, root split off.
    let mut out_deficient: Vec<&str> = Vec::new();
    for (a, _) in &forb {
        if !out_deficient.contains(a) {
            out_deficient.push(a);
        }
    }
    let u: Vec<&str> = out_deficient.iter().copied().filter(|&v| v != w).collect();
    let uh: Vec<f64> = u
        .iter()
        .map(|v| spec.height_of_label(v).expect("named exception vertex"))
        .collect();
    let n = u.len();

    let f_all = series::f_series(spec, x, tol)?.value;
    // Weight of the unconstrained rest: everything outside U and the root.
    let mut rest = f_all - root_w;
    for h in &uh {
        rest -= x.powf(*h);
    }

    // Resolvent (Id - B)^{-1} over U, B_{vv'} = x^{f(v)} when (v,v') is kept.
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let b = if edge(u[i], u[j]) { x.powf(uh[i]) } else { 0.0 };
            p[i * n + j] = if i == j { 1.0 - b } else { -b };
        }
    }
    let lu = Lu::factor(&p, n);
    if lu.is_singular() {
        return Err(GenFunError::CSingular { x });
    }
    let resolvent = lu.inverse_rows();

    // Follower weight of a vertex among the unconstrained rest: subtract the
    // exception targets that would otherwise be counted.
    let follow_rest = |v: &str| -> f64 {
        let mut s = rest;
        for &(a, t) in &forb {
            if a == v && t != w && !u.contains(&t) {
                s -= x.powf(spec.height_of_label(t).expect("named exception vertex"));
            }
        }
        s
    };

    let mut alpha_num = 0.0; // over v' in U followed by the root
    let mut alpha_den = 0.0; // over all v' in U
    let mut sigma = 0.0;
    let mut confined = 0.0;
    for i in 0..n {
        for j in 0..n {
            let term = resolvent[i][j] * x.powf(uh[j]);
            let fr = follow_rest(u[j]);
            alpha_den += term * fr;
            sigma += term * if edge(u[j], w) { 1.0 } else { 0.0 };
            if edge(w, u[i]) {
                alpha_num += term * fr;
                confined += term * if edge(u[j], w) { 1.0 } else { 0.0 };
            }
        }
    }
    let phi_confined = root_w * confined + if edge(w, w) { root_w } else { 0.0 };

    let denom = 1.0 - rest - alpha_den;
    if denom <= 0.0 {
        return Err(GenFunError::PerturbationDenominator { x });
    }
    Ok(phi_confined + root_w * (follow_rest(w) + alpha_num) * (1.0 + sigma) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_spec;
    use crate::quotient::build_quotient;

    const EX1: &str = "
class head finite { 3: 2*ln(3.75) }
class mid finite { 4: 2*ln(5), 5: 2*ln(6.25) }
class tail family k from 6 height 2*ln(1.25*k)
edges complete_minus_D
forbid { (3,3), (3,4), (3,5), (4,3), (5,3) }
root 3
";

    fn full_shift(n: usize) -> RftSpec {
        let body = (0..n)
            .map(|i| format!("v{i}: 1"))
            .collect::<Vec<_>>()
            .join(", ");
        parse_spec(&format!(
            "class all finite {{ {body} }}\nedges complete_minus_D\nroot v0\n"
        ))
        .unwrap()
    }

    /// Direct evaluation of the quotient-free reference formula for the
    /// geodesic-style example:
    /// x^{f(3)} (F - x^{f3} - x^{f4} - x^{f5})(1 - x^{f4} - x^{f5}) / (1 + x^{f3} - F).
    fn ex1_reference(spec: &RftSpec, x: f64) -> f64 {
        let f3 = 2.0 * 3.75f64.ln();
        let f4 = 2.0 * 5.0f64.ln();
        let f5 = 2.0 * 6.25f64.ln();
        let f = series::f_series(spec, x, 1e-13).unwrap().value;
        let (t3, t4, t5) = (x.powf(f3), x.powf(f4), x.powf(f5));
        t3 * (f - t3 - t4 - t5) * (1.0 - t4 - t5) / (1.0 + t3 - f)
    }

    #[test]
    fn assemble_matches_structure() {
        let spec = parse_spec(EX1).unwrap();
        let q = build_quotient(&spec, "3").unwrap();
        let sys = assemble(&q, 0.3, 1e-12).unwrap();
        assert_eq!(sys.m, 2);
        // alpha_{11} = alpha_{12} = x^{f4} + x^{f5}; alpha_{10} = 0;
        // alpha_{20} = x^{f3} collapses into the a() accessor.
        let a11 = sys.a(1, 1);
        let expect = 0.3f64.powf(2.0 * 5.0f64.ln()) + 0.3f64.powf(2.0 * 6.25f64.ln());
        assert!((a11 - expect).abs() < 1e-14);
        assert_eq!(sys.a(1, 1), sys.a(1, 2));
        assert_eq!(sys.a(1, 0), 0.0);
        assert!(sys.a(2, 0) > 0.0);
        assert_eq!(sys.a(0, 1), 0.0);
        assert!(sys.a(0, 2) > 0.0);
    }

    #[test]
    fn zero_point_system_is_minus_identity() {
        let spec = parse_spec(EX1).unwrap();
        let q = build_quotient(&spec, "3").unwrap();
        let sys = assemble(&q, 0.0, 1e-12).unwrap();
        let m = sys.m_matrix();
        assert_eq!(m, vec![-1.0, 0.0, 0.0, -1.0]);
        let eval = solve_phi(&q, 0.0, 1e-12).unwrap();
        assert_eq!(eval.status, EvalStatus::InDomain);
        assert_eq!(eval.phi, 0.0);
        assert!(eval.a.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn complete_graph_has_closed_phi() {
        // phi = x / (1 - (n-1) x) for unit heights.
        for n in 2..=5usize {
            let spec = full_shift(n);
            let q = build_quotient(&spec, "v0").unwrap();
            for &x in &[0.05, 0.1, 0.2] {
                if x >= 1.0 / (n as f64 - 1.0) {
                    continue;
                }
                let eval = solve_phi(&q, x, 1e-12).unwrap();
                assert_eq!(eval.status, EvalStatus::InDomain);
                let expect = x / (1.0 - (n as f64 - 1.0) * x);
                assert!((eval.phi - expect).abs() < 1e-12, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn reference_formula_agrees_with_all_paths() {
        let spec = parse_spec(EX1).unwrap();
        let q = build_quotient(&spec, "3").unwrap();
        for i in 1..=12 {
            let x = 0.035 * i as f64; // stays inside the domain (~0.487)
            let reference = ex1_reference(&spec, x);
            let lin = solve_phi(&q, x, 1e-13).unwrap();
            assert_eq!(lin.status, EvalStatus::InDomain);
            let closed = phi_closed_form(&q, x, 1e-13).unwrap();
            let pert = phi_local_perturbation(&spec, "3", x, 1e-13).unwrap();
            assert!((lin.phi - reference).abs() < 1e-10, "x={x}");
            assert!((closed - reference).abs() < 1e-10, "x={x}");
            assert!((pert - reference).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn empty_exception_set_reduces_to_complete_form() {
        let spec = full_shift(4);
        let x = 0.2;
        let pert = phi_local_perturbation(&spec, "v0", x, 1e-12).unwrap();
        assert!((pert - x / (1.0 - 3.0 * x)).abs() < 1e-13);
        let q = build_quotient(&spec, "v0").unwrap();
        assert_eq!(q.ell, 0);
        let closed = phi_closed_form(&q, x, 1e-12).unwrap();
        assert!((closed - x / (1.0 - 3.0 * x)).abs() < 1e-13);
    }

    #[test]
    fn pairs_mode_is_rejected_by_perturbation_path() {
        let spec = parse_spec(
            "class a finite { a: 1 }\nclass b finite { b: 1 }\nedges pairs { (a,b), (b,a) }\nroot a\n",
        )
        .unwrap();
        assert!(matches!(
            phi_local_perturbation(&spec, "a", 0.3, 1e-12),
            Err(GenFunError::NotLocalPerturbation)
        ));
    }

    #[test]
    fn det_identity_at_zero_is_one() {
        let spec = parse_spec(EX1).unwrap();
        let q = build_quotient(&spec, "3").unwrap();
        let (lhs, rhs) = det_identity(&q, 0.0, 1e-12).unwrap();
        assert!((lhs - 1.0).abs() < 1e-15);
        assert!((rhs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn det_identity_holds_in_domain() {
        let spec = parse_spec(EX1).unwrap();
        let q = build_quotient(&spec, "3").unwrap();
        let (lhs, rhs) = det_identity(&q, 0.3, 1e-13).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn diagonal_entries_stay_below_one_in_domain() {
        let spec = parse_spec(EX1).unwrap();
        let q = build_quotient(&spec, "3").unwrap();
        for i in 1..=12 {
            let x = 0.035 * i as f64;
            let eval = solve_phi(&q, x, 1e-12).unwrap();
            if eval.status != EvalStatus::InDomain {
                continue;
            }
            let sys = assemble(&q, x, 1e-12).unwrap();
            for d in 1..=sys.m {
                let a = sys.a(d, d);
                assert!(a == 0.0 || a < 1.0, "x={x} d={d}");
            }
        }
    }

    #[test]
    fn beyond_radius_is_flagged() {
        let spec = parse_spec(EX1).unwrap();
        let q = build_quotient(&spec, "3").unwrap();
        let r = series::radius_of_quotient(&q).exact.unwrap();
        let eval = solve_phi(&q, r + 0.05, 1e-9).unwrap();
        assert_eq!(eval.status, EvalStatus::BeyondSeriesRadius);
    }

    #[test]
    fn past_singularity_is_flagged() {
        // Full 3-shift: det M = 2x - 1 vanishes at 1/2.
        let spec = full_shift(3);
        let q = build_quotient(&spec, "v0").unwrap();
        let eval = solve_phi(&q, 0.75, 1e-12).unwrap();
        assert_eq!(eval.status, EvalStatus::SingularAtOrBefore);
    }
}
