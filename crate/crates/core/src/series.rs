//! Weight series with rigorous truncation bounds.
//!
//! For a vertex class `V_i` the engine evaluates the series
//! `alpha_i(x) = sum_{v in V_i} x^{f(v)}` at a query point `x` in `[0, 1)`,
//! returning a value together with a non-negative bound on the omitted tail,
//! and computes the radius of convergence of the full vertex series
//! `F(x) = sum_v x^{f(v)}`.
//!
//! Tail strategy, in order of preference:
//!
//! 1. Recognized shapes get analytic tails. Heights `A*ln(k) + B` with
//!    monomial multiplicities produce generalized zeta sums, handled by
//!    Euler-Maclaurin with an explicit remainder bound. Affine heights
//!    `a*k + b` with exponential-type multiplicities produce geometrically
//!    dominated sums, handled by envelope ratio bounds that stay valid
//!    arbitrarily close to (and for sub-exponential factors decaying faster
//!    than 1/k, exactly at) the radius.
//! 2. Everything else falls back to an eventual-ratio test verified
//!    numerically with a safety margin, or fails loudly.
//!
//! The reported interval is one-sided: the true series value lies in
//! `[value, value + tail_bound]` (up to floating-point rounding).

use crate::expr::{ExpMonomial, ExprError, WeightExpr};
use crate::model::{ClassDecl, ClassKind, RftSpec};
use crate::quotient::{QAtom, QuotientGraph};
use thiserror::Error;

/// Default absolute tolerance for series truncation.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Hard cap on summed terms per series evaluation.
pub const MAX_TERMS: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("series diverges at x = {x}")]
    Divergent { x: f64 },
    #[error("ratio test inconclusive at x = {x} within the iteration budget")]
    Inconclusive { x: f64 },
    #[error("term evaluation overflowed at k = {k}")]
    Overflow { k: i64 },
    #[error("term budget exceeded at x = {x}")]
    Budget { x: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// A partial sum paired with a rigorous upper bound on the omitted tail:
/// the true value lies in `[value, value + tail_bound]`.
///
/// For zeta-shaped tails the value already contains an Euler-Maclaurin
/// estimate of the remainder and `tail_bound` brackets only the estimate's
/// error; for geometric tails the value is the bare partial sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
}

impl SeriesValue {
    pub const ZERO: SeriesValue = SeriesValue {
        value: 0.0,
        tail_bound: 0.0,
    };

    pub fn exact(value: f64) -> SeriesValue {
        SeriesValue {
            value,
            tail_bound: 0.0,
        }
    }

}

impl std::ops::Add for SeriesValue {
    type Output = SeriesValue;

    fn add(self, other: SeriesValue) -> SeriesValue {
        SeriesValue {
            value: self.value + other.value,
            tail_bound: self.tail_bound + other.tail_bound,
        }
    }
}

/// Bracketing of a radius of convergence. `exact` is populated when the
/// family shape is recognized analytically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusEstimate {
    pub lower: f64,
    pub upper: f64,
    pub exact: Option<f64>,
}

impl RadiusEstimate {
    pub fn unconstrained() -> RadiusEstimate {
        RadiusEstimate {
            lower: f64::INFINITY,
            upper: f64::INFINITY,
            exact: Some(f64::INFINITY),
        }
    }

    pub fn is_unconstrained(&self) -> bool {
        self.lower.is_infinite()
    }

    /// Value safe to treat as the radius: the exact value when known, the
    /// certified lower bound otherwise.
    pub fn safe(&self) -> f64 {
        self.exact.unwrap_or(self.lower)
    }

    fn min(self, other: RadiusEstimate) -> RadiusEstimate {
        let lower = self.lower.min(other.lower);
        let upper = self.upper.min(other.upper);
        let exact = match (self.exact, other.exact) {
            (Some(a), _) if a <= other.lower => Some(a),
            (_, Some(b)) if b <= self.lower => Some(b),
            _ => None,
        };
        RadiusEstimate { lower, upper, exact }
    }
}

/// Behavior of a family series at its own radius of convergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryBehavior {
    Diverges,
    ConvergesFinite,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
enum FamilyShape {
    /// g(k) = A ln k + B with m(k) = c k^p exactly.
    LogPoly { a: f64, b: f64, m_coeff: f64, m_pow: f64 },
    /// g(k) = a k + b (a > 0) with multiplicity envelope `env`.
    ExpPoly { a: f64, b: f64, env: ExpMonomial },
    /// Heights bounded or decreasing: diverges for every x > 0.
    DivergentEverywhere,
    General,
}

/// An infinite vertex family ready for evaluation: start index, height and
/// multiplicity formulas, plus the recognized asymptotic shape.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyDef {
    pub name: String,
    pub k0: i64,
    pub height: WeightExpr,
    pub mult: Option<WeightExpr>,
    shape: FamilyShape,
}

impl FamilyDef {
    pub fn new(name: String, k0: i64, height: WeightExpr, mult: Option<WeightExpr>) -> FamilyDef {
        let shape = recognize(&height, &mult);
        FamilyDef {
            name,
            k0,
            height,
            mult,
            shape,
        }
    }

    fn mult_at(&self, k: i64) -> Result<f64, ExprError> {
        match &self.mult {
            None => Ok(1.0),
            Some(m) => m.eval(k),
        }
    }

    /// Radius of convergence of `sum_k m(k) x^{g(k)}`.
    pub fn radius(&self) -> RadiusEstimate {
        match &self.shape {
            FamilyShape::LogPoly { a, m_pow, .. } => {
                let r = (-(1.0 + m_pow) / a).exp();
                RadiusEstimate {
                    lower: r,
                    upper: r,
                    exact: Some(r),
                }
            }
            FamilyShape::ExpPoly { a, env, .. } => {
                let r = env.base.powf(-1.0 / a);
                if env.upper_only {
                    // The envelope over-counts, so the true radius is >= r.
                    RadiusEstimate {
                        lower: r,
                        upper: 1.0f64.max(r),
                        exact: None,
                    }
                } else {
                    RadiusEstimate {
                        lower: r,
                        upper: r,
                        exact: Some(r),
                    }
                }
            }
            FamilyShape::DivergentEverywhere => RadiusEstimate {
                lower: 0.0,
                upper: 0.0,
                exact: Some(0.0),
            },
            FamilyShape::General => self.bracket_radius(),
        }
    }

    /// Behavior at the radius itself, certified only for recognized shapes.
    pub fn boundary_behavior(&self) -> BoundaryBehavior {
        match &self.shape {
            FamilyShape::LogPoly { .. } => BoundaryBehavior::Diverges,
            FamilyShape::ExpPoly { env, .. } => {
                if env.pow < -1.0 {
                    BoundaryBehavior::ConvergesFinite
                } else if !env.upper_only {
                    BoundaryBehavior::Diverges
                } else {
                    BoundaryBehavior::Unknown
                }
            }
            _ => BoundaryBehavior::Unknown,
        }
    }

    /// Evaluate the family series at `x`, skipping excluded indices.
    /// `at_boundary` permits evaluation at the radius itself when the tail
    /// decays like a convergent power series there.
    pub fn sum(
        &self,
        x: f64,
        exclude: &[i64],
        tol: f64,
        at_boundary: bool,
    ) -> Result<SeriesValue, SeriesError> {
        debug_assert!((0.0..=1.0).contains(&x));
        if x == 0.0 {
            return Ok(SeriesValue::ZERO);
        }
        match &self.shape {
            FamilyShape::LogPoly { a, b, m_coeff, m_pow } => {
                self.log_poly_sum(x, exclude, tol, *a, *b, *m_coeff, *m_pow)
            }
            FamilyShape::ExpPoly { a, b, env } => {
                self.exp_poly_sum(x, exclude, tol, *a, *b, *env, at_boundary)
            }
            FamilyShape::DivergentEverywhere => Err(SeriesError::Divergent { x }),
            FamilyShape::General => self.general_sum(x, exclude, tol),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn log_poly_sum(
        &self,
        x: f64,
        exclude: &[i64],
        tol: f64,
        a: f64,
        b: f64,
        m_coeff: f64,
        m_pow: f64,
    ) -> Result<SeriesValue, SeriesError> {
        // Terms are m_coeff * x^b * k^{-s} with s = -a ln x - m_pow.
        let s = -a * x.ln() - m_pow;
        if s <= 1.0 {
            return Err(SeriesError::Divergent { x });
        }
        let amp = m_coeff * x.powf(b);
        let max_excl = exclude.iter().copied().max().unwrap_or(i64::MIN);
        let mut cut = (self.k0 + 256).max(64).max(max_excl + 1);
        loop {
            let (tail_est, tail_err) = em_tail(cut as f64 + 1.0, s);
            if 2.0 * amp * tail_err <= tol || cut as usize > MAX_TERMS {
                let mut direct = 0.0;
                for k in self.k0..=cut {
                    if exclude.contains(&k) {
                        continue;
                    }
                    direct += (k as f64).powf(-s);
                }
                let value = amp * (direct + tail_est - tail_err);
                let tail_bound = 2.0 * amp * tail_err;
                if !value.is_finite() {
                    return Err(SeriesError::Overflow { k: cut });
                }
                return Ok(SeriesValue { value, tail_bound });
            }
            cut *= 2;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn exp_poly_sum(
        &self,
        x: f64,
        exclude: &[i64],
        tol: f64,
        a: f64,
        b: f64,
        env: ExpMonomial,
        at_boundary: bool,
    ) -> Result<SeriesValue, SeriesError> {
        let ln_x = x.ln();
        // Per-step geometric factor of the envelope.
        let ln_q = env.base.ln() + a * ln_x;
        let q = ln_q.exp();
        let boundary_ok = at_boundary && env.pow < -1.0;
        if q >= 1.0 - 1e-12 && !(boundary_ok && q <= 1.0 + 1e-12) {
            return Err(SeriesError::Divergent { x });
        }
        let amp = env.coeff * (b * ln_x).exp();
        // Envelope term at index k (= m_env(k) x^{g(k)}), in log space.
        let env_at = |k: f64| amp * (k * ln_q + env.pow * k.ln()).exp();
        // Upper bound for the envelope tail starting at index j.
        let tail_from = |j: f64| -> f64 {
            let mut best = f64::INFINITY;
            if q < 1.0 {
                let qj = if env.pow > 0.0 {
                    q * (1.0 + 1.0 / j).powf(env.pow)
                } else {
                    q
                };
                if qj < 1.0 {
                    best = env_at(j) / (1.0 - qj);
                }
            }
            if env.pow < -1.0 {
                // sum_{i>=j} i^pow <= j^pow + j^{pow+1}/(-pow-1), times q^j.
                let p = env.pow;
                let power = amp
                    * (j * ln_q.min(0.0)).exp()
                    * (j.powf(p) + j.powf(p + 1.0) / (-p - 1.0));
                best = best.min(power);
            }
            best
        };

        let mut sum = 0.0;
        // Accumulated slack from switching to the envelope once the raw
        // multiplicity overflows f64.
        let mut slack = 0.0;
        let mut k = self.k0;
        let mut terms = 0usize;
        loop {
            if !exclude.contains(&k) {
                let g = self.height.eval(k)?;
                match self.mult_at(k) {
                    Ok(mv) if mv.is_finite() => {
                        let t = mv * (g * ln_x).exp();
                        if t.is_finite() {
                            sum += t;
                        } else {
                            return Err(SeriesError::Overflow { k });
                        }
                    }
                    Err(ExprError::NonFinite { .. }) if !env.upper_only && env.floors <= 1 => {
                        // The multiplicity no longer fits in f64, but the
                        // envelope matches it up to at most one dropped
                        // floor: keep the sum a lower bound and book the
                        // floor slack x^{g(k)} into the tail.
                        let e = env_at(k as f64);
                        if env.floors == 1 {
                            let s = (g * ln_x).exp();
                            sum += (e - s).max(0.0);
                            slack += s;
                        } else {
                            sum += e;
                        }
                    }
                    Err(ExprError::NonFinite { .. }) => {
                        // Loose envelope: put the whole remainder in the tail.
                        return Ok(SeriesValue {
                            value: sum,
                            tail_bound: tail_from(k as f64) + slack,
                        });
                    }
                    Err(e) => return Err(e.into()),
                    Ok(_) => return Err(SeriesError::Overflow { k }),
                }
            }
            let t = tail_from(k as f64 + 1.0);
            if t + slack <= tol {
                return Ok(SeriesValue {
                    value: sum,
                    tail_bound: t + slack,
                });
            }
            k += 1;
            terms += 1;
            if terms > MAX_TERMS {
                return Err(SeriesError::Budget { x });
            }
        }
    }

    fn general_sum(&self, x: f64, exclude: &[i64], tol: f64) -> Result<SeriesValue, SeriesError> {
        const CAP: usize = 2_000_000;
        let ln_x = x.ln();
        let mut sum = 0.0;
        let mut last_pos: Option<f64> = None;
        // Recent ratios between consecutive positive terms; the eventual
        // geometric bound comes from their maximum plus a safety margin.
        let mut window: std::collections::VecDeque<f64> = std::collections::VecDeque::new();
        let mut rising = 0usize;
        for (step, k) in (self.k0..).enumerate().take(CAP) {
            if !exclude.contains(&k) {
                let g = self.height.eval(k)?;
                let m = self.mult_at(k)?;
                let t = m * (g * ln_x).exp();
                if !m.is_finite() || !t.is_finite() {
                    return Err(SeriesError::Overflow { k });
                }
                sum += t;
                if t > 0.0 {
                    if let Some(p) = last_pos {
                        let r = t / p;
                        window.push_back(r);
                        if window.len() > 16 {
                            window.pop_front();
                        }
                        rising = if r > 1.0 { rising + 1 } else { 0 };
                    }
                    last_pos = Some(t);
                }
                if window.len() >= 16 || (step > 256 && window.len() >= 4) {
                    let q = window.iter().cloned().fold(0.0f64, f64::max) * 1.05 + 1e-9;
                    if q < 1.0 {
                        let tail = last_pos.unwrap_or(0.0) * q / (1.0 - q);
                        if tail <= tol {
                            return Ok(SeriesValue {
                                value: sum,
                                tail_bound: tail,
                            });
                        }
                    }
                }
                if rising > 512 && sum > 1e9 {
                    return Err(SeriesError::Divergent { x });
                }
            }
        }
        Err(SeriesError::Inconclusive { x })
    }

    /// Numeric convergence verdict at a single point, by inspecting term
    /// ratios over a bounded window. Certifies only what it can see;
    /// ambiguous behavior stays `Unknown` so radius brackets never lie.
    fn probe_convergence(&self, x: f64) -> Probe {
        if x <= 0.0 {
            return Probe::Convergent;
        }
        let ln_x = x.ln();
        let mut prev: Option<f64> = None;
        let mut window: Vec<f64> = Vec::new();
        const STEPS: usize = 20_000;
        const WINDOW: usize = 64;
        for k in (self.k0..).take(STEPS) {
            let t = match (self.height.eval(k), self.mult_at(k)) {
                (Ok(g), Ok(m)) => {
                    let t = m * (g * ln_x).exp();
                    if !t.is_finite() {
                        return Probe::Divergent;
                    }
                    t
                }
                _ => return Probe::Unknown,
            };
            if t > 1e12 {
                return Probe::Divergent;
            }
            if let Some(p) = prev {
                if p > 0.0 && t > 0.0 {
                    window.push(t / p);
                    if window.len() > WINDOW {
                        window.remove(0);
                    }
                }
            }
            if t > 0.0 {
                prev = Some(t);
            }
        }
        if window.len() < WINDOW / 2 {
            return Probe::Unknown;
        }
        let max_r = window.iter().cloned().fold(0.0f64, f64::max);
        let min_r = window.iter().cloned().fold(f64::INFINITY, f64::min);
        if max_r < 1.0 - 1e-7 {
            Probe::Convergent
        } else if min_r > 1.0 + 1e-9 {
            Probe::Divergent
        } else {
            Probe::Unknown
        }
    }

    /// Numeric bracket of the radius for unrecognized shapes: bisect between
    /// the largest x certified convergent and the smallest certified
    /// divergent, stopping as soon as a probe is ambiguous.
    fn bracket_radius(&self) -> RadiusEstimate {
        let mut lo = 0.0f64;
        let mut hi = f64::INFINITY;
        // Anything beyond x = 1 is outside the entropy-relevant range, so a
        // certified divergence just past it is ceiling enough.
        if self.probe_convergence(1.25) == Probe::Divergent {
            hi = 1.25;
        }
        if hi.is_finite() {
            for _ in 0..48 {
                if hi - lo < 1e-9 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                match self.probe_convergence(mid) {
                    Probe::Convergent => lo = mid,
                    Probe::Divergent => hi = mid,
                    Probe::Unknown => break,
                }
            }
        }
        if lo == 0.0 {
            for x in [1.0 - 1e-9, 0.99, 0.9, 0.5, 0.25, 0.1, 0.01] {
                if x < hi && self.probe_convergence(x) == Probe::Convergent {
                    lo = x;
                    break;
                }
            }
        }
        RadiusEstimate {
            lower: lo,
            upper: hi,
            exact: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Probe {
    Convergent,
    Divergent,
    Unknown,
}

fn recognize(height: &WeightExpr, mult: &Option<WeightExpr>) -> FamilyShape {
    let menv = match mult {
        None => Some(ExpMonomial {
            coeff: 1.0,
            base: 1.0,
            pow: 0.0,
            floors: 0,
            upper_only: false,
        }),
        Some(m) => m.as_exp_monomial(),
    };

    if height.as_constant().is_some() {
        // Infinitely many vertices with bounded heights.
        return FamilyShape::DivergentEverywhere;
    }
    if let Some((a, b)) = height.as_affine() {
        if a > 0.0 {
            if let Some(env) = menv {
                if env.coeff > 0.0 && env.base > 0.0 {
                    return FamilyShape::ExpPoly { a, b, env };
                }
            }
            return FamilyShape::General;
        }
        return FamilyShape::DivergentEverywhere;
    }
    if let Some((a, b)) = height.as_log_affine() {
        if a <= 0.0 {
            return FamilyShape::DivergentEverywhere;
        }
        if let Some(env) = menv {
            if env.base > 1.0 + 1e-12 && !env.upper_only {
                // Exponentially many vertices of logarithmically growing
                // height: divergent for every positive x.
                return FamilyShape::DivergentEverywhere;
            }
            if (env.base - 1.0).abs() <= 1e-12 && env.floors == 0 && !env.upper_only {
                return FamilyShape::LogPoly {
                    a,
                    b,
                    m_coeff: env.coeff,
                    m_pow: env.pow,
                };
            }
        }
        return FamilyShape::General;
    }
    FamilyShape::General
}

/// Euler-Maclaurin tail `sum_{k >= a} k^{-s}` with an explicit remainder
/// bound: returns (estimate, error bound). Valid for s > 1, a >= 2.
fn em_tail(a: f64, s: f64) -> (f64, f64) {
    let int = a.powf(1.0 - s) / (s - 1.0);
    let half = 0.5 * a.powf(-s);
    let d1 = s * a.powf(-s - 1.0) / 12.0;
    let d3 = s * (s + 1.0) * (s + 2.0) * a.powf(-s - 3.0) / 720.0;
    let est = int + half + d1 - d3;
    // First omitted correction bounds the remainder for the completely
    // monotone integrand t^{-s}.
    let err = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * a.powf(-s - 5.0) / 30240.0;
    (est, err)
}

/// Class series `alpha_i(x)` for a declared class.
pub fn alpha(class: &ClassDecl, x: f64, tol: f64) -> Result<SeriesValue, SeriesError> {
    debug_assert!((0.0..=1.0).contains(&x));
    match &class.kind {
        ClassKind::Finite(vs) => {
            let mut v = 0.0;
            for fv in vs {
                v += x.powf(fv.height);
            }
            Ok(SeriesValue::exact(v))
        }
        ClassKind::Family { k0, height, mult } => {
            let fam = FamilyDef::new(class.name.clone(), *k0, height.clone(), mult.clone());
            fam.sum(x, &[], tol, false)
        }
    }
}

/// The full vertex series `F(x) = sum_v x^{f(v)}`.
pub fn f_series(spec: &RftSpec, x: f64, tol: f64) -> Result<SeriesValue, SeriesError> {
    let per = tol / spec.classes.len() as f64;
    let mut acc = SeriesValue::ZERO;
    for class in &spec.classes {
        acc = acc + alpha(class, x, per)?;
    }
    Ok(acc)
}

/// Radius of convergence of `F`: the minimum of the family radii. Finite
/// classes impose no constraint; an all-finite specification reports an
/// unconstrained radius (the entropy solver caps its search at 1).
pub fn radius_f(spec: &RftSpec) -> RadiusEstimate {
    let mut r = RadiusEstimate::unconstrained();
    for class in &spec.classes {
        if let ClassKind::Family { k0, height, mult } = &class.kind {
            let fam = FamilyDef::new(class.name.clone(), *k0, height.clone(), mult.clone());
            r = r.min(fam.radius());
        }
    }
    r
}

/// Radius of `F` computed from a quotient graph's family table.
pub fn radius_of_quotient(q: &QuotientGraph) -> RadiusEstimate {
    let mut r = RadiusEstimate::unconstrained();
    for fam in &q.families {
        r = r.min(fam.radius());
    }
    r
}

/// Weight series of one quotient class.
pub(crate) fn class_alpha(
    q: &QuotientGraph,
    i: usize,
    x: f64,
    tol: f64,
    at_boundary: bool,
) -> Result<SeriesValue, SeriesError> {
    let class = &q.classes[i];
    let infinite_atoms = class
        .atoms
        .iter()
        .filter(|a| matches!(a, QAtom::Tail { .. }))
        .count()
        .max(1);
    let per = tol / infinite_atoms as f64;
    let mut acc = SeriesValue::ZERO;
    for atom in &class.atoms {
        match atom {
            QAtom::Named { height, .. } => {
                acc = acc + SeriesValue::exact(x.powf(*height));
            }
            QAtom::Member { family, k } => {
                let fam = &q.families[*family];
                let g = fam.height.eval(*k)?;
                let m = fam.mult_at(*k)?;
                acc = acc + SeriesValue::exact(m * x.powf(g));
            }
            QAtom::Tail { family, exclude } => {
                let fam = &q.families[*family];
                acc = acc + fam.sum(x, exclude, per, at_boundary)?;
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, parse_spec};

    fn geodesic_tail() -> FamilyDef {
        FamilyDef::new(
            "tail".into(),
            6,
            parse_expr("2*ln(1.25*k)").unwrap(),
            None,
        )
    }

    fn star_family() -> FamilyDef {
        FamilyDef::new(
            "arms".into(),
            2,
            parse_expr("k").unwrap(),
            Some(parse_expr("floor(2^k / k^2)").unwrap()),
        )
    }

    #[test]
    fn log_family_matches_direct_summation() {
        // At x = e^{-1} the terms are (1.25 v)^{-2}; compare against a
        // 10^7-term direct sum bracketed by integral bounds.
        let fam = geodesic_tail();
        let x = (-1.0f64).exp();
        let sv = fam.sum(x, &[], 1e-12, false).unwrap();
        assert!(sv.tail_bound <= 1e-12);

        const N: i64 = 10_000_000;
        let mut direct = 0.0;
        for v in 6..=N {
            direct += 0.64 / ((v as f64) * (v as f64));
        }
        let rem_lo = 0.64 / (N as f64 + 1.0);
        let rem_hi = 0.64 / (N as f64);
        // True value lies in both enclosures; they must be consistent.
        assert!(sv.value <= direct + rem_hi + 1e-12);
        assert!(direct + rem_lo <= sv.value + sv.tail_bound + 1e-12);
        assert!((sv.value - 0.116047).abs() < 1e-6);
    }

    #[test]
    fn finite_class_is_exact() {
        let spec = parse_spec(
            "class mid finite { 4: 2*ln(5), 5: 2*ln(6.25) }\nedges complete_minus_D\nroot 4\n",
        )
        .unwrap();
        let sv = alpha(&spec.classes[0], 0.5, 1e-12).unwrap();
        let expect = 0.5f64.powf(2.0 * 5.0f64.ln()) + 0.5f64.powf(2.0 * 6.25f64.ln());
        assert_eq!(sv.tail_bound, 0.0);
        assert!((sv.value - expect).abs() < 1e-15);
    }

    #[test]
    fn zero_point_is_zero() {
        assert_eq!(geodesic_tail().sum(0.0, &[], 1e-12, false).unwrap(), SeriesValue::ZERO);
        assert_eq!(star_family().sum(0.0, &[], 1e-12, false).unwrap(), SeriesValue::ZERO);
    }

    #[test]
    fn log_family_radius_is_exact() {
        let r = geodesic_tail().radius();
        assert_eq!(r.exact, Some((-0.5f64).exp()));
    }

    #[test]
    fn star_family_radius_is_one_half() {
        let r = star_family().radius();
        assert_eq!(r.exact, Some(0.5));
        assert_eq!(star_family().boundary_behavior(), BoundaryBehavior::ConvergesFinite);
    }

    #[test]
    fn log_family_diverges_at_radius() {
        let fam = geodesic_tail();
        assert_eq!(fam.boundary_behavior(), BoundaryBehavior::Diverges);
        let r = fam.radius().exact.unwrap();
        assert!(matches!(
            fam.sum(r, &[], 1e-9, true),
            Err(SeriesError::Divergent { .. })
        ));
    }

    #[test]
    fn star_family_boundary_value() {
        // Value at the radius, checked against exact integer arithmetic: the
        // partial sum to k < 60 is a true lower bound, and terms beyond are
        // below k^{-2}, so the remainder past 59 is under 1/59.
        let fam = star_family();
        let sv = fam.sum(0.5, &[], 1e-5, true).unwrap();
        assert!(sv.tail_bound <= 1e-5);
        let mut direct = 0.0;
        for k in 2..60i64 {
            let m = ((1u128 << k) / (k as u128 * k as u128)) as f64;
            direct += m * 0.5f64.powi(k as i32);
        }
        assert!(direct <= sv.value + sv.tail_bound + 1e-12);
        assert!(sv.value <= direct + 1.0 / 59.0);
        // Exact-rational reference: 0.50659597586... for the inner sum.
        let reference = 0.506_595_975_860_494;
        assert!(sv.value <= reference + 1e-12);
        assert!(reference <= sv.value + sv.tail_bound + 1e-12);
    }

    #[test]
    fn geometric_tail_brackets_longer_direct_sums() {
        // value is the bare partial sum for geometric shapes, so a direct
        // sum with many more terms must land inside [value, value + tail].
        let fam = star_family();
        for &x in &[0.2, 0.35, 0.45] {
            let sv = fam.sum(x, &[], 1e-10, false).unwrap();
            let mut direct = 0.0;
            for k in 2..400i64 {
                let m = if k < 90 {
                    ((1u128 << k) / (k as u128 * k as u128)) as f64
                } else {
                    2f64.powi(k as i32) / ((k * k) as f64)
                };
                direct += m * x.powi(k as i32);
            }
            assert!(direct >= sv.value - 1e-15);
            assert!(direct <= sv.value + sv.tail_bound + 1e-15);
        }
    }

    #[test]
    fn monotone_in_x() {
        let fam = geodesic_tail();
        let mut prev = 0.0;
        for i in 1..=10 {
            let x = 0.05 * i as f64;
            let sv = fam.sum(x, &[], 1e-12, false).unwrap();
            assert!(sv.value + 1e-12 >= prev);
            prev = sv.value;
        }
    }

    #[test]
    fn excluded_indices_are_skipped() {
        let fam = geodesic_tail();
        let x = 0.4;
        let all = fam.sum(x, &[], 1e-13, false).unwrap();
        let cut = fam.sum(x, &[6, 7], 1e-13, false).unwrap();
        let t6 = x.powf(2.0 * (1.25 * 6.0f64).ln());
        let t7 = x.powf(2.0 * (1.25 * 7.0f64).ln());
        assert!((all.value - cut.value - t6 - t7).abs() < 1e-11);
    }

    #[test]
    fn all_finite_spec_is_unconstrained() {
        let spec = parse_spec(
            "class a finite { a: 1, b: 1 }\nedges complete_minus_D\nroot a\n",
        )
        .unwrap();
        let r = radius_f(&spec);
        assert!(r.is_unconstrained());
    }

    #[test]
    fn constant_height_family_has_radius_zero() {
        let fam = FamilyDef::new("flat".into(), 1, parse_expr("2").unwrap(), None);
        let r = fam.radius();
        assert_eq!(r.exact, Some(0.0));
        assert!(matches!(
            fam.sum(0.3, &[], 1e-9, false),
            Err(SeriesError::Divergent { .. })
        ));
    }

    #[test]
    fn quadratic_height_family_brackets_radius_one() {
        // Unrecognized shape: sum x^{k^2} converges for all x < 1 and
        // diverges beyond, so the numeric bracket must straddle 1.
        let fam = FamilyDef::new("sq".into(), 1, parse_expr("k^2").unwrap(), None);
        let r = fam.radius();
        assert!(r.exact.is_none());
        assert!(r.lower > 0.99 && r.lower <= 1.0);
        assert!(r.upper >= 1.0 - 1e-9);
        let sv = fam.sum(0.5, &[], 1e-12, false).unwrap();
        let direct: f64 = (1..40).map(|k| 0.5f64.powi(k * k)).sum();
        assert!((sv.value - direct).abs() <= sv.tail_bound + 1e-13);
    }
}
