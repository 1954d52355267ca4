//! Arithmetic expression trees over the family index `k`.
//!
//! Height and multiplicity formulas for infinite vertex families are small
//! closed-form expressions in one integer variable. The grammar is kept tiny
//! (literals, `k`, `+ - * / ^`, `ln`, `abs`, `floor`, `exp`) so that the
//! series engine can classify the asymptotic shape of a family symbolically.

use std::fmt;
use thiserror::Error;

/// Evaluation failure of a weight expression, reported with the index at
/// which it occurred.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("ln of a non-positive value at k = {k}")]
    LogDomain { k: i64 },
    #[error("division by zero at k = {k}")]
    DivisionByZero { k: i64 },
    #[error("expression is not finite at k = {k}")]
    NonFinite { k: i64 },
}

/// Expression tree over the index variable `k`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightExpr {
    Num(f64),
    Var,
    Neg(Box<WeightExpr>),
    Add(Box<WeightExpr>, Box<WeightExpr>),
    Sub(Box<WeightExpr>, Box<WeightExpr>),
    Mul(Box<WeightExpr>, Box<WeightExpr>),
    Div(Box<WeightExpr>, Box<WeightExpr>),
    Pow(Box<WeightExpr>, Box<WeightExpr>),
    Ln(Box<WeightExpr>),
    Abs(Box<WeightExpr>),
    Floor(Box<WeightExpr>),
    Exp(Box<WeightExpr>),
}

/// Multiplicative envelope `coeff * base^k * k^pow` for an expression.
///
/// `floors` counts absorbed `floor` applications: the true value lies below
/// the envelope but within a relative slack that vanishes as the floored
/// factors grow. `upper_only` marks envelopes obtained by dropping a
/// subtrahend; those bound the value from above but say nothing about how
/// tight the bound is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ExpMonomial {
    pub coeff: f64,
    pub base: f64,
    pub pow: f64,
    pub floors: u32,
    pub upper_only: bool,
}

impl WeightExpr {
    /// Evaluate at integer index `k`. Domain errors and non-finite results
    /// are reported, never silently propagated.
    pub fn eval(&self, k: i64) -> Result<f64, ExprError> {
        let v = self.eval_raw(k as f64, k)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::NonFinite { k })
        }
    }

    fn eval_raw(&self, kf: f64, k: i64) -> Result<f64, ExprError> {
        use WeightExpr::*;
        Ok(match self {
            Num(c) => *c,
            Var => kf,
            Neg(e) => -e.eval_raw(kf, k)?,
            Add(a, b) => a.eval_raw(kf, k)? + b.eval_raw(kf, k)?,
            Sub(a, b) => a.eval_raw(kf, k)? - b.eval_raw(kf, k)?,
            Mul(a, b) => a.eval_raw(kf, k)? * b.eval_raw(kf, k)?,
            Div(a, b) => {
                let d = b.eval_raw(kf, k)?;
                if d == 0.0 {
                    return Err(ExprError::DivisionByZero { k });
                }
                a.eval_raw(kf, k)? / d
            }
            Pow(a, b) => {
                let base = a.eval_raw(kf, k)?;
                let e = b.eval_raw(kf, k)?;
                // Integer exponents go through powi so that e.g. 2^k stays
                // exact for every representable power of two.
                if e.fract() == 0.0 && e.abs() <= 1024.0 {
                    base.powi(e as i32)
                } else {
                    base.powf(e)
                }
            }
            Ln(e) => {
                let v = e.eval_raw(kf, k)?;
                if v <= 0.0 {
                    return Err(ExprError::LogDomain { k });
                }
                v.ln()
            }
            Abs(e) => e.eval_raw(kf, k)?.abs(),
            Floor(e) => e.eval_raw(kf, k)?.floor(),
            Exp(e) => e.eval_raw(kf, k)?.exp(),
        })
    }

    pub fn contains_var(&self) -> bool {
        use WeightExpr::*;
        match self {
            Num(_) => false,
            Var => true,
            Neg(e) | Ln(e) | Abs(e) | Floor(e) | Exp(e) => e.contains_var(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => {
                a.contains_var() || b.contains_var()
            }
        }
    }

    /// The expression as a constant, when it does not mention `k`.
    pub fn as_constant(&self) -> Option<f64> {
        if self.contains_var() {
            return None;
        }
        self.eval(1).ok()
    }

    /// Decompose as `a*k + b`.
    pub(crate) fn as_affine(&self) -> Option<(f64, f64)> {
        use WeightExpr::*;
        match self {
            Num(c) => Some((0.0, *c)),
            Var => Some((1.0, 0.0)),
            Neg(e) => e.as_affine().map(|(a, b)| (-a, -b)),
            Add(l, r) => {
                let (la, lb) = l.as_affine()?;
                let (ra, rb) = r.as_affine()?;
                Some((la + ra, lb + rb))
            }
            Sub(l, r) => {
                let (la, lb) = l.as_affine()?;
                let (ra, rb) = r.as_affine()?;
                Some((la - ra, lb - rb))
            }
            Mul(l, r) => {
                if let Some(c) = l.as_constant() {
                    r.as_affine().map(|(a, b)| (c * a, c * b))
                } else if let Some(c) = r.as_constant() {
                    l.as_affine().map(|(a, b)| (c * a, c * b))
                } else {
                    None
                }
            }
            Div(l, r) => {
                let c = r.as_constant()?;
                if c == 0.0 {
                    return None;
                }
                l.as_affine().map(|(a, b)| (a / c, b / c))
            }
            _ => None,
        }
    }

    /// Decompose as `c * k^p` with `c > 0`.
    fn as_monomial(&self) -> Option<(f64, f64)> {
        use WeightExpr::*;
        match self {
            Num(c) if *c > 0.0 => Some((*c, 0.0)),
            Var => Some((1.0, 1.0)),
            Abs(e) => e.as_monomial(),
            Mul(l, r) => {
                let (lc, lp) = l.as_monomial()?;
                let (rc, rp) = r.as_monomial()?;
                Some((lc * rc, lp + rp))
            }
            Div(l, r) => {
                let (lc, lp) = l.as_monomial()?;
                let (rc, rp) = r.as_monomial()?;
                Some((lc / rc, lp - rp))
            }
            Pow(b, e) => {
                let p = e.as_constant()?;
                let (bc, bp) = b.as_monomial()?;
                Some((bc.powf(p), bp * p))
            }
            _ => None,
        }
    }

    /// Decompose as `A*ln(k) + B`; `a*ln(b*k) + c` folds into this form.
    pub(crate) fn as_log_affine(&self) -> Option<(f64, f64)> {
        use WeightExpr::*;
        match self {
            Num(c) => Some((0.0, *c)),
            Ln(e) => {
                let (c, p) = e.as_monomial()?;
                Some((p, c.ln()))
            }
            Neg(e) => e.as_log_affine().map(|(a, b)| (-a, -b)),
            Add(l, r) => {
                let (la, lb) = l.as_log_affine()?;
                let (ra, rb) = r.as_log_affine()?;
                Some((la + ra, lb + rb))
            }
            Sub(l, r) => {
                let (la, lb) = l.as_log_affine()?;
                let (ra, rb) = r.as_log_affine()?;
                Some((la - ra, lb - rb))
            }
            Mul(l, r) => {
                if let Some(c) = l.as_constant() {
                    r.as_log_affine().map(|(a, b)| (c * a, c * b))
                } else if let Some(c) = r.as_constant() {
                    l.as_log_affine().map(|(a, b)| (c * a, c * b))
                } else {
                    None
                }
            }
            Div(l, r) => {
                let c = r.as_constant()?;
                if c == 0.0 {
                    return None;
                }
                l.as_log_affine().map(|(a, b)| (a / c, b / c))
            }
            _ => None,
        }
    }

    /// Envelope of the expression as `coeff * base^k * k^pow`.
    pub(crate) fn as_exp_monomial(&self) -> Option<ExpMonomial> {
        use WeightExpr::*;
        match self {
            Num(c) if *c >= 0.0 => Some(ExpMonomial {
                coeff: *c,
                base: 1.0,
                pow: 0.0,
                floors: 0,
                upper_only: false,
            }),
            Var => Some(ExpMonomial {
                coeff: 1.0,
                base: 1.0,
                pow: 1.0,
                floors: 0,
                upper_only: false,
            }),
            Abs(e) => e.as_exp_monomial(),
            Floor(e) => {
                let m = e.as_exp_monomial()?;
                Some(ExpMonomial {
                    floors: m.floors + 1,
                    ..m
                })
            }
            Mul(l, r) => {
                let a = l.as_exp_monomial()?;
                let b = r.as_exp_monomial()?;
                Some(ExpMonomial {
                    coeff: a.coeff * b.coeff,
                    base: a.base * b.base,
                    pow: a.pow + b.pow,
                    floors: a.floors + b.floors,
                    upper_only: a.upper_only || b.upper_only,
                })
            }
            Div(l, r) => {
                let a = l.as_exp_monomial()?;
                let b = r.as_exp_monomial()?;
                // A floored or slack denominator would break the upper bound.
                if b.floors > 0 || b.upper_only || b.coeff <= 0.0 {
                    return None;
                }
                Some(ExpMonomial {
                    coeff: a.coeff / b.coeff,
                    base: a.base / b.base,
                    pow: a.pow - b.pow,
                    floors: a.floors,
                    upper_only: a.upper_only,
                })
            }
            Pow(b, e) => {
                if let Some(p) = e.as_constant() {
                    let m = b.as_exp_monomial()?;
                    if m.floors > 0 || m.upper_only || m.coeff <= 0.0 {
                        return None;
                    }
                    Some(ExpMonomial {
                        coeff: m.coeff.powf(p),
                        base: m.base.powf(p),
                        pow: m.pow * p,
                        floors: 0,
                        upper_only: false,
                    })
                } else if let Some(c) = b.as_constant() {
                    if c <= 0.0 {
                        return None;
                    }
                    let (a, d) = e.as_affine()?;
                    Some(ExpMonomial {
                        coeff: c.powf(d),
                        base: c.powf(a),
                        pow: 0.0,
                        floors: 0,
                        upper_only: false,
                    })
                } else {
                    None
                }
            }
            Exp(e) => {
                if let Some((a, d)) = e.as_affine() {
                    Some(ExpMonomial {
                        coeff: d.exp(),
                        base: a.exp(),
                        pow: 0.0,
                        floors: 0,
                        upper_only: false,
                    })
                } else {
                    let (la, lb) = e.as_log_affine()?;
                    Some(ExpMonomial {
                        coeff: lb.exp(),
                        base: 1.0,
                        pow: la,
                        floors: 0,
                        upper_only: false,
                    })
                }
            }
            Add(l, r) => {
                let a = l.as_exp_monomial()?;
                let b = r.as_exp_monomial()?;
                Some(ExpMonomial {
                    coeff: a.coeff + b.coeff,
                    base: a.base.max(b.base),
                    pow: a.pow.max(b.pow),
                    floors: a.floors + b.floors,
                    upper_only: a.upper_only || b.upper_only,
                })
            }
            Sub(l, r) => {
                let a = l.as_exp_monomial()?;
                // Dropping a nonnegative subtrahend keeps the upper bound.
                if let Some(c) = r.as_constant() {
                    if c >= 0.0 {
                        return Some(ExpMonomial {
                            upper_only: true,
                            ..a
                        });
                    }
                }
                let b = r.as_exp_monomial()?;
                Some(ExpMonomial {
                    coeff: a.coeff + b.coeff,
                    base: a.base.max(b.base),
                    pow: a.pow.max(b.pow),
                    floors: a.floors + b.floors,
                    upper_only: true,
                })
            }
            _ => None,
        }
    }

    fn precedence(&self) -> u8 {
        use WeightExpr::*;
        match self {
            Add(..) | Sub(..) => 1,
            Mul(..) | Div(..) => 2,
            Neg(..) => 3,
            Pow(..) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for WeightExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use WeightExpr::*;
        let paren = |f: &mut fmt::Formatter<'_>, e: &WeightExpr, min: u8| -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Num(c) => write!(f, "{c:?}"),
            Var => write!(f, "k"),
            Neg(e) => {
                write!(f, "-")?;
                paren(f, e, 3)
            }
            Add(a, b) => {
                paren(f, a, 1)?;
                write!(f, " + ")?;
                paren(f, b, 2)
            }
            Sub(a, b) => {
                paren(f, a, 1)?;
                write!(f, " - ")?;
                paren(f, b, 2)
            }
            Mul(a, b) => {
                paren(f, a, 2)?;
                write!(f, " * ")?;
                paren(f, b, 3)
            }
            Div(a, b) => {
                paren(f, a, 2)?;
                write!(f, " / ")?;
                paren(f, b, 3)
            }
            Pow(a, b) => {
                paren(f, a, 5)?;
                write!(f, "^")?;
                // right-associative: a^b^c prints without parens on the right
                paren(f, b, 3)
            }
            Ln(e) => write!(f, "ln({e})"),
            Abs(e) => write!(f, "abs({e})"),
            Floor(e) => write!(f, "floor({e})"),
            Exp(e) => write!(f, "exp({e})"),
        }
    }
}
