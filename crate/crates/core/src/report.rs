//! Machine-readable report documents.
//!
//! JSON cannot carry IEEE infinities, so unbounded radii serialize as
//! `null`; the document round-trips to an equal in-memory report.

use crate::genfun::{EvalStatus, GenFunEval};
use crate::series::RadiusEstimate;
use crate::solver::{EntropyReport, EvalPath, Mme};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusDoc {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketDoc {
    pub lo: f64,
    pub hi: f64,
}

/// The structured entropy report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyDoc {
    pub x_hat: f64,
    pub entropy: f64,
    pub r_f: RadiusDoc,
    pub x_tilde0: Option<f64>,
    pub phi_at_xhat: f64,
    pub mme: Mme,
    pub bracket: BracketDoc,
    pub path: EvalPath,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl From<&EntropyReport> for EntropyDoc {
    fn from(r: &EntropyReport) -> Self {
        EntropyDoc {
            x_hat: r.x_hat,
            entropy: r.entropy,
            r_f: RadiusDoc {
                lower: finite(r.r_f.lower),
                upper: finite(r.r_f.upper),
                exact: r.r_f.exact.and_then(finite),
            },
            x_tilde0: r.x_tilde0,
            phi_at_xhat: r.phi_at_xhat,
            mme: r.mme,
            bracket: BracketDoc {
                lo: r.bracket.0,
                hi: r.bracket.1,
            },
            path: r.path,
        }
    }
}

impl EntropyDoc {
    pub fn radius_estimate(&self) -> RadiusEstimate {
        RadiusEstimate {
            lower: self.r_f.lower.unwrap_or(f64::INFINITY),
            upper: self.r_f.upper.unwrap_or(f64::INFINITY),
            exact: self.r_f.exact,
        }
    }
}

pub fn to_json(report: &EntropyReport) -> String {
    serde_json::to_string_pretty(&EntropyDoc::from(report)).expect("report serializes")
}

pub fn radius_to_json(r: &RadiusEstimate) -> String {
    let doc = RadiusDoc {
        lower: finite(r.lower),
        upper: finite(r.upper),
        exact: r.exact.and_then(finite),
    };
    serde_json::to_string_pretty(&doc).expect("radius serializes")
}

pub fn from_json(text: &str) -> Result<EntropyDoc, serde_json::Error> {
    serde_json::from_str(text)
}

/// One row of a phi-table document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiRowDoc {
    pub x: f64,
    pub status: EvalStatus,
    pub phi: Option<f64>,
    pub det_m: Option<f64>,
    pub a: Vec<f64>,
}

impl From<&GenFunEval> for PhiRowDoc {
    fn from(e: &GenFunEval) -> Self {
        PhiRowDoc {
            x: e.x,
            status: e.status,
            phi: finite(e.phi),
            det_m: finite(e.det_m),
            a: e.a.clone(),
        }
    }
}

pub fn rows_to_json(rows: &[PhiRowDoc]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}
