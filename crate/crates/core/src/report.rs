use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Exploratory,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Exploratory => "EXPLORATORY",
        })
    }
}

/// Which inverse-pair condition an edge is held to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeMode {
    /// Real matrices with `φ φ̂ = I`.
    Classical,
    /// `Φ Φ̂` equals the relabeling identity on all operators.
    Strong,
    /// `Φ Φ̂` equals the relabeling identity on diagonal matrix units and
    /// kills off-diagonal ones.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCheck {
    pub variable: String,
    pub factor: String,
    pub mode: EdgeMode,
    /// Residual of the edge's inverse-pair condition in partial-trace form.
    pub residual: f64,
    /// The same condition checked by composing the maps, when applicable.
    pub map_residual: Option<f64>,
    /// For diagonal-mode edges: how far the operators meeting at the variable
    /// are from being diagonal in that leg.
    pub support_residual: Option<f64>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCheck {
    pub variable: String,
    pub degree: usize,
    /// Largest pairwise commutation residual of the node's extended `φ`s.
    pub commutation: f64,
    /// Whether the node's edge order equals the graph's stored factor order.
    pub order_aligned: bool,
}

/// Outcome of checking a Holant identity on one graph and transform set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolantReport {
    pub z_original: Complex64,
    pub z_transformed: Complex64,
    /// `|Z − Ẑ| / max(1, |Z|)`.
    pub discrepancy: f64,
    pub discrepancy_tolerance: f64,
    pub edges: Vec<EdgeCheck>,
    pub nodes: Vec<NodeCheck>,
    /// Largest pairwise commutation residual among the factors.
    pub factor_commutation: f64,
    /// Largest relative change of `Ẑ` under randomly permuted node edge orders.
    pub order_sensitivity: Option<f64>,
    /// Largest disagreement between the two routes used to build each
    /// transformed operator.
    pub form_agreement: f64,
    /// Disagreement between the plain and transposed transformed traces.
    pub transpose_agreement: f64,
    pub verdict: Verdict,
    /// Edges whose inverse-pair condition failed, as `(variable, factor)`.
    pub failing_edges: Vec<(String, String)>,
    pub reasons: Vec<String>,
}

impl HolantReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

pub fn relative_discrepancy(z: Complex64, z_hat: Complex64) -> f64 {
    (z - z_hat).norm() / z.norm().max(1.0)
}
