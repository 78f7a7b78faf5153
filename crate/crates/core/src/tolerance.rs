use serde::{Deserialize, Serialize};

/// Numerical thresholds used by validation and verification.
///
/// Reports embed the values in effect, so a verdict can be read without
/// knowing how the run was configured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Smallest eigenvalue allowed, relative to the largest, before an
    /// operator is rejected as not positive semidefinite.
    pub psd: f64,
    /// Per-dimension support cutoff: eigenvalues at or below
    /// `dim * rank * lambda_max` are treated as zero.
    pub rank: f64,
    /// Relative Frobenius tolerance for Hermiticity and identity checks.
    pub identity: f64,
    /// Commutation residual accepted as "commuting".
    pub commute: f64,
    /// Residual accepted for per-edge inverse-pair conditions.
    pub inverse: f64,
    /// Relative partition-function discrepancy accepted for classical graphs.
    pub holant_classical: f64,
    /// Relative partition-function discrepancy accepted for quantum graphs.
    pub holant_quantum: f64,
    /// Agreement required between two independent evaluation routes.
    pub form_agreement: f64,
    /// Largest transfer-matrix condition number accepted when inverting.
    pub max_condition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd: 1e-9,
            rank: 1e-12,
            identity: 1e-10,
            commute: 1e-9,
            inverse: 1e-9,
            holant_classical: 1e-9,
            holant_quantum: 1e-8,
            form_agreement: 1e-10,
            max_condition: 1e8,
        }
    }
}

/// Largest total Hilbert-space dimension any single operator may have.
pub const MAX_OPERATOR_DIM: usize = 4096;

/// Largest number of joint configurations enumerated by brute force.
pub const MAX_STATE_SPACE: u128 = 1 << 20;
