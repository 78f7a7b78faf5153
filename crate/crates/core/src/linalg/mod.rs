//! Labeled tensor-space linear algebra.

mod labels;
mod operator;
pub mod raw;
pub mod spectral;

pub use labels::{canonical_order, total_dim, SpaceId, SpaceLabel, Tier};
pub use operator::{display_labels, LabeledOperator};
pub use raw::CMat;
pub use spectral::{commutation_residual, frac_power, support_projector};
