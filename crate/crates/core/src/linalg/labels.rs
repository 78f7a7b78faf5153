use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifies the node or edge a tensor-factor space belongs to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SpaceId {
    /// A variable node `i`.
    Var(String),
    /// An edge `(i, a)`: variable id first, factor id second.
    Edge(String, String),
}

/// Which copy of a space a label refers to.
///
/// `Base` is the variable's own space, `Hat` the transformed edge copy and
/// `Prime` the edge copy the untransformed factor acts on. The declaration
/// order fixes the canonical leg order for equal identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Base,
    Hat,
    Prime,
}

/// A labeled tensor-factor space of fixed dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceLabel {
    pub id: SpaceId,
    pub tier: Tier,
    pub dim: usize,
}

impl SpaceLabel {
    pub fn new(id: SpaceId, tier: Tier, dim: usize) -> Self {
        assert!(dim >= 1, "space dimension must be positive");
        Self { id, tier, dim }
    }

    /// The variable space `H_i`.
    pub fn base(var: impl Into<String>, dim: usize) -> Self {
        Self::new(SpaceId::Var(var.into()), Tier::Base, dim)
    }

    /// The transformed edge space for `(var, factor)`.
    pub fn hat(var: impl Into<String>, factor: impl Into<String>, dim: usize) -> Self {
        Self::new(SpaceId::Edge(var.into(), factor.into()), Tier::Hat, dim)
    }

    /// The edge copy of the variable space for `(var, factor)`.
    pub fn prime(var: impl Into<String>, factor: impl Into<String>, dim: usize) -> Self {
        Self::new(SpaceId::Edge(var.into(), factor.into()), Tier::Prime, dim)
    }

    /// Sort key of the canonical leg order. Dimensions do not participate.
    pub fn key(&self) -> (&SpaceId, Tier) {
        (&self.id, self.tier)
    }

    pub fn same_space(&self, other: &SpaceLabel) -> bool {
        self.key() == other.key()
    }

    /// Same space identifier, different tier.
    pub fn with_tier(&self, tier: Tier) -> Self {
        Self { tier, ..self.clone() }
    }

    /// The variable the space belongs to.
    pub fn variable(&self) -> &str {
        match &self.id {
            SpaceId::Var(v) | SpaceId::Edge(v, _) => v,
        }
    }

    /// The copy of this variable's space attached to edge `(variable, factor)`.
    pub fn on_edge(&self, factor: impl Into<String>) -> Self {
        Self {
            id: SpaceId::Edge(self.variable().to_string(), factor.into()),
            ..self.clone()
        }
    }

    /// The copy of this space attached to the variable node itself.
    pub fn on_vertex(&self) -> Self {
        Self {
            id: SpaceId::Var(self.variable().to_string()),
            ..self.clone()
        }
    }
}

impl fmt::Display for SpaceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tier = match self.tier {
            Tier::Base => "",
            Tier::Hat => "^",
            Tier::Prime => "'",
        };
        match &self.id {
            SpaceId::Var(v) => write!(f, "{tier}{v}[{}]", self.dim),
            SpaceId::Edge(v, a) => write!(f, "{tier}({v},{a})[{}]", self.dim),
        }
    }
}

/// Sorts labels into canonical order.
pub fn canonical_order(labels: &mut [SpaceLabel]) {
    labels.sort_by(|a, b| a.key().cmp(&b.key()));
}

pub fn total_dim(labels: &[SpaceLabel]) -> usize {
    labels.iter().map(|l| l.dim).product()
}
