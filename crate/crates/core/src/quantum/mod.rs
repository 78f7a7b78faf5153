//! Quantum factor graphs with pairwise-commuting PSD factors, their partition
//! function and density operator, and the ⋆⁽ⁿ⁾ / ⊙ operator products.

mod products;

pub use products::{
    check_star_distributivity, find_odot_nondistributivity, find_odot_nondistributivity_in,
    find_star_noncommutativity, max_star_distributivity_gap, odot, odot_distributivity_gap, odot_with, qubit_triple, star,
    star_distributivity_gap, star_n, star_n_with, DistributivityGap, OdotWitness, PairFamily,
};

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::classical::{ClassicalFactor, ClassicalFactorGraph, ClassicalVariable};
use crate::error::{Error, Result};
use crate::linalg::raw::{self, CMat};
use crate::linalg::spectral::{self, hermitize};
use crate::linalg::{canonical_order, display_labels, LabeledOperator, SpaceLabel};
use crate::tolerance::{Tolerances, MAX_OPERATOR_DIM};

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumVariable {
    pub id: String,
    pub dim: usize,
    /// PSD operator `f_i` on the variable's own space.
    pub operator: LabeledOperator,
}

impl QuantumVariable {
    /// Wraps a matrix as the operator on `base(id, dim)`.
    pub fn new(id: impl Into<String>, matrix: CMat) -> Result<Self> {
        let id = id.into();
        let dim = matrix.nrows();
        let operator = LabeledOperator::new(vec![SpaceLabel::base(id.clone(), dim)], matrix)?;
        Ok(Self { id, dim, operator })
    }

    pub fn label(&self) -> SpaceLabel {
        SpaceLabel::base(self.id.clone(), self.dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumFactor {
    pub id: String,
    pub neighbors: Vec<String>,
    /// PSD operator `f_a` on the tensor product of the neighbors' spaces,
    /// indices in canonical label order.
    pub operator: LabeledOperator,
}

impl QuantumFactor {
    pub fn new(id: impl Into<String>, neighbors: Vec<String>, operator: LabeledOperator) -> Self {
        Self {
            id: id.into(),
            neighbors,
            operator,
        }
    }
}

/// A validated quantum factor graph.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumFactorGraph {
    variables: Vec<QuantumVariable>,
    factors: Vec<QuantumFactor>,
    index: BTreeMap<String, usize>,
    factor_commutation: f64,
}

impl QuantumFactorGraph {
    pub fn new(variables: Vec<QuantumVariable>, factors: Vec<QuantumFactor>) -> Result<Self> {
        Self::new_with(variables, factors, &Tolerances::default())
    }

    /// Validates structure, positivity, the dimension guard and pairwise
    /// commutation of the factors.
    pub fn new_with(
        variables: Vec<QuantumVariable>,
        factors: Vec<QuantumFactor>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let mut index = BTreeMap::new();
        let mut total = 1usize;
        for (k, v) in variables.iter().enumerate() {
            if index.insert(v.id.clone(), k).is_some() {
                return Err(Error::Graph(format!("duplicate variable id {}", v.id)));
            }
            if v.operator.labels() != [v.label()] {
                return Err(Error::Graph(format!(
                    "variable {} carries an operator on [{}]",
                    v.id,
                    display_labels(v.operator.labels())
                )));
            }
            total = total.saturating_mul(v.dim);
            spectral::check_psd(&v.operator, tol).map_err(|e| psd_error(&format!("variable {}", v.id), e))?;
        }
        if total > MAX_OPERATOR_DIM {
            return Err(Error::TooLarge {
                dim: total,
                limit: MAX_OPERATOR_DIM,
            });
        }
        let mut ids = BTreeSet::new();
        for f in &factors {
            if !ids.insert(f.id.clone()) {
                return Err(Error::Graph(format!("duplicate factor id {}", f.id)));
            }
            let mut expected = Vec::new();
            for n in &f.neighbors {
                let k = index.get(n).ok_or_else(|| {
                    Error::Graph(format!("factor {} references unknown variable {n}", f.id))
                })?;
                expected.push(variables[*k].label());
            }
            canonical_order(&mut expected);
            if expected.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Graph(format!("factor {} repeats a neighbor", f.id)));
            }
            if f.operator.labels() != expected.as_slice() {
                return Err(Error::Graph(format!(
                    "factor {} acts on [{}] but its neighbors are [{}]",
                    f.id,
                    display_labels(f.operator.labels()),
                    display_labels(&expected)
                )));
            }
            spectral::check_psd(&f.operator, tol).map_err(|e| psd_error(&format!("factor {}", f.id), e))?;
        }
        let mut worst = 0.0f64;
        for (p, a) in factors.iter().enumerate() {
            for b in &factors[p + 1..] {
                let r = spectral::commutation_residual(&a.operator, &b.operator)?;
                if r > tol.commute {
                    return Err(Error::Invariant {
                        site: format!("factors {} and {}", a.id, b.id),
                        what: "factors do not commute".into(),
                        residual: r,
                    });
                }
                worst = worst.max(r);
            }
        }
        Ok(Self {
            variables,
            factors,
            index,
            factor_commutation: worst,
        })
    }

    /// Embeds a classical graph as diagonal operators.
    pub fn from_classical(g: &ClassicalFactorGraph) -> Result<Self> {
        let variables = g
            .variables()
            .iter()
            .map(|v| {
                let op = LabeledOperator::diagonal(SpaceLabel::base(v.id.clone(), v.domain()), &v.weights)?;
                Ok(QuantumVariable {
                    id: v.id.clone(),
                    dim: v.domain(),
                    operator: op,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let factors = g
            .factors()
            .iter()
            .map(|f| {
                let labels: Vec<SpaceLabel> = f
                    .neighbors
                    .iter()
                    .map(|n| SpaceLabel::base(n.clone(), g.variable(n).map(|v| v.domain()).unwrap_or(1)))
                    .collect();
                let d = f.table.len();
                let m = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                    d,
                    f.table.iter().map(|&x| Complex64::new(x, 0.0)),
                ));
                // indices follow neighbor order; the constructor reorders legs
                Ok(QuantumFactor::new(f.id.clone(), f.neighbors.clone(), LabeledOperator::new(labels, m)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(variables, factors)
    }

    /// The classical graph read off the diagonals, provided every operator is
    /// diagonal within `tol.identity` (relative Frobenius).
    pub fn induced_classical(&self, tol: &Tolerances) -> Result<ClassicalFactorGraph> {
        let diag_of = |site: String, op: &LabeledOperator| -> Result<Vec<f64>> {
            let m = op.matrix();
            let off: f64 = m
                .iter()
                .enumerate()
                .filter(|(k, _)| k % (m.nrows() + 1) != 0)
                .map(|(_, z)| z.norm_sqr())
                .sum::<f64>()
                .sqrt();
            let rel = off / op.frobenius_norm().max(f64::MIN_POSITIVE);
            if rel > tol.identity {
                return Err(Error::Invariant {
                    site,
                    what: "operator is not diagonal".into(),
                    residual: rel,
                });
            }
            Ok(m.diagonal().iter().map(|z| z.re).collect())
        };
        let variables = self
            .variables
            .iter()
            .map(|v| Ok(ClassicalVariable::new(v.id.clone(), diag_of(format!("variable {}", v.id), &v.operator)?)))
            .collect::<Result<Vec<_>>>()?;
        let factors = self
            .factors
            .iter()
            .map(|f| {
                diag_of(format!("factor {}", f.id), &f.operator)?;
                // re-express the operator with legs in neighbor order
                let canon = f.operator.labels();
                let order: Vec<usize> = f
                    .neighbors
                    .iter()
                    .map(|n| canon.iter().position(|c| c.same_space(&SpaceLabel::base(n.clone(), 1))).expect("validated"))
                    .collect();
                let m = raw::permute_legs(f.operator.matrix(), &f.operator.dims(), &order);
                let table: Vec<f64> = m.diagonal().iter().map(|z| z.re).collect();
                Ok(ClassicalFactor::new(f.id.clone(), f.neighbors.clone(), table))
            })
            .collect::<Result<Vec<_>>>()?;
        ClassicalFactorGraph::new(variables, factors)
    }

    pub fn variables(&self) -> &[QuantumVariable] {
        &self.variables
    }

    pub fn factors(&self) -> &[QuantumFactor] {
        &self.factors
    }

    pub fn variable(&self, id: &str) -> Option<&QuantumVariable> {
        self.index.get(id).map(|&k| &self.variables[k])
    }

    pub fn factor(&self, id: &str) -> Option<&QuantumFactor> {
        self.factors.iter().find(|f| f.id == id)
    }

    /// Canonical labels of the full space `H`.
    pub fn labels(&self) -> Vec<SpaceLabel> {
        let mut l: Vec<SpaceLabel> = self.variables.iter().map(|v| v.label()).collect();
        canonical_order(&mut l);
        l
    }

    pub fn total_dim(&self) -> usize {
        self.variables.iter().map(|v| v.dim).product()
    }

    /// Edges `(variable, factor)` in stored factor order.
    pub fn edges(&self) -> Vec<(String, String)> {
        self.factors
            .iter()
            .flat_map(|f| f.neighbors.iter().map(move |n| (n.clone(), f.id.clone())))
            .collect()
    }

    /// Factors adjacent to a variable, in stored factor order.
    pub fn incident_factors(&self, var: &str) -> Vec<&str> {
        self.factors
            .iter()
            .filter(|f| f.neighbors.iter().any(|n| n == var))
            .map(|f| f.id.as_str())
            .collect()
    }

    /// Largest pairwise commutation residual among the factors.
    pub fn factor_commutation(&self) -> f64 {
        self.factor_commutation
    }

    /// `∏_a f_a` over the full space, factors multiplied in the given order.
    pub fn factor_product_in(&self, order: &[usize]) -> Result<LabeledOperator> {
        let labels = self.labels();
        let mut acc = LabeledOperator::identity(labels.clone())?;
        for &k in order {
            let f = self.factors[k].operator.extend_to(&labels)?;
            acc = acc.with_matrix(acc.matrix() * f.matrix())?;
        }
        Ok(acc)
    }

    pub fn factor_product(&self) -> Result<LabeledOperator> {
        self.factor_product_in(&(0..self.factors.len()).collect::<Vec<_>>())
    }

    /// `⊗_i f_i`.
    pub fn variable_product(&self) -> Result<LabeledOperator> {
        self.variables
            .iter()
            .try_fold(LabeledOperator::scalar(Complex64::new(1.0, 0.0)), |acc, v| {
                acc.tensor(&v.operator)
            })
    }

    /// `Tr((∏_a f_a)(⊗_i f_i))` with the factors multiplied in `order`,
    /// returned without discarding the imaginary part.
    pub fn trace_in_order(&self, order: &[usize]) -> Result<Complex64> {
        let f = self.factor_product_in(order)?;
        let v = self.variable_product()?;
        Ok(raw::trace_of_product(f.matrix(), v.matrix()))
    }

    /// The partition function.
    pub fn partition_function(&self) -> Result<f64> {
        self.partition_function_with(&Tolerances::default())
    }

    pub fn partition_function_with(&self, tol: &Tolerances) -> Result<f64> {
        let z = self.trace_in_order(&(0..self.factors.len()).collect::<Vec<_>>())?;
        check_real(z, tol)
    }

    /// `ρ = ((∏_a f_a) ⋆ (⊗_i f_i)) / Z`.
    pub fn density_operator(&self) -> Result<LabeledOperator> {
        self.density_operator_with(&Tolerances::default())
    }

    pub fn density_operator_with(&self, tol: &Tolerances) -> Result<LabeledOperator> {
        let z = self.partition_function_with(tol)?;
        if z < 1e-12 {
            return Err(Error::Invariant {
                site: "graph".into(),
                what: "partition function vanishes; the model is degenerate".into(),
                residual: z,
            });
        }
        let f = self.factor_product()?;
        let f = f.with_matrix(hermitize(f.matrix()))?;
        let v = self.variable_product()?;
        let s = products::star_n_with(&f, &v, 1, tol)?;
        Ok(s.scale(Complex64::new(1.0 / z, 0.0)))
    }
}

fn psd_error(site: &str, e: Error) -> Error {
    match e {
        Error::NotPsd { min, max } => Error::Invariant {
            site: site.to_string(),
            what: format!("operator is not positive semidefinite (largest eigenvalue {max:e})"),
            residual: min,
        },
        Error::NotHermitian(r) => Error::Invariant {
            site: site.to_string(),
            what: "operator is not Hermitian".into(),
            residual: r,
        },
        other => other,
    }
}

/// Accepts a trace as real when its imaginary part is negligible.
pub fn check_real(z: Complex64, tol: &Tolerances) -> Result<f64> {
    if z.im.abs() > tol.identity * z.re.abs().max(1.0) {
        return Err(Error::Invariant {
            site: "partition function".into(),
            what: "trace has a non-negligible imaginary part".into(),
            residual: z.im,
        });
    }
    Ok(z.re)
}
