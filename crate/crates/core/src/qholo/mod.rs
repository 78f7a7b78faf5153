//! The non-commutative holographic transformation of a quantum factor graph:
//! per-edge pairs `(Φ, Φ̂)`, the transformed operators `f̂_a` and `f̂_i`, the
//! transformed trace `Ẑ`, and a verifier comparing it with `Z`.

mod gen;

pub use gen::{gen_classical, gen_instance, Family, Instance, SizeParams, MAX_GENERATED_DIM};

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;

use crate::cj::{self, bar_otimes, swap_operator, InverseResidual, SuperOperator};
use crate::error::{Error, Result};
use crate::linalg::raw::{self, CMat};
use crate::linalg::spectral::commutation_residual;
use crate::linalg::{LabeledOperator, SpaceLabel, Tier};
use crate::quantum::QuantumFactorGraph;
use crate::random::seeded;
use crate::report::{relative_discrepancy, EdgeCheck, EdgeMode, HolantReport, NodeCheck, Verdict};
use crate::tolerance::Tolerances;

/// Seed of the edge-order permutations drawn by [`verify_quantum_holant`].
pub const DEFAULT_PROBE_SEED: u64 = 0x5eed;
const PROBE_PERMUTATIONS: usize = 3;

/// The pair inserted on edge `(i, a)`: `Φ: B(Ĥ_{i,a}) → B(H_i)` and
/// `Φ̂: B(H'_{i,a}) → B(Ĥ_{i,a})`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTransform {
    pub variable: String,
    pub factor: String,
    pub mode: EdgeMode,
    pub phi: SuperOperator,
    pub phi_hat: SuperOperator,
}

impl EdgeTransform {
    /// Validates the label scheme of both maps.
    pub fn new(
        variable: impl Into<String>,
        factor: impl Into<String>,
        mode: EdgeMode,
        phi: SuperOperator,
        phi_hat: SuperOperator,
    ) -> Result<Self> {
        let (variable, factor) = (variable.into(), factor.into());
        if mode == EdgeMode::Classical {
            return Err(Error::Dimension("quantum edges are strong or diagonal".into()));
        }
        let q = phi.codomain_dim();
        let (b, h, p) = edge_labels(&variable, &factor, q);
        let ok = phi.domain() == [h.clone()]
            && phi.codomain() == [b]
            && phi_hat.domain() == [p]
            && phi_hat.codomain() == [h];
        if !ok {
            return Err(Error::Dimension(format!(
                "edge ({variable}, {factor}): maps act on [{}] -> [{}] and [{}] -> [{}]",
                crate::linalg::display_labels(phi.domain()),
                crate::linalg::display_labels(phi.codomain()),
                crate::linalg::display_labels(phi_hat.domain()),
                crate::linalg::display_labels(phi_hat.codomain()),
            )));
        }
        Ok(Self {
            variable,
            factor,
            mode,
            phi,
            phi_hat,
        })
    }

    /// Reads the pair from CJ matrices `φ` on `[H_i, Ĥ]` and `φ̂` on `[Ĥ, H']`.
    pub fn from_cj(
        variable: impl Into<String>,
        factor: impl Into<String>,
        mode: EdgeMode,
        phi: &LabeledOperator,
        phi_hat: &LabeledOperator,
    ) -> Result<Self> {
        let (variable, factor) = (variable.into(), factor.into());
        let q = phi
            .labels()
            .first()
            .map(|l| l.dim)
            .ok_or_else(|| Error::Dimension("empty CJ matrix".into()))?;
        let (_, h, p) = edge_labels(&variable, &factor, q);
        let phi = SuperOperator::from_labeled_cj(phi, std::slice::from_ref(&h))?;
        let phi_hat = SuperOperator::from_labeled_cj(phi_hat, std::slice::from_ref(&p))?;
        Self::new(variable, factor, mode, phi, phi_hat)
    }

    /// Identity relabelings `Ĥ → H` and `H' → Ĥ`.
    pub fn identity(variable: impl Into<String>, factor: impl Into<String>, q: usize) -> Result<Self> {
        let (variable, factor) = (variable.into(), factor.into());
        let (b, h, p) = edge_labels(&variable, &factor, q);
        let phi = SuperOperator::identity_relabel(std::slice::from_ref(&h), std::slice::from_ref(&b))?;
        let phi_hat = SuperOperator::identity_relabel(&[p], &[h])?;
        Self::new(variable, factor, EdgeMode::Strong, phi, phi_hat)
    }

    /// `Φ` together with `Φ̂ = Φ⁻¹` read as a map out of `H'`.
    pub fn with_inverse(
        variable: impl Into<String>,
        factor: impl Into<String>,
        phi: SuperOperator,
        tol: &Tolerances,
    ) -> Result<Self> {
        let (variable, factor) = (variable.into(), factor.into());
        let (_, _, p) = edge_labels(&variable, &factor, phi.codomain_dim());
        let phi_hat = phi.invert_with(tol)?.relabel_domain(&[p])?;
        Self::new(variable, factor, EdgeMode::Strong, phi, phi_hat)
    }

    /// Diagonal CJ matrices carrying a classical pair: `φ` has entry
    /// `phi[x, y]` at `|x⟩|y⟩`, `φ̂` has `phi_hat[y, z]` at `|y⟩|z⟩`.
    pub fn diagonal_embedding(
        variable: impl Into<String>,
        factor: impl Into<String>,
        phi: &DMatrix<f64>,
        phi_hat: &DMatrix<f64>,
    ) -> Result<Self> {
        let (variable, factor) = (variable.into(), factor.into());
        let q = phi.nrows();
        if phi.shape() != (q, q) || phi_hat.shape() != (q, q) {
            return Err(Error::Dimension("classical pair must be square".into()));
        }
        let (b, h, p) = edge_labels(&variable, &factor, q);
        let diag = |m: &DMatrix<f64>| {
            CMat::from_diagonal(&nalgebra::DVector::from_fn(q * q, |r, _| {
                Complex64::new(m[(r / q, r % q)], 0.0)
            }))
        };
        let phi = LabeledOperator::new(vec![b, h.clone()], diag(phi))?;
        let phi_hat = LabeledOperator::new(vec![h, p], diag(phi_hat))?;
        Self::from_cj(variable, factor, EdgeMode::Diagonal, &phi, &phi_hat)
    }

    pub fn dim(&self) -> usize {
        self.phi.codomain_dim()
    }

    pub fn base(&self) -> SpaceLabel {
        SpaceLabel::base(self.variable.clone(), self.dim())
    }

    pub fn hat(&self) -> SpaceLabel {
        SpaceLabel::hat(self.variable.clone(), self.factor.clone(), self.dim())
    }

    pub fn prime(&self) -> SpaceLabel {
        SpaceLabel::prime(self.variable.clone(), self.factor.clone(), self.dim())
    }

    /// `φ` on `[H_i, Ĥ_{i,a}]`.
    pub fn phi_cj(&self) -> Result<LabeledOperator> {
        self.phi.cj_operator()
    }

    /// `φ̂` on `[Ĥ_{i,a}, H'_{i,a}]`.
    pub fn phi_hat_cj(&self) -> Result<LabeledOperator> {
        self.phi_hat.cj_operator()
    }

    /// The inverse-pair condition of this edge's mode.
    pub fn check(&self) -> Result<InverseResidual> {
        let (a, b) = (self.phi_cj()?, self.phi_hat_cj()?);
        match self.mode {
            EdgeMode::Diagonal => cj::check_diagonal_inverse(&a, &b),
            _ => cj::check_strong_inverse(&a, &b),
        }
    }

    /// Copy with one CJ entry of `φ` (or of `φ̂`) shifted by `delta`.
    pub fn perturbed(&self, on_hat: bool, row: usize, col: usize, delta: Complex64) -> Result<Self> {
        let src = if on_hat { &self.phi_hat } else { &self.phi };
        let mut m = src.cj().clone();
        m[(row, col)] += delta;
        let t = SuperOperator::from_cj(src.domain().to_vec(), src.codomain().to_vec(), m)?;
        let mut out = self.clone();
        if on_hat {
            out.phi_hat = t;
        } else {
            out.phi = t;
        }
        Ok(out)
    }
}

fn edge_labels(var: &str, factor: &str, q: usize) -> (SpaceLabel, SpaceLabel, SpaceLabel) {
    (
        SpaceLabel::base(var, q),
        SpaceLabel::hat(var, factor, q),
        SpaceLabel::prime(var, factor, q),
    )
}

/// One pair per edge, plus optional per-variable edge orders used for the
/// product `∏_{a∈∂i} φ_{i,a}` (by default the graph's stored factor order).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuantumTransformSet {
    edges: Vec<EdgeTransform>,
    edge_order: BTreeMap<String, Vec<String>>,
}

impl QuantumTransformSet {
    pub fn new(edges: Vec<EdgeTransform>) -> Self {
        Self {
            edges,
            edge_order: BTreeMap::new(),
        }
    }

    /// Identity relabelings on every edge of `g`.
    pub fn identity(g: &QuantumFactorGraph) -> Result<Self> {
        let edges = g
            .edges()
            .into_iter()
            .map(|(v, a)| {
                let q = g.variable(&v).map(|x| x.dim).unwrap_or(1);
                EdgeTransform::identity(v, a, q)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(edges))
    }

    pub fn edges(&self) -> &[EdgeTransform] {
        &self.edges
    }

    pub fn edges_mut(&mut self) -> &mut [EdgeTransform] {
        &mut self.edges
    }

    pub fn get(&self, variable: &str, factor: &str) -> Option<&EdgeTransform> {
        self.edges
            .iter()
            .find(|e| e.variable == variable && e.factor == factor)
    }

    pub fn edge_orders(&self) -> &BTreeMap<String, Vec<String>> {
        &self.edge_order
    }

    pub fn set_edge_order(&mut self, variable: impl Into<String>, order: Vec<String>) {
        self.edge_order.insert(variable.into(), order);
    }

    /// The factor order used at `variable`.
    pub fn node_order(&self, g: &QuantumFactorGraph, variable: &str) -> Vec<String> {
        match self.edge_order.get(variable) {
            Some(o) => o.clone(),
            None => g
                .incident_factors(variable)
                .into_iter()
                .map(str::to_string)
                .collect(),
        }
    }

    /// Checks that the pairs cover exactly the edges of `g` with matching
    /// dimensions and that every edge order is a permutation of the node's
    /// factors.
    pub fn validate(&self, g: &QuantumFactorGraph) -> Result<()> {
        let edges = g.edges();
        let mut seen = BTreeMap::new();
        for t in &self.edges {
            let key = (t.variable.clone(), t.factor.clone());
            if !edges.contains(&key) || seen.insert(key.clone(), ()).is_some() {
                return Err(Error::ExtraTransform(key.0, key.1));
            }
            let q = g.variable(&t.variable).map(|v| v.dim).unwrap_or(0);
            if t.dim() != q {
                return Err(Error::Dimension(format!(
                    "edge ({}, {}): transform on dimension {}, variable has {q}",
                    t.variable,
                    t.factor,
                    t.dim()
                )));
            }
        }
        if let Some((v, a)) = edges.iter().find(|e| !seen.contains_key(*e)) {
            return Err(Error::MissingTransform(v.clone(), a.clone()));
        }
        for (v, order) in &self.edge_order {
            if g.variable(v).is_none() {
                return Err(Error::Graph(format!("edge order given for unknown variable {v}")));
            }
            let mut a = order.clone();
            let mut b: Vec<String> = g.incident_factors(v).into_iter().map(str::to_string).collect();
            a.sort();
            b.sort();
            if a != b {
                return Err(Error::Graph(format!(
                    "edge order of {v} must list its factors [{}] exactly once",
                    b.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn pair(&self, variable: &str, factor: &str) -> Result<&EdgeTransform> {
        self.get(variable, factor)
            .ok_or_else(|| Error::MissingTransform(variable.to_string(), factor.to_string()))
    }
}

fn agreement(a: &LabeledOperator, b: &LabeledOperator) -> Result<f64> {
    if a.labels() != b.labels() {
        return Err(Error::Inconsistent("routes produced operators on different spaces".into()));
    }
    let diff = raw::frobenius(&(a.matrix() - b.matrix()));
    let n = b.frobenius_norm();
    Ok(if n > 0.0 { diff / n } else { diff })
}

/// A transformed operator together with the disagreement between the two
/// routes used to compute it.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformed {
    pub operator: LabeledOperator,
    pub agreement: f64,
}

fn accept(site: String, map: LabeledOperator, trace_form: &LabeledOperator, tol: &Tolerances) -> Result<Transformed> {
    let r = agreement(trace_form, &map)?;
    if !(r <= tol.form_agreement) {
        return Err(Error::Inconsistent(format!(
            "{site}: partial-trace and map forms differ by {r:e}"
        )));
    }
    Ok(Transformed {
        operator: map,
        agreement: r,
    })
}

/// `f̂_a = (⊗Φ̂_{i,a})(f'_a)`, cross-checked against
/// `Tr_{H'}((⊗φ̂_{i,a}) f'_aᵀ)`.
pub fn transform_factor(
    g: &QuantumFactorGraph,
    factor: &str,
    transforms: &QuantumTransformSet,
    tol: &Tolerances,
) -> Result<Transformed> {
    let f = g
        .factor(factor)
        .ok_or_else(|| Error::Graph(format!("unknown factor {factor}")))?;
    let f_prime = f
        .operator
        .relabel(|l| l.with_tier(Tier::Prime).on_edge(factor))?;
    let pairs: Vec<&EdgeTransform> = f
        .neighbors
        .iter()
        .map(|n| transforms.pair(n, factor))
        .collect::<Result<_>>()?;

    let mut map = f_prime.clone();
    for t in &pairs {
        map = t.phi_hat.apply_partial(&map)?;
    }

    let mut hats = LabeledOperator::scalar(Complex64::new(1.0, 0.0));
    for t in &pairs {
        hats = hats.tensor(&t.phi_hat_cj()?)?;
    }
    let trace_form = hats.trace_against(&f_prime.transpose())?;
    accept(format!("factor {factor}"), map, &trace_form, tol)
}

/// `f̂_i = (⊗̄_{a} Φ_{i,a})*(f_i)` with the `⊗̄` taken in `order`, cross-checked
/// against `Tr_{H_i}(f_iᵀ (φ_{i,a₁} φ_{i,a₂} ⋯)ᵀ)`. A variable with no
/// incident factor becomes the scalar `Tr f_i`.
pub fn transform_variable(
    g: &QuantumFactorGraph,
    variable: &str,
    transforms: &QuantumTransformSet,
    order: &[String],
    tol: &Tolerances,
) -> Result<Transformed> {
    let v = g
        .variable(variable)
        .ok_or_else(|| Error::Graph(format!("unknown variable {variable}")))?;
    if order.is_empty() {
        return Ok(Transformed {
            operator: LabeledOperator::scalar(v.operator.trace()),
            agreement: 0.0,
        });
    }
    let pairs: Vec<&EdgeTransform> = order
        .iter()
        .map(|a| transforms.pair(variable, a))
        .collect::<Result<_>>()?;

    let maps: Vec<&SuperOperator> = pairs.iter().map(|t| &t.phi).collect();
    let map = bar_otimes(&maps)?.adjoint().apply(&v.operator)?;

    let mut prod = pairs[0].phi_cj()?;
    for t in &pairs[1..] {
        prod = prod.compose(&t.phi_cj()?)?;
    }
    let trace_form = prod.transpose().trace_against(&v.operator.transpose())?;
    accept(format!("variable {variable}"), map, &trace_form, tol)
}

/// Every `f̂_a` (stored factor order) and `f̂_i` (stored variable order).
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedQuantumGraph {
    pub factors: Vec<(String, LabeledOperator)>,
    pub variables: Vec<(String, LabeledOperator)>,
    /// Largest disagreement between the two routes over all operators.
    pub form_agreement: f64,
}

/// Builds the transformed graph after checking every edge's inverse-pair
/// condition.
pub fn quantum_transform(
    g: &QuantumFactorGraph,
    transforms: &QuantumTransformSet,
    tol: &Tolerances,
) -> Result<TransformedQuantumGraph> {
    transforms.validate(g)?;
    for t in transforms.edges() {
        let r = t.check()?.max();
        if !(r <= tol.inverse) {
            return Err(Error::Invariant {
                site: format!("edge ({}, {})", t.variable, t.factor),
                what: format!("{:?} inverse-pair condition fails", t.mode).to_lowercase(),
                residual: r,
            });
        }
    }
    transform_unchecked(g, transforms, &BTreeMap::new(), tol)
}

fn transform_unchecked(
    g: &QuantumFactorGraph,
    transforms: &QuantumTransformSet,
    orders: &BTreeMap<String, Vec<String>>,
    tol: &Tolerances,
) -> Result<TransformedQuantumGraph> {
    let mut worst = 0.0f64;
    let mut factors = Vec::with_capacity(g.factors().len());
    for f in g.factors() {
        let t = transform_factor(g, &f.id, transforms, tol)?;
        worst = worst.max(t.agreement);
        factors.push((f.id.clone(), t.operator));
    }
    let mut variables = Vec::with_capacity(g.variables().len());
    for v in g.variables() {
        let order = orders
            .get(&v.id)
            .cloned()
            .unwrap_or_else(|| transforms.node_order(g, &v.id));
        let t = transform_variable(g, &v.id, transforms, &order, tol)?;
        worst = worst.max(t.agreement);
        variables.push((v.id.clone(), t.operator));
    }
    Ok(TransformedQuantumGraph {
        factors,
        variables,
        form_agreement: worst,
    })
}

/// `Ẑ` and the two written forms of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedTrace {
    /// `Tr_Ĥ((⊗f̂_a)(⊗f̂_i))`.
    pub value: Complex64,
    /// `Tr_Ĥ((⊗f̂_aᵀ)(⊗f̂_iᵀ))`.
    pub transposed: Complex64,
    /// `|value − transposed| / max(1, |value|)`.
    pub agreement: f64,
}

/// `Ẑ = Tr_Ĥ((⊗_a f̂_a)(⊗_i f̂_i))`, cross-checked against the transposed form.
pub fn z_transformed(t: &TransformedQuantumGraph, tol: &Tolerances) -> Result<TransformedTrace> {
    let one = LabeledOperator::scalar(Complex64::new(1.0, 0.0));
    let a = t.factors.iter().try_fold(one.clone(), |acc, (_, f)| acc.tensor(f))?;
    let b = t.variables.iter().try_fold(one, |acc, (_, f)| acc.tensor(f))?;
    if a.labels().is_empty() {
        return Err(Error::Graph("the transformed graph has no edge spaces".into()));
    }
    if a.labels() != b.labels() {
        return Err(Error::Graph(format!(
            "factor side covers [{}] but variable side covers [{}]",
            crate::linalg::display_labels(a.labels()),
            crate::linalg::display_labels(b.labels())
        )));
    }
    let value = raw::trace_of_product(a.matrix(), b.matrix());
    let transposed = raw::trace_of_product(&a.matrix().transpose(), &b.matrix().transpose());
    let agreement = relative_discrepancy(value, transposed);
    if !(agreement <= tol.form_agreement) {
        return Err(Error::Inconsistent(format!(
            "plain and transposed transformed traces differ by {agreement:e}"
        )));
    }
    Ok(TransformedTrace {
        value,
        transposed,
        agreement,
    })
}

/// `Tr_{H'}(f'_a ∏_i 𝔽_{i,a})` against `f_a`, relative Frobenius. The primed
/// spaces are read off `f_prime`'s labels.
pub fn swap_teleport_check(f_prime: &LabeledOperator) -> Result<f64> {
    let mut acc = f_prime.clone();
    let mut primes = Vec::new();
    let mut swaps = Vec::new();
    for l in f_prime.labels() {
        if l.tier != Tier::Prime {
            return Err(Error::Dimension(format!("{l} is not a primed space")));
        }
        let base = l.with_tier(Tier::Base).on_vertex();
        swaps.push(swap_operator(&base, l)?);
        primes.push(l.clone());
    }
    for s in &swaps {
        acc = acc.compose(s)?;
    }
    let out = acc.partial_trace(&primes)?;
    let f = f_prime.relabel(|l| l.with_tier(Tier::Base).on_vertex())?;
    out.relative_distance(&f)
}

/// How far an operator is from being invariant under dephasing the given leg.
fn dephasing_residual(op: &LabeledOperator, leg: &SpaceLabel) -> Result<f64> {
    let k = op
        .labels()
        .iter()
        .position(|l| l == leg)
        .ok_or_else(|| Error::UnknownLabel(leg.to_string()))?;
    let dims = op.dims();
    let s = raw::strides(&dims)[k];
    let m = op.matrix();
    let mut off = 0.0;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if (r / s) % dims[k] != (c / s) % dims[k] {
                off += m[(r, c)].norm_sqr();
            }
        }
    }
    let n = op.frobenius_norm();
    Ok(if n > 0.0 { off.sqrt() / n } else { 0.0 })
}

pub fn verify_quantum_holant(
    g: &QuantumFactorGraph,
    transforms: &QuantumTransformSet,
    tol: &Tolerances,
) -> Result<HolantReport> {
    verify_quantum_holant_seeded(g, transforms, tol, DEFAULT_PROBE_SEED)
}

/// Computes `Z` and `Ẑ`, every edge and node residual, and a verdict.
///
/// PASS needs every edge condition to hold and `|Z − Ẑ| / max(1, |Z|)` within
/// `tol.holant_quantum`. A node whose `φ`s do not commute and whose edge order
/// differs from the stored factor order makes the result EXPLORATORY.
pub fn verify_quantum_holant_seeded(
    g: &QuantumFactorGraph,
    transforms: &QuantumTransformSet,
    tol: &Tolerances,
    probe_seed: u64,
) -> Result<HolantReport> {
    transforms.validate(g)?;
    let mut edges = Vec::new();
    let mut failing = Vec::new();
    let mut reasons = Vec::new();
    for (v, a) in g.edges() {
        let t = transforms.pair(&v, &a)?;
        let r = t.check()?;
        let support = if t.mode == EdgeMode::Diagonal {
            let f = g.factor(&a).expect("validated edge");
            Some(dephasing_residual(&f.operator, &t.base())?)
        } else {
            None
        };
        let ok = r.witness <= tol.inverse
            && r.map <= tol.inverse
            && support.is_none_or(|s| s <= tol.inverse);
        if !ok {
            failing.push((v.clone(), a.clone()));
            reasons.push(format!(
                "edge ({v}, {a}) violates its {} condition (residual {:e})",
                format!("{:?}", t.mode).to_lowercase(),
                r.max().max(support.unwrap_or(0.0))
            ));
        }
        edges.push(EdgeCheck {
            variable: v,
            factor: a,
            mode: t.mode,
            residual: r.witness,
            map_residual: Some(r.map),
            support_residual: support,
            ok,
        });
    }

    let mut nodes = Vec::new();
    let mut unaligned_noncommuting = Vec::new();
    for v in g.variables() {
        let order = transforms.node_order(g, &v.id);
        let stored: Vec<String> = g.incident_factors(&v.id).into_iter().map(str::to_string).collect();
        let phis: Vec<LabeledOperator> = order
            .iter()
            .map(|a| transforms.pair(&v.id, a)?.phi_cj())
            .collect::<Result<_>>()?;
        let mut worst = 0.0f64;
        for (p, x) in phis.iter().enumerate() {
            for y in &phis[p + 1..] {
                worst = worst.max(commutation_residual(x, y)?);
            }
        }
        let aligned = order == stored;
        if !aligned && worst > tol.commute {
            unaligned_noncommuting.push(v.id.clone());
        }
        nodes.push(NodeCheck {
            variable: v.id.clone(),
            degree: order.len(),
            commutation: worst,
            order_aligned: aligned,
        });
    }

    let z = g.trace_in_order(&(0..g.factors().len()).collect::<Vec<_>>())?;
    let transformed = transform_unchecked(g, transforms, &BTreeMap::new(), tol)?;
    let trace = z_transformed(&transformed, tol)?;
    let discrepancy = relative_discrepancy(z, trace.value);

    let multi: Vec<&NodeCheck> = nodes.iter().filter(|n| n.degree >= 2).collect();
    let order_sensitivity = if multi.is_empty() {
        None
    } else {
        let mut rng = seeded(probe_seed);
        let mut worst = 0.0f64;
        for _ in 0..PROBE_PERMUTATIONS {
            let mut orders = BTreeMap::new();
            for n in &multi {
                let mut o = transforms.node_order(g, &n.variable);
                o.shuffle(&mut rng);
                orders.insert(n.variable.clone(), o);
            }
            let alt = transform_unchecked(g, transforms, &orders, tol)?;
            let z_alt = z_transformed(&alt, tol)?.value;
            worst = worst.max(relative_discrepancy(trace.value, z_alt));
        }
        Some(worst)
    };

    let verdict = if !failing.is_empty() {
        Verdict::Fail
    } else if !unaligned_noncommuting.is_empty() {
        reasons.push(format!(
            "non-commuting transforms under a reordered product at {}",
            unaligned_noncommuting.join(", ")
        ));
        Verdict::Exploratory
    } else if discrepancy <= tol.holant_quantum {
        Verdict::Pass
    } else {
        reasons.push(format!(
            "discrepancy {discrepancy:e} exceeds {:e}",
            tol.holant_quantum
        ));
        Verdict::Fail
    };

    Ok(HolantReport {
        z_original: z,
        z_transformed: trace.value,
        discrepancy,
        discrepancy_tolerance: tol.holant_quantum,
        edges,
        nodes,
        factor_commutation: g.factor_commutation(),
        order_sensitivity,
        form_agreement: transformed.form_agreement,
        transpose_agreement: trace.agreement,
        verdict,
        failing_edges: failing,
        reasons,
    })
}

#[cfg(test)]
mod tests;
