//! Classical factor graphs, exact partition functions and the holographic
//! transformation on them.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::enumerate::{for_each_assignment, guarded_size};
use crate::error::{Error, Result};
use crate::report::{relative_discrepancy, EdgeCheck, EdgeMode, HolantReport, Verdict};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalVariable {
    pub id: String,
    /// Unary weight `f_i(x)` for each value of the variable's domain; the
    /// domain size is the length.
    pub weights: Vec<f64>,
}

impl ClassicalVariable {
    pub fn new(id: impl Into<String>, weights: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            weights,
        }
    }

    pub fn domain(&self) -> usize {
        self.weights.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalFactor {
    pub id: String,
    pub neighbors: Vec<String>,
    /// Row-major over the neighbors in listed order, first neighbor most
    /// significant.
    pub table: Vec<f64>,
}

impl ClassicalFactor {
    pub fn new(id: impl Into<String>, neighbors: Vec<String>, table: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            neighbors,
            table,
        }
    }
}

/// A validated bipartite factor graph with nonnegative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalFactorGraph {
    variables: Vec<ClassicalVariable>,
    factors: Vec<ClassicalFactor>,
    index: BTreeMap<String, usize>,
}

fn check_weights(site: &str, values: &[f64]) -> Result<()> {
    if let Some(&bad) = values.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::Invariant {
            site: site.to_string(),
            what: "weights must be finite and nonnegative".into(),
            residual: bad,
        });
    }
    Ok(())
}

impl ClassicalFactorGraph {
    pub fn new(variables: Vec<ClassicalVariable>, factors: Vec<ClassicalFactor>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (k, v) in variables.iter().enumerate() {
            if v.weights.is_empty() {
                return Err(Error::Graph(format!("variable {} has an empty domain", v.id)));
            }
            if index.insert(v.id.clone(), k).is_some() {
                return Err(Error::Graph(format!("duplicate variable id {}", v.id)));
            }
            check_weights(&format!("variable {}", v.id), &v.weights)?;
        }
        let mut factor_ids = BTreeSet::new();
        for f in &factors {
            if !factor_ids.insert(f.id.clone()) {
                return Err(Error::Graph(format!("duplicate factor id {}", f.id)));
            }
            let mut seen = BTreeSet::new();
            let mut expected = 1usize;
            for n in &f.neighbors {
                let k = index.get(n).ok_or_else(|| {
                    Error::Graph(format!("factor {} references unknown variable {n}", f.id))
                })?;
                if !seen.insert(n) {
                    return Err(Error::Graph(format!("factor {} lists {n} twice", f.id)));
                }
                expected = expected.saturating_mul(variables[*k].domain());
            }
            if f.table.len() != expected {
                return Err(Error::Graph(format!(
                    "factor {} has {} table entries, expected {expected}",
                    f.id,
                    f.table.len()
                )));
            }
            check_weights(&format!("factor {}", f.id), &f.table)?;
        }
        Ok(Self {
            variables,
            factors,
            index,
        })
    }

    pub fn variables(&self) -> &[ClassicalVariable] {
        &self.variables
    }

    pub fn factors(&self) -> &[ClassicalFactor] {
        &self.factors
    }

    pub fn variable(&self, id: &str) -> Option<&ClassicalVariable> {
        self.index.get(id).map(|&k| &self.variables[k])
    }

    fn position(&self, id: &str) -> usize {
        self.index[id]
    }

    /// All edges `(variable, factor)`, factors in stored order and each
    /// factor's neighbors in listed order.
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

    /// Multiplies one factor's table by `c`.
    pub fn scale_factor(&self, factor: &str, c: f64) -> Result<Self> {
        let mut factors = self.factors.clone();
        let f = factors
            .iter_mut()
            .find(|f| f.id == factor)
            .ok_or_else(|| Error::Graph(format!("unknown factor {factor}")))?;
        f.table.iter_mut().for_each(|x| *x *= c);
        Self::new(self.variables.clone(), factors)
    }

    /// Exact partition function by enumerating every joint assignment.
    pub fn partition_function(&self) -> Result<f64> {
        let radices: Vec<usize> = self.variables.iter().map(|v| v.domain()).collect();
        guarded_size(&radices)?;
        let layout: Vec<(Vec<usize>, Vec<usize>)> = self
            .factors
            .iter()
            .map(|f| {
                let pos: Vec<usize> = f.neighbors.iter().map(|n| self.position(n)).collect();
                let dims: Vec<usize> = pos.iter().map(|&p| radices[p]).collect();
                (pos, crate::linalg::raw::strides(&dims))
            })
            .collect();
        let mut z = 0.0;
        for_each_assignment(&radices, |x| {
            let mut w: f64 = self
                .variables
                .iter()
                .zip(x)
                .map(|(v, &xi)| v.weights[xi])
                .product();
            for (f, (pos, strides)) in self.factors.iter().zip(&layout) {
                let idx: usize = pos.iter().zip(strides).map(|(&p, &s)| x[p] * s).sum();
                w *= f.table[idx];
            }
            z += w;
        });
        Ok(z)
    }
}

/// The pair `(φ_{i,a}, φ̂_{i,a})` inserted on edge `(i, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEdgeTransform {
    pub variable: String,
    pub factor: String,
    pub phi: DMatrix<f64>,
    pub phi_hat: DMatrix<f64>,
}

impl ClassicalEdgeTransform {
    pub fn new(
        variable: impl Into<String>,
        factor: impl Into<String>,
        phi: DMatrix<f64>,
        phi_hat: DMatrix<f64>,
    ) -> Self {
        Self {
            variable: variable.into(),
            factor: factor.into(),
            phi,
            phi_hat,
        }
    }

    /// Identity pair on a domain of size `q`.
    pub fn identity(variable: impl Into<String>, factor: impl Into<String>, q: usize) -> Self {
        Self::new(variable, factor, DMatrix::identity(q, q), DMatrix::identity(q, q))
    }

    /// `φ` paired with its numerical inverse.
    pub fn with_inverse(
        variable: impl Into<String>,
        factor: impl Into<String>,
        phi: DMatrix<f64>,
    ) -> Result<Self> {
        let phi_hat = phi
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Dimension("transform matrix is singular".into()))?;
        Ok(Self::new(variable, factor, phi, phi_hat))
    }

    pub fn domain(&self) -> usize {
        self.phi.nrows()
    }
}

/// Largest entry of `|φ φ̂ − I|`.
pub fn check_biorthogonality(t: &ClassicalEdgeTransform) -> Result<f64> {
    let q = t.phi.nrows();
    if t.phi.ncols() != q || t.phi_hat.nrows() != q || t.phi_hat.ncols() != q {
        return Err(Error::Dimension(format!(
            "edge ({}, {}): phi is {:?}, phi_hat is {:?}",
            t.variable,
            t.factor,
            t.phi.shape(),
            t.phi_hat.shape()
        )));
    }
    let prod = &t.phi * &t.phi_hat - DMatrix::<f64>::identity(q, q);
    Ok(prod.iter().fold(0.0, |m, x| m.max(x.abs())))
}

/// A transformed table over edge variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTable {
    /// The node (factor or variable) this table belongs to.
    pub node: String,
    /// Edge variables indexing the table, first most significant.
    pub edges: Vec<(String, String)>,
    pub table: Vec<f64>,
}

/// Output of the classical holographic transformation: every factor and
/// variable replaced by a table over its incident edge variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedClassicalGraph {
    pub factors: Vec<EdgeTable>,
    pub variables: Vec<EdgeTable>,
    /// Domain size of every edge variable, in edge order.
    pub edge_domains: Vec<((String, String), usize)>,
}

impl TransformedClassicalGraph {
    /// `∑_y ∏_a f̂_a ∏_i f̂_i` by enumerating every edge assignment.
    pub fn partition_function(&self) -> Result<f64> {
        let radices: Vec<usize> = self.edge_domains.iter().map(|(_, q)| *q).collect();
        guarded_size(&radices)?;
        let pos: BTreeMap<&(String, String), usize> = self
            .edge_domains
            .iter()
            .enumerate()
            .map(|(k, (e, _))| (e, k))
            .collect();
        let layout: Vec<(Vec<usize>, Vec<usize>, &Vec<f64>)> = self
            .factors
            .iter()
            .chain(&self.variables)
            .map(|t| {
                let p: Vec<usize> = t.edges.iter().map(|e| pos[e]).collect();
                let dims: Vec<usize> = p.iter().map(|&k| radices[k]).collect();
                (p, crate::linalg::raw::strides(&dims), &t.table)
            })
            .collect();
        let mut z = 0.0;
        for_each_assignment(&radices, |y| {
            let mut w = 1.0;
            for (p, s, table) in &layout {
                let idx: usize = p.iter().zip(s).map(|(&k, &st)| y[k] * st).sum();
                w *= table[idx];
            }
            z += w;
        });
        Ok(z)
    }
}

fn transform_map<'a>(
    g: &ClassicalFactorGraph,
    transforms: &'a [ClassicalEdgeTransform],
    tol: &Tolerances,
) -> Result<BTreeMap<(String, String), &'a ClassicalEdgeTransform>> {
    let edges: BTreeSet<(String, String)> = g.edges().into_iter().collect();
    let mut map = BTreeMap::new();
    for t in transforms {
        let key = (t.variable.clone(), t.factor.clone());
        if !edges.contains(&key) || map.contains_key(&key) {
            return Err(Error::ExtraTransform(key.0, key.1));
        }
        let q = g.variable(&t.variable).map(|v| v.domain()).unwrap_or(0);
        if t.domain() != q {
            return Err(Error::Dimension(format!(
                "edge ({}, {}): transform has side {}, domain is {q}",
                t.variable,
                t.factor,
                t.domain()
            )));
        }
        let r = check_biorthogonality(t)?;
        if r > tol.identity {
            return Err(Error::Invariant {
                site: format!("edge ({}, {})", t.variable, t.factor),
                what: "phi * phi_hat differs from the identity".into(),
                residual: r,
            });
        }
        map.insert(key, t);
    }
    if let Some((v, a)) = edges.iter().find(|e| !map.contains_key(*e)) {
        return Err(Error::MissingTransform(v.clone(), a.clone()));
    }
    Ok(map)
}

/// Pushes `φ̂` into every factor and `φ` into every variable by direct
/// summation over the defining sums.
pub fn classical_transform(
    g: &ClassicalFactorGraph,
    transforms: &[ClassicalEdgeTransform],
) -> Result<TransformedClassicalGraph> {
    classical_transform_with(g, transforms, &Tolerances::default())
}

pub fn classical_transform_with(
    g: &ClassicalFactorGraph,
    transforms: &[ClassicalEdgeTransform],
    tol: &Tolerances,
) -> Result<TransformedClassicalGraph> {
    let map = transform_map(g, transforms, tol)?;
    let edge_domains: Vec<((String, String), usize)> = g
        .edges()
        .into_iter()
        .map(|e| {
            let q = g.variable(&e.0).map(|v| v.domain()).unwrap_or(0);
            (e, q)
        })
        .collect();

    let mut factors = Vec::with_capacity(g.factors().len());
    for f in g.factors() {
        let edges: Vec<(String, String)> = f
            .neighbors
            .iter()
            .map(|n| (n.clone(), f.id.clone()))
            .collect();
        let hats: Vec<&DMatrix<f64>> = edges.iter().map(|e| &map[e].phi_hat).collect();
        let radices: Vec<usize> = hats.iter().map(|m| m.nrows()).collect();
        let mut table = Vec::with_capacity(f.table.len());
        for_each_assignment(&radices, |y| {
            let mut acc = 0.0;
            let mut zi = 0;
            for_each_assignment(&radices, |z| {
                let w: f64 = hats.iter().enumerate().map(|(k, h)| h[(y[k], z[k])]).product();
                acc += f.table[zi] * w;
                zi += 1;
            });
            table.push(acc);
        });
        factors.push(EdgeTable {
            node: f.id.clone(),
            edges,
            table,
        });
    }

    let mut variables = Vec::with_capacity(g.variables().len());
    for v in g.variables() {
        let edges: Vec<(String, String)> = g
            .incident_factors(&v.id)
            .into_iter()
            .map(|a| (v.id.clone(), a.to_string()))
            .collect();
        let phis: Vec<&DMatrix<f64>> = edges.iter().map(|e| &map[e].phi).collect();
        let radices: Vec<usize> = phis.iter().map(|m| m.ncols()).collect();
        let mut table = Vec::new();
        for_each_assignment(&radices, |y| {
            let acc: f64 = (0..v.domain())
                .map(|x| {
                    v.weights[x]
                        * phis
                            .iter()
                            .enumerate()
                            .map(|(k, p)| p[(x, y[k])])
                            .product::<f64>()
                })
                .sum();
            table.push(acc);
        });
        variables.push(EdgeTable {
            node: v.id.clone(),
            edges,
            table,
        });
    }

    Ok(TransformedClassicalGraph {
        factors,
        variables,
        edge_domains,
    })
}

/// Computes `Z` and the transformed sum and compares them.
pub fn verify_classical_holant(
    g: &ClassicalFactorGraph,
    transforms: &[ClassicalEdgeTransform],
    tol: &Tolerances,
) -> Result<HolantReport> {
    let mut edges = Vec::new();
    let mut failing = Vec::new();
    for t in transforms {
        let r = check_biorthogonality(t)?;
        let ok = r <= tol.identity;
        if !ok {
            failing.push((t.variable.clone(), t.factor.clone()));
        }
        edges.push(EdgeCheck {
            variable: t.variable.clone(),
            factor: t.factor.clone(),
            mode: EdgeMode::Classical,
            residual: r,
            map_residual: None,
            support_residual: None,
            ok,
        });
    }
    let z = g.partition_function()?;
    let mut reasons = Vec::new();
    let (z_hat, verdict) = if failing.is_empty() {
        let z_hat = classical_transform_with(g, transforms, tol)?.partition_function()?;
        let d = relative_discrepancy(Complex64::new(z, 0.0), Complex64::new(z_hat, 0.0));
        if d <= tol.holant_classical {
            (z_hat, Verdict::Pass)
        } else {
            reasons.push(format!("discrepancy {d:e} exceeds {:e}", tol.holant_classical));
            (z_hat, Verdict::Fail)
        }
    } else {
        // the transformed sum is still informative: evaluate it with the
        // invariant check disabled
        let loose = Tolerances {
            identity: f64::INFINITY,
            ..*tol
        };
        let z_hat = classical_transform_with(g, transforms, &loose)?.partition_function()?;
        for (v, a) in &failing {
            reasons.push(format!("edge ({v}, {a}) violates phi * phi_hat = I"));
        }
        (z_hat, Verdict::Fail)
    };
    let z_c = Complex64::new(z, 0.0);
    let zh_c = Complex64::new(z_hat, 0.0);
    Ok(HolantReport {
        z_original: z_c,
        z_transformed: zh_c,
        discrepancy: relative_discrepancy(z_c, zh_c),
        discrepancy_tolerance: tol.holant_classical,
        edges,
        nodes: Vec::new(),
        factor_commutation: 0.0,
        order_sensitivity: None,
        form_agreement: 0.0,
        transpose_agreement: 0.0,
        verdict,
        failing_edges: failing,
        reasons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_invertible_real, seeded};

    fn one_var_graph() -> ClassicalFactorGraph {
        ClassicalFactorGraph::new(
            vec![ClassicalVariable::new("x", vec![1.0, 1.0])],
            vec![ClassicalFactor::new("a", vec!["x".into()], vec![2.0, 3.0])],
        )
        .unwrap()
    }

    fn hadamard() -> (DMatrix<f64>, DMatrix<f64>) {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        (h.clone(), h * 0.5)
    }

    #[test]
    fn single_unary_factor() {
        assert_eq!(one_var_graph().partition_function().unwrap(), 5.0);
    }

    #[test]
    fn all_ones_counts_states() {
        let g = ClassicalFactorGraph::new(
            vec![
                ClassicalVariable::new("x", vec![1.0; 2]),
                ClassicalVariable::new("y", vec![1.0; 3]),
            ],
            vec![ClassicalFactor::new("a", vec!["x".into(), "y".into()], vec![1.0; 6])],
        )
        .unwrap();
        assert_eq!(g.partition_function().unwrap(), 6.0);
    }

    #[test]
    fn no_factors_factorizes() {
        let g = ClassicalFactorGraph::new(
            vec![
                ClassicalVariable::new("x", vec![0.5, 1.5]),
                ClassicalVariable::new("y", vec![1.0, 2.0, 4.0]),
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(g.partition_function().unwrap(), 2.0 * 7.0);
    }

    #[test]
    fn validation_errors() {
        let bad_len = ClassicalFactorGraph::new(
            vec![ClassicalVariable::new("x", vec![1.0, 1.0])],
            vec![ClassicalFactor::new("a", vec!["x".into()], vec![1.0])],
        );
        assert!(matches!(bad_len, Err(Error::Graph(_))));
        let negative = ClassicalFactorGraph::new(
            vec![ClassicalVariable::new("x", vec![1.0, -1.0])],
            vec![],
        );
        assert!(matches!(negative, Err(Error::Invariant { .. })));
        let dangling = ClassicalFactorGraph::new(
            vec![ClassicalVariable::new("x", vec![1.0])],
            vec![ClassicalFactor::new("a", vec!["y".into()], vec![1.0])],
        );
        assert!(matches!(dangling, Err(Error::Graph(_))));
    }

    #[test]
    fn biorthogonality_cases() {
        let id = ClassicalEdgeTransform::identity("x", "a", 3);
        assert_eq!(check_biorthogonality(&id).unwrap(), 0.0);
        let (h, hh) = hadamard();
        let t = ClassicalEdgeTransform::new("x", "a", h, hh);
        assert_eq!(check_biorthogonality(&t).unwrap(), 0.0);
        let mut rng = seeded(9);
        let t = ClassicalEdgeTransform::with_inverse("x", "a", random_invertible_real(&mut rng, 3))
            .unwrap();
        assert!(check_biorthogonality(&t).unwrap() <= 1e-12);
        let bad = ClassicalEdgeTransform::new("x", "a", DMatrix::identity(2, 2), DMatrix::identity(3, 3));
        assert!(matches!(check_biorthogonality(&bad), Err(Error::Dimension(_))));
    }

    #[test]
    fn identity_transform_reproduces_tables() {
        let g = ClassicalFactorGraph::new(
            vec![
                ClassicalVariable::new("x", vec![1.0, 2.0]),
                ClassicalVariable::new("y", vec![3.0, 5.0]),
            ],
            vec![
                ClassicalFactor::new("a", vec!["x".into(), "y".into()], vec![1.0, 2.0, 3.0, 4.0]),
                ClassicalFactor::new("b", vec!["x".into()], vec![7.0, 11.0]),
            ],
        )
        .unwrap();
        let ts: Vec<_> = g
            .edges()
            .into_iter()
            .map(|(v, a)| ClassicalEdgeTransform::identity(v, a, 2))
            .collect();
        let tg = classical_transform(&g, &ts).unwrap();
        assert_eq!(tg.factors[0].table, g.factors()[0].table);
        assert_eq!(tg.factors[1].table, g.factors()[1].table);
        // x touches a and b: f̂_x(y_a, y_b) = f_x(y)·[y_a = y_b]
        assert_eq!(tg.variables[0].table, vec![1.0, 0.0, 0.0, 2.0]);
        assert_eq!(tg.variables[1].table, vec![3.0, 5.0]);
        let r = verify_classical_holant(&g, &ts, &Tolerances::default()).unwrap();
        assert!(r.passed());
        assert!(r.discrepancy < 1e-15);
    }

    #[test]
    fn equality_factor_under_hadamard() {
        let g = ClassicalFactorGraph::new(
            vec![
                ClassicalVariable::new("x", vec![1.0, 1.0]),
                ClassicalVariable::new("y", vec![1.0, 1.0]),
            ],
            vec![ClassicalFactor::new("eq", vec!["x".into(), "y".into()], vec![1.0, 0.0, 0.0, 1.0])],
        )
        .unwrap();
        let (h, hh) = hadamard();
        let ts = vec![
            ClassicalEdgeTransform::new("x", "eq", h.clone(), hh.clone()),
            ClassicalEdgeTransform::new("y", "eq", h, hh),
        ];
        let tg = classical_transform(&g, &ts).unwrap();
        // ∑_z δ(z1,z2) φ̂(y1,z1) φ̂(y2,z2) = ¼ ∑_z H(y1,z)H(y2,z) = ½ δ(y1,y2)
        assert_eq!(tg.factors[0].table, vec![0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn single_edge_factor_is_a_matrix_vector_product() {
        let g = one_var_graph();
        let mut rng = seeded(21);
        let phi = random_invertible_real(&mut rng, 2);
        let t = ClassicalEdgeTransform::with_inverse("x", "a", phi).unwrap();
        let tg = classical_transform(&g, std::slice::from_ref(&t)).unwrap();
        for y in 0..2 {
            let expect = 2.0 * t.phi_hat[(y, 0)] + 3.0 * t.phi_hat[(y, 1)];
            assert!((tg.factors[0].table[y] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn hadamard_on_equality_cycle() {
        // three variables on a cycle of three equality factors
        let vars: Vec<_> = ["x", "y", "z"]
            .iter()
            .map(|v| ClassicalVariable::new(*v, vec![0.3, 0.9]))
            .collect();
        let eq = vec![1.0, 0.0, 0.0, 1.0];
        let g = ClassicalFactorGraph::new(
            vars,
            vec![
                ClassicalFactor::new("a", vec!["x".into(), "y".into()], eq.clone()),
                ClassicalFactor::new("b", vec!["y".into(), "z".into()], eq.clone()),
                ClassicalFactor::new("c", vec!["z".into(), "x".into()], eq),
            ],
        )
        .unwrap();
        let (h, hh) = hadamard();
        let ts: Vec<_> = g
            .edges()
            .into_iter()
            .map(|(v, a)| ClassicalEdgeTransform::new(v, a, h.clone(), hh.clone()))
            .collect();
        let r = verify_classical_holant(&g, &ts, &Tolerances::default()).unwrap();
        // with every variable forced equal: 0.3³ + 0.9³
        assert!((r.z_original.re - (0.027 + 0.729)).abs() < 1e-15);
        assert!(r.discrepancy <= 1e-10);
        assert!(r.passed());
    }

    #[test]
    fn missing_and_extra_transforms() {
        let g = one_var_graph();
        assert!(matches!(
            classical_transform(&g, &[]),
            Err(Error::MissingTransform(..))
        ));
        let ts = vec![
            ClassicalEdgeTransform::identity("x", "a", 2),
            ClassicalEdgeTransform::identity("x", "b", 2),
        ];
        assert!(matches!(
            classical_transform(&g, &ts),
            Err(Error::ExtraTransform(..))
        ));
        let bad = vec![ClassicalEdgeTransform::new(
            "x",
            "a",
            DMatrix::identity(2, 2),
            DMatrix::from_element(2, 2, 1.0),
        )];
        assert!(matches!(
            classical_transform(&g, &bad),
            Err(Error::Invariant { .. })
        ));
        let r = verify_classical_holant(&g, &bad, &Tolerances::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.failing_edges, vec![("x".to_string(), "a".to_string())]);
    }

    #[test]
    fn state_space_guard() {
        let vars: Vec<_> = (0..21)
            .map(|k| ClassicalVariable::new(format!("v{k}"), vec![1.0, 1.0]))
            .collect();
        let g = ClassicalFactorGraph::new(vars, vec![]).unwrap();
        assert!(matches!(g.partition_function(), Err(Error::StateSpace { .. })));
    }
}
