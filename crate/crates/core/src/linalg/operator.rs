use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::labels::{canonical_order, total_dim, SpaceId, SpaceLabel, Tier};
use super::raw::{self, CMat};
use crate::error::{Error, Result};
use crate::tolerance::MAX_OPERATOR_DIM;

/// A dense complex operator on the tensor product of a list of labeled spaces.
///
/// Labels are always held in canonical order and the matrix indices follow
/// that order, first label most significant. Every constructor normalizes,
/// so two operators on the same spaces can be compared entrywise.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    labels: Vec<SpaceLabel>,
    matrix: CMat,
}

fn check_unique(labels: &[SpaceLabel]) -> Result<()> {
    for w in labels.windows(2) {
        if w[0].same_space(&w[1]) {
            return Err(Error::DuplicateLabel(w[0].to_string()));
        }
    }
    Ok(())
}

fn check_size(dim: usize) -> Result<()> {
    if dim > MAX_OPERATOR_DIM {
        Err(Error::TooLarge {
            dim,
            limit: MAX_OPERATOR_DIM,
        })
    } else {
        Ok(())
    }
}

impl LabeledOperator {
    /// Wraps `matrix`, whose indices follow the order of `labels` as given,
    /// and permutes it into canonical order.
    pub fn new(labels: Vec<SpaceLabel>, matrix: CMat) -> Result<Self> {
        let dim = total_dim(&labels);
        check_size(dim)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but labels require side {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.sort_by(|&a, &b| labels[a].key().cmp(&labels[b].key()));
        let sorted: Vec<SpaceLabel> = order.iter().map(|&k| labels[k].clone()).collect();
        check_unique(&sorted)?;
        let dims: Vec<usize> = labels.iter().map(|l| l.dim).collect();
        let matrix = raw::permute_legs(&matrix, &dims, &order);
        Ok(Self {
            labels: sorted,
            matrix,
        })
    }

    pub fn from_real(labels: Vec<SpaceLabel>, matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(labels, matrix.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn identity(labels: Vec<SpaceLabel>) -> Result<Self> {
        let d = total_dim(&labels);
        check_size(d)?;
        Self::new(labels, CMat::identity(d, d))
    }

    pub fn zeros(labels: Vec<SpaceLabel>) -> Result<Self> {
        let d = total_dim(&labels);
        check_size(d)?;
        Self::new(labels, CMat::zeros(d, d))
    }

    /// Diagonal operator on a single space.
    pub fn diagonal(label: SpaceLabel, diag: &[f64]) -> Result<Self> {
        if diag.len() != label.dim {
            return Err(Error::Dimension(format!(
                "{} diagonal entries for {label}",
                diag.len()
            )));
        }
        let v = nalgebra::DVector::from_iterator(
            diag.len(),
            diag.iter().map(|&x| Complex64::new(x, 0.0)),
        );
        Self::new(vec![label], CMat::from_diagonal(&v))
    }

    /// The 1x1 operator carrying no labels.
    pub fn scalar(value: Complex64) -> Self {
        Self {
            labels: Vec::new(),
            matrix: CMat::from_element(1, 1, value),
        }
    }

    pub fn labels(&self) -> &[SpaceLabel] {
        &self.labels
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dims(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        raw::frobenius(&self.matrix)
    }

    pub fn has_label(&self, label: &SpaceLabel) -> bool {
        self.labels.iter().any(|l| l.same_space(label))
    }

    /// Kronecker product, legs reordered canonically. Label sets must be disjoint.
    pub fn tensor(&self, other: &LabeledOperator) -> Result<Self> {
        if let Some(dup) = self.labels.iter().find(|l| other.has_label(l)) {
            return Err(Error::DuplicateLabel(dup.to_string()));
        }
        check_size(self.dim() * other.dim())?;
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Self::new(labels, self.matrix.kronecker(&other.matrix))
    }

    /// Tensors with the identity on every target label this operator lacks.
    pub fn extend_to(&self, target: &[SpaceLabel]) -> Result<Self> {
        for l in &self.labels {
            match target.iter().find(|t| t.same_space(l)) {
                None => return Err(Error::UnknownLabel(l.to_string())),
                Some(t) if t.dim != l.dim => {
                    return Err(Error::Dimension(format!("{l} vs {t}")));
                }
                _ => {}
            }
        }
        let missing: Vec<SpaceLabel> = target
            .iter()
            .filter(|t| !self.has_label(t))
            .cloned()
            .collect();
        if missing.is_empty() {
            return Ok(self.clone());
        }
        self.tensor(&Self::identity(missing)?)
    }

    /// Traces out the listed spaces. Tracing everything leaves a 1x1 operator.
    pub fn partial_trace(&self, traced: &[SpaceLabel]) -> Result<Self> {
        let mut mask = vec![false; self.labels.len()];
        for t in traced {
            let pos = self
                .labels
                .iter()
                .position(|l| l.same_space(t))
                .ok_or_else(|| Error::UnknownLabel(t.to_string()))?;
            mask[pos] = true;
        }
        let kept: Vec<SpaceLabel> = self
            .labels
            .iter()
            .zip(&mask)
            .filter(|(_, &m)| !m)
            .map(|(l, _)| l.clone())
            .collect();
        let matrix = raw::trace_out(&self.matrix, &self.dims(), &mask);
        Ok(Self {
            labels: kept,
            matrix,
        })
    }

    /// `Tr_B(A (B ⊗ I))` without forming the product. Every space of `B`
    /// must be carried by `A`.
    pub fn trace_against(&self, other: &LabeledOperator) -> Result<Self> {
        let mut traced = vec![false; self.labels.len()];
        for l in &other.labels {
            let pos = self
                .labels
                .iter()
                .position(|x| x.same_space(l))
                .ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
            if self.labels[pos].dim != l.dim {
                return Err(Error::Dimension(format!("{} vs {l}", self.labels[pos])));
            }
            traced[pos] = true;
        }
        let kept: Vec<SpaceLabel> = self
            .labels
            .iter()
            .zip(&traced)
            .filter(|(_, &t)| !t)
            .map(|(l, _)| l.clone())
            .collect();
        // B's legs appear in A in the same relative (canonical) order.
        let dims = self.dims();
        let n = self.dim();
        let mut split = Vec::with_capacity(n);
        for i in 0..n {
            let (mut k, mut p, mut rest) = (0, 0, i);
            let mut digits = vec![0; dims.len()];
            for (d, &q) in dims.iter().enumerate().rev() {
                digits[d] = rest % q;
                rest /= q;
            }
            for (d, &q) in dims.iter().enumerate() {
                if traced[d] {
                    p = p * q + digits[d];
                } else {
                    k = k * q + digits[d];
                }
            }
            split.push((k, p));
        }
        let kd: usize = kept.iter().map(|l| l.dim).product();
        let b = other.matrix();
        let mut out = CMat::zeros(kd, kd);
        for (i, &(ki, pi)) in split.iter().enumerate() {
            for (j, &(kj, pj)) in split.iter().enumerate() {
                out[(ki, kj)] += self.matrix[(i, j)] * b[(pj, pi)];
            }
        }
        Ok(Self {
            labels: kept,
            matrix: out,
        })
    }

    /// Entrywise transpose in the computational basis.
    pub fn transpose(&self) -> Self {
        Self {
            labels: self.labels.clone(),
            matrix: self.matrix.transpose(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            labels: self.labels.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// Canonical union of two label lists. Shared spaces must agree on dimension.
    pub fn label_union(a: &[SpaceLabel], b: &[SpaceLabel]) -> Result<Vec<SpaceLabel>> {
        let mut out = a.to_vec();
        for l in b {
            match out.iter().find(|x| x.same_space(l)) {
                Some(x) if x.dim != l.dim => {
                    return Err(Error::Dimension(format!("{x} vs {l}")));
                }
                Some(_) => {}
                None => out.push(l.clone()),
            }
        }
        canonical_order(&mut out);
        Ok(out)
    }

    /// Operator product after extending both sides to the union of their labels.
    pub fn compose(&self, other: &LabeledOperator) -> Result<Self> {
        let (a, b) = self.aligned(other)?;
        Ok(Self {
            labels: a.labels,
            matrix: a.matrix * b.matrix,
        })
    }

    /// Both operators identity-extended onto the union of their labels.
    pub fn aligned(&self, other: &LabeledOperator) -> Result<(Self, Self)> {
        let union = Self::label_union(&self.labels, &other.labels)?;
        Ok((self.extend_to(&union)?, other.extend_to(&union)?))
    }

    pub fn add(&self, other: &LabeledOperator) -> Result<Self> {
        let (a, b) = self.aligned(other)?;
        Ok(Self {
            labels: a.labels,
            matrix: a.matrix + b.matrix,
        })
    }

    pub fn sub(&self, other: &LabeledOperator) -> Result<Self> {
        let (a, b) = self.aligned(other)?;
        Ok(Self {
            labels: a.labels,
            matrix: a.matrix - b.matrix,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            labels: self.labels.clone(),
            matrix: self.matrix.map(|z| z * factor),
        }
    }

    /// Replaces the matrix, keeping the labels.
    pub fn with_matrix(&self, matrix: CMat) -> Result<Self> {
        if matrix.shape() != self.matrix.shape() {
            return Err(Error::Dimension(format!(
                "replacement matrix {:?} vs {:?}",
                matrix.shape(),
                self.matrix.shape()
            )));
        }
        Ok(Self {
            labels: self.labels.clone(),
            matrix,
        })
    }

    /// Renames every leg and restores canonical order. Dimensions must be kept.
    pub fn relabel(&self, mut f: impl FnMut(&SpaceLabel) -> SpaceLabel) -> Result<Self> {
        let labels: Vec<SpaceLabel> = self
            .labels
            .iter()
            .map(|l| {
                let n = f(l);
                if n.dim != l.dim {
                    Err(Error::Dimension(format!("relabel {l} -> {n}")))
                } else {
                    Ok(n)
                }
            })
            .collect::<Result<_>>()?;
        Self::new(labels, self.matrix.clone())
    }

    /// `‖A − B‖_F / ‖B‖_F`, or the absolute distance when `B` vanishes.
    pub fn relative_distance(&self, reference: &LabeledOperator) -> Result<f64> {
        fn keys(o: &LabeledOperator) -> BTreeSet<(&SpaceId, Tier)> {
            o.labels.iter().map(|l| l.key()).collect()
        }
        if keys(self) != keys(reference) {
            return Err(Error::Dimension(format!(
                "comparing operators on different spaces: [{}] vs [{}]",
                display_labels(&self.labels),
                display_labels(&reference.labels)
            )));
        }
        let diff = raw::frobenius(&(&self.matrix - &reference.matrix));
        let scale = reference.frobenius_norm();
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }
}

pub fn display_labels(labels: &[SpaceLabel]) -> String {
    labels
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
