//! Index gymnastics on plain dense matrices whose rows and columns are
//! multi-indices over a list of leg dimensions (first leg most significant).

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// For every flat index of the old leg order, the flat index it moves to when
/// the legs are reordered so that new leg `j` is old leg `perm[j]`.
pub fn leg_permutation_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    debug_assert_eq!(dims.len(), perm.len());
    let total: usize = dims.iter().product();
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_strides = strides(&new_dims);
    // new stride of each old leg
    let mut stride_of_old = vec![0; dims.len()];
    for (j, &p) in perm.iter().enumerate() {
        stride_of_old[p] = new_strides[j];
    }
    (0..total)
        .map(|flat| {
            dims.iter()
                .enumerate()
                .map(|(k, &d)| ((flat / old_strides[k]) % d) * stride_of_old[k])
                .sum()
        })
        .collect()
}

/// Reorders the tensor legs of a square operator.
pub fn permute_legs(m: &CMat, dims: &[usize], perm: &[usize]) -> CMat {
    if perm.iter().enumerate().all(|(j, &p)| j == p) {
        return m.clone();
    }
    let map = leg_permutation_map(dims, perm);
    let n = map.len();
    let mut out = CMat::zeros(n, n);
    for c in 0..n {
        for r in 0..n {
            out[(map[r], map[c])] = m[(r, c)];
        }
    }
    out
}

/// Traces out every leg with `traced[k] == true`.
pub fn trace_out(m: &CMat, dims: &[usize], traced: &[bool]) -> CMat {
    let mut perm: Vec<usize> = (0..dims.len()).filter(|&k| !traced[k]).collect();
    perm.extend((0..dims.len()).filter(|&k| traced[k]));
    let kept: usize = (0..dims.len()).filter(|&k| !traced[k]).map(|k| dims[k]).product();
    let gone: usize = (0..dims.len()).filter(|&k| traced[k]).map(|k| dims[k]).product();
    let p = permute_legs(m, dims, &perm);
    let mut out = CMat::zeros(kept, kept);
    for c in 0..kept {
        for r in 0..kept {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..gone {
                acc += p[(r * gone + t, c * gone + t)];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

/// Trace of a product without forming it.
pub fn trace_of_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            acc += a[(j, k)] * b[(k, j)];
        }
    }
    acc
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Matrix unit `|k><l|` of side `d`.
pub fn matrix_unit(d: usize, k: usize, l: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(k, l)] = Complex64::new(1.0, 0.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn swapping_two_legs_matches_reversed_kronecker() {
        let a = CMat::from_fn(2, 2, |r, c_| c((r * 2 + c_) as f64 + 1.0));
        let b = CMat::from_fn(3, 3, |r, c_| c((r * 3 + c_) as f64 * 0.5 - 1.0));
        let ab = a.kronecker(&b);
        let ba = b.kronecker(&a);
        assert_eq!(permute_legs(&ab, &[2, 3], &[1, 0]), ba);
    }

    #[test]
    fn trace_out_second_factor() {
        let a = CMat::from_fn(2, 2, |r, c_| c((r + 2 * c_) as f64));
        let b = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(2.5)]));
        let ab = a.kronecker(&b);
        assert_eq!(trace_out(&ab, &[2, 2], &[false, true]), a.scale(3.5));
        assert_eq!(trace_out(&ab, &[2, 2], &[true, false]), b * a.trace());
    }

    #[test]
    fn strides_are_row_major() {
        assert_eq!(strides(&[2, 3, 4]), vec![12, 4, 1]);
        assert_eq!(strides(&[]), Vec::<usize>::new());
    }
}
