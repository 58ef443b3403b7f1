//! Small dense linear algebra and order statistics.
//!
//! Dimensions in this crate are modest (d ≤ a few hundred), so everything is
//! row-major `Vec<f64>` storage with straightforward O(d³) kernels.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Relative tolerance for the symmetry check in [`SpdMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Off-diagonal Frobenius norm (relative to the full norm) at which the
/// Jacobi sweep stops.
pub const JACOBI_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;

/// `n` observations of dimension `d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    dim: usize,
    values: Vec<f64>,
}

impl Sample {
    /// Empty sample of the given dimension.
    pub fn with_dim(dim: usize) -> Self {
        Self {
            dim,
            values: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        Self {
            dim,
            values: Vec::with_capacity(dim * n),
        }
    }

    /// Builds a sample from rows, rejecting ragged or non-finite input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyData)?;
        let dim = first.as_ref().len();
        if dim == 0 {
            return Err(invalid("observations must have dimension >= 1"));
        }
        let mut values = Vec::with_capacity(dim * rows.len());
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(dim, values)
    }

    /// Builds a sample from row-major values.
    pub fn from_flat(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("observations must have dimension >= 1"));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: values.len() % dim,
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { dim, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.dim, "row dimension");
        self.values.extend_from_slice(row);
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Returns `y + shift` for every row.
    pub fn translated(&self, shift: &[f64]) -> Self {
        assert_eq!(shift.len(), self.dim, "shift dimension");
        let mut out = self.clone();
        for row in out.values.chunks_exact_mut(self.dim) {
            for (v, s) in row.iter_mut().zip(shift) {
                *v += s;
            }
        }
        out
    }

    /// Returns `A·y` for every row.
    pub fn transformed(&self, a: &SquareMatrix) -> Self {
        assert_eq!(a.dim(), self.dim, "matrix dimension");
        let mut values = Vec::with_capacity(self.values.len());
        for row in self.rows() {
            values.extend(a.mul_vec(row));
        }
        Self {
            dim: self.dim,
            values,
        }
    }
}

/// Dense square matrix, row-major; serialized as a list of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::EmptyData);
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks_exact(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| self[(i, j)] == if i == j { 1.0 } else { 0.0 })
        })
    }

    pub fn check_symmetric(&self) -> Result<()> {
        let scale = self
            .data
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let diff = (self[(i, j)] - self[(j, i)]).abs();
                if diff > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        diff,
                    });
                }
            }
        }
        Ok(())
    }
}

impl From<SquareMatrix> for Vec<Vec<f64>> {
    fn from(m: SquareMatrix) -> Self {
        m.to_rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SquareMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SquareMatrix::from_rows(&rows)
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Lower-triangular Cholesky factor `L` with `L·Lᵀ = m`.
pub fn cholesky(m: &SquareMatrix) -> Result<SquareMatrix> {
    let n = m.dim();
    let mut l = SquareMatrix::zeros(n);
    for j in 0..n {
        let mut diag = m[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        // also rejects NaN
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(diag > 0.0) {
            return Err(Error::NotSpd {
                pivot: j,
                value: diag,
            });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Eigenvalues of a symmetric matrix in descending order (cyclic Jacobi).
pub fn sym_eigenvalues(m: &SquareMatrix) -> Result<Vec<f64>> {
    m.check_symmetric()?;
    let n = m.dim();
    let mut a = m.clone();
    // symmetrize exactly so rotations stay consistent
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let total: f64 = a.data.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

/// A validated symmetric positive-definite matrix together with its
/// Cholesky factor, inverse, eigenvalues and determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    matrix: SquareMatrix,
    chol: SquareMatrix,
    inverse: SquareMatrix,
    eigenvalues: Vec<f64>,
    log_det: f64,
    identity: bool,
}

impl SpdMatrix {
    pub fn new(matrix: SquareMatrix) -> Result<Self> {
        matrix.check_symmetric()?;
        let chol = cholesky(&matrix)?;
        let inverse = spd_inverse(&chol);
        let eigenvalues = sym_eigenvalues(&matrix)?;
        if let Some(&min) = eigenvalues.last() {
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(min > 0.0) {
                return Err(Error::NotSpd {
                    pivot: eigenvalues.len() - 1,
                    value: min,
                });
            }
        }
        let log_det = 2.0 * (0..matrix.dim()).map(|i| chol[(i, i)].ln()).sum::<f64>();
        let identity = matrix.is_identity();
        Ok(Self {
            matrix,
            chol,
            inverse,
            eigenvalues,
            log_det,
            identity,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(SquareMatrix::identity(dim)).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    pub fn cholesky(&self) -> &SquareMatrix {
        &self.chol
    }

    pub fn inverse(&self) -> &SquareMatrix {
        &self.inverse
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn determinant(&self) -> f64 {
        self.log_det.exp()
    }

    pub fn log_determinant(&self) -> f64 {
        self.log_det
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    /// `Σ^{-1}·v`.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        if self.identity {
            return v.to_vec();
        }
        self.inverse.mul_vec(v)
    }

    /// `L·v`, mapping standardized draws to scatter `Σ`.
    pub fn scale_vec(&self, v: &[f64]) -> Vec<f64> {
        if self.identity {
            return v.to_vec();
        }
        let n = self.dim();
        (0..n)
            .map(|i| (0..=i).map(|k| self.chol[(i, k)] * v[k]).sum())
            .collect()
    }
}

fn spd_inverse(l: &SquareMatrix) -> SquareMatrix {
    let n = l.dim();
    // L^{-1} by forward substitution, then (L^{-1})ᵀ L^{-1}
    let mut linv = SquareMatrix::zeros(n);
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                s -= l[(i, k)] * linv[(k, col)];
            }
            linv[(i, col)] = s / l[(i, i)];
        }
    }
    let mut inv = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (i.max(j)..n).map(|k| linv[(k, i)] * linv[(k, j)]).sum();
            inv[(i, j)] = s;
            inv[(j, i)] = s;
        }
    }
    inv
}

/// Squared Mahalanobis distance `(y-μ₀)ᵀ Σ^{-1} (y-μ₀)`.
pub fn mahalanobis_sq(y: &[f64], mu0: &[f64], sigma: &SpdMatrix) -> Result<f64> {
    let d = sigma.dim();
    if y.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: y.len(),
        });
    }
    if mu0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: mu0.len(),
        });
    }
    Ok(mahalanobis_sq_unchecked(y, mu0, sigma))
}

pub(crate) fn mahalanobis_sq_unchecked(y: &[f64], mu0: &[f64], sigma: &SpdMatrix) -> f64 {
    if sigma.identity {
        return y.iter().zip(mu0).map(|(a, b)| (a - b) * (a - b)).sum();
    }
    let d = sigma.dim();
    let inv = &sigma.inverse;
    let mut acc = 0.0;
    for i in 0..d {
        let di = y[i] - mu0[i];
        let mut row = 0.0;
        for j in 0..d {
            row += inv[(i, j)] * (y[j] - mu0[j]);
        }
        acc += di * row;
    }
    acc.max(0.0)
}

/// Number of retained observations `m = max(1, ⌊nγ⌋)`.
pub fn retained_count(n: usize, gamma: f64) -> usize {
    // guard against products such as 20·0.7 landing a hair below an integer
    let m = ((n as f64) * gamma + 1e-9).floor() as usize;
    m.clamp(1, n.max(1))
}

/// The `m`-th smallest distance, `m = max(1, ⌊nγ⌋)`.
pub fn empirical_quantile_sq_distance(distances: &[f64], gamma: f64) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::EmptyData);
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    let m = retained_count(distances.len(), gamma);
    let mut scratch = distances.to_vec();
    let (_, kth, _) = scratch.select_nth_unstable_by(m - 1, f64::total_cmp);
    Ok(*kth)
}

/// Indices of the `m` smallest distances; ties broken by input index.
pub(crate) fn smallest_indices(distances: &[f64], m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..distances.len()).collect();
    if m < idx.len() {
        idx.select_nth_unstable_by(m - 1, |&a, &b| {
            distances[a].total_cmp(&distances[b]).then(a.cmp(&b))
        });
        idx.truncate(m);
    }
    idx.sort_unstable();
    idx
}

/// Median of `values` (average of the two middle order statistics for even
/// length). Reorders `values`.
pub(crate) fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    debug_assert!(n > 0);
    let mid = n / 2;
    let (lower, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower_max = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower_max + upper)
    }
}

/// Sample covariance with divisor `m` (not `m - 1`), row-major input.
pub fn covariance(rows: &Sample) -> SquareMatrix {
    let d = rows.dim();
    let m = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for row in rows.rows() {
        for (acc, v) in mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= m);
    let mut cov = SquareMatrix::zeros(d);
    for row in rows.rows() {
        for i in 0..d {
            let di = row[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += di * (row[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let v = cov[(i, j)] / m;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mat(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn cholesky_identity_and_diagonal() {
        assert_eq!(cholesky(&SquareMatrix::identity(2)).unwrap(), SquareMatrix::identity(2));
        let l = cholesky(&mat(&[&[4.0, 0.0], &[0.0, 9.0]])).unwrap();
        assert_eq!(l, mat(&[&[2.0, 0.0], &[0.0, 3.0]]));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let err = cholesky(&mat(&[&[1.0, 2.0], &[2.0, 1.0]])).unwrap_err();
        assert!(matches!(err, Error::NotSpd { pivot: 1, .. }));
        assert!(SpdMatrix::new(mat(&[&[0.0, 0.0], &[0.0, 1.0]])).is_err());
    }

    #[test]
    fn eigenvalues_small_cases() {
        assert_eq!(sym_eigenvalues(&SquareMatrix::identity(4)).unwrap(), vec![1.0; 4]);
        assert_eq!(sym_eigenvalues(&SquareMatrix::diagonal(&[1.0, 3.0])).unwrap(), vec![3.0, 1.0]);
        let e = sym_eigenvalues(&mat(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert_relative_eq!(e[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(e[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenvalues_reject_asymmetric() {
        let err = sym_eigenvalues(&mat(&[&[1.0, 0.5], &[0.0, 1.0]])).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }));
    }

    #[test]
    fn mahalanobis_cases() {
        let i4 = SpdMatrix::identity(4);
        assert_eq!(mahalanobis_sq(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0], &i4).unwrap(), 0.0);
        assert_eq!(mahalanobis_sq(&[1.0, 0.0, 0.0, 0.0], &[0.0; 4], &i4).unwrap(), 1.0);
        let s = SpdMatrix::new(mat(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert_relative_eq!(mahalanobis_sq(&[1.0, 2.0], &[0.0, 0.0], &s).unwrap(), 2.0, epsilon = 1e-14);
        assert!(matches!(
            mahalanobis_sq(&[1.0], &[0.0, 0.0], &s),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn quantile_cases() {
        assert_eq!(empirical_quantile_sq_distance(&[5.0, 1.0, 3.0], 0.5).unwrap(), 1.0);
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(empirical_quantile_sq_distance(&v, 0.5).unwrap(), 5.0);
        assert_eq!(empirical_quantile_sq_distance(&[], 0.5), Err(Error::EmptyData));
        // m is clamped to 1
        assert_eq!(empirical_quantile_sq_distance(&[2.0, 7.0], 0.1).unwrap(), 2.0);
    }

    #[test]
    fn quantile_matches_sort_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let v: Vec<f64> = (0..100).map(|_| rng.random::<f64>()).collect();
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(empirical_quantile_sq_distance(&v, 0.3).unwrap(), sorted[29]);
    }

    #[test]
    fn retained_count_floors() {
        assert_eq!(retained_count(20, 0.7), 14);
        assert_eq!(retained_count(20, 0.3), 6);
        assert_eq!(retained_count(3, 0.67), 2);
        assert_eq!(retained_count(3, 0.2), 1);
        assert_eq!(retained_count(7, 1.0), 7);
    }

    #[test]
    fn spd_inverse_and_determinant() {
        let s = SpdMatrix::new(mat(&[&[4.0, 2.0, 0.6], &[2.0, 5.0, 1.0], &[0.6, 1.0, 3.0]])).unwrap();
        let prod = s.matrix().matmul(s.inverse());
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - expect).abs() < 1e-10);
            }
        }
        let e = s.eigenvalues();
        assert_relative_eq!(e.iter().sum::<f64>(), s.matrix().trace(), epsilon = 1e-9);
        assert_relative_eq!(e.iter().product::<f64>(), s.determinant(), max_relative = 1e-9);
    }

    fn random_spd(entries: &[f64], d: usize) -> SquareMatrix {
        let b = SquareMatrix::from_rows(&entries.chunks(d).collect::<Vec<_>>()).unwrap();
        let mut a = b.matmul(&b.transpose());
        for i in 0..d {
            a[(i, i)] += 0.1;
        }
        a
    }

    proptest! {
        #[test]
        fn cholesky_reconstructs(entries in proptest::collection::vec(-3.0f64..3.0, 9)) {
            let a = random_spd(&entries, 3);
            let l = cholesky(&a).unwrap();
            let back = l.matmul(&l.transpose());
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!((back[(i, j)] - a[(i, j)]).abs() <= 1e-10 * a[(i, j)].abs().max(1.0));
                }
            }
        }

        #[test]
        fn eigen_trace_and_det(entries in proptest::collection::vec(-2.0f64..2.0, 16)) {
            let a = random_spd(&entries, 4);
            let s = SpdMatrix::new(a.clone()).unwrap();
            let e = s.eigenvalues();
            prop_assert!((e.iter().sum::<f64>() - a.trace()).abs() <= 1e-9 * a.trace().max(1.0));
            prop_assert!((e.iter().product::<f64>() / s.determinant() - 1.0).abs() <= 1e-9);
            prop_assert!(e.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn mahalanobis_rotation_invariant(
            angle in 0.0f64..std::f64::consts::TAU,
            y in proptest::collection::vec(-5.0f64..5.0, 2),
            mu in proptest::collection::vec(-5.0f64..5.0, 2),
            c in 0.1f64..10.0,
        ) {
            let s = SpdMatrix::new(SquareMatrix::identity(2).scaled(c)).unwrap();
            let rot = mat(&[&[angle.cos(), -angle.sin()], &[angle.sin(), angle.cos()]]);
            let base = mahalanobis_sq(&y, &mu, &s).unwrap();
            let rotated = mahalanobis_sq(&rot.mul_vec(&y), &rot.mul_vec(&mu), &s).unwrap();
            prop_assert!((base - rotated).abs() <= 1e-10 * base.max(1.0));
        }

        #[test]
        fn quantile_is_member_with_floor_count(
            v in proptest::collection::hash_set(0u32..1_000_000, 1..200),
            gamma in 0.01f64..1.0,
        ) {
            let v: Vec<f64> = v.into_iter().map(f64::from).collect();
            let q = empirical_quantile_sq_distance(&v, gamma).unwrap();
            prop_assert!(v.contains(&q));
            let below = v.iter().filter(|&&x| x <= q).count();
            prop_assert_eq!(below, retained_count(v.len(), gamma));
        }
    }
}
