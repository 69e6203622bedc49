//! Dense complex linear algebra used by every other module.
//!
//! [`CMatrix`] is a thin newtype over a `nalgebra` dense matrix of complex
//! doubles. Decompositions (SVD, Hermitian eigenvalues) come from `nalgebra`;
//! this module owns the numerical-rank policy so that kernels, ranges and
//! pseudo-inverses agree with each other everywhere in the crate.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

use crate::error::{FrameError, Result};

/// Tolerances shared by all numerical decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy {
    /// Singular values at or below `rank_cutoff_rel * sigma_max` count as zero.
    pub rank_cutoff_rel: f64,
    /// Relative residual accepted for identities such as `T U = I`.
    pub identity_residual_rel: f64,
    /// `||I - A||` must stay below `1 - strict_contraction_margin`.
    pub strict_contraction_margin: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            rank_cutoff_rel: 1e-12,
            identity_residual_rel: 1e-9,
            strict_contraction_margin: 0.0,
        }
    }
}

impl TolerancePolicy {
    pub fn validate(&self) -> Result<()> {
        let open = |v: f64| v > 0.0 && v < 1.0;
        if !open(self.rank_cutoff_rel) {
            return Err(FrameError::Tolerance(format!(
                "rank_cutoff_rel = {} not in (0, 1)",
                self.rank_cutoff_rel
            )));
        }
        if !open(self.identity_residual_rel) {
            return Err(FrameError::Tolerance(format!(
                "identity_residual_rel = {} not in (0, 1)",
                self.identity_residual_rel
            )));
        }
        if !(0.0..1.0).contains(&self.strict_contraction_margin) {
            return Err(FrameError::Tolerance(format!(
                "strict_contraction_margin = {} not in [0, 1)",
                self.strict_contraction_margin
            )));
        }
        Ok(())
    }
}

/// Dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CMatrix({}x{}) {:?}",
            self.rows(),
            self.cols(),
            self.0.as_slice()
        )
    }
}

impl CMatrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes and
    /// non-finite values.
    pub fn try_from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(FrameError::Input(format!(
                "empty matrix shape {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(FrameError::Shape(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let m = CMatrix(DMatrix::from_row_slice(rows, cols, &entries));
        m.ensure_finite()?;
        Ok(m)
    }

    /// Builds a matrix from nested rows.
    pub fn try_from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(FrameError::Shape("ragged rows".into()));
        }
        Self::try_from_row_major(r, c, rows.concat())
    }

    pub fn from_inner(m: DMatrix<C64>) -> Self {
        CMatrix(m)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        CMatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Stacks the given vectors as columns of a `dim x len` matrix.
    pub fn from_columns(dim: usize, columns: &[Vec<C64>]) -> Result<Self> {
        if columns.iter().any(|c| c.len() != dim) {
            return Err(FrameError::Shape(format!(
                "all columns must have length {dim}"
            )));
        }
        let m = Self::from_fn(dim, columns.len(), |i, j| columns[j][i]);
        m.ensure_finite()?;
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.0[(i, j)] = v;
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.cols()).map(|j| self.column(j)).collect()
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<C64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn scale(&self, c: C64) -> Self {
        CMatrix(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(FrameError::NonFinite)
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest singular value. Assumes finite entries; see [`operator_norm`]
    /// for the validating variant.
    pub fn op_norm(&self) -> f64 {
        singular_values(self).into_iter().fold(0.0, f64::max)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.rows(), other.rows(), "hstack row mismatch");
        let (r, c1, c2) = (self.rows(), self.cols(), other.cols());
        CMatrix::from_fn(r, c1 + c2, |i, j| {
            if j < c1 {
                self.get(i, j)
            } else {
                other.get(i, j - c1)
            }
        })
    }

    /// Columns `range` of `self`.
    pub fn column_range(&self, start: usize, end: usize) -> CMatrix {
        CMatrix(self.0.columns(start, end - start).into_owned())
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

/// Singular values in no particular order. Empty shapes yield no values.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    m.0.singular_values().iter().copied().collect()
}

/// Operator (spectral) norm: the largest singular value.
pub fn operator_norm(m: &CMatrix) -> Result<f64> {
    m.ensure_finite()?;
    Ok(m.op_norm())
}

/// Smallest of the `min(rows, cols)` singular values (zero for empty shapes).
pub fn min_singular_value(m: &CMatrix) -> f64 {
    let sv = singular_values(m);
    if sv.is_empty() {
        return 0.0;
    }
    sv.into_iter().fold(f64::INFINITY, f64::min)
}

/// Extreme eigenvalues of the Hermitian part `(M + M*)/2`.
pub fn hermitian_eig_extremes(m: &CMatrix, tol: &TolerancePolicy) -> Result<(f64, f64)> {
    m.ensure_finite()?;
    if !m.is_square() {
        return Err(FrameError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let skew = (m - &m.adjoint()).op_norm();
    let scale = m.op_norm();
    if skew > tol.identity_residual_rel * scale.max(f64::MIN_POSITIVE) {
        return Err(FrameError::NotHermitian { residual: skew });
    }
    let herm = (m + &m.adjoint()).scale_real(0.5);
    let eig = herm.0.symmetric_eigenvalues();
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Numerical rank under the global relative cutoff.
pub fn numerical_rank(m: &CMatrix, tol: &TolerancePolicy) -> usize {
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter()
        .filter(|&&s| s > tol.rank_cutoff_rel * smax)
        .count()
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn range_basis(m: &CMatrix, tol: &TolerancePolicy) -> CMatrix {
    if m.rows() == 0 || m.cols() == 0 {
        return CMatrix::zeros(m.rows(), 0);
    }
    let svd = m.0.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax > 0.0 && s > tol.rank_cutoff_rel * smax)
        .map(|(i, _)| i)
        .collect();
    CMatrix(u.select_columns(keep.iter()))
}

/// Orthonormal basis (as columns) of `ker m`.
pub fn kernel_basis(m: &CMatrix, tol: &TolerancePolicy) -> CMatrix {
    let (r, c) = m.shape();
    if c == 0 {
        return CMatrix::zeros(0, 0);
    }
    // Padding wide matrices to square makes nalgebra return a full set of
    // right singular vectors.
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.rows_mut(0, r).copy_from(&m.0);
        p
    } else {
        m.0.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let null_rows: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax == 0.0 || s <= tol.rank_cutoff_rel * smax)
        .map(|(i, _)| i)
        .collect();
    let basis = v_t.select_rows(null_rows.iter()).adjoint();
    CMatrix(basis)
}

/// Orthogonal projector onto the column span of `spanning` (a `rows x rows`
/// matrix). Zero columns give the zero projector.
pub fn orth_projector(spanning: &CMatrix, tol: &TolerancePolicy) -> CMatrix {
    let q = range_basis(spanning, tol);
    &q * &q.adjoint()
}

/// Applies the projector onto the complement of `span(basis)` to `x`, where
/// `basis` has orthonormal columns: `x - Q (Q* x)`.
pub fn project_out(basis: &CMatrix, x: &CMatrix) -> CMatrix {
    if basis.cols() == 0 {
        return x.clone();
    }
    let coeff = &basis.adjoint() * x;
    x - &(basis * &coeff)
}

/// Applies the projector onto `span(basis)` to `x`: `Q (Q* x)`.
pub fn project_onto(basis: &CMatrix, x: &CMatrix) -> CMatrix {
    if basis.cols() == 0 {
        return CMatrix::zeros(x.rows(), x.cols());
    }
    let coeff = &basis.adjoint() * x;
    basis * &coeff
}

/// Moore-Penrose pseudo-inverse with the global rank cutoff.
pub fn pseudo_inverse(m: &CMatrix, tol: &TolerancePolicy) -> CMatrix {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return CMatrix::zeros(c, r);
    }
    let svd = m.0.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let k = svd.singular_values.len();
    let mut inv_sigma = DMatrix::<C64>::zeros(k, k);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if smax > 0.0 && s > tol.rank_cutoff_rel * smax {
            inv_sigma[(i, i)] = C64::new(1.0 / s, 0.0);
        }
    }
    CMatrix(v_t.adjoint() * inv_sigma * u.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_and_diagonal_norms() {
        assert!((operator_norm(&CMatrix::identity(3)).unwrap() - 1.0).abs() < 1e-14);
        let d = CMatrix::from_real_diagonal(&[3.0, 1.0, 0.5]);
        assert!((operator_norm(&d).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_is_rejected() {
        let mut m = CMatrix::identity(2);
        m.set(0, 1, C64::new(f64::NAN, 0.0));
        assert_eq!(operator_norm(&m), Err(FrameError::NonFinite));
        assert!(CMatrix::try_from_row_major(1, 1, vec![C64::new(f64::INFINITY, 0.0)]).is_err());
        assert!(CMatrix::try_from_row_major(0, 1, vec![]).is_err());
    }

    #[test]
    fn eig_extremes_basic() {
        let tol = TolerancePolicy::default();
        assert_eq!(
            hermitian_eig_extremes(&CMatrix::identity(2), &tol).unwrap(),
            (1.0, 1.0)
        );
        let (lo, hi) =
            hermitian_eig_extremes(&CMatrix::from_real_diagonal(&[2.0, 1.0]), &tol).unwrap();
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 2.0).abs() < 1e-14);
    }

    #[test]
    fn eig_extremes_errors() {
        let tol = TolerancePolicy::default();
        assert!(matches!(
            hermitian_eig_extremes(&CMatrix::zeros(2, 3), &tol),
            Err(FrameError::NotSquare { .. })
        ));
        let mut m = CMatrix::identity(2);
        m.set(0, 1, c(1.0));
        assert!(matches!(
            hermitian_eig_extremes(&m, &tol),
            Err(FrameError::NotHermitian { .. })
        ));
    }

    #[test]
    fn kernel_of_identity_and_row() {
        let tol = TolerancePolicy::default();
        assert_eq!(kernel_basis(&CMatrix::identity(3), &tol).cols(), 0);
        let row = CMatrix::try_from_rows(&[vec![c(1.0), c(1.0)]]).unwrap();
        let k = kernel_basis(&row, &tol);
        assert_eq!(k.shape(), (2, 1));
        // proportional to (1, -1)/sqrt 2, up to a unit phase
        let ratio = k.get(1, 0) / k.get(0, 0);
        assert!((ratio - c(-1.0)).norm() < 1e-12);
        assert!((k.get(0, 0).norm() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn projector_examples() {
        let tol = TolerancePolicy::default();
        let span = CMatrix::from_fn(3, 2, |i, j| if i == j { c(1.0) } else { c(0.0) });
        let p = orth_projector(&span, &tol);
        assert!(p.max_abs_diff(&CMatrix::from_real_diagonal(&[1.0, 1.0, 0.0])) < 1e-14);
        let empty = CMatrix::zeros(3, 0);
        assert_eq!(orth_projector(&empty, &tol), CMatrix::zeros(3, 3));
    }

    #[test]
    fn pseudo_inverse_examples() {
        let tol = TolerancePolicy::default();
        let p = pseudo_inverse(&CMatrix::from_real_diagonal(&[2.0, 0.0]), &tol);
        assert!(p.max_abs_diff(&CMatrix::from_real_diagonal(&[0.5, 0.0])) < 1e-15);
        let s = 0.5f64.sqrt();
        let u = CMatrix::from_columns(2, &[vec![C64::new(s, 0.0), C64::new(0.0, s)]]).unwrap();
        let uu = &u * &u.adjoint();
        assert!(pseudo_inverse(&uu, &tol).max_abs_diff(&uu) < 1e-14);
    }

    #[test]
    fn tolerance_validation() {
        assert!(TolerancePolicy::default().validate().is_ok());
        let bad = TolerancePolicy {
            rank_cutoff_rel: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = TolerancePolicy {
            strict_contraction_margin: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
