//! Frames as finite vector families in `C^d`.

use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::numeric::{
    hermitian_eig_extremes, numerical_rank, project_onto, project_out, pseudo_inverse, range_basis,
    CMatrix, TolerancePolicy, C64,
};

/// An ordered family of `N` vectors in `C^d`.
///
/// The vectors are stored as the columns of the synthesis matrix; every
/// operator is derived on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    synthesis: CMatrix,
}

/// Optimal frame bounds, i.e. the extreme eigenvalues of the frame operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameBounds {
    pub lower_opt: f64,
    pub upper_opt: f64,
    pub tight: bool,
}

impl Frame {
    pub fn new(dim: usize, vectors: &[Vec<C64>]) -> Result<Self> {
        if dim == 0 || vectors.is_empty() {
            return Err(FrameError::Input(format!(
                "a frame needs dim >= 1 and at least one vector (dim {dim}, N {})",
                vectors.len()
            )));
        }
        Ok(Frame {
            synthesis: CMatrix::from_columns(dim, vectors)?,
        })
    }

    /// Wraps a `d x N` synthesis matrix.
    pub fn from_synthesis(synthesis: CMatrix) -> Result<Self> {
        if synthesis.rows() == 0 || synthesis.cols() == 0 {
            return Err(FrameError::Input("empty synthesis matrix".into()));
        }
        synthesis.ensure_finite()?;
        Ok(Frame { synthesis })
    }

    /// Builds a frame from real vectors.
    pub fn from_real(dim: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        let v: Vec<Vec<C64>> = vectors
            .iter()
            .map(|v| v.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::new(dim, &v)
    }

    pub fn dim(&self) -> usize {
        self.synthesis.rows()
    }

    pub fn len(&self) -> usize {
        self.synthesis.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vector(&self, n: usize) -> Vec<C64> {
        self.synthesis.column(n)
    }

    pub fn vectors(&self) -> Vec<Vec<C64>> {
        self.synthesis.columns()
    }

    /// `T c = sum_n c_n phi_n`, a `d x N` matrix.
    pub fn synthesis_matrix(&self) -> &CMatrix {
        &self.synthesis
    }

    /// `U f = (<f, phi_n>)_n`, an `N x d` matrix equal to `T*`.
    pub fn analysis_matrix(&self) -> CMatrix {
        self.synthesis.adjoint()
    }

    /// `S = T T*`.
    pub fn frame_operator(&self) -> CMatrix {
        &self.synthesis * &self.synthesis.adjoint()
    }

    pub fn bounds(&self, tol: &TolerancePolicy) -> FrameBounds {
        let s = self.frame_operator();
        let (lo, hi) = hermitian_eig_extremes(&s, tol).expect("frame operator is Hermitian");
        let lower_opt = lo.max(0.0);
        let upper_opt = hi.max(0.0);
        FrameBounds {
            lower_opt,
            upper_opt,
            tight: (lower_opt - upper_opt).abs() <= 1e-10 * upper_opt,
        }
    }

    pub fn is_frame(&self, tol: &TolerancePolicy) -> bool {
        let b = self.bounds(tol);
        b.lower_opt > tol.rank_cutoff_rel * b.upper_opt
    }

    /// The family `(S^{-1} phi_n)_n`.
    pub fn canonical_dual(&self, tol: &TolerancePolicy) -> Result<Frame> {
        let b = self.bounds(tol);
        if b.lower_opt <= tol.rank_cutoff_rel * b.upper_opt {
            return Err(FrameError::NotAFrame { lower: b.lower_opt });
        }
        let s_inv = pseudo_inverse(&self.frame_operator(), tol);
        Frame::from_synthesis(&s_inv * &self.synthesis)
    }

    /// `dim ker T`.
    pub fn excess(&self, tol: &TolerancePolicy) -> usize {
        self.len() - numerical_rank(&self.synthesis, tol)
    }

    fn check_same_shape(&self, other: &Frame) -> Result<()> {
        if self.dim() != other.dim() || self.len() != other.len() {
            return Err(FrameError::Shape(format!(
                "frames of shape (d={}, N={}) and (d={}, N={})",
                self.dim(),
                self.len(),
                other.dim(),
                other.len()
            )));
        }
        Ok(())
    }
}

/// True iff `||T_F U_G - I|| <= identity_residual_rel`.
pub fn is_dual_pair(f: &Frame, g: &Frame, tol: &TolerancePolicy) -> Result<bool> {
    f.check_same_shape(g)?;
    let residual =
        (&(f.synthesis_matrix() * &g.analysis_matrix()) - &CMatrix::identity(f.dim())).op_norm();
    Ok(residual <= tol.identity_residual_rel)
}

/// `||T_F - T_G||_op`, the frame-norm distance.
pub fn frame_norm_distance(f: &Frame, g: &Frame) -> Result<f64> {
    f.check_same_shape(g)?;
    Ok((f.synthesis_matrix() - g.synthesis_matrix()).op_norm())
}

/// Cached operators of a frame for repeated use in perturbation audits.
///
/// Kernel projections are applied through an orthonormal basis of
/// `ran U`, so nothing of size `N x N` is ever formed.
#[derive(Debug, Clone)]
pub struct FrameGeometry {
    pub frame: Frame,
    pub bounds: FrameBounds,
    pub s_inv: CMatrix,
    /// `S^{-1} T`, the synthesis matrix of the canonical dual.
    pub canonical_synthesis: CMatrix,
    /// Orthonormal basis of `ran U` (`N x d`).
    pub range: CMatrix,
}

impl FrameGeometry {
    pub fn new(frame: &Frame, tol: &TolerancePolicy) -> Result<Self> {
        let bounds = frame.bounds(tol);
        if bounds.lower_opt <= tol.rank_cutoff_rel * bounds.upper_opt {
            return Err(FrameError::NotAFrame {
                lower: bounds.lower_opt,
            });
        }
        let s_inv = pseudo_inverse(&frame.frame_operator(), tol);
        let canonical_synthesis = &s_inv * frame.synthesis_matrix();
        let range = range_basis(&frame.analysis_matrix(), tol);
        Ok(FrameGeometry {
            frame: frame.clone(),
            bounds,
            s_inv,
            canonical_synthesis,
            range,
        })
    }

    pub fn synthesis(&self) -> &CMatrix {
        self.frame.synthesis_matrix()
    }

    pub fn sqrt_lower(&self) -> f64 {
        self.bounds.lower_opt.sqrt()
    }

    /// `P_{ker T} X` for `X` with `N` rows.
    pub fn project_kernel(&self, x: &CMatrix) -> CMatrix {
        project_out(&self.range, x)
    }

    /// `P_{ran U} X` for `X` with `N` rows.
    pub fn project_range(&self, x: &CMatrix) -> CMatrix {
        project_onto(&self.range, x)
    }

    /// `X P_{ker T}` for `X` with `N` columns.
    pub fn right_project_kernel(&self, x: &CMatrix) -> CMatrix {
        self.project_kernel(&x.adjoint()).adjoint()
    }

    /// `X P_{ran U}` for `X` with `N` columns.
    pub fn right_project_range(&self, x: &CMatrix) -> CMatrix {
        self.project_range(&x.adjoint()).adjoint()
    }
}
