//! Perturbation measures, subspace gaps and the deviation bounds between
//! approximately dual frames of a frame and of a perturbed family.

mod best_approx;
mod bounds;

pub use best_approx::{
    best_approx_audits, best_approx_dual, gamma_inverse, gamma_map, gamma_roundtrip, theta_ba,
    BestApprox, GammaRoundTrip,
};
pub use bounds::{
    deviation_bound_audit, dis_identity_residual, per1200_audit, DeviationKind, DisIdentity,
    Per1200Variant,
};

use serde::Serialize;

use crate::audit::BoundAudit;
use crate::error::{FrameError, Result};
use crate::frame::{is_dual_pair, Frame, FrameBounds, FrameGeometry};
use crate::numeric::{project_out, range_basis, CMatrix, TolerancePolicy};

/// Closeness measures between a frame `F` and a family `G`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosenessReport {
    /// `sum_n ||phi_n - psi_n||^2`.
    pub q: f64,
    /// `sum_n ||phi_n - psi_n|| ||pi_n(dual)||` for the chosen dual.
    pub q_weighted: f64,
    /// The same sum against the canonical dual.
    pub q_zero: f64,
    /// `||T_F - T_G||_op`.
    pub mu: f64,
    /// Quadratically close with `m_opt(F) <= q` (and `q_weighted` finite).
    pub d_quad_flag: bool,
    /// `q_zero` finite, which always holds for finite families.
    pub c_quad_flag: bool,
}

/// Which dual weights `q_weighted`.
#[derive(Debug, Clone, Copy)]
pub enum WeightDual<'a> {
    Canonical,
    Dual(&'a Frame),
}

fn column_norms(m: &CMatrix) -> Vec<f64> {
    (0..m.cols())
        .map(|j| {
            m.inner()
                .column(j)
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

fn weighted_sum(diff_norms: &[f64], dual: &CMatrix) -> f64 {
    diff_norms
        .iter()
        .zip(column_norms(dual))
        .map(|(a, b)| a * b)
        .sum()
}

pub fn closeness(
    f: &Frame,
    g: &Frame,
    weight: WeightDual<'_>,
    tol: &TolerancePolicy,
) -> Result<ClosenessReport> {
    let geom = FrameGeometry::new(f, tol)?;
    closeness_with(&geom, g, weight, tol)
}

pub(crate) fn closeness_with(
    geom: &FrameGeometry,
    g: &Frame,
    weight: WeightDual<'_>,
    tol: &TolerancePolicy,
) -> Result<ClosenessReport> {
    let f = &geom.frame;
    check_shapes(f, g)?;
    let diff = f.synthesis_matrix() - g.synthesis_matrix();
    let diff_norms = column_norms(&diff);
    let q: f64 = diff_norms.iter().map(|x| x * x).sum();
    let q_zero = weighted_sum(&diff_norms, &geom.canonical_synthesis);
    let q_weighted = match weight {
        WeightDual::Canonical => q_zero,
        WeightDual::Dual(dual) => {
            if !is_dual_pair(f, dual, tol)? {
                return Err(FrameError::Input(
                    "weighting family is not a dual of the frame".into(),
                ));
            }
            weighted_sum(&diff_norms, dual.synthesis_matrix())
        }
    };
    let mu = diff.op_norm();
    Ok(ClosenessReport {
        q,
        q_weighted,
        q_zero,
        mu,
        d_quad_flag: geom.bounds.lower_opt <= q && q_weighted.is_finite(),
        c_quad_flag: q_zero.is_finite(),
    })
}

fn check_shapes(f: &Frame, g: &Frame) -> Result<()> {
    if f.dim() != g.dim() || f.len() != g.len() {
        return Err(FrameError::Shape(format!(
            "frames of shape (d={}, N={}) and (d={}, N={})",
            f.dim(),
            f.len(),
            g.dim(),
            g.len()
        )));
    }
    Ok(())
}

/// One-sided gaps and the symmetric gap between two subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport {
    /// `delta(X, Y) = ||(I - P_Y)|_X||`.
    pub delta_xy: f64,
    pub delta_yx: f64,
    /// `max(delta_xy, delta_yx) = ||P_X - P_Y||`.
    pub delta: f64,
    pub isomorphic_projections: bool,
}

/// `||(I - P_Y) B_X||` for orthonormal bases `B_X`, `B_Y`.
pub fn one_sided_gap(bx: &CMatrix, by: &CMatrix) -> f64 {
    if bx.cols() == 0 {
        return 0.0;
    }
    project_out(by, bx).op_norm().min(1.0)
}

pub fn gap_from_bases(bx: &CMatrix, by: &CMatrix) -> GapReport {
    let delta_xy = one_sided_gap(bx, by);
    let delta_yx = one_sided_gap(by, bx);
    let delta = delta_xy.max(delta_yx);
    GapReport {
        delta_xy,
        delta_yx,
        delta,
        isomorphic_projections: delta < 1.0,
    }
}

/// Gap between the column spans of `x_span` and `y_span`.
pub fn subspace_gap(
    x_span: &CMatrix,
    y_span: &CMatrix,
    tol: &TolerancePolicy,
) -> Result<GapReport> {
    if x_span.rows() != y_span.rows() {
        return Err(FrameError::Shape(format!(
            "ambient dimensions {} and {} differ",
            x_span.rows(),
            y_span.rows()
        )));
    }
    Ok(gap_from_bases(
        &range_basis(x_span, tol),
        &range_basis(y_span, tol),
    ))
}

/// Shared state for auditing a frame `F` against a family `G`.
#[derive(Debug, Clone)]
pub struct PerturbationPair {
    pub f: FrameGeometry,
    pub g_frame: Frame,
    /// Present when `G` is itself a frame.
    pub g: Option<FrameGeometry>,
    pub g_bounds: FrameBounds,
    /// Orthonormal basis of `ran U_G`.
    pub g_range: CMatrix,
    pub closeness: ClosenessReport,
    pub tol: TolerancePolicy,
}

impl PerturbationPair {
    pub fn new(f: &Frame, g: &Frame, tol: &TolerancePolicy) -> Result<Self> {
        let fg = FrameGeometry::new(f, tol)?;
        let closeness = closeness_with(&fg, g, WeightDual::Canonical, tol)?;
        let g_geom = FrameGeometry::new(g, tol).ok();
        let g_range = match &g_geom {
            Some(gg) => gg.range.clone(),
            None => range_basis(&g.analysis_matrix(), tol),
        };
        Ok(PerturbationPair {
            f: fg,
            g_frame: g.clone(),
            g: g_geom,
            g_bounds: g.bounds(tol),
            g_range,
            closeness,
            tol: *tol,
        })
    }

    pub fn mu(&self) -> f64 {
        self.closeness.mu
    }

    pub fn m_phi(&self) -> f64 {
        self.f.bounds.lower_opt
    }

    pub fn sqrt_m(&self) -> f64 {
        self.f.sqrt_lower()
    }

    /// Gap between `ran U_F` and `ran U_G`.
    pub fn range_gap(&self) -> GapReport {
        gap_from_bases(&self.f.range, &self.g_range)
    }

    pub fn g_geometry(&self) -> Result<&FrameGeometry> {
        self.g.as_ref().ok_or(FrameError::NotAFrame {
            lower: self.g_bounds.lower_opt,
        })
    }
}

/// `delta(ran U_F, ran U_G) <= ||T_F - T_G|| / sqrt(m_opt(F))`.
pub fn gap_bound_audit(f: &Frame, g: &Frame, tol: &TolerancePolicy) -> Result<BoundAudit> {
    Ok(gap_bound_audit_with(&PerturbationPair::new(f, g, tol)?))
}

pub fn gap_bound_audit_with(pair: &PerturbationPair) -> BoundAudit {
    let lhs = one_sided_gap(&pair.f.range, &pair.g_range);
    BoundAudit::check("gap-11", lhs, pair.mu() / pair.sqrt_m(), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{kernel_basis, C64};
    use crate::random::{perturb_frame, random_frame, stream};

    fn mercedes() -> Frame {
        let h = 3f64.sqrt() / 2.0;
        Frame::from_real(2, &[vec![1.0, 0.0], vec![-0.5, h], vec![-0.5, -h]]).unwrap()
    }

    fn real_span(cols: &[Vec<f64>]) -> CMatrix {
        let v: Vec<Vec<C64>> = cols
            .iter()
            .map(|c| c.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        CMatrix::from_columns(cols[0].len(), &v).unwrap()
    }

    #[test]
    fn closeness_identical_and_single_shift() {
        let tol = TolerancePolicy::default();
        let m = mercedes();
        let c = closeness(&m, &m, WeightDual::Canonical, &tol).unwrap();
        assert_eq!((c.q, c.q_weighted, c.mu), (0.0, 0.0, 0.0));

        let mut v = m.vectors();
        v[2][0] += C64::new(0.1, 0.0);
        let g = Frame::new(2, &v).unwrap();
        let c = closeness(&m, &g, WeightDual::Canonical, &tol).unwrap();
        assert!((c.q - 0.01).abs() < 1e-15);
        assert!((c.mu - 0.1).abs() < 1e-14);
        // canonical dual vectors have norm 2/3
        assert!((c.q_zero - 0.1 * 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn closeness_rejects_non_dual_weight() {
        let tol = TolerancePolicy::default();
        let m = mercedes();
        assert!(closeness(&m, &m, WeightDual::Dual(&m), &tol).is_err());
        let d = m.canonical_dual(&tol).unwrap();
        assert!(closeness(&m, &m, WeightDual::Dual(&d), &tol).is_ok());
    }

    #[test]
    fn gap_examples() {
        let tol = TolerancePolicy::default();
        let e1 = real_span(&[vec![1.0, 0.0]]);
        let e2 = real_span(&[vec![0.0, 1.0]]);
        let diag = real_span(&[vec![1.0, 1.0]]);
        let same = subspace_gap(&e1, &e1, &tol).unwrap();
        assert_eq!(same.delta, 0.0);
        let orth = subspace_gap(&e1, &e2, &tol).unwrap();
        assert!((orth.delta - 1.0).abs() < 1e-15 && !orth.isomorphic_projections);
        let g = subspace_gap(&e1, &diag, &tol).unwrap();
        let s = 0.5f64.sqrt();
        assert!((g.delta_xy - s).abs() < 1e-14 && (g.delta_yx - s).abs() < 1e-14);
        assert!(subspace_gap(&e1, &CMatrix::zeros(3, 1), &tol).is_err());
    }

    #[test]
    fn gap_duality_with_complements() {
        let tol = TolerancePolicy::default();
        let mut rng = stream(11, "gap-dual", 0);
        for _ in 0..20 {
            let x = crate::random::gaussian_matrix(5, 2, &mut rng);
            let y = crate::random::gaussian_matrix(5, 3, &mut rng);
            let bx = range_basis(&x, &tol);
            let by = range_basis(&y, &tol);
            let x_perp = kernel_basis(&bx.adjoint(), &tol);
            let y_perp = kernel_basis(&by.adjoint(), &tol);
            let lhs = one_sided_gap(&bx, &by);
            let rhs = one_sided_gap(&y_perp, &x_perp);
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
            let g = gap_from_bases(&bx, &by);
            let p_diff = (&(&bx * &bx.adjoint()) - &(&by * &by.adjoint())).op_norm();
            assert!((g.delta - p_diff).abs() < 1e-10);
        }
    }

    #[test]
    fn gap_bound_identical_and_random() {
        let tol = TolerancePolicy::default();
        let m = mercedes();
        let a = gap_bound_audit(&m, &m, &tol).unwrap();
        assert!(a.holds && a.lhs < 1e-15 && a.rhs == 0.0);
        let mut rng = stream(12, "gap-random", 0);
        for _ in 0..50 {
            let f = random_frame(3, 7, &mut rng);
            let g = perturb_frame(&f, 0.8, &mut rng);
            assert!(gap_bound_audit(&f, &g, &tol).unwrap().holds);
        }
    }
}
