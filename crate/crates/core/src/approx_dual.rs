//! Approximately dual frames parameterized by a pair `(A, Theta)`.
//!
//! For a frame `F` with frame operator `S`, every approximately dual frame
//! has vectors `A* S^{-1} phi_n + Theta* delta_n` where `||I - A|| < 1` and
//! `Theta` maps `C^d` into `ker T_F`. Its synthesis matrix is
//! `A* S^{-1} T_F + Theta*` and the reconstruction operator `T_F U_dual`
//! equals `A`.

use serde::Serialize;

use crate::audit::{BoundAudit, INFO_PREFIX};
use crate::error::{FrameError, Result};
use crate::exec::ExecMode;
use crate::frame::{Frame, FrameGeometry};
use crate::numeric::{min_singular_value, CMatrix, TolerancePolicy};
use crate::random::{gaussian_matrix, random_kernel_valued, stream};

/// `||I - A||` values this close to 1 are accepted but flagged.
pub const NEAR_BOUNDARY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxDualParams {
    /// Reconstruction operator, `d x d`.
    pub a: CMatrix,
    /// Kernel-valued operator `C^d -> C^N`, stored as `N x d`.
    pub theta: CMatrix,
    /// Measured `||I - A||`.
    pub contraction_norm: f64,
    /// Measured `||T_F Theta||` after projection into the kernel.
    pub theta_residual: f64,
    /// `||Theta_in - P_ker Theta_in||`, the correction applied at validation.
    pub projection_correction: f64,
    pub near_boundary: bool,
}

impl ApproxDualParams {
    /// Unvalidated parameters; measured fields are NaN until validation.
    pub fn new(a: CMatrix, theta: CMatrix) -> Self {
        ApproxDualParams {
            a,
            theta,
            contraction_norm: f64::NAN,
            theta_residual: f64::NAN,
            projection_correction: f64::NAN,
            near_boundary: false,
        }
    }

    /// `A = I`, `Theta = 0`: the canonical dual.
    pub fn canonical(dim: usize, len: usize) -> Self {
        Self::new(CMatrix::identity(dim), CMatrix::zeros(len, dim))
    }

    pub fn with_a(a: CMatrix, len: usize) -> Self {
        let d = a.rows();
        Self::new(a, CMatrix::zeros(len, d))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxDualReport {
    pub dual: Frame,
    /// `T_F U_dual`, equal to `A`.
    pub reconstruction: CMatrix,
    /// `||I - reconstruction||`.
    pub rate: f64,
    pub is_alternate_dual: bool,
    pub params: ApproxDualParams,
}

/// Checks `||I - A|| < 1 - margin` and projects `Theta` onto `ker T_F`,
/// returning parameters with the measured fields filled in.
pub fn validate_params(
    f: &Frame,
    p: &ApproxDualParams,
    tol: &TolerancePolicy,
) -> Result<ApproxDualParams> {
    let geom = FrameGeometry::new(f, tol)?;
    validate_with(&geom, &p.a, &p.theta, tol)
}

pub(crate) fn check_contraction(a: &CMatrix, dim: usize, tol: &TolerancePolicy) -> Result<f64> {
    if a.shape() != (dim, dim) {
        return Err(FrameError::Shape(format!(
            "A must be {dim}x{dim}, got {:?}",
            a.shape()
        )));
    }
    a.ensure_finite()?;
    let norm = (&CMatrix::identity(dim) - a).op_norm();
    if norm >= 1.0 - tol.strict_contraction_margin {
        return Err(FrameError::Contraction { norm });
    }
    Ok(norm)
}

pub fn validate_with(
    geom: &FrameGeometry,
    a: &CMatrix,
    theta: &CMatrix,
    tol: &TolerancePolicy,
) -> Result<ApproxDualParams> {
    let (d, n) = (geom.frame.dim(), geom.frame.len());
    let contraction_norm = check_contraction(a, d, tol)?;
    if theta.shape() != (n, d) {
        return Err(FrameError::Shape(format!(
            "Theta must be {n}x{d}, got {:?}",
            theta.shape()
        )));
    }
    theta.ensure_finite()?;
    let projected = geom.project_kernel(theta);
    let projection_correction = (theta - &projected).op_norm();
    let theta_residual = (geom.synthesis() * &projected).op_norm();
    let allowed = tol.identity_residual_rel
        * geom.synthesis().op_norm()
        * theta.op_norm().max(projected.op_norm());
    if theta_residual > allowed && theta_residual > f64::MIN_POSITIVE {
        return Err(FrameError::InconsistentTheta {
            residual: theta_residual,
        });
    }
    Ok(ApproxDualParams {
        a: a.clone(),
        theta: projected,
        contraction_norm,
        theta_residual,
        projection_correction,
        near_boundary: contraction_norm >= 1.0 - NEAR_BOUNDARY,
    })
}

/// Synthesis matrix `A* S^{-1} T + Theta*` of the dual built from `(A, Theta)`.
pub fn dual_synthesis(geom: &FrameGeometry, a: &CMatrix, theta: &CMatrix) -> CMatrix {
    &(&a.adjoint() * &geom.canonical_synthesis) + &theta.adjoint()
}

pub fn build_with_geometry(
    geom: &FrameGeometry,
    a: &CMatrix,
    theta: &CMatrix,
    tol: &TolerancePolicy,
) -> Result<ApproxDualReport> {
    let params = validate_with(geom, a, theta, tol)?;
    let synthesis = dual_synthesis(geom, &params.a, &params.theta);
    let reconstruction = geom.synthesis() * &synthesis.adjoint();
    let d = geom.frame.dim();
    let rate = (&CMatrix::identity(d) - &reconstruction).op_norm();
    Ok(ApproxDualReport {
        dual: Frame::from_synthesis(synthesis)?,
        reconstruction,
        rate,
        is_alternate_dual: rate <= tol.identity_residual_rel,
        params,
    })
}

pub fn build_approx_dual(
    f: &Frame,
    p: &ApproxDualParams,
    tol: &TolerancePolicy,
) -> Result<ApproxDualReport> {
    let geom = FrameGeometry::new(f, tol)?;
    build_with_geometry(&geom, &p.a, &p.theta, tol)
}

/// The `Theta = 0` member for a given `A`.
pub fn canonical_approx_dual(
    f: &Frame,
    a: &CMatrix,
    tol: &TolerancePolicy,
) -> Result<ApproxDualReport> {
    build_approx_dual(f, &ApproxDualParams::with_a(a.clone(), f.len()), tol)
}

/// Kernel parameter of the dual generated by a Bessel family with synthesis
/// `W` (`d x N`): `Theta = P_ker W*`.
pub fn bessel_to_theta(f: &Frame, w: &CMatrix, tol: &TolerancePolicy) -> Result<CMatrix> {
    let geom = FrameGeometry::new(f, tol)?;
    bessel_to_theta_with(&geom, w)
}

pub fn bessel_to_theta_with(geom: &FrameGeometry, w: &CMatrix) -> Result<CMatrix> {
    let (d, n) = (geom.frame.dim(), geom.frame.len());
    if w.shape() != (d, n) {
        return Err(FrameError::Shape(format!(
            "W must be {d}x{n}, got {:?}",
            w.shape()
        )));
    }
    Ok(geom.project_kernel(&w.adjoint()))
}

pub fn same_excess_check(f: &Frame, r: &ApproxDualReport, tol: &TolerancePolicy) -> bool {
    f.excess(tol) == r.dual.excess(tol)
}

/// Outcome of comparing analysis-operator norms over the family of
/// approximately dual frames sharing one `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalNormAudit {
    /// `1 / (m_opt ||A^{-1}||^2)`.
    pub lowerbound: f64,
    /// `||U_{Theta=0}||^2`.
    pub canon: f64,
    /// `canon - lowerbound`; positive values mean equality fails.
    pub equality_gap: f64,
    pub equality_flagged: bool,
    /// `||U_Theta||^2` for each random kernel-valued `Theta`.
    pub trial_norms: Vec<f64>,
    /// Largest `||U_0 f||^2 - ||U_Theta f||^2` over sampled unit `f`.
    pub worst_pointwise_excess: f64,
    /// Largest `| ||U_Theta||_F^2 - ||U_0||_F^2 - ||Theta||_F^2 |`.
    pub worst_frobenius_defect: f64,
    /// Smallest `||U_Theta||_F^2 - ||U_0||_F^2` over trials (positive: the
    /// canonical member is the unique Frobenius minimizer among samples).
    pub min_frobenius_gain: f64,
}

impl MinimalNormAudit {
    pub fn lower_bound_holds(&self) -> bool {
        let tol = 1e-9;
        self.canon >= self.lowerbound - tol
            && self.trial_norms.iter().all(|&t| t >= self.lowerbound - tol)
    }

    pub fn trials_dominate(&self) -> bool {
        self.trial_norms.iter().all(|&t| t >= self.canon - 1e-10)
    }

    pub fn pointwise_dominance(&self) -> bool {
        self.worst_pointwise_excess <= 1e-10
    }

    pub fn audits(&self) -> Vec<BoundAudit> {
        let min_trial = self
            .trial_norms
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let min_all = min_trial.min(self.canon);
        vec![
            BoundAudit::check("minimal-norm-lower", self.lowerbound, min_all, true),
            BoundAudit::check_abs("minimal-norm-trials", self.canon, min_trial, 1e-10, true),
            BoundAudit::check_abs(
                "minimal-norm-pointwise",
                self.worst_pointwise_excess,
                0.0,
                1e-10,
                true,
            ),
            BoundAudit::check_abs(
                "minimal-norm-frobenius",
                self.worst_frobenius_defect,
                0.0,
                1e-9,
                true,
            ),
            BoundAudit::check(
                format!("{INFO_PREFIX}minimal-norm-equality"),
                self.canon,
                self.lowerbound,
                true,
            ),
        ]
    }
}

/// Compares `||U_{Theta}||^2` over random kernel-valued `Theta` against the
/// canonical member and against `1 / (m_opt ||A^{-1}||^2)`.
pub fn minimal_norm_audit(
    f: &Frame,
    a: &CMatrix,
    trials: usize,
    seed: u64,
    mode: ExecMode,
    tol: &TolerancePolicy,
) -> Result<MinimalNormAudit> {
    if trials == 0 {
        return Err(FrameError::Input("trials must be at least 1".into()));
    }
    let geom = FrameGeometry::new(f, tol)?;
    let canon_report = build_with_geometry(&geom, a, &CMatrix::zeros(f.len(), f.dim()), tol)?;
    let inv_norm = 1.0 / min_singular_value(a);
    let lowerbound = 1.0 / (geom.bounds.lower_opt * inv_norm * inv_norm);
    let u0 = canon_report.dual.analysis_matrix();
    let canon = u0.op_norm().powi(2);
    let u0_frob = u0.frobenius_norm().powi(2);
    let d = f.dim();

    struct Trial {
        norm: f64,
        pointwise: f64,
        frob_defect: f64,
        frob_gain: f64,
    }
    let outcomes = mode.map(trials, |t| {
        let mut rng = stream(seed, "minimal-norm", t as u64);
        let scale = 0.05 + 2.0 * (t as f64 + 0.5) / trials as f64;
        let theta = random_kernel_valued(&geom, d, scale / geom.sqrt_lower(), &mut rng);
        let u = &u0 + &theta;
        let probes = gaussian_matrix(d, 16, &mut rng);
        let base = &u0 * &probes;
        let with = &u * &probes;
        let pointwise = (0..probes.cols())
            .map(|j| {
                let fnorm: f64 = probes.column(j).iter().map(|z| z.norm_sqr()).sum();
                let b: f64 = base.column(j).iter().map(|z| z.norm_sqr()).sum();
                let w: f64 = with.column(j).iter().map(|z| z.norm_sqr()).sum();
                (b - w) / fnorm
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let frob = u.frobenius_norm().powi(2);
        let theta_frob = theta.frobenius_norm().powi(2);
        Trial {
            norm: u.op_norm().powi(2),
            pointwise,
            frob_defect: (frob - u0_frob - theta_frob).abs() / frob.max(1.0),
            frob_gain: frob - u0_frob,
        }
    });

    let equality_gap = canon - lowerbound;
    Ok(MinimalNormAudit {
        lowerbound,
        canon,
        equality_gap,
        equality_flagged: equality_gap.abs() > 1e-10 * canon.max(1.0),
        trial_norms: outcomes.iter().map(|o| o.norm).collect(),
        worst_pointwise_excess: outcomes
            .iter()
            .map(|o| o.pointwise)
            .fold(f64::NEG_INFINITY, f64::max),
        worst_frobenius_defect: outcomes.iter().map(|o| o.frob_defect).fold(0.0, f64::max),
        min_frobenius_gain: outcomes
            .iter()
            .map(|o| o.frob_gain)
            .fold(f64::INFINITY, f64::min),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{kernel_basis, C64};

    fn mercedes() -> Frame {
        let h = 3f64.sqrt() / 2.0;
        Frame::from_real(2, &[vec![1.0, 0.0], vec![-0.5, h], vec![-0.5, -h]]).unwrap()
    }

    fn e1e1e2() -> Frame {
        Frame::from_real(2, &[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    fn onb(d: usize) -> Frame {
        Frame::from_synthesis(CMatrix::identity(d)).unwrap()
    }

    #[test]
    fn validate_accepts_identity_and_rejects_zero() {
        let tol = TolerancePolicy::default();
        let f = mercedes();
        let p = validate_params(&f, &ApproxDualParams::canonical(2, 3), &tol).unwrap();
        assert_eq!(p.contraction_norm, 0.0);
        let zero = ApproxDualParams::with_a(CMatrix::zeros(2, 2), 3);
        assert!(matches!(
            validate_params(&f, &zero, &tol),
            Err(FrameError::Contraction { .. })
        ));
    }

    #[test]
    fn validate_projects_theta_into_kernel() {
        let tol = TolerancePolicy::default();
        let f = mercedes();
        let mut rng = stream(3, "validate", 0);
        let raw = gaussian_matrix(3, 2, &mut rng);
        let p =
            validate_params(&f, &ApproxDualParams::new(CMatrix::identity(2), raw), &tol).unwrap();
        assert!((f.synthesis_matrix() * &p.theta).op_norm() < 1e-10);
        assert!(p.projection_correction > 0.0);
    }

    #[test]
    fn validate_rejects_bad_shapes() {
        let tol = TolerancePolicy::default();
        let p = ApproxDualParams::new(CMatrix::identity(3), CMatrix::zeros(3, 3));
        assert!(matches!(
            validate_params(&mercedes(), &p, &tol),
            Err(FrameError::Shape(_))
        ));
    }

    #[test]
    fn build_scalar_cases() {
        let tol = TolerancePolicy::default();
        let f = mercedes();
        let r = build_approx_dual(&f, &ApproxDualParams::canonical(2, 3), &tol).unwrap();
        assert!(r.is_alternate_dual && r.rate < 1e-14);
        let canon = f.canonical_dual(&tol).unwrap();
        assert!(
            r.dual
                .synthesis_matrix()
                .max_abs_diff(canon.synthesis_matrix())
                < 1e-14
        );

        let a = CMatrix::identity(2).scale_real(0.9);
        let r = canonical_approx_dual(&f, &a, &tol).unwrap();
        assert!((r.rate - 0.1).abs() < 1e-12);
        assert!(r.reconstruction.max_abs_diff(&a) < 1e-12);
        assert!(!r.is_alternate_dual);
    }

    #[test]
    fn kernel_theta_leaves_reconstruction_unchanged() {
        let tol = TolerancePolicy::default();
        let f = mercedes();
        let s = 1.0 / 3f64.sqrt();
        let k = CMatrix::from_columns(3, &[vec![C64::new(s, 0.0); 3]]).unwrap();
        let row =
            CMatrix::try_from_rows(&[vec![C64::new(0.7, -0.2), C64::new(-1.1, 0.4)]]).unwrap();
        let theta = &k * &row;
        let base = build_approx_dual(&f, &ApproxDualParams::canonical(2, 3), &tol).unwrap();
        let with = build_approx_dual(
            &f,
            &ApproxDualParams::new(CMatrix::identity(2), theta),
            &tol,
        )
        .unwrap();
        assert!(base.reconstruction.max_abs_diff(&with.reconstruction) < 1e-12);
        assert!(
            with.dual
                .synthesis_matrix()
                .max_abs_diff(base.dual.synthesis_matrix())
                > 0.1
        );
    }

    #[test]
    fn canonical_approx_examples() {
        let tol = TolerancePolicy::default();
        let r =
            canonical_approx_dual(&onb(3), &CMatrix::identity(3).scale_real(0.95), &tol).unwrap();
        assert!(
            r.dual
                .synthesis_matrix()
                .max_abs_diff(&CMatrix::identity(3).scale_real(0.95))
                < 1e-14
        );
        assert!((r.rate - 0.05).abs() < 1e-12);

        let a = CMatrix::from_real_diagonal(&[0.9, 1.0]);
        let r = canonical_approx_dual(&e1e1e2(), &a, &tol).unwrap();
        let expected =
            Frame::from_real(2, &[vec![0.45, 0.0], vec![0.45, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(
            r.dual
                .synthesis_matrix()
                .max_abs_diff(expected.synthesis_matrix())
                < 1e-14
        );
    }

    #[test]
    fn minimal_norm_examples() {
        let tol = TolerancePolicy::default();
        let m = minimal_norm_audit(
            &onb(3),
            &CMatrix::identity(3),
            5,
            1,
            ExecMode::Sequential,
            &tol,
        )
        .unwrap();
        assert!((m.lowerbound - 1.0).abs() < 1e-12 && (m.canon - 1.0).abs() < 1e-12);

        let m = minimal_norm_audit(
            &mercedes(),
            &CMatrix::identity(2),
            20,
            1,
            ExecMode::Sequential,
            &tol,
        )
        .unwrap();
        assert!((m.lowerbound - 2.0 / 3.0).abs() < 1e-12 && (m.canon - 2.0 / 3.0).abs() < 1e-12);
        assert!(!m.equality_flagged && m.trials_dominate() && m.pointwise_dominance());

        let a = CMatrix::from_real_diagonal(&[0.9, 1.0]);
        let m = minimal_norm_audit(&e1e1e2(), &a, 20, 1, ExecMode::Sequential, &tol).unwrap();
        assert!((m.canon - 1.0).abs() < 1e-12);
        assert!((m.lowerbound - 0.81).abs() < 1e-12);
        assert!((m.equality_gap - 0.19).abs() < 1e-10);
        assert!(m.equality_flagged && m.lower_bound_holds() && m.trials_dominate());
        assert!(m.min_frobenius_gain > 0.0);
    }

    #[test]
    fn minimal_norm_rejects_zero_trials() {
        let tol = TolerancePolicy::default();
        assert!(minimal_norm_audit(
            &onb(2),
            &CMatrix::identity(2),
            0,
            1,
            ExecMode::Sequential,
            &tol
        )
        .is_err());
    }

    #[test]
    fn bessel_correspondence() {
        let tol = TolerancePolicy::default();
        let f = mercedes();
        assert_eq!(
            bessel_to_theta(&f, &CMatrix::zeros(2, 3), &tol)
                .unwrap()
                .op_norm(),
            0.0
        );
        let t = bessel_to_theta(&f, f.synthesis_matrix(), &tol).unwrap();
        assert!(t.op_norm() < 1e-14);

        // Sum formula: A* S^{-1} phi_n + W delta_n - sum_j <S^{-1} phi_n, phi_j> W delta_j.
        let mut rng = stream(5, "bessel", 0);
        let w = gaussian_matrix(2, 3, &mut rng);
        let a = CMatrix::from_real_diagonal(&[0.8, 1.1]);
        let theta = bessel_to_theta(&f, &w, &tol).unwrap();
        let r = build_approx_dual(&f, &ApproxDualParams::new(a.clone(), theta), &tol).unwrap();
        let s_inv = crate::numeric::pseudo_inverse(&f.frame_operator(), &tol);
        let phis = f.vectors();
        for n in 0..3 {
            let sphi: Vec<C64> = (0..2)
                .map(|i| (0..2).map(|k| s_inv.get(i, k) * phis[n][k]).sum())
                .collect();
            let mut expected: Vec<C64> = (0..2)
                .map(|i| (0..2).map(|k| a.get(k, i).conj() * sphi[k]).sum::<C64>() + w.get(i, n))
                .collect();
            for (j, phi_j) in phis.iter().enumerate() {
                let ip: C64 = (0..2).map(|k| sphi[k] * phi_j[k].conj()).sum();
                for (i, e) in expected.iter_mut().enumerate() {
                    *e -= ip * w.get(i, j);
                }
            }
            let got = r.dual.vector(n);
            for i in 0..2 {
                assert!((got[i] - expected[i]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn excess_is_preserved() {
        let tol = TolerancePolicy::default();
        let r = build_approx_dual(&onb(3), &ApproxDualParams::canonical(3, 3), &tol).unwrap();
        assert!(same_excess_check(&onb(3), &r, &tol));

        let f = mercedes();
        let geom = FrameGeometry::new(&f, &tol).unwrap();
        let mut rng = stream(9, "excess", 0);
        let theta = random_kernel_valued(&geom, 2, 0.7, &mut rng);
        let a = crate::random::random_admissible_a(2, &mut rng);
        let r = build_approx_dual(&f, &ApproxDualParams::new(a, theta), &tol).unwrap();
        assert!(same_excess_check(&f, &r, &tol));
        assert_eq!(kernel_basis(r.dual.synthesis_matrix(), &tol).cols(), 1);

        let riesz = Frame::from_real(2, &[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = canonical_approx_dual(&riesz, &CMatrix::identity(2).scale_real(0.9), &tol).unwrap();
        assert!(same_excess_check(&riesz, &r, &tol));
        assert_eq!(r.dual.excess(&tol), 0);
    }
}
