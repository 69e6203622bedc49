use serde::Serialize;

use super::{closeness_with, PerturbationPair, WeightDual};
use crate::approx_dual::{check_contraction, dual_synthesis, validate_with, ApproxDualParams};
use crate::audit::BoundAudit;
use crate::error::{FrameError, Result};
use crate::frame::{is_dual_pair, Frame, FrameGeometry};
use crate::numeric::{CMatrix, TolerancePolicy};

/// Perturbation regime for the frame-bound and range-gap predictions.
#[derive(Debug, Clone, Copy)]
pub enum Per1200Variant<'a> {
    /// d-quadratic closeness weighted by the given dual of `F`.
    DQuad(&'a Frame),
    /// c-quadratic closeness (canonical dual weight).
    CQuad,
    /// Operator-norm perturbation `||T_F - T_G|| = mu`.
    Mu,
}

/// Frame bounds and range gap predicted for `G` from its closeness to `F`.
pub fn per1200_audit(
    pair: &PerturbationPair,
    variant: Per1200Variant<'_>,
) -> Result<Vec<BoundAudit>> {
    let m = pair.m_phi();
    let sm = pair.sqrt_m();
    let upper_f = pair.f.bounds.upper_opt;
    let (g_lower, g_upper) = (pair.g_bounds.lower_opt, pair.g_bounds.upper_opt);
    let gap = pair.range_gap().delta;
    let c = &pair.closeness;
    let quad_upper = upper_f * (1.0 + (c.q / upper_f).sqrt()).powi(2);

    let audits = match variant {
        Per1200Variant::Mu => {
            let mu = c.mu;
            let pre = mu < sm;
            vec![
                BoundAudit::check("per1200-3-lower", (sm - mu).powi(2), g_lower, pre),
                BoundAudit::check(
                    "per1200-3-upper",
                    g_upper,
                    (upper_f.sqrt() + mu).powi(2),
                    pre,
                ),
                BoundAudit::check("per1200-3-gap", gap, mu / (sm - mu), pre),
            ]
        }
        Per1200Variant::CQuad => {
            let q0 = c.q_zero;
            let pre = q0 < 1.0;
            vec![
                BoundAudit::check("per1200-2-lower", m * (1.0 - q0).powi(2), g_lower, pre),
                BoundAudit::check("per1200-2-upper", g_upper, quad_upper, pre),
                BoundAudit::check("per1200-2-gap", gap, (c.q / m).sqrt() / (1.0 - q0), pre),
            ]
        }
        Per1200Variant::DQuad(dual) => {
            let weighted =
                closeness_with(&pair.f, &pair.g_frame, WeightDual::Dual(dual), &pair.tol)?;
            let q_l = weighted.q_weighted;
            let upper_dual = dual.bounds(&pair.tol).upper_opt;
            let pre = q_l < 1.0 && weighted.d_quad_flag;
            let case_a = (m * upper_dual).sqrt() <= 1.0 - q_l;
            vec![
                BoundAudit::check(
                    "per1200-1-lower",
                    (1.0 - q_l).powi(2) / upper_dual,
                    g_lower,
                    pre,
                ),
                BoundAudit::check("per1200-1-upper", g_upper, quad_upper, pre),
                BoundAudit::check("per1200-1a-gap", gap, (c.q / m).sqrt(), pre && case_a),
                BoundAudit::check(
                    "per1200-1b-gap",
                    gap,
                    (c.q * upper_dual).sqrt() / (1.0 - q_l),
                    pre && !case_a,
                ),
            ]
        }
    };
    Ok(audits)
}

/// Residual of the operator identity expressing `T_{G dual} - T_{F dual}`
/// through `U_F - U_G`, `Theta_2`, `P_{ker T_G}` and `A_1 - A_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisIdentity {
    pub residual: f64,
    /// Largest norm among the summands, bounded via factor norms.
    pub scale: f64,
}

impl DisIdentity {
    pub fn audit(&self) -> BoundAudit {
        BoundAudit::check_abs("dis-identity", self.residual, 1e-9 * self.scale, 0.0, true)
    }
}

pub fn dis_identity_residual(
    f: &Frame,
    g: &Frame,
    p1: &ApproxDualParams,
    p2: &ApproxDualParams,
    tol: &TolerancePolicy,
) -> Result<DisIdentity> {
    let fg = FrameGeometry::new(f, tol)?;
    let gg = FrameGeometry::new(g, tol)?;
    if f.dim() != g.dim() || f.len() != g.len() {
        return Err(FrameError::Shape("frames must share (d, N)".into()));
    }
    let p1 = validate_with(&fg, &p1.a, &p1.theta, tol)?;
    let p2 = validate_with(&gg, &p2.a, &p2.theta, tol)?;
    let t_f_ad = dual_synthesis(&fg, &p1.a, &p1.theta);
    let t_g_ad = dual_synthesis(&gg, &p2.a, &p2.theta);
    let lhs = &t_g_ad - &t_f_ad;

    let du = &f.analysis_matrix() - &g.analysis_matrix();
    let t_g_can = &gg.canonical_synthesis;
    let term1 = &(&t_f_ad * &du) * t_g_can;
    let term2 = p2.theta.adjoint();
    let term3 = gg.right_project_kernel(&t_f_ad);
    let da = &p1.a.adjoint() - &p2.a.adjoint();
    let term4 = &da * t_g_can;
    let rhs = &(&(&term1 + &term2) - &term3) - &term4;

    let (nf, ng) = (t_f_ad.op_norm(), t_g_can.op_norm());
    let scale = [
        nf * du.op_norm() * ng,
        term2.op_norm(),
        nf,
        da.op_norm() * ng,
        lhs.op_norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(DisIdentity {
        residual: (&lhs - &rhs).op_norm(),
        scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationKind {
    /// Canonical approximately duals of `F` and `G` under `mu < sqrt(m)`.
    Cad,
    /// Canonical dual of `F` against the canonical approximately dual of `G`.
    PropDis,
    /// d-quadratic closeness: `rho` bound plus canonical cases (1) and (2).
    DQuad,
    /// c-quadratic closeness: `upsilon` bound plus canonical case.
    CQuad,
}

impl DeviationKind {
    pub fn name(self) -> &'static str {
        match self {
            DeviationKind::Cad => "cad",
            DeviationKind::PropDis => "prop-dis",
            DeviationKind::DQuad => "d-quad",
            DeviationKind::CQuad => "c-quad",
        }
    }
}

/// `||T_{F,0}(A1) - T_{G,0}(A2)||`, or infinity when `G` is not a frame.
fn canonical_deviation(pair: &PerturbationPair, a1: &CMatrix, a2: &CMatrix) -> f64 {
    match &pair.g {
        Some(gg) => (&(&a1.adjoint() * &pair.f.canonical_synthesis)
            - &(&a2.adjoint() * &gg.canonical_synthesis))
            .op_norm(),
        None => f64::INFINITY,
    }
}

/// `||T_{G, Theta_ba}(A2) - T_{F, Theta}(A1)||` for the best-approximating
/// dual of `G`, or infinity when `G` is not a frame.
fn best_approx_deviation(
    pair: &PerturbationPair,
    a1: &CMatrix,
    theta: &CMatrix,
    a2: &CMatrix,
) -> f64 {
    match &pair.g {
        Some(gg) => {
            let t_f_ad = dual_synthesis(&pair.f, a1, theta);
            let theta_ba = gg.project_kernel(&t_f_ad.adjoint());
            (&dual_synthesis(gg, a2, &theta_ba) - &t_f_ad).op_norm()
        }
        None => f64::INFINITY,
    }
}

/// Deviation bounds between approximately dual frames of `F` and `G`.
///
/// `lambda_dual` weights the d-quadratic measure (canonical dual when
/// absent); `theta` is the kernel parameter of the `F` dual (zero when
/// absent). `PropDis` uses `a2` as the operator of the `G` dual.
pub fn deviation_bound_audit(
    kind: DeviationKind,
    pair: &PerturbationPair,
    a1: &CMatrix,
    a2: &CMatrix,
    lambda_dual: Option<&Frame>,
    theta: Option<&CMatrix>,
) -> Result<Vec<BoundAudit>> {
    let tol = &pair.tol;
    let d = pair.f.frame.dim();
    let eps1 = check_contraction(a1, d, tol)?;
    let eps2 = check_contraction(a2, d, tol)?;
    let m = pair.m_phi();
    let sm = pair.sqrt_m();
    let c = &pair.closeness;
    let mu = c.mu;
    let n_a1 = a1.op_norm();
    let n_a2 = a2.op_norm();
    let n_da = (a1 - a2).op_norm();
    let sq = c.q.sqrt();

    let audits = match kind {
        DeviationKind::Cad => {
            let pre = mu < sm;
            let lhs = canonical_deviation(pair, a1, a2);
            let denom = sm * (sm - mu);
            let b1 = 2.0 * mu * n_a1 / denom + n_da / (sm - mu);
            let b2 = 2.0 * mu / denom + eps1 * (2.0 * mu + sm) / denom + eps2 / (sm - mu);
            vec![
                BoundAudit::check("cad-bound-1", lhs, b1, pre),
                BoundAudit::check("cad-bound-2", lhs, b2, pre),
            ]
        }
        DeviationKind::PropDis => {
            let pre = mu < sm;
            let lhs = canonical_deviation(pair, &CMatrix::identity(d), a2);
            let rhs = (2.0 * mu * n_a2 + eps2 * sm) / (sm * (sm - mu));
            vec![BoundAudit::check("prop-dis", lhs, rhs, pre)]
        }
        DeviationKind::DQuad | DeviationKind::CQuad => {
            let theta = match theta {
                Some(t) => validate_with(&pair.f, a1, t, tol)?.theta,
                None => CMatrix::zeros(pair.f.frame.len(), d),
            };
            let n_theta = theta.op_norm();
            let lhs_best = best_approx_deviation(pair, a1, &theta, a2);
            let lhs_canon = canonical_deviation(pair, a1, a2);
            if kind == DeviationKind::CQuad {
                let q0 = c.q_zero;
                let pre = q0 < 1.0;
                let denom = sm * (1.0 - q0);
                let upsilon = (sq * (n_a1 / sm + n_theta) + n_da) / denom;
                let canon = (2.0 * n_a1 * (c.q / m).sqrt() + n_da) / denom;
                vec![
                    BoundAudit::check("c-quad-upsilon", lhs_best, upsilon, pre),
                    BoundAudit::check("c-quad-canonical", lhs_canon, canon, pre),
                ]
            } else {
                let (q_l, upper_dual) = match lambda_dual {
                    Some(dual) => {
                        if !is_dual_pair(&pair.f.frame, dual, tol)? {
                            return Err(FrameError::Input("lambda_dual is not a dual of F".into()));
                        }
                        let w =
                            closeness_with(&pair.f, &pair.g_frame, WeightDual::Dual(dual), tol)?;
                        (w.q_weighted, dual.bounds(tol).upper_opt)
                    }
                    None => (c.q_zero, 1.0 / m),
                };
                let pre = q_l < 1.0 && m <= c.q;
                let factor = upper_dual.sqrt() / (1.0 - q_l);
                let rho = factor * (sq * (n_a1 / sm + n_theta) + n_da);
                let case_a = (m * upper_dual).sqrt() <= 1.0 - q_l;
                let canon1 = (2.0 * sq * n_a1 + sm * n_da) / m;
                let canon2 = factor * (2.0 * n_a1 * (c.q / m).sqrt() + n_da);
                vec![
                    BoundAudit::check("d-quad-rho", lhs_best, rho, pre),
                    BoundAudit::check("d-quad-canonical-1", lhs_canon, canon1, pre && case_a),
                    BoundAudit::check("d-quad-canonical-2", lhs_canon, canon2, pre && !case_a),
                ]
            }
        }
    };
    Ok(audits)
}
