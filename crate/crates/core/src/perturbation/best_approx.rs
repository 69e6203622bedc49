use serde::Serialize;

use super::PerturbationPair;
use crate::approx_dual::{
    build_with_geometry, check_contraction, dual_synthesis, validate_with, ApproxDualParams,
    ApproxDualReport,
};
use crate::audit::BoundAudit;
use crate::error::{FrameError, Result};
use crate::exec::ExecMode;
use crate::numeric::{kernel_basis, min_singular_value, CMatrix};
use crate::random::{random_kernel_valued, stream};

/// `P_{ker T_G} U_{F dual}` for the `F` dual built from `p1`.
pub fn theta_ba(pair: &PerturbationPair, p1: &ApproxDualParams) -> Result<CMatrix> {
    let gg = pair.g_geometry()?;
    let p1 = validate_with(&pair.f, &p1.a, &p1.theta, &pair.tol)?;
    Ok(gg.project_kernel(&dual_synthesis(&pair.f, &p1.a, &p1.theta).adjoint()))
}

/// The best-approximating dual of `G` and its audits.
#[derive(Debug, Clone)]
pub struct BestApprox {
    pub report: ApproxDualReport,
    /// `||dual_G - dual_F|| <= lambda`.
    pub lambda_bound: BoundAudit,
    /// `Theta_ba` is no farther than any sampled kernel-valued `Lambda`.
    pub optimality: BoundAudit,
    /// Distance equals `||(A2* T_{G,0} - T_{F dual}) P_{ran U_G}||`.
    pub projector: BoundAudit,
    pub distance: f64,
    pub sampled_distances: Vec<f64>,
}

impl BestApprox {
    pub fn audits(&self) -> Vec<BoundAudit> {
        vec![
            self.lambda_bound.clone(),
            self.optimality.clone(),
            self.projector.clone(),
        ]
    }
}

const OPTIMALITY_ABS_TOL: f64 = 1e-10;

pub fn best_approx_dual(
    pair: &PerturbationPair,
    p1: &ApproxDualParams,
    a2: &CMatrix,
    trials: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<BestApprox> {
    let tol = &pair.tol;
    let (mu, sm) = (pair.mu(), pair.sqrt_m());
    if mu >= sm {
        return Err(FrameError::Precondition(format!(
            "mu = {mu} is not below sqrt(m_opt) = {sm}"
        )));
    }
    let gg = pair.g_geometry()?;
    let d = pair.f.frame.dim();
    check_contraction(a2, d, tol)?;
    let p1 = validate_with(&pair.f, &p1.a, &p1.theta, tol)?;
    let t_f_ad = dual_synthesis(&pair.f, &p1.a, &p1.theta);
    let theta = gg.project_kernel(&t_f_ad.adjoint());
    let report = build_with_geometry(gg, a2, &theta, tol)?;

    let base = &a2.adjoint() * &gg.canonical_synthesis;
    let x = &base - &t_f_ad;
    let distance_of = |lambda: &CMatrix| (&x + &lambda.adjoint()).op_norm();
    let distance = (report.dual.synthesis_matrix() - &t_f_ad).op_norm();
    let exact = gg.right_project_range(&x).op_norm();

    let n_da = (&p1.a - a2).op_norm();
    let lambda = (mu * (p1.a.op_norm() / sm + p1.theta.op_norm()) + n_da) / (sm - mu);
    let lambda_bound = BoundAudit::check("best-app-lambda", distance, lambda, true);

    let theta_norm = theta.op_norm().max(1.0);
    let sampled_distances = mode.map(trials, |t| {
        let mut rng = stream(seed, "best-app", t as u64);
        let frac = (t as f64 + 1.0) / trials as f64;
        let lambda = if t % 2 == 0 {
            random_kernel_valued(gg, d, 2.0 * frac * theta_norm, &mut rng)
        } else {
            &theta + &random_kernel_valued(gg, d, 1e-3 * frac, &mut rng)
        };
        distance_of(&lambda)
    });
    let best_sampled = sampled_distances
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let optimality = BoundAudit::check_abs(
        "best-app-optimality",
        distance,
        best_sampled,
        OPTIMALITY_ABS_TOL,
        true,
    );
    let projector = BoundAudit::check_abs(
        "best-app-projector",
        (distance - exact).abs(),
        0.0,
        OPTIMALITY_ABS_TOL,
        true,
    );
    Ok(BestApprox {
        report,
        lambda_bound,
        optimality,
        projector,
        distance,
        sampled_distances,
    })
}

/// [`best_approx_dual`] audits, reported as not applicable when `mu` is not
/// below `sqrt(m_opt(F))` or `G` is not a frame.
pub fn best_approx_audits(
    pair: &PerturbationPair,
    p1: &ApproxDualParams,
    a2: &CMatrix,
    trials: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<Vec<BoundAudit>> {
    match best_approx_dual(pair, p1, a2, trials, seed, mode) {
        Ok(b) => Ok(b.audits()),
        Err(FrameError::Precondition(_)) | Err(FrameError::NotAFrame { .. }) => Ok(vec![
            BoundAudit::not_applicable("best-app-lambda", f64::NAN, f64::NAN),
            BoundAudit::not_applicable("best-app-optimality", f64::NAN, f64::NAN),
            BoundAudit::not_applicable("best-app-projector", f64::NAN, f64::NAN),
        ]),
        Err(e) => Err(e),
    }
}

fn gamma_precondition(pair: &PerturbationPair) -> Result<()> {
    let (mu, sm) = (pair.mu(), pair.sqrt_m());
    if mu >= sm / 2.0 {
        return Err(FrameError::Precondition(format!(
            "mu = {mu} is not below sqrt(m_opt)/2 = {}",
            sm / 2.0
        )));
    }
    Ok(())
}

/// `(A, Theta) -> (A, Theta_ba)`, mapping approximately dual frames of `F`
/// to approximately dual frames of `G`.
pub fn gamma_map(pair: &PerturbationPair, p: &ApproxDualParams) -> Result<ApproxDualParams> {
    gamma_precondition(pair)?;
    let gg = pair.g_geometry()?;
    let theta = theta_ba(pair, p)?;
    validate_with(gg, &p.a, &theta, &pair.tol)
}

/// Recovers the `F` kernel parameter `Theta` with `gamma_map(A, Theta) =
/// (A, lambda)`.
pub fn gamma_inverse(pair: &PerturbationPair, lambda: &CMatrix, a: &CMatrix) -> Result<CMatrix> {
    gamma_precondition(pair)?;
    let tol = &pair.tol;
    let gg = pair.g_geometry()?;
    let (d, n) = (pair.f.frame.dim(), pair.f.frame.len());
    check_contraction(a, d, tol)?;
    if lambda.shape() != (n, d) {
        return Err(FrameError::Shape(format!(
            "Lambda must be {n}x{d}, got {:?}",
            lambda.shape()
        )));
    }
    lambda.ensure_finite()?;
    let k_f = kernel_basis(pair.f.synthesis(), tol);
    let k_g = kernel_basis(gg.synthesis(), tol);
    if k_f.cols() != k_g.cols() {
        return Err(FrameError::GapHypothesis { sigma_min: 0.0 });
    }
    if k_f.cols() == 0 {
        return Ok(CMatrix::zeros(n, d));
    }
    let restricted = &k_g.adjoint() * &k_f;
    let sigma_min = min_singular_value(&restricted);
    if sigma_min <= tol.rank_cutoff_rel.sqrt() {
        return Err(FrameError::GapHypothesis { sigma_min });
    }
    let canonical_part = &pair.f.canonical_synthesis.adjoint() * a;
    let y = lambda - &gg.project_kernel(&canonical_part);
    let rhs = &k_g.adjoint() * &y;
    let c = restricted
        .inner()
        .clone()
        .lu()
        .solve(rhs.inner())
        .ok_or(FrameError::GapHypothesis { sigma_min })?;
    Ok(&k_f * &CMatrix::from_inner(c))
}

/// Residuals of both compositions of `gamma_map` and `gamma_inverse`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaRoundTrip {
    /// `||Gamma(Gamma^{-1}(Lambda)) - Lambda||`.
    pub forward: f64,
    /// `||Gamma^{-1}(Gamma(Theta)) - Theta||`.
    pub backward: f64,
}

impl GammaRoundTrip {
    pub const TOL: f64 = 1e-9;

    pub fn audits(&self) -> Vec<BoundAudit> {
        vec![
            BoundAudit::check_abs("gamma-forward", self.forward, 0.0, Self::TOL, true),
            BoundAudit::check_abs("gamma-backward", self.backward, 0.0, Self::TOL, true),
        ]
    }

    pub fn not_applicable() -> Vec<BoundAudit> {
        vec![
            BoundAudit::not_applicable("gamma-forward", f64::NAN, 0.0),
            BoundAudit::not_applicable("gamma-backward", f64::NAN, 0.0),
        ]
    }
}

/// Round trips starting from `p` (on the `F` side) and from `lambda` (a
/// kernel-valued parameter for `G`).
pub fn gamma_roundtrip(
    pair: &PerturbationPair,
    p: &ApproxDualParams,
    lambda: &CMatrix,
) -> Result<GammaRoundTrip> {
    let p = validate_with(&pair.f, &p.a, &p.theta, &pair.tol)?;
    let image = gamma_map(pair, &p)?;
    let back = gamma_inverse(pair, &image.theta, &p.a)?;
    let backward = (&back - &p.theta).op_norm();

    let lambda = pair.g_geometry()?.project_kernel(lambda);
    let theta = gamma_inverse(pair, &lambda, &p.a)?;
    let forth = gamma_map(pair, &ApproxDualParams::new(p.a.clone(), theta))?;
    let forward = (&forth.theta - &lambda).op_norm();
    Ok(GammaRoundTrip { forward, backward })
}
