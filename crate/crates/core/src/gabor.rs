//! Discrete Gabor systems on the cyclic group `Z_L`.
//!
//! The system of a window `g` with time step `a` and frequency step `b` is
//! the family `E_{mb} T_{na} g` with entries
//! `e^{2 pi i m b j / L} g[(j - n a) mod L]`, ordered with `n` outer and `m`
//! inner.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::approx_dual::{
    bessel_to_theta_with, build_with_geometry, check_contraction, ApproxDualParams,
    ApproxDualReport,
};
use crate::audit::{BoundAudit, INFO_PREFIX};
use crate::error::{FrameError, Result};
use crate::exec::ExecMode;
use crate::frame::{Frame, FrameGeometry};
use crate::numeric::{CMatrix, TolerancePolicy, C64};
use crate::perturbation::{best_approx_dual, PerturbationPair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaborSystem {
    #[serde(rename = "L")]
    pub l: usize,
    pub a: usize,
    pub b: usize,
    #[serde(with = "crate::io::complex_vec")]
    pub window: Vec<C64>,
}

impl GaborSystem {
    pub fn new(l: usize, a: usize, b: usize, window: Vec<C64>) -> Result<Self> {
        let sys = GaborSystem { l, a, b, window };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        let (l, a, b) = (self.l, self.a, self.b);
        if l == 0 || a == 0 || b == 0 || l % a != 0 || l % b != 0 {
            return Err(FrameError::Lattice(format!(
                "a = {a} and b = {b} must divide L = {l}"
            )));
        }
        if self.window.len() != l {
            return Err(FrameError::Shape(format!(
                "window has length {}, expected {l}",
                self.window.len()
            )));
        }
        if self
            .window
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(FrameError::NonFinite);
        }
        Ok(())
    }

    pub fn with_window(&self, window: Vec<C64>) -> Result<Self> {
        GaborSystem::new(self.l, self.a, self.b, window)
    }

    /// `L / a` time shifts.
    pub fn time_count(&self) -> usize {
        self.l / self.a
    }

    /// `L / b` modulations.
    pub fn freq_count(&self) -> usize {
        self.l / self.b
    }

    pub fn redundancy(&self) -> f64 {
        self.l as f64 / (self.a * self.b) as f64
    }
}

fn modulation(l: usize, step: usize, j: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * ((step * j) % l) as f64 / l as f64)
}

/// Synthesis matrix of the Gabor family of `window` on the lattice of `sys`.
fn gabor_synthesis(sys: &GaborSystem, window: &[C64]) -> CMatrix {
    let (l, fc) = (sys.l, sys.freq_count());
    CMatrix::from_fn(l, sys.time_count() * fc, |j, col| {
        let (n, m) = (col / fc, col % fc);
        modulation(l, m * sys.b, j) * window[(j + l - (n * sys.a) % l) % l]
    })
}

pub fn build_gabor_frame(sys: &GaborSystem) -> Result<Frame> {
    sys.validate()?;
    Frame::from_synthesis(gabor_synthesis(sys, &sys.window))
}

/// Window correlations and the frame-bound estimates built from them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalnutReport {
    /// `correlations[k][j] = sum_n g[j - na] conj(g[j - na - kL/b])`.
    #[serde(with = "crate::io::complex_rows")]
    pub correlations: Vec<Vec<C64>>,
    pub lower_est: f64,
    pub upper_est: f64,
}

pub fn walnut_report(sys: &GaborSystem) -> Result<WalnutReport> {
    sys.validate()?;
    let (l, g) = (sys.l, &sys.window);
    let shift = sys.freq_count();
    let correlations: Vec<Vec<C64>> = (0..sys.b)
        .map(|k| {
            (0..l)
                .map(|j| {
                    (0..sys.time_count())
                        .map(|n| {
                            let p = (j + l - n * sys.a) % l;
                            g[p] * g[(p + l - (k * shift) % l) % l].conj()
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    let factor = shift as f64;
    let row_off = |j: usize| {
        correlations
            .iter()
            .skip(1)
            .map(|c| c[j].norm())
            .sum::<f64>()
    };
    let upper_est = factor
        * (0..l)
            .map(|j| correlations[0][j].norm() + row_off(j))
            .fold(0.0, f64::max);
    let lower_est = factor
        * (0..l)
            .map(|j| correlations[0][j].re - row_off(j))
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
    Ok(WalnutReport {
        correlations,
        lower_est,
        upper_est,
    })
}

/// `max_j G_0[j] <= (b / L) M_opt`.
pub fn envelope_audit(sys: &GaborSystem, tol: &TolerancePolicy) -> Result<BoundAudit> {
    let w = walnut_report(sys)?;
    let lhs = w.correlations[0].iter().map(|z| z.re).fold(0.0, f64::max);
    let upper = build_gabor_frame(sys)?.bounds(tol).upper_opt;
    Ok(BoundAudit::check(
        "envelope",
        lhs,
        sys.b as f64 / sys.l as f64 * upper,
        true,
    ))
}

/// `sum_k max_{j in [ka, (k+1)a)} |g[j]|`.
pub fn wiener_norm(g: &[C64], l: usize, a: usize) -> Result<f64> {
    if a == 0 || !l.is_multiple_of(a) {
        return Err(FrameError::Lattice(format!("a = {a} must divide L = {l}")));
    }
    if g.len() != l {
        return Err(FrameError::Shape(format!(
            "window has length {}, expected {l}",
            g.len()
        )));
    }
    Ok(g.chunks(a)
        .map(|block| block.iter().map(|z| z.norm()).fold(0.0, f64::max))
        .sum())
}

fn difference(g1: &[C64], g2: &[C64]) -> Result<Vec<C64>> {
    if g1.len() != g2.len() {
        return Err(FrameError::Shape(format!(
            "windows of length {} and {}",
            g1.len(),
            g2.len()
        )));
    }
    Ok(g1.iter().zip(g2).map(|(x, y)| x - y).collect())
}

/// Upper Walnut estimate of the system generated by `g1 - g2`.
pub fn correlation_r(sys1: &GaborSystem, g2: &[C64]) -> Result<f64> {
    let diff = sys1.with_window(difference(&sys1.window, g2)?)?;
    Ok(walnut_report(&diff)?.upper_est)
}

/// `T_a x[j] = x[j - a]` and `E_b x[j] = e^{2 pi i b j / L} x[j]` as matrices.
fn lattice_generators(sys: &GaborSystem) -> (CMatrix, CMatrix) {
    let l = sys.l;
    let shift = CMatrix::from_fn(l, l, |i, j| {
        if i == (j + sys.a) % l {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let modulate = CMatrix::from_fn(l, l, |i, j| {
        if i == j {
            modulation(l, sys.b, j)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    (shift, modulate)
}

/// Largest commutator norm of `op` with the shift-by-`a` and
/// modulation-by-`b` generators.
pub fn commutation_residual(sys: &GaborSystem, op: &CMatrix) -> f64 {
    let (t, e) = lattice_generators(sys);
    let comm = |x: &CMatrix| (&(op * x) - &(x * op)).op_norm();
    comm(&t).max(comm(&e))
}

const COMMUTATION_TOL: f64 = 1e-9;

fn check_commutes(sys: &GaborSystem, op: &CMatrix) -> Result<()> {
    if op.shape() != (sys.l, sys.l) {
        return Err(FrameError::Shape(format!(
            "operator must be {0}x{0}, got {1:?}",
            sys.l,
            op.shape()
        )));
    }
    let residual = commutation_residual(sys, op);
    if residual > COMMUTATION_TOL * op.op_norm().max(1.0) {
        return Err(FrameError::Structure { residual });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommutingSpec {
    /// `c I`.
    Scalar(f64),
    /// `sum_k c_k S^k` in the frame operator `S`.
    Polynomial(Vec<f64>),
}

pub fn commuting_operator(
    sys: &GaborSystem,
    spec: &CommutingSpec,
    tol: &TolerancePolicy,
) -> Result<CMatrix> {
    sys.validate()?;
    let l = sys.l;
    let op = match spec {
        CommutingSpec::Scalar(c) => CMatrix::identity(l).scale_real(*c),
        CommutingSpec::Polynomial(coeffs) => {
            let s = build_gabor_frame(sys)?.frame_operator();
            let mut acc = CMatrix::zeros(l, l);
            let mut power = CMatrix::identity(l);
            for &c in coeffs {
                acc = &acc + &power.scale_real(c);
                power = &power * &s;
            }
            acc
        }
    };
    op.ensure_finite()?;
    check_contraction(&op, l, tol)?;
    check_commutes(sys, &op)?;
    Ok(op)
}

/// Largest entrywise gap between the window route and the family route.
const TWO_ROUTE_TOL: f64 = 1e-9;

/// Window `A* S^{-1} g + h - sum_{m,n} <S^{-1} g, E_{mb} T_{na} g> E_{mb} T_{na} h`
/// and the approximately dual frame it generates.
pub fn gabor_approx_dual_window(
    sys: &GaborSystem,
    a: &CMatrix,
    h: &[C64],
    tol: &TolerancePolicy,
) -> Result<(Vec<C64>, ApproxDualReport)> {
    let frame = build_gabor_frame(sys)?;
    let geom = FrameGeometry::new(&frame, tol)?;
    approx_dual_window_with(sys, &geom, a, h, tol)
}

fn approx_dual_window_with(
    sys: &GaborSystem,
    geom: &FrameGeometry,
    a: &CMatrix,
    h: &[C64],
    tol: &TolerancePolicy,
) -> Result<(Vec<C64>, ApproxDualReport)> {
    if h.len() != sys.l {
        return Err(FrameError::Shape(format!(
            "h has length {}, expected {}",
            h.len(),
            sys.l
        )));
    }
    check_contraction(a, sys.l, tol)?;
    check_commutes(sys, a)?;
    let g = CMatrix::from_columns(sys.l, std::slice::from_ref(&sys.window))?;
    let sg = &geom.s_inv * &g;
    let coeffs = &geom.frame.analysis_matrix() * &sg;
    let w = gabor_synthesis(sys, h);
    let window_col =
        &(&(&a.adjoint() * &sg) + &CMatrix::from_columns(sys.l, &[h.to_vec()])?) - &(&w * &coeffs);
    let window = window_col.column(0);

    let theta = bessel_to_theta_with(geom, &w)?;
    let report = build_with_geometry(geom, a, &theta, tol)?;
    let residual = gabor_synthesis(sys, &window).max_abs_diff(report.dual.synthesis_matrix());
    if residual > TWO_ROUTE_TOL {
        return Err(FrameError::Structure { residual });
    }
    Ok((window, report))
}

/// Inputs to the sampled parts of [`gabor_perturbation_audit`].
#[derive(Debug, Clone, Copy)]
pub struct GaborAuditConfig {
    pub trials: usize,
    pub seed: u64,
    pub mode: ExecMode,
}

impl Default for GaborAuditConfig {
    fn default() -> Self {
        GaborAuditConfig {
            trials: 20,
            seed: 0,
            mode: ExecMode::Sequential,
        }
    }
}

/// `max_j sum_n |w[(j - na) mod L]|^2`.
fn periodized_energy(sys: &GaborSystem, w: &[C64]) -> f64 {
    let l = sys.l;
    (0..l)
        .map(|j| {
            (0..sys.time_count())
                .map(|n| w[(j + l - n * sys.a) % l].norm_sqr())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Bound on the canonical approximately dual deviation for a perturbation
/// of size `mu`.
fn cad_bound(mu: f64, sm: f64, n_a1: f64, n_da: f64) -> f64 {
    2.0 * mu * n_a1 / (sm * (sm - mu)) + n_da / (sm - mu)
}

/// Audits for perturbing the window of `sys1` to `g2`, with commuting
/// reconstruction operators `a1`, `a2`.
///
/// The `gabor1-*` audits use the correlation size `r` of the window
/// difference; the `gabor3-*` audits replace `r` by the proxy
/// `(2L/b) ||g1 - g2||_W^2` when that proxy dominates `r`. All four
/// candidate proxies are reported as informational audits.
pub fn gabor_perturbation_audit(
    sys1: &GaborSystem,
    g2: &[C64],
    a1: &CMatrix,
    a2: &CMatrix,
    config: &GaborAuditConfig,
    tol: &TolerancePolicy,
) -> Result<Vec<BoundAudit>> {
    let sys2 = sys1.with_window(g2.to_vec())?;
    let l = sys1.l;
    check_contraction(a1, l, tol)?;
    check_contraction(a2, l, tol)?;
    check_commutes(sys1, a1)?;
    check_commutes(sys1, a2)?;
    let f1 = build_gabor_frame(sys1)?;
    let f2 = build_gabor_frame(&sys2)?;
    let geom1 = FrameGeometry::new(&f1, tol)?;
    let m1 = geom1.bounds.lower_opt;
    let sm = m1.sqrt();
    let bounds2 = f2.bounds(tol);
    let delta = difference(&sys1.window, g2)?;
    let r = correlation_r(sys1, g2)?;
    let mu = (f1.synthesis_matrix() - f2.synthesis_matrix()).op_norm();
    let (n_a1, n_da) = (a1.op_norm(), (a1 - a2).op_norm());
    let ratio = sys1.b as f64 / l as f64;

    let mut audits = vec![
        BoundAudit::check("bessel-domination", mu, r.sqrt(), true),
        envelope_audit(sys1, tol)?,
    ];

    let geom2 = FrameGeometry::new(&f2, tol).ok();
    let window_gap = match &geom2 {
        Some(g2geom) => {
            let can = |geom: &FrameGeometry, a: &CMatrix, w: &[C64]| -> Result<Vec<C64>> {
                let col = CMatrix::from_columns(l, &[w.to_vec()])?;
                Ok((&a.adjoint() * &(&geom.s_inv * &col)).column(0))
            };
            let w1 = can(&geom1, a1, &sys1.window)?;
            let w2 = can(g2geom, a2, g2)?;
            Some(periodized_energy(sys1, &difference(&w1, &w2)?))
        }
        None => None,
    };

    let branch = |prefix: &str, size: f64, pre: bool, audits: &mut Vec<BoundAudit>| -> Result<()> {
        let root = size.sqrt();
        let pre = pre && size < m1;
        audits.push(BoundAudit::check(
            format!("{prefix}-lower"),
            (sm - root).powi(2),
            bounds2.lower_opt,
            pre,
        ));
        let env_rhs = ratio * cad_bound(root, sm, n_a1, n_da).powi(2);
        audits.push(BoundAudit::check(
            format!("{prefix}-envelope"),
            window_gap.unwrap_or(f64::NAN),
            env_rhs,
            pre,
        ));
        let names = ["best-app-lambda", "best-app-optimality", "best-app-window"];
        let applicable = pre && geom2.is_some();
        if !applicable {
            for n in names {
                audits.push(BoundAudit::not_applicable(
                    format!("{prefix}-{n}"),
                    f64::NAN,
                    f64::NAN,
                ));
            }
            return Ok(());
        }
        let g2geom = geom2.as_ref().expect("checked above");
        let pair = PerturbationPair::new(&f1, &f2, tol)?;
        let p1 = ApproxDualParams::with_a(a1.clone(), f1.len());
        let best = best_approx_dual(&pair, &p1, a2, config.trials, config.seed, config.mode)?;
        let lambda = (root * (n_a1 / sm) + n_da) / (sm - root);
        audits.push(BoundAudit::check(
            format!("{prefix}-{}", names[0]),
            best.distance,
            lambda,
            true,
        ));
        let mut opt = best.optimality.clone();
        opt.name = format!("{prefix}-{}", names[1]);
        audits.push(opt);
        let g1_ad = (&a1.adjoint()
            * &(&geom1.s_inv * &CMatrix::from_columns(l, std::slice::from_ref(&sys1.window))?))
            .column(0);
        let (_, window_report) = approx_dual_window_with(&sys2, g2geom, a2, &g1_ad, tol)?;
        let residual = window_report
            .dual
            .synthesis_matrix()
            .max_abs_diff(best.report.dual.synthesis_matrix());
        audits.push(BoundAudit::check_abs(
            format!("{prefix}-{}", names[2]),
            residual,
            0.0,
            TWO_ROUTE_TOL,
            true,
        ));
        Ok(())
    };

    branch("gabor1", r, true, &mut audits)?;

    let w = wiener_norm(&delta, l, sys1.a)?;
    let b = sys1.b as f64;
    let proxies = [
        ("2/b-linear", 2.0 / b * w),
        ("2/b-squared", 2.0 / b * w * w),
        ("2L/b-linear", 2.0 * l as f64 / b * w),
        ("2L/b-squared", 2.0 * l as f64 / b * w * w),
    ];
    for (label, p) in proxies {
        audits.push(BoundAudit::check(
            format!("{INFO_PREFIX}wiener-proxy-{label}"),
            r,
            p,
            true,
        ));
    }
    let p = proxies[3].1;
    branch("gabor3", p, r <= p, &mut audits)?;
    Ok(audits)
}
