//! Library results checked against independent, deliberately naive
//! computations: power iteration instead of SVD, explicit `N x N`
//! projectors instead of range bases, and direct summation for Gabor
//! frame operators.

use framekit_core::approx_dual::{build_approx_dual, dual_synthesis, ApproxDualParams};
use framekit_core::frame::FrameGeometry;
use framekit_core::perturbation::{
    best_approx_dual, closeness, theta_ba, PerturbationPair, WeightDual,
};
use framekit_core::random::{
    gaussian_vector, perturb_frame, random_admissible_a, random_frame, random_kernel_valued, stream,
};
use framekit_core::{CMatrix, ExecMode, Frame, TolerancePolicy, C64};
use rand::Rng;

/// `||M||` by power iteration on `M* M`.
fn power_norm(m: &CMatrix) -> f64 {
    let mh = m.adjoint();
    let mut x = CMatrix::from_fn(m.cols(), 1, |i, _| {
        C64::new(1.0 + i as f64 * 0.37, 0.5 - i as f64 * 0.11)
    });
    let mut lambda = 0.0;
    for _ in 0..2000 {
        let y = &mh * &(m * &x);
        let norm = y.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm / x.frobenius_norm();
        x = y.scale_real(1.0 / norm);
        if (next - lambda).abs() <= 1e-15 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

/// Extreme eigenvalues of a Hermitian positive matrix by power iteration on
/// `H` and on `cI - H`.
fn power_extremes(h: &CMatrix) -> (f64, f64) {
    let top = power_norm(h);
    let shifted = &CMatrix::identity(h.rows()).scale_real(top) - h;
    (top - power_norm(&shifted), top)
}

fn explicit_kernel_projector(f: &Frame) -> CMatrix {
    let t = f.synthesis_matrix();
    let s = f.frame_operator();
    let s_inv = CMatrix::from_inner(
        s.inner()
            .clone()
            .try_inverse()
            .expect("invertible frame operator"),
    );
    &CMatrix::identity(f.len()) - &(&(&t.adjoint() * &s_inv) * t)
}

#[test]
fn frame_bounds_match_power_iteration() {
    let tol = TolerancePolicy::default();
    let mut rng = stream(100, "oracle-bounds", 0);
    for _ in 0..25 {
        let d = rng.random_range(2..=5);
        let n = rng.random_range(d..=2 * d + 3);
        let f = random_frame(d, n, &mut rng);
        let b = f.bounds(&tol);
        let (lo, hi) = power_extremes(&f.frame_operator());
        assert!(
            (b.upper_opt - hi).abs() <= 1e-8 * hi,
            "{} vs {hi}",
            b.upper_opt
        );
        assert!(
            (b.lower_opt - lo).abs() <= 1e-7 * hi,
            "{} vs {lo}",
            b.lower_opt
        );
        let synth_norm = power_norm(f.synthesis_matrix());
        assert!((synth_norm * synth_norm - hi).abs() <= 1e-8 * hi);
    }
}

#[test]
fn kernel_projection_matches_explicit_projector() {
    let tol = TolerancePolicy::default();
    let mut rng = stream(101, "oracle-kernel", 0);
    for _ in 0..20 {
        let f = random_frame(3, 8, &mut rng);
        let geom = FrameGeometry::new(&f, &tol).unwrap();
        let x = framekit_core::random::gaussian_matrix(8, 3, &mut rng);
        let p = explicit_kernel_projector(&f);
        assert!((&(&p * &x) - &geom.project_kernel(&x)).op_norm() < 1e-11);
    }
}

#[test]
fn theta_ba_and_best_distance_match_explicit_projectors() {
    let tol = TolerancePolicy::default();
    let mut rng = stream(102, "oracle-ba", 0);
    for _ in 0..20 {
        let f = random_frame(3, 7, &mut rng);
        let g = perturb_frame(&f, 0.4 * f.bounds(&tol).lower_opt.sqrt(), &mut rng);
        let pair = PerturbationPair::new(&f, &g, &tol).unwrap();
        let theta = random_kernel_valued(&pair.f, 3, 0.6, &mut rng);
        let a1 = random_admissible_a(3, &mut rng);
        let a2 = random_admissible_a(3, &mut rng);
        let p1 = ApproxDualParams::new(a1.clone(), theta.clone());

        let u_f_ad = dual_synthesis(&pair.f, &a1, &theta).adjoint();
        let pk_g = explicit_kernel_projector(&g);
        let expect = &pk_g * &u_f_ad;
        let got = theta_ba(&pair, &p1).unwrap();
        assert!((&got - &expect).op_norm() < 1e-10);

        let best = best_approx_dual(&pair, &p1, &a2, 10, 1, ExecMode::Sequential).unwrap();
        let gg = FrameGeometry::new(&g, &tol).unwrap();
        let x = &(&a2.adjoint() * &gg.canonical_synthesis) - &u_f_ad.adjoint();
        let p_ran = &CMatrix::identity(7) - &pk_g;
        let exact = power_norm(&(&x * &p_ran));
        assert!(
            (best.distance - exact).abs() < 1e-9,
            "{} vs {exact}",
            best.distance
        );
    }
}

#[test]
fn approximate_dual_reconstructs_a() {
    let tol = TolerancePolicy::default();
    let mut rng = stream(103, "oracle-recon", 0);
    for _ in 0..20 {
        let f = random_frame(4, 9, &mut rng);
        let geom = FrameGeometry::new(&f, &tol).unwrap();
        let a = random_admissible_a(4, &mut rng);
        let theta = random_kernel_valued(&geom, 4, 1.5, &mut rng);
        let rep = build_approx_dual(&f, &ApproxDualParams::new(a.clone(), theta), &tol).unwrap();
        // sum_n <x, dual_n> phi_n applied to basis vectors
        let recon = CMatrix::from_fn(4, 4, |i, j| {
            (0..9)
                .map(|n| f.vector(n)[i] * rep.dual.vector(n)[j].conj())
                .sum()
        });
        assert!(recon.max_abs_diff(&a) < 1e-10);
        let rate = power_norm(&(&CMatrix::identity(4) - &a));
        assert!((rep.rate - rate).abs() < 1e-9);
    }
}

#[test]
fn weighted_closeness_by_direct_sums() {
    let tol = TolerancePolicy::default();
    let mut rng = stream(104, "oracle-close", 0);
    for _ in 0..20 {
        let f = random_frame(3, 6, &mut rng);
        let g = perturb_frame(&f, 0.3, &mut rng);
        let geom = FrameGeometry::new(&f, &tol).unwrap();
        let theta = random_kernel_valued(&geom, 3, 0.8, &mut rng);
        let dual = build_approx_dual(
            &f,
            &ApproxDualParams::new(CMatrix::identity(3), theta),
            &tol,
        )
        .unwrap()
        .dual;
        let c = closeness(&f, &g, WeightDual::Dual(&dual), &tol).unwrap();
        let norm = |v: Vec<C64>| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let diff = |n: usize| {
            norm(
                f.vector(n)
                    .iter()
                    .zip(g.vector(n))
                    .map(|(x, y)| x - y)
                    .collect(),
            )
        };
        let q: f64 = (0..6).map(|n| diff(n).powi(2)).sum();
        let ql: f64 = (0..6).map(|n| diff(n) * norm(dual.vector(n))).sum();
        assert!((c.q - q).abs() < 1e-12 && (c.q_weighted - ql).abs() < 1e-12);
        assert!(c.mu <= c.q.sqrt() + 1e-12);
    }
}

#[test]
fn gabor_frame_operator_by_direct_summation() {
    use framekit_core::gabor::{build_gabor_frame, GaborSystem};
    let mut rng = stream(105, "oracle-gabor", 0);
    let (l, a, b) = (12, 3, 2);
    let g = gaussian_vector(l, &mut rng);
    let sys = GaborSystem::new(l, a, b, g.clone()).unwrap();
    let s = build_gabor_frame(&sys).unwrap().frame_operator();
    // S[j, k] = sum_{n, m} e^{2 pi i m b (j - k) / L} g[j - na] conj(g[k - na])
    for j in 0..l {
        for k in 0..l {
            let mut acc = C64::new(0.0, 0.0);
            for n in 0..l / a {
                for m in 0..l / b {
                    let phase = 2.0 * std::f64::consts::PI * (m * b) as f64 * (j as f64 - k as f64)
                        / l as f64;
                    acc += C64::from_polar(1.0, phase)
                        * g[(j + l - n * a) % l]
                        * g[(k + l - n * a) % l].conj();
                }
            }
            assert!((acc - s.get(j, k)).norm() < 1e-10);
        }
    }
}
