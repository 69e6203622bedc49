//! Seeded random instances.
//!
//! All randomness flows from one 64-bit seed through named streams: the
//! stream id is a hash of the operation name, and trial `t` uses ChaCha
//! stream `t`. Adding a new stream name never shifts an existing one.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::frame::{Frame, FrameGeometry};
use crate::numeric::{CMatrix, C64};

fn fnv1a(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic generator for `(seed, name, index)`.
pub fn stream(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed) ^ fnv1a(name));
    rng.set_stream(index);
    rng
}

pub fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let entries: Vec<C64> = (0..rows * cols).map(|_| gaussian_c64(rng)).collect();
    CMatrix::from_fn(rows, cols, |i, j| entries[i * cols + j])
}

pub fn gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<C64> {
    (0..len).map(|_| gaussian_c64(rng)).collect()
}

/// A Gaussian frame of `n >= d` vectors in `C^d`.
pub fn random_frame<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Frame {
    assert!(n >= d, "a frame for C^{d} needs at least {d} vectors");
    Frame::from_synthesis(gaussian_matrix(d, n, rng)).expect("gaussian entries are finite")
}

/// `I + rho R / ||R||` with `rho` uniform in `[0, 0.95]`.
pub fn random_admissible_a<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let rho: f64 = rng.random_range(0.0..=0.95);
    let r = gaussian_matrix(d, d, rng);
    let norm = r.op_norm();
    &CMatrix::identity(d) + &r.scale_real(rho / norm)
}

/// Gaussian `N x cols` matrix projected into `ker T`, scaled to operator
/// norm `scale` (kernel-valued `Theta` for the given frame).
pub fn random_kernel_valued<R: Rng + ?Sized>(
    geom: &FrameGeometry,
    cols: usize,
    scale: f64,
    rng: &mut R,
) -> CMatrix {
    let raw = gaussian_matrix(geom.frame.len(), cols, rng);
    let k = geom.project_kernel(&raw);
    let norm = k.op_norm();
    if norm == 0.0 {
        k
    } else {
        k.scale_real(scale / norm)
    }
}

/// `F + mu R / ||R||`, so that the frame-norm distance is exactly `mu`.
pub fn perturb_frame<R: Rng + ?Sized>(f: &Frame, mu: f64, rng: &mut R) -> Frame {
    let r = gaussian_matrix(f.dim(), f.len(), rng);
    let norm = r.op_norm();
    Frame::from_synthesis(f.synthesis_matrix() + &r.scale_real(mu / norm))
        .expect("finite perturbation")
}
