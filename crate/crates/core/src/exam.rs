//! The block-repetition example: a Parseval frame `Phi` and a perturbation
//! `Psi` that is c-quadratically close to it yet neither quadratically close
//! with `q < m` nor a `mu`-perturbation with `mu < sqrt(m)`.
//!
//! Block `n` (1-based) of `Phi` repeats `e_n / 2^n` exactly `4^n` times; `Psi`
//! scales the first vector of each block by `t_n` (`t_1 = 3`, `t_n = 2`
//! otherwise). The infinite family is truncated to `K` blocks in `C^K`.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::Frame;
use crate::numeric::{CMatrix, C64};

pub const MAX_BLOCKS: usize = 10;

/// Analytic limits of the untruncated family and the truncated values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExamMetadata {
    pub blocks: usize,
    pub vectors: usize,
    pub q_limit: f64,
    pub q0_limit: f64,
    pub mu: f64,
    /// `q_limit - q_truncated`.
    pub q_tail: f64,
    pub q0_tail: f64,
    pub q_truncated: f64,
    pub q0_truncated: f64,
}

fn scale_factor(n: usize) -> f64 {
    if n == 1 {
        3.0
    } else {
        2.0
    }
}

pub fn exam_len(blocks: usize) -> usize {
    (1..=blocks).map(|n| 1usize << (2 * n)).sum()
}

fn build(blocks: usize, perturbed: bool) -> Result<Frame> {
    let mut t = CMatrix::zeros(blocks, exam_len(blocks));
    let mut col = 0;
    for n in 1..=blocks {
        let base = 0.5f64.powi(n as i32);
        for k in 0..1usize << (2 * n) {
            let v = if perturbed && k == 0 {
                scale_factor(n) * base
            } else {
                base
            };
            t.set(n - 1, col, C64::new(v, 0.0));
            col += 1;
        }
    }
    Frame::from_synthesis(t)
}

fn check_blocks(blocks: usize) -> Result<()> {
    if !(1..=MAX_BLOCKS).contains(&blocks) {
        return Err(FrameError::Input(format!(
            "blocks must be in 1..={MAX_BLOCKS}, got {blocks}"
        )));
    }
    Ok(())
}

/// `(Phi_K, Psi_K)`.
pub fn exam_pair(blocks: usize) -> Result<(Frame, Frame)> {
    check_blocks(blocks)?;
    Ok((build(blocks, false)?, build(blocks, true)?))
}

pub fn exam_metadata(blocks: usize) -> Result<ExamMetadata> {
    check_blocks(blocks)?;
    let quarter = |n: usize| 0.25f64.powi(n as i32);
    let q_truncated: f64 = (1..=blocks)
        .map(|n| (scale_factor(n) - 1.0).powi(2) * quarter(n))
        .sum();
    let q0_truncated: f64 = (1..=blocks)
        .map(|n| (scale_factor(n) - 1.0) * quarter(n))
        .sum();
    let (q_limit, q0_limit) = (13.0 / 12.0, 7.0 / 12.0);
    Ok(ExamMetadata {
        blocks,
        vectors: exam_len(blocks),
        q_limit,
        q0_limit,
        mu: 1.0,
        q_tail: q_limit - q_truncated,
        q0_tail: q0_limit - q0_truncated,
        q_truncated,
        q0_truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let (phi, psi) = exam_pair(1).unwrap();
        assert_eq!(phi.len(), 4);
        assert_eq!(phi.vector(0)[0].re, 0.5);
        assert_eq!(psi.vector(0)[0].re, 1.5);
        assert_eq!(psi.vector(1)[0].re, 0.5);
        assert_eq!(exam_metadata(1).unwrap().q_truncated, 1.0);
        assert_eq!(exam_metadata(2).unwrap().q_truncated, 1.0625);
        assert_eq!(exam_len(8), 87_380);
    }

    #[test]
    fn tails_shrink_by_four() {
        let m = exam_metadata(8).unwrap();
        assert!((m.q_tail - 0.25f64.powi(8) / 3.0).abs() < 1e-15);
        assert!((m.q0_tail - 0.25f64.powi(8) / 3.0).abs() < 1e-15);
        assert!(m.q_tail < 1e-4);
    }

    #[test]
    fn range_checked() {
        assert!(exam_pair(0).is_err());
        assert!(exam_metadata(11).is_err());
    }
}
