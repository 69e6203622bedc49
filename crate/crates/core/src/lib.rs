//! Finite-dimensional frame theory toolkit.
//!
//! Frames in `C^d`, their canonical and approximately dual frames, the
//! deviation bounds between duals of a frame and of a perturbed frame, and
//! discrete Gabor frames on the cyclic group `Z_L`. Every inequality is
//! surfaced as a [`BoundAudit`] so it can be checked numerically.

pub mod approx_dual;
pub mod audit;
pub mod corpus;
pub mod error;
pub mod exam;
pub mod exec;
pub mod frame;
pub mod gabor;
pub mod io;
pub mod numeric;
pub mod perturbation;
pub mod random;

pub use approx_dual::{ApproxDualParams, ApproxDualReport};
pub use audit::{AuditSummary, BoundAudit, Verdict};
pub use error::{FrameError, Result};
pub use exec::ExecMode;
pub use frame::{Frame, FrameBounds};
pub use gabor::GaborSystem;
pub use numeric::{CMatrix, TolerancePolicy, C64};
