//! Numerics for special Lagrangian graphs and Bernstein-type regions.
//!
//! The crate works on the spectrum `λ` of the slope matrix of a graphical
//! Lagrangian plane and on fully symmetric 3-tensors `h_ijk` that play the
//! role of the second fundamental form. It provides
//!
//! - [`regions`]: membership and margins for the bounded-slope, `Ξ`, `Ξ'`
//!   and stability regions, plus randomized scans;
//! - [`stability`]: the quadratic forms controlling `Δ ln *Ω`;
//! - [`gaussmap`]: the diagonal unitary rotation of planes and a search for
//!   an angle that moves a family into a bounded `Ξ` region;
//! - [`slagfield`]: grid potentials, stencil derivatives and a pointwise
//!   superharmonicity check.
//!
//! ```
//! use slag_core::regions::{classify, Spectrum, DEFAULT_TOLERANCE};
//!
//! let spec: Spectrum = "2,-0.5".parse().unwrap();
//! let report = classify(&spec, 2.0, DEFAULT_TOLERANCE).unwrap();
//! assert!(report.flags.xi && report.flags.m);
//! assert!((report.margins.m - 1.5625).abs() < 1e-12);
//! ```

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod gaussmap;
pub mod numkernel;
pub mod regions;
pub mod slagfield;
pub mod stability;
pub mod sym3tensor;

pub use error::{Error, Result};
pub use numkernel::{sym_eigen, EigenDecomposition, SymMatrix};
pub use regions::{classify, region_scan, RegionReport, ScanConfig, Spectrum};
pub use sym3tensor::Sym3Tensor;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator: one stream per sample so results do not depend
/// on thread scheduling.
pub(crate) fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
