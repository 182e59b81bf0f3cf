//! Exact counting and equidistribution diagnostics for norm-one elements of
//! CM fields.
//!
//! A CM field `K` of degree `2N` sits over a totally real field `k` of degree
//! `N`; the elements whose conjugates all lie on the unit circle form the
//! kernel of the relative norm `K -> k`. This crate counts those elements up
//! to a height bound, restricted to arc products of argument windows, two
//! independent ways:
//!
//! * a sieve route: Moebius inclusion-exclusion over ideal classes reduces the
//!   count to exact lattice-point counts in scaled fundamental-domain regions;
//! * an oracle route: direct ball enumeration plus per-element factorization
//!   and exact height/argument predicates.
//!
//! Both routes return exact integers and must agree; the main-term constant,
//! discrepancy diagnostics, and an aggregate count over all imaginary
//! quadratic fields round out the toolkit. Supported fields are imaginary
//! quadratic (`N = 1`) and data-driven quartic CM (`N = 2`).
//!
//! All counting decisions are exact: rational arithmetic throughout, with
//! boundary comparisons escalating from hardware floats to certified
//! enclosures to algebraic sign tests. Floating point appears only in
//! reported diagnostics (volumes, regulators, discrepancies), never in a
//! count.

pub mod angle;
pub mod enclose;
pub mod exact;
pub mod field;
pub mod ideal;
// modules below land in build order; declarations restored as they do
pub mod aggregate;
pub mod config;
pub mod domain;
pub mod lattice;
pub mod oracle;
pub mod report;
pub mod sieve;

pub use angle::{Angle, ArcProduct};
pub use field::{EmbeddingVector, FieldDescriptor, FieldElement, HeightBound};
pub use ideal::{IdealHnf, MobiusTerm};
pub use config::load_descriptor;
pub use domain::RegionSF;
pub use lattice::LatticeBasis;
pub use oracle::NormOnePoint;
pub use report::CountReport;
pub use sieve::SieveTermLedger;

/// Errors surfaced by the counting pipeline.
///
/// `Precision` is reserved for comparisons that cannot be settled exactly and
/// whose enclosure refinement hit the hard cap; it is never used to paper
/// over a roundable quantity.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid or inconsistent field data, CLI input, or config file.
    #[error("config: {0}")]
    Config(String),
    /// A cross-check that must hold mathematically failed at runtime.
    #[error("invariant: {0}")]
    Invariant(String),
    /// An exact comparison could not be resolved within the precision cap.
    #[error("precision exhausted: {0}")]
    Precision(String),
    /// Input outside the supported scope (field degree, magnitude caps).
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Baseline working precision in bits for certified enclosures.
///
/// Read once from `NORMONE_PRECISION_BITS`; refinement doubles from here and
/// escalates to exact algebraic predicates before giving up.
pub fn baseline_bits() -> u32 {
    use std::sync::OnceLock;
    static BITS: OnceLock<u32> = OnceLock::new();
    *BITS.get_or_init(|| {
        std::env::var("NORMONE_PRECISION_BITS")
            .ok()
            .and_then(|s| s.parse().ok())
            .filter(|&b| (32..=65536).contains(&b))
            .unwrap_or(128)
    })
}

/// Hard ceiling for enclosure refinement before `Error::Precision`.
pub(crate) fn max_bits() -> u32 {
    baseline_bits().saturating_mul(128).clamp(16384, 1 << 22)
}
