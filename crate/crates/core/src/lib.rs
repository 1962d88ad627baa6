//! Classification of p-groups of small order by the p-group generation
//! algorithm.
//!
//! The pipeline runs bottom-up: [`fp`] and [`matfp`] provide exact linear
//! algebra over F_p, [`pcpres`] implements power-commutator presentations
//! and collection, [`pcover`] builds p-covers, [`action`] turns
//! automorphisms into matrices on the multiplicator, [`orbits`] computes
//! orbits and stabilizers, [`descend`] produces immediate descendants, and
//! [`classify`] drives the whole search from the elementary abelian roots.

pub mod action;
pub mod classify;
pub mod descend;
pub mod fp;
pub mod matfp;
pub mod orbits;
pub mod pcover;
pub mod pcpres;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime greater than 3")]
    InvalidPrime(u32),
    #[error("prime {0} exceeds the supported ceiling {1}")]
    PrimeTooLarge(u32, u32),
    #[error("matrix is singular")]
    Singular,
    #[error("malformed presentation: {0}")]
    Malformed(String),
    #[error("presentation is inconsistent: {0}")]
    Inconsistent(String),
    #[error("not an automorphism: {0}")]
    NotAutomorphism(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("group is terminal (trivial nucleus)")]
    NotExtendable,
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("internal invariant broken: {0}")]
    Internal(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use fp::PrimeField;
pub use matfp::{FpMatrix, SubspaceCanon};
pub use pcpres::{ExponentWord, PcPresentation};
pub use pcover::{build_cover, CoverData};
pub use action::{AutGroup, Automorphism};
pub use descend::{immediate_descendants, DescendantRecord};
pub use classify::{classify, expected_count, verify, Catalog, ClassifyOptions, VerifyReport};
