//! Verification toolkit for the Erdős matching bound
//! `max{C(sk-1, k), C(n, k) - C(n-s+1, k)}` on families of k-subsets of `[n]`
//! with no `s` pairwise disjoint members.
//!
//! - [`family`]: parameters, k-sets, families, the extremal constructions.
//! - [`matching`]: exact matching numbers and certificates.
//! - [`shifting`]: the `(i, j)` shift.
//! - [`algorithm`]: the potential-function shifting procedure, fully checked.
//! - [`oracle`]: exhaustive `f(n, k, s)` by two independent searches.
//! - [`campaign`]: seeded property suites and fuzzing.

pub mod algorithm;
pub mod campaign;
pub mod error;
pub mod exec;
pub mod fault;
pub mod family;
pub mod io;
pub mod matching;
pub mod oracle;
pub mod shifting;
mod subsets;

pub use error::{Claim, EmcError, Result, Violation};
pub use family::{KSet, Params, SetFamily};
pub use matching::MatchingCertificate;
pub use subsets::KSubsets;
