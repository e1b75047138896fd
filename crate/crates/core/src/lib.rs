//! Block diagonal matching fields on Grassmannians.
//!
//! A weight matrix `M_{a,ℓ}` (entries polynomial in a symbolic `β`) picks, for
//! every Plücker coordinate `P_I` of `Gr(r, n)`, the initial term of the
//! corresponding maximal minor. This crate computes the induced matching
//! field, decides whether the Plücker coordinates form a SAGBI basis for the
//! matching field's weight order (by lifting the toric ideal through
//! subduction), and produces checkable certificates.

pub mod combinat;
pub mod error;
pub mod matchfield;
pub mod poly;
pub mod sagbi;
pub mod toric;
pub mod verify;
pub mod weights;

pub use combinat::{Composition, Perm, PluckerIndex, Tableau};
pub use error::{Error, Result};
pub use matchfield::MatchingField;
pub use poly::{PPoly, PluckerRing};
pub use sagbi::{sagbi_check, CheckOptions, Instance, Mode, SagbiCertificate, Verdict};
pub use verify::{predict, sweep, Outcome, Prediction};
pub use weights::{BetaWeight, WeightMatrix};
