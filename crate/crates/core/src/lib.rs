//! Exact linear algebra over Q and finite models of rational Chow rings,
//! correspondences, blow-ups at points and Chow–Künneth decompositions.

pub mod blowup;
pub mod chowring;
pub mod correspond;
pub mod error;
pub mod exactlin;
pub mod murre;
pub mod sample;

pub use blowup::{blow_up, blow_up_many, blowdown_ck, lift_ck, BlowupDatum, BlowupTower};
pub use chowring::{product, projective_space, quotient, ChowDatum, Class, GroupActionDatum, MorphismDatum};
pub use correspond::{diagonal, standard_decomposition, CKDecomposition, Correspondence};
pub use error::{ChowError, Result};
pub use exactlin::{RatMatrix, Rational, Subspace};
pub use murre::{Check, VerificationReport, Verifier};
