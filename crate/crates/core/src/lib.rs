//! Desk-scale computations around finiteness properties of totally
//! disconnected locally compact groups.
//!
//! The crate is organised around a pipeline: [`germ`] produces finite windows
//! (balls) of Cayley-Abels-style graphs, [`complex`] turns them into Rips
//! complexes and chain complexes, [`linalg`] provides the exact sparse linear
//! algebra, [`homology`] computes homology and induced maps, and [`scan`]
//! drives essential-triviality diagnostics over filtrations. Independently,
//! [`perm`] implements the finite-level permutation-module calculus with
//! transfer maps, [`orbit`] computes deflated equivariant homology, and
//! [`inference`] closes group diagrams under a catalogue of finiteness-property
//! theorems.

pub mod complex;
pub mod error;
pub mod germ;
pub mod homology;
pub mod inference;
pub mod linalg;
pub mod orbit;
pub mod perm;
pub mod scan;

pub use error::Error;
