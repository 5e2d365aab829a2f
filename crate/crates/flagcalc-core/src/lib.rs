//! Pseudo-spectral toolkit for multilinear flag operators on the torus.
//!
//! The crate models rooted flag trees (nested fractional Leibniz rules),
//! evaluates the associated multilinear Fourier multipliers on periodic
//! grids, computes mixed Lebesgue/Besov norms, and provides the
//! decomposition machinery (paraproducts, commutators, localized symbol
//! expansions) together with a numerical inequality-probing harness.

pub mod decompose;
pub mod error;
pub mod flagop;
pub mod flagtree;
pub mod norms;
pub mod quad;
pub mod spectral;
pub mod verify;

pub use error::Error;
pub use flagtree::{
    DeltaMap, Exponent, ExponentTuple, FlagForest, FlagTree, Order, TreeNode, Verdict,
};
pub use spectral::{Complex, GridFunction, GridSpec};

pub type Result<T> = std::result::Result<T, Error>;
