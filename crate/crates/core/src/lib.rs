pub mod design;
pub mod experiments;
pub mod error;
pub mod index_sets;
pub mod interpolation;
pub mod least_squares;
pub mod mesh;
pub mod poly_basis;
pub mod quadrature;
pub mod rng;
pub mod sparse;

pub use error::{Error, Result};
