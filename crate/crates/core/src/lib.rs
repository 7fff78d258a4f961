//! Finite projective geometries PG(r,s), Hermitian and quasi-Hermitian point sets,
//! the F_p codes spanned by hyperplane characteristic vectors, intersection spectra,
//! and exact integer audits of the counting identities those objects satisfy.

pub mod audit;
pub mod code;
pub mod error;
pub mod field;
pub mod geometry;
pub mod hermitian;
pub mod hunt;
pub mod report;
pub mod spectra;

pub use error::{Error, Result};
