//! Exact K-theory invariants and numerical Smale-space checks for
//! one-dimensional solenoids given by elementary graph presentations.

pub mod dimgroup;
pub mod ktheory;
pub mod linalg;
pub mod oracle;
pub mod presentation;
pub mod smale;
pub mod spectral;
