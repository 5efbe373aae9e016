//! Characteristic polynomials, certified Perron root isolation by Sturm
//! sequences, and interval enclosures of the Perron eigenvectors.

mod interval;
mod perron;
mod poly;

pub use interval::{
    bits_for, floor_int, format_rational, parse_rational, rational_string, rational_to_decimal,
    rational_to_f64, RationalInterval,
};
pub use perron::{
    edge_measures, is_expanding, perron_root, perron_vectors, PerronData, RootIsolator,
};
pub use poly::{char_poly, IntPolynomial, SturmSequence};

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error("matrix must be square, got {shape:?}")]
    NotSquare { shape: (usize, usize) },
    #[error("matrix has a negative entry")]
    Negative,
    #[error("matrix is reducible; no simple Perron root")]
    Reducible,
    #[error("matrix is not expanding (Perron root is 1)")]
    NotExpanding,
    #[error("precision must be positive")]
    NonPositivePrecision,
    #[error(
        "requested width {requested} not reached within the iteration cap (achieved {achieved})"
    )]
    Resource { requested: String, achieved: String },
}

/// Default enclosure width `10^-30`.
pub fn default_precision() -> BigRational {
    BigRational::new(BigInt::from(1), num_traits::pow(BigInt::from(10), 30))
}
