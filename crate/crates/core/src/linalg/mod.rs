//! Exact integer linear algebra: dense matrices, Smith normal form and
//! finitely generated abelian groups.

mod group;
mod matrix;
mod smith;

pub use group::{cokernel, ext_to_z, group_iso_eq, hom_to_z, FGAbelianGroup};
pub use matrix::{IntMatrix, IntVector};
pub use smith::{checked_smith_normal_form, kernel_basis, smith_normal_form, SmithDecomposition};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("expected {expected} entries, found {found}")]
    DataLength { expected: usize, found: usize },
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op} needs a square matrix, got {shape:?}")]
    NotSquare {
        op: &'static str,
        shape: (usize, usize),
    },
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("Smith decomposition failed verification")]
    Verification,
}
