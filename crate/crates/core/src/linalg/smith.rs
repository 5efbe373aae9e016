//! Smith normal form with unimodular transforms.
//!
//! `U * A * V = D` where `D` is diagonal, `d_i >= 0`, and `d_i | d_{i+1}`.
//! Each round picks the nonzero entry of least absolute value in the
//! remaining block as the pivot, so the pivot strictly shrinks until it
//! divides everything in its row, column and trailing block.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{IntMatrix, IntVector, LinalgError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithDecomposition {
    /// Diagonal entries `d_1, ..., d_min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        let k = self.d.rows().min(self.d.cols());
        (0..k).map(|i| self.d[(i, i)].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }

    /// Recomputes `U * A * V` and compares it with `D`.
    pub fn verify(&self, a: &IntMatrix) -> bool {
        matches!(
            self.u.mul(a).and_then(|ua| ua.mul(&self.v)),
            Ok(ref uav) if *uav == self.d
        ) && self.d.is_diagonal()
            && diagonal_chain_holds(&self.diagonal())
    }
}

fn diagonal_chain_holds(diag: &[BigInt]) -> bool {
    diag.iter().all(|d| !d.is_negative())
        && diag.windows(2).all(|w| {
            if w[0].is_zero() {
                w[1].is_zero()
            } else {
                (&w[1] % &w[0]).is_zero()
            }
        })
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);

    for t in 0..m.min(n) {
        loop {
            let Some((pi, pj)) = min_abs_entry(&d, t) else {
                break;
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let pivot = d[(t, t)].clone();
            for i in t + 1..m {
                let q = d[(i, t)].div_floor(&pivot);
                if !q.is_zero() {
                    let neg = -q;
                    d.add_row_multiple(i, t, &neg);
                    u.add_row_multiple(i, t, &neg);
                }
            }
            for j in t + 1..n {
                let q = d[(t, j)].div_floor(&pivot);
                if !q.is_zero() {
                    let neg = -q;
                    d.add_col_multiple(j, t, &neg);
                    v.add_col_multiple(j, t, &neg);
                }
            }

            let cross_clear =
                (t + 1..m).all(|i| d[(i, t)].is_zero()) && (t + 1..n).all(|j| d[(t, j)].is_zero());
            if !cross_clear {
                // a remainder smaller than the pivot now exists; repivot
                continue;
            }
            let offender =
                (t + 1..m).find(|&i| (t + 1..n).any(|j| !(&d[(i, j)] % &pivot).is_zero()));
            match offender {
                Some(i) => {
                    let one = BigInt::from(1);
                    d.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }

    let out = SmithDecomposition { u, d, v };
    debug_assert!(out.verify(a), "Smith decomposition failed self-check");
    out
}

fn min_abs_entry(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            let x = &d[(i, j)];
            if x.is_zero() {
                continue;
            }
            let better = match best {
                None => true,
                Some((bi, bj)) => x.abs() < d[(bi, bj)].abs(),
            };
            if better {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Smith form with the `U * A * V = D` identity checked before returning.
pub fn checked_smith_normal_form(a: &IntMatrix) -> Result<SmithDecomposition, LinalgError> {
    let s = smith_normal_form(a);
    if s.verify(a) {
        Ok(s)
    } else {
        Err(LinalgError::Verification)
    }
}

/// Integer basis of `{ g : A g = 0 }`, read off the columns of `V` paired with zero diagonal entries.
pub fn kernel_basis(a: &IntMatrix) -> Vec<IntVector> {
    let s = smith_normal_form(a);
    let diag = s.diagonal();
    (0..a.cols())
        .filter(|&j| diag.get(j).is_none_or(Zero::is_zero))
        .map(|j| s.v.column(j))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_of(rows: &[Vec<i64>]) -> Vec<i64> {
        let s = smith_normal_form(&IntMatrix::from_rows(rows));
        assert!(s.verify(&IntMatrix::from_rows(rows)));
        s.diagonal()
            .iter()
            .map(|d| i64::try_from(d).unwrap())
            .collect()
    }

    #[test]
    fn identity_minus_fibonacci_is_unimodular() {
        let a = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]])
            .identity_minus()
            .unwrap();
        assert_eq!(a, IntMatrix::from_rows(&[vec![-1, -1], vec![-1, 0]]));
        assert_eq!(diag_of(&[vec![-1, -1], vec![-1, 0]]), vec![1, 1]);
    }

    #[test]
    fn scalar_one_minus_n() {
        for n in 2..=10i64 {
            assert_eq!(diag_of(&[vec![1 - n]]), vec![n - 1]);
        }
    }

    #[test]
    fn zero_matrix_has_identity_transforms() {
        let z = IntMatrix::zeros(2, 2);
        let s = smith_normal_form(&z);
        assert_eq!(s.d, z);
        assert_eq!(s.u, IntMatrix::identity(2));
        assert_eq!(s.v, IntMatrix::identity(2));
    }

    #[test]
    fn divisibility_chain_is_enforced() {
        // diag(2, 3) is diagonal but not in Smith form
        assert_eq!(diag_of(&[vec![2, 0], vec![0, 3]]), vec![1, 6]);
        assert_eq!(
            diag_of(&[vec![4, 0, 0], vec![0, 6, 0], vec![0, 0, 0]]),
            vec![2, 12, 0]
        );
        assert_eq!(diag_of(&[vec![-2, -2], vec![-2, -2]]), vec![2, 0]);
    }

    #[test]
    fn rectangular_input() {
        assert_eq!(diag_of(&[vec![2, 4, 6]]), vec![2]);
        assert_eq!(diag_of(&[vec![0], vec![3], vec![6]]), vec![3]);
    }

    #[test]
    fn kernel_examples() {
        let fib_gap = IntMatrix::from_rows(&[vec![-1, -1], vec![-1, 0]]);
        assert!(kernel_basis(&fib_gap).is_empty());

        let k = kernel_basis(&IntMatrix::from_rows(&[vec![0]]));
        assert_eq!(k, vec![vec![BigInt::from(1)]]);

        let swap_gap = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]])
            .identity_minus()
            .unwrap();
        let k = kernel_basis(&swap_gap);
        assert_eq!(k.len(), 1);
        assert_eq!(k[0][0], k[0][1]);
        assert!(!k[0][0].is_zero());
    }
}
