use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::{IntMatrix, LinalgError};

/// Integer polynomial, coefficients in ascending degree, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<String>", try_from = "Vec<String>")]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl From<IntPolynomial> for Vec<String> {
    fn from(p: IntPolynomial) -> Self {
        p.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

impl TryFrom<Vec<String>> for IntPolynomial {
    type Error = String;

    fn try_from(v: Vec<String>) -> Result<Self, String> {
        v.iter()
            .map(|s| {
                s.parse::<BigInt>()
                    .map_err(|e| format!("bad coefficient `{s}`: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(IntPolynomial::new)
    }
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// `x - c`
    pub fn linear_root(c: BigInt) -> Self {
        Self::new(vec![-c, BigInt::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(One::is_one)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// Exact quotient by `d`; `None` if `d` does not divide `self` in `Z[x]`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let dl = d.leading()?;
        let dd = d.coeffs.len();
        let mut rem = self.coeffs.clone();
        if rem.len() < dd {
            return rem.iter().all(Zero::is_zero).then(Self::zero);
        }
        let mut q = vec![BigInt::zero(); rem.len() - dd + 1];
        for k in (0..q.len()).rev() {
            let top = &rem[k + dd - 1];
            if top.is_zero() {
                continue;
            }
            let (qk, r) = top.div_rem(dl);
            if !r.is_zero() {
                return None;
            }
            for (j, c) in d.coeffs.iter().enumerate() {
                rem[k + j] -= &qk * c;
            }
            q[k] = qk;
        }
        rem.iter().all(Zero::is_zero).then(|| Self::new(q))
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| {
                acc * x + BigRational::from_integer(c.clone())
            })
    }

    /// Sign of `p(x)` using only integer arithmetic: `Σ c_i a^i b^{d-i}` with `x = a/b`, `b > 0`.
    pub fn sign_at(&self, x: &BigRational) -> i8 {
        if self.is_zero() {
            return 0;
        }
        let a = x.numer();
        let b = x.denom();
        let mut acc = BigInt::zero();
        let mut bpow = BigInt::one();
        // Horner in homogeneous form: acc = acc*a + c_i * b^{d-i}
        for c in self.coeffs.iter().rev() {
            acc = acc * a + c * &bpow;
            bpow *= b;
        }
        sign_of(&acc)
    }

    /// `p(A)` by Horner's rule.
    pub fn eval_matrix(&self, a: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        let n = a.rows();
        if !a.is_square() {
            return Err(LinalgError::NotSquare {
                op: "eval_matrix",
                shape: (a.rows(), a.cols()),
            });
        }
        let mut acc = IntMatrix::zeros(n, n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(a)?;
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        Ok(acc)
    }

    /// Content made positive-primitive: divides by the gcd of the coefficients.
    pub fn primitive(&self) -> Self {
        let g = self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    /// Strips factors of `x`: returns `(q, m)` with `self = x^m q` and `q(0) ≠ 0`.
    pub fn strip_x_power(&self) -> (Self, usize) {
        let m = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        (Self::new(self.coeffs[m..].to_vec()), m)
    }
}

pub(crate) fn sign_of(x: &BigInt) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

/// `det(xI - M)` by fraction-free (Bareiss) elimination over `Z[x]`.
///
/// The leading principal minors of `xI - M` are monic, so no pivot is ever zero.
pub fn char_poly(m: &IntMatrix) -> Result<IntPolynomial, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            op: "char_poly",
            shape: (m.rows(), m.cols()),
        });
    }
    let n = m.rows();
    let mut a: Vec<Vec<IntPolynomial>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = -m[(i, j)].clone();
                    if i == j {
                        IntPolynomial::new(vec![c, BigInt::one()])
                    } else {
                        IntPolynomial::constant(c)
                    }
                })
                .collect()
        })
        .collect();
    let mut prev = IntPolynomial::constant(BigInt::one());
    for k in 0..n.saturating_sub(1) {
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[k][k].mul(&a[i][j]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = num.div_exact(&prev).expect("Bareiss quotients are exact");
            }
        }
        prev = a[k][k].clone();
    }
    Ok(a[n - 1][n - 1].clone())
}

/// Sturm chain of the square-free part of a nonzero polynomial, each term
/// rescaled by a positive constant to stay primitive in `Z[x]`.
#[derive(Debug, Clone)]
pub struct SturmSequence {
    chain: Vec<IntPolynomial>,
}

/// Pseudo-remainder of `a` by `b` scaled by a positive constant.
fn positive_pseudo_rem(a: &IntPolynomial, b: &IntPolynomial) -> IntPolynomial {
    let bl = b.leading().expect("nonzero divisor").clone();
    let db = b.degree().unwrap();
    // multiplying by |bl|^k keeps the sign of the true remainder
    let scale = bl.abs();
    let mut r = a.clone();
    while let Some(dr) = r.degree() {
        if dr < db {
            break;
        }
        let lead = r.leading().unwrap().clone();
        let mut shifted = vec![BigInt::zero(); dr - db];
        shifted.extend(b.coeffs.iter().map(|c| c * &lead));
        let sub = IntPolynomial::new(shifted);
        let r_scaled = r.scale(&scale);
        let sub = if bl.is_negative() { sub.neg() } else { sub };
        r = r_scaled.sub(&sub);
    }
    r.primitive()
}

fn gcd_poly(a: &IntPolynomial, b: &IntPolynomial) -> IntPolynomial {
    let (mut x, mut y) = (a.primitive(), b.primitive());
    while !y.is_zero() {
        let r = positive_pseudo_rem(&x, &y);
        x = y;
        y = r;
    }
    x.primitive()
}

impl SturmSequence {
    pub fn new(p: &IntPolynomial) -> Self {
        assert!(!p.is_zero(), "Sturm sequence of the zero polynomial");
        let dp = p.derivative();
        let g = gcd_poly(p, &dp);
        let sf = if g.degree() == Some(0) {
            p.primitive()
        } else {
            // g is primitive, so the quotient is integral
            let q = p.div_exact(&g).expect("gcd divides p");
            // keep the sign of the leading coefficient of p
            if sign_of(q.leading().unwrap()) == sign_of(p.leading().unwrap()) {
                q.primitive()
            } else {
                q.neg().primitive()
            }
        };
        let mut chain = vec![sf.clone(), sf.derivative().primitive()];
        loop {
            let k = chain.len();
            if chain[k - 1].is_zero() {
                chain.pop();
                break;
            }
            if chain[k - 1].degree() == Some(0) {
                break;
            }
            let r = positive_pseudo_rem(&chain[k - 2], &chain[k - 1]).neg();
            if r.is_zero() {
                break;
            }
            chain.push(r);
        }
        Self { chain }
    }

    pub fn square_free(&self) -> &IntPolynomial {
        &self.chain[0]
    }

    pub fn variations(&self, x: &BigRational) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.chain {
            let s = p.sign_at(x);
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Number of distinct real roots in `(a, b]`.
    pub fn count(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn char_poly_examples() {
        assert_eq!(
            char_poly(&IntMatrix::from_rows(&[vec![5]])).unwrap(),
            IntPolynomial::from_i64(&[-5, 1])
        );
        assert_eq!(
            char_poly(&IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]])).unwrap(),
            IntPolynomial::from_i64(&[1, -3, 1])
        );
        assert_eq!(
            char_poly(&IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]])).unwrap(),
            IntPolynomial::from_i64(&[-1, 0, 1])
        );
    }

    #[test]
    fn char_poly_with_zero_leading_entries() {
        // xI - M has a zero constant in the (0,0) slot but stays monic
        let m = IntMatrix::from_rows(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 0]]);
        let p = char_poly(&m).unwrap();
        assert_eq!(p, IntPolynomial::from_i64(&[-1, -1, 0, 1]));
        assert!(p.eval_matrix(&m).unwrap().is_zero());
    }

    #[test]
    fn display() {
        assert_eq!(
            IntPolynomial::from_i64(&[1, -3, 1]).to_string(),
            "x^2 - 3x + 1"
        );
        assert_eq!(IntPolynomial::from_i64(&[-5, 1]).to_string(), "x - 5");
        assert_eq!(IntPolynomial::zero().to_string(), "0");
        assert_eq!(IntPolynomial::from_i64(&[0, 0, -2]).to_string(), "-2x^2");
    }

    #[test]
    fn exact_division() {
        let a = IntPolynomial::from_i64(&[-1, 0, 1]);
        let b = IntPolynomial::from_i64(&[1, 1]);
        assert_eq!(a.div_exact(&b), Some(IntPolynomial::from_i64(&[-1, 1])));
        assert_eq!(a.div_exact(&IntPolynomial::from_i64(&[2, 1])), None);
    }

    #[test]
    fn sign_at_matches_eval() {
        let p = IntPolynomial::from_i64(&[1, -3, 1]);
        for (n, d) in [(0, 1), (1, 2), (5, 2), (13, 5), (-7, 3)] {
            let x = q(n, d);
            let v = p.eval(&x);
            let s = if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                0
            };
            assert_eq!(p.sign_at(&x), s);
        }
    }

    #[test]
    fn sturm_counts_distinct_roots() {
        // (x-1)^2 (x-3) has two distinct roots
        let p = IntPolynomial::from_i64(&[-1, 1])
            .mul(&IntPolynomial::from_i64(&[-1, 1]))
            .mul(&IntPolynomial::from_i64(&[-3, 1]));
        let s = SturmSequence::new(&p);
        assert_eq!(s.count(&q(-10, 1), &q(10, 1)), 2);
        assert_eq!(s.count(&q(0, 1), &q(2, 1)), 1);
        assert_eq!(s.count(&q(1, 1), &q(2, 1)), 0);
        assert_eq!(s.count(&q(2, 1), &q(3, 1)), 1);

        let fib = SturmSequence::new(&IntPolynomial::from_i64(&[1, -3, 1]));
        assert_eq!(fib.count(&q(0, 1), &q(1, 1)), 1);
        assert_eq!(fib.count(&q(2, 1), &q(3, 1)), 1);
        assert_eq!(fib.count(&q(1, 1), &q(2, 1)), 0);
    }

    #[test]
    fn strip_x_power() {
        let (q0, m) = IntPolynomial::from_i64(&[0, 0, -2, 1]).strip_x_power();
        assert_eq!((q0, m), (IntPolynomial::from_i64(&[-2, 1]), 2));
    }
}
