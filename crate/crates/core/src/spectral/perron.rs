use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::interval::{bits_for, rational_to_decimal, RationalInterval};
use super::poly::{char_poly, IntPolynomial, SturmSequence};
use super::SpectralError;
use crate::linalg::IntMatrix;
use crate::presentation::{adjacency_matrix, GraphPresentation};

/// Refinement rounds of the eigenvalue enclosure before giving up on a requested width.
const VECTOR_ATTEMPTS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerronData {
    pub lambda: RationalInterval,
    /// Right eigenvector, `Mv = λv`, `Σ v_i = 1`.
    pub v: Vec<RationalInterval>,
    /// Left eigenvector, `wᵀM = λwᵀ`, `Σ w_i = 1`.
    pub w: Vec<RationalInterval>,
    pub exact: bool,
}

impl PerronData {
    pub fn max_width(&self) -> BigRational {
        std::iter::once(&self.lambda)
            .chain(&self.v)
            .chain(&self.w)
            .map(RationalInterval::width)
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda.to_f64()
    }
}

fn row_sum_bounds(m: &IntMatrix) -> (BigInt, BigInt) {
    let sums: Vec<BigInt> = (0..m.rows()).map(|i| m.row(i).iter().sum()).collect();
    (
        sums.iter().min().cloned().unwrap_or_default(),
        sums.iter().max().cloned().unwrap_or_default(),
    )
}

fn check_perron_input(m: &IntMatrix) -> Result<(), SpectralError> {
    if !m.is_square() {
        return Err(SpectralError::NotSquare {
            shape: (m.rows(), m.cols()),
        });
    }
    if !m.is_nonnegative() {
        return Err(SpectralError::Negative);
    }
    if !m.is_irreducible() {
        return Err(SpectralError::Reducible);
    }
    Ok(())
}

fn check_eps(eps: &BigRational) -> Result<(), SpectralError> {
    if eps.is_positive() {
        Ok(())
    } else {
        Err(SpectralError::NonPositivePrecision)
    }
}

/// Bisection state for the largest real root; the root always lies in `(lo, hi]`.
#[derive(Debug, Clone)]
pub struct RootIsolator {
    poly: IntPolynomial,
    sturm: SturmSequence,
    lo: BigRational,
    hi: BigRational,
    exact: Option<BigRational>,
}

impl RootIsolator {
    /// Isolates the largest real root of `char_poly(m)` for nonnegative irreducible `m`.
    pub fn new(m: &IntMatrix) -> Result<Self, SpectralError> {
        check_perron_input(m)?;
        let poly = char_poly(m).expect("square checked");
        let sturm = SturmSequence::new(&poly);
        let (min_row, max_row) = row_sum_bounds(m);
        let lo = BigRational::from_integer(min_row.clone() - 1);
        let hi = BigRational::from_integer(max_row.clone() + 1);
        let mut iso = Self {
            poly,
            sturm,
            lo,
            hi,
            exact: None,
        };
        debug_assert!(iso.sturm.count(&iso.lo, &iso.hi) >= 1);
        iso.integer_fast_path(&min_row, &max_row);
        Ok(iso)
    }

    /// A rational root of a monic integer polynomial is an integer dividing the
    /// constant term (after stripping `x^m`); the Perron root lies between the row-sum bounds.
    fn integer_fast_path(&mut self, min_row: &BigInt, max_row: &BigInt) {
        let (q, _) = self.poly.strip_x_power();
        let c0 = q.coeff(0);
        let mut c = max_row.clone();
        while &c >= min_row {
            let divides = c.is_zero() || (c0.clone() % &c).is_zero();
            if divides && self.poly.eval_int(&c).is_zero() {
                let cr = BigRational::from_integer(c.clone());
                if self.sturm.count(&cr, &self.hi) == 0 {
                    self.set_exact(cr);
                }
                return;
            }
            c -= 1;
        }
    }

    fn set_exact(&mut self, x: BigRational) {
        self.lo = x.clone();
        self.hi = x.clone();
        self.exact = Some(x);
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn poly(&self) -> &IntPolynomial {
        &self.poly
    }

    pub fn sturm(&self) -> &SturmSequence {
        &self.sturm
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    /// Bisects until the enclosure is no wider than `eps`.
    pub fn refine(&mut self, eps: &BigRational) {
        let two = BigRational::from_integer(2.into());
        while self.exact.is_none() && &self.width() > eps {
            let mid = (&self.lo + &self.hi) / &two;
            if self.sturm.count(&mid, &self.hi) >= 1 {
                self.lo = mid;
            } else {
                if self.poly.sign_at(&mid) == 0 {
                    self.set_exact(mid);
                    return;
                }
                self.hi = mid;
            }
        }
    }

    pub fn interval(&self) -> RationalInterval {
        match &self.exact {
            Some(x) => RationalInterval::point(x.clone()),
            None => RationalInterval::new(self.lo.clone(), self.hi.clone()),
        }
    }
}

/// Enclosure of the Perron root of width `≤ eps`, exact when the root is an integer.
pub fn perron_root(m: &IntMatrix, eps: &BigRational) -> Result<RationalInterval, SpectralError> {
    check_eps(eps)?;
    let mut iso = RootIsolator::new(m)?;
    iso.refine(eps);
    Ok(iso.interval())
}

/// `true` iff the spectral radius of a nonnegative matrix exceeds 1, decided by a
/// Sturm count of real roots in `(1, max row sum + 1]`.
pub fn is_expanding(m: &IntMatrix) -> bool {
    let Ok(p) = char_poly(m) else {
        return false;
    };
    let (_, max_row) = row_sum_bounds(m);
    let upper = BigRational::from_integer(max_row.max(BigInt::one()) + 1);
    SturmSequence::new(&p).count(&BigRational::one(), &upper) > 0
}

/// Solves `(λI - M')u = M[1.., 0]` where `M'` drops the first row and column,
/// i.e. the Perron vector pinned at `v_0 = 1`. `λI - M'` is a nonsingular
/// M-matrix, so elimination needs no pivoting; returns `None` if a pivot
/// enclosure reaches zero.
fn pinned_solve(
    m: &IntMatrix,
    lam: &RationalInterval,
    bits: Option<u32>,
) -> Option<Vec<RationalInterval>> {
    let n = m.rows();
    let k = n - 1;
    let round = |x: RationalInterval| match bits {
        Some(b) => x.round_outward(b),
        None => x,
    };
    let ent =
        |i: usize, j: usize| RationalInterval::point(BigRational::from_integer(m[(i, j)].clone()));
    let mut a: Vec<Vec<RationalInterval>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let e = ent(i + 1, j + 1);
                    if i == j {
                        lam.sub(&e)
                    } else {
                        e.neg()
                    }
                })
                .collect()
        })
        .collect();
    let mut b: Vec<RationalInterval> = (0..k).map(|i| ent(i + 1, 0)).collect();

    for c in 0..k {
        if !a[c][c].lo().is_positive() {
            return None;
        }
        for r in c + 1..k {
            if a[r][c].is_point() && a[r][c].lo().is_zero() {
                continue;
            }
            let f = a[r][c].div(&a[c][c])?;
            for j in c + 1..k {
                let t = a[r][j].sub(&f.mul(&a[c][j]));
                a[r][j] = round(t);
            }
            let t = b[r].sub(&f.mul(&b[c]));
            b[r] = round(t);
            a[r][c] = RationalInterval::zero();
        }
    }
    let mut u = vec![RationalInterval::zero(); k];
    for r in (0..k).rev() {
        let mut acc = b[r].clone();
        for j in r + 1..k {
            acc = acc.sub(&a[r][j].mul(&u[j]));
        }
        u[r] = round(acc.div(&a[r][r])?);
    }
    Some(u)
}

fn normalized_vector(
    m: &IntMatrix,
    lam: &RationalInterval,
    bits: Option<u32>,
) -> Option<Vec<RationalInterval>> {
    let mut full = vec![RationalInterval::one()];
    full.extend(pinned_solve(m, lam, bits)?);
    let total = full
        .iter()
        .fold(RationalInterval::zero(), |acc, x| acc.add(x));
    full.iter()
        .map(|x| {
            let q = x.div(&total)?;
            Some(match bits {
                Some(b) => q.round_outward(b),
                None => q,
            })
        })
        .collect()
}

/// Right and left Perron vectors with `Σ = 1`, every enclosure of width `≤ eps`.
pub fn perron_vectors(m: &IntMatrix, eps: &BigRational) -> Result<PerronData, SpectralError> {
    check_eps(eps)?;
    let mut iso = RootIsolator::new(m)?;
    let mt = m.transpose();

    if iso.is_exact() {
        let lambda = iso.interval();
        let v = normalized_vector(m, &lambda, None).expect("exact M-matrix pivots are positive");
        let w = normalized_vector(&mt, &lambda, None).expect("exact M-matrix pivots are positive");
        return Ok(PerronData {
            lambda,
            v,
            w,
            exact: true,
        });
    }

    let bits = bits_for(eps) + 64;
    let mut lam_eps = eps / BigRational::from_integer(256.into());
    let shrink = BigRational::from_integer(BigInt::one() << 32u32);
    let mut achieved: Option<BigRational> = None;
    for _ in 0..VECTOR_ATTEMPTS {
        iso.refine(&lam_eps);
        let lambda = iso.interval();
        if let (Some(v), Some(w)) = (
            normalized_vector(m, &lambda, Some(bits)),
            normalized_vector(&mt, &lambda, Some(bits)),
        ) {
            let data = PerronData {
                exact: lambda.is_point(),
                lambda,
                v,
                w,
            };
            let width = data.max_width();
            if &width <= eps {
                return Ok(data);
            }
            achieved = Some(width);
        }
        lam_eps /= &shrink;
    }
    Err(SpectralError::Resource {
        requested: rational_to_decimal(eps, 3),
        achieved: achieved
            .map(|w| rational_to_decimal(&w, 3))
            .unwrap_or_else(|| "none".into()),
    })
}

/// Edge measures `μ₀(e_i) = v_i` for a presentation with irreducible expanding matrix.
pub fn edge_measures(
    p: &GraphPresentation,
    eps: &BigRational,
) -> Result<Vec<RationalInterval>, SpectralError> {
    let m = adjacency_matrix(p);
    if !is_expanding(&m) {
        return Err(SpectralError::NotExpanding);
    }
    Ok(perron_vectors(&m, eps)?.v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn mat(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    fn eps(k: usize) -> BigRational {
        BigRational::new(1.into(), num_traits::pow(BigInt::from(10), k))
    }

    #[test]
    fn scalar_roots_are_exact() {
        for n in 1..=10 {
            let r = perron_root(&mat(&[vec![n]]), &eps(12)).unwrap();
            assert_eq!(r, RationalInterval::from_integer(n));
        }
    }

    #[test]
    fn golden_square_enclosure() {
        let r = perron_root(&mat(&[vec![2, 1], vec![1, 1]]), &eps(12)).unwrap();
        assert!(r.width() <= eps(12));
        let approx = q(2_618_033_988_749_894, 1_000_000_000_000_000);
        assert!(r.overlaps_within(&RationalInterval::point(approx), &eps(14)));
        assert!(!r.is_point());
    }

    #[test]
    fn expansion() {
        assert!(is_expanding(&mat(&[vec![2, 1], vec![1, 1]])));
        assert!(!is_expanding(&mat(&[vec![1]])));
        assert!(!is_expanding(&mat(&[vec![0, 1], vec![1, 0]])));
        assert!(is_expanding(&mat(&[vec![0, 2], vec![1, 0]])));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            perron_root(&mat(&[vec![1, 1], vec![0, 1]]), &eps(3)),
            Err(SpectralError::Reducible)
        );
        assert_eq!(
            perron_root(&mat(&[vec![1, -1], vec![1, 1]]), &eps(3)),
            Err(SpectralError::Negative)
        );
        assert_eq!(
            perron_root(&mat(&[vec![1]]), &BigRational::zero()),
            Err(SpectralError::NonPositivePrecision)
        );
    }

    #[test]
    fn exact_vectors_for_rational_roots() {
        let d = perron_vectors(&mat(&[vec![1, 1], vec![1, 1]]), &eps(30)).unwrap();
        assert!(d.exact);
        assert_eq!(d.lambda, RationalInterval::from_integer(2));
        assert_eq!(d.v, vec![RationalInterval::point(q(1, 2)); 2]);
        assert_eq!(d.w, d.v);

        let d = perron_vectors(&mat(&[vec![4]]), &eps(30)).unwrap();
        assert_eq!(d.v, vec![RationalInterval::one()]);
    }

    #[test]
    fn golden_vectors() {
        let e = eps(30);
        let d = perron_vectors(&mat(&[vec![2, 1], vec![1, 1]]), &e).unwrap();
        assert!(!d.exact);
        assert!(d.max_width() <= e);
        // v = ((λ-1)/λ, 1/λ) ≈ (0.618..., 0.381...)
        let v0 = d.v[0].to_f64();
        assert!((v0 - 0.618_033_988_749_895).abs() < 1e-14);
        assert!(d.v[0].overlaps(&d.w[0]) && d.v[1].overlaps(&d.w[1]));
    }

    #[test]
    fn sqrt_two_vectors() {
        let d = perron_vectors(&mat(&[vec![0, 2], vec![1, 0]]), &eps(20)).unwrap();
        let s = 2f64.sqrt();
        assert!((d.lambda.to_f64() - s).abs() < 1e-15);
        assert!((d.v[0].to_f64() - s / (1.0 + s)).abs() < 1e-15);
        assert!((d.w[0].to_f64() - 1.0 / (1.0 + s)).abs() < 1e-15);
    }

    #[test]
    fn edge_measures_require_expansion() {
        let p = GraphPresentation::from_words(&["a"], &[&["a"]]).unwrap();
        assert_eq!(
            edge_measures(&p, &eps(10)),
            Err(SpectralError::NotExpanding)
        );
        let p = GraphPresentation::from_words(&["a", "b"], &[&["a", "b"], &["b", "a"]]).unwrap();
        assert_eq!(
            edge_measures(&p, &eps(10)).unwrap(),
            vec![RationalInterval::point(q(1, 2)); 2]
        );
    }
}
