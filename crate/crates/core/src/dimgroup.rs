//! The stationary dimension group `Δ_M = lim(Z^n, g ↦ Mg)`: equality in the
//! limit, the positive cone, the automorphism `δ_M` and the unique state.
//!
//! An element `[g, k]` is the vector `g` placed at stage `k`; `[g, k] = [Mg, k+1]`.
//! The state is `λ^{-k} ⟨w, g⟩` with the left Perron vector `w`, `Σ w_i = 1`,
//! which is the normalization that makes it constant along the connecting maps.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::{IntMatrix, IntVector};
use crate::spectral::{
    perron_vectors, rational_string, PerronData, RationalInterval, SpectralError,
};

pub const DEFAULT_POSITIVITY_BOUND: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionGroup {
    n: usize,
    matrix: IntMatrix,
    perron: PerronData,
    /// The Perron sign decides positivity only for primitive `M`.
    primitive: bool,
    #[serde(with = "rational_string")]
    precision: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DGElement {
    #[serde(with = "vector_strings")]
    pub vector: IntVector,
    pub stage: usize,
}

mod vector_strings {
    use num_bigint::BigInt;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|_| D::Error::custom(format!("bad integer `{s}`")))
            })
            .collect()
    }
}

impl DGElement {
    pub fn new(vector: IntVector, stage: usize) -> Self {
        Self { vector, stage }
    }

    pub fn from_i64(vector: &[i64], stage: usize) -> Self {
        Self::new(vector.iter().map(|&x| BigInt::from(x)).collect(), stage)
    }

    pub fn is_zero_vector(&self) -> bool {
        self.vector.iter().all(Zero::is_zero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "value", rename_all = "lowercase")]
pub enum Positivity {
    Positive,
    Negative,
    Zero,
    Undecided { bound: usize },
}

impl Positivity {
    pub fn is_decided(&self) -> bool {
        !matches!(self, Positivity::Undecided { .. })
    }
}

fn nonneg_nonzero(v: &[BigInt]) -> bool {
    v.iter().all(|x| !x.is_negative()) && v.iter().any(|x| x.is_positive())
}

fn nonpos_nonzero(v: &[BigInt]) -> bool {
    v.iter().all(|x| !x.is_positive()) && v.iter().any(|x| x.is_negative())
}

impl DimensionGroup {
    /// Requires `m` square, nonnegative and irreducible.
    pub fn new(m: &IntMatrix, precision: &BigRational) -> Result<Self, SpectralError> {
        let perron = perron_vectors(m, precision)?;
        Ok(Self {
            n: m.rows(),
            matrix: m.clone(),
            perron,
            primitive: m.is_primitive(),
            precision: precision.clone(),
        })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn perron(&self) -> &PerronData {
        &self.perron
    }

    pub fn precision(&self) -> &BigRational {
        &self.precision
    }

    /// Class of the all-ones vector at stage 0; its state is 1.
    pub fn unit(&self) -> DGElement {
        DGElement::new(vec![BigInt::from(1); self.n], 0)
    }

    pub fn zero(&self) -> DGElement {
        DGElement::new(vec![BigInt::zero(); self.n], 0)
    }

    fn check(&self, a: &DGElement) {
        assert_eq!(
            a.vector.len(),
            self.n,
            "element length does not match the group rank"
        );
    }

    fn apply_power(&self, g: &[BigInt], k: usize) -> IntVector {
        let mut out = g.to_vec();
        for _ in 0..k {
            out = self.matrix.mul_vec(&out).expect("length checked");
        }
        out
    }

    /// `[g, k] ↦ [Mg, k+1]`, the same class.
    pub fn connect(&self, a: &DGElement) -> DGElement {
        self.check(a);
        DGElement::new(self.apply_power(&a.vector, 1), a.stage + 1)
    }

    /// Both elements moved to stage `max(j, k) + n`, where the eventual kernel of `M` has stabilized.
    pub fn equal(&self, a: &DGElement, b: &DGElement) -> bool {
        self.check(a);
        self.check(b);
        let m = a.stage.max(b.stage) + self.n;
        self.apply_power(&a.vector, m - a.stage) == self.apply_power(&b.vector, m - b.stage)
    }

    /// Common-stage sum.
    pub fn add(&self, a: &DGElement, b: &DGElement) -> DGElement {
        self.check(a);
        self.check(b);
        let m = a.stage.max(b.stage);
        let ga = self.apply_power(&a.vector, m - a.stage);
        let gb = self.apply_power(&b.vector, m - b.stage);
        DGElement::new(ga.iter().zip(&gb).map(|(x, y)| x + y).collect(), m)
    }

    pub fn neg(&self, a: &DGElement) -> DGElement {
        DGElement::new(a.vector.iter().map(|x| -x).collect(), a.stage)
    }

    /// `δ_M^power`: `(M^p g, k)` for `p ≥ 0`, `(g, k + |p|)` for `p < 0`.
    pub fn delta_apply(&self, a: &DGElement, power: i64) -> DGElement {
        self.check(a);
        if power >= 0 {
            DGElement::new(self.apply_power(&a.vector, power as usize), a.stage)
        } else {
            DGElement::new(a.vector.clone(), a.stage + power.unsigned_abs() as usize)
        }
    }

    fn pairing(&self, g: &[BigInt], w: &[RationalInterval]) -> RationalInterval {
        g.iter()
            .zip(w)
            .filter(|(x, _)| !x.is_zero())
            .fold(RationalInterval::zero(), |acc, (x, wi)| {
                acc.add(&wi.scale_int(x))
            })
    }

    /// For primitive `M` the sign of the Perron functional decides; otherwise,
    /// or when that enclosure straddles zero, `M^j g` is searched for `j ≤ j_max`.
    pub fn positive(&self, a: &DGElement, j_max: usize) -> Positivity {
        self.check(a);
        if a.is_zero_vector() {
            return Positivity::Zero;
        }
        if self.primitive {
            match self.pairing(&a.vector, &self.perron.w).sign() {
                Some(Ordering::Greater) => return Positivity::Positive,
                Some(Ordering::Less) => return Positivity::Negative,
                _ => {}
            }
        }
        let mut h = a.vector.clone();
        for j in 0..=j_max {
            if j > 0 {
                h = self.apply_power(&h, 1);
            }
            if nonneg_nonzero(&h) {
                return Positivity::Positive;
            }
            if nonpos_nonzero(&h) {
                return Positivity::Negative;
            }
            if h.iter().all(Zero::is_zero) {
                return Positivity::Zero;
            }
        }
        if self.equal(a, &self.zero()) {
            Positivity::Zero
        } else {
            Positivity::Undecided { bound: j_max }
        }
    }

    fn state_with(&self, a: &DGElement, perron: &PerronData) -> RationalInterval {
        let pairing = self.pairing(&a.vector, &perron.w);
        if a.stage == 0 || pairing.sign() == Some(Ordering::Equal) {
            return pairing;
        }
        let inv = perron.lambda.recip().expect("Perron root is positive");
        pairing.mul(&inv.pow_positive(a.stage as u32))
    }

    /// `λ^{-k} ⟨w, g⟩`, enclosed to width at most the group's precision.
    pub fn state(&self, a: &DGElement) -> Result<RationalInterval, SpectralError> {
        self.check(a);
        let value = self.state_with(a, &self.perron);
        if value.width() <= self.precision {
            return Ok(value);
        }
        // tighten the eigendata in proportion to the size of g and the stage
        let mass: BigInt = a.vector.iter().map(|x| x.abs()).sum::<BigInt>() + 1;
        let factor = BigRational::from_integer(mass * BigInt::from(4 * (a.stage + 1)));
        let finer = perron_vectors(&self.matrix, &(&self.precision / factor))?;
        let value = self.state_with(a, &finer);
        if value.width() <= self.precision {
            Ok(value)
        } else {
            Err(SpectralError::Resource {
                requested: crate::spectral::rational_to_decimal(&self.precision, 3),
                achieved: crate::spectral::rational_to_decimal(&value.width(), 3),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(rows: &[Vec<i64>]) -> DimensionGroup {
        let eps = BigRational::new(1.into(), num_traits::pow(BigInt::from(10), 30));
        DimensionGroup::new(&IntMatrix::from_rows(rows), &eps).unwrap()
    }

    fn el(v: &[i64], k: usize) -> DGElement {
        DGElement::from_i64(v, k)
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn connecting_map() {
        let g = group(&[vec![2, 1], vec![1, 1]]);
        assert_eq!(g.connect(&el(&[1, 0], 0)), el(&[2, 1], 1));
        assert_eq!(g.connect(&el(&[0, 0], 3)), el(&[0, 0], 4));
        let s = group(&[vec![5]]);
        assert_eq!(s.connect(&el(&[1], 2)), el(&[5], 3));
    }

    #[test]
    fn equality_in_the_limit() {
        let g = group(&[vec![2, 1], vec![1, 1]]);
        let a = el(&[3, -1], 2);
        assert!(g.equal(&a, &g.connect(&a)));
        assert!(!g.equal(&el(&[1, 0], 0), &el(&[0, 1], 0)));
        let s = group(&[vec![1, 1], vec![1, 1]]);
        assert!(s.equal(&el(&[1, -1], 0), &el(&[0, 0], 0)));
    }

    #[test]
    fn positivity_examples() {
        let g = group(&[vec![2, 1], vec![1, 1]]);
        assert_eq!(g.positive(&el(&[1, -1], 0), 64), Positivity::Positive);
        assert_eq!(g.positive(&el(&[-1, -1], 0), 64), Positivity::Negative);
        assert_eq!(g.positive(&el(&[1, -2], 0), 64), Positivity::Negative);
        assert_eq!(g.positive(&el(&[0, 0], 5), 64), Positivity::Zero);
        let s = group(&[vec![1, 1], vec![1, 1]]);
        // killed by M, so the class is zero even though the vector is not
        assert_eq!(s.positive(&el(&[2, -2], 0), 64), Positivity::Zero);
        // period 2: a positive Perron pairing does not make (2,-1) positive
        let p = group(&[vec![0, 2], vec![2, 0]]);
        assert_eq!(
            p.positive(&el(&[2, -1], 0), 64),
            Positivity::Undecided { bound: 64 }
        );
        assert_eq!(p.positive(&el(&[1, 0], 0), 64), Positivity::Positive);
    }

    #[test]
    fn delta_and_inverse() {
        let g = group(&[vec![2, 1], vec![1, 1]]);
        let a = el(&[1, 0], 0);
        assert_eq!(g.delta_apply(&a, 0), a);
        assert_eq!(g.delta_apply(&a, 1), el(&[2, 1], 0));
        let back = g.delta_apply(&g.delta_apply(&a, 3), -3);
        assert!(g.equal(&back, &a));
    }

    #[test]
    fn states() {
        let s = group(&[vec![2]]);
        for k in 0..6 {
            let v = s.state(&el(&[1], k)).unwrap();
            assert_eq!(v, RationalInterval::point(q(1, 1 << k)));
        }
        let t = group(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(
            t.state(&el(&[1, 0], 0)).unwrap(),
            RationalInterval::point(q(1, 2))
        );

        let g = group(&[vec![2, 1], vec![1, 1]]);
        let unit = g.state(&g.unit()).unwrap();
        assert!(unit.contains(&q(1, 1)));
        let a = el(&[3, -7], 4);
        let x = g.state(&a).unwrap();
        let y = g.state(&g.connect(&a)).unwrap();
        assert!(x.overlaps_within(&y, &(g.precision() * BigRational::from_integer(2.into()))));
        // (λ-1)/λ for the first basis vector
        assert!(
            (g.state(&el(&[1, 0], 0)).unwrap().to_f64() - 0.618_033_988_749_894_8).abs() < 1e-15
        );
    }

    #[test]
    fn serde_shapes() {
        let s = serde_json::to_string(&el(&[1, -2], 3)).unwrap();
        assert_eq!(s, r#"{"vector":["1","-2"],"stage":3}"#);
        let p = serde_json::to_string(&Positivity::Undecided { bound: 64 }).unwrap();
        assert_eq!(p, r#"{"value":"undecided","bound":64}"#);
    }
}
