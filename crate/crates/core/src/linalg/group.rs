use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{smith_normal_form, IntMatrix, LinalgError};

/// Finitely generated abelian group `Z^r ⊕ Z/t_1 ⊕ ... ⊕ Z/t_k` in invariant-factor form.
///
/// Torsion coefficients are all `> 1` and satisfy `t_i | t_{i+1}`, so two
/// values are isomorphic exactly when they compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct FGAbelianGroup {
    free_rank: usize,
    torsion: Vec<BigUint>,
}

impl FGAbelianGroup {
    /// Validating constructor: torsion must already be an invariant-factor chain.
    pub fn new(free_rank: usize, torsion: Vec<BigUint>) -> Result<Self, LinalgError> {
        if let Some(t) = torsion.iter().find(|t| **t <= BigUint::one()) {
            return Err(LinalgError::InvalidGroup(format!(
                "torsion coefficient {t} must exceed 1"
            )));
        }
        if torsion.windows(2).any(|w| !(&w[1] % &w[0]).is_zero()) {
            return Err(LinalgError::InvalidGroup(
                "torsion coefficients must form a divisibility chain".into(),
            ));
        }
        Ok(Self { free_rank, torsion })
    }

    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn free(rank: usize) -> Self {
        Self {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    /// `Z/n`; `n = 0` gives `Z` and `n = 1` the trivial group.
    pub fn cyclic(n: u64) -> Self {
        Self::from_cyclic_orders(&[BigUint::from(n)])
    }

    /// Canonical form of `⊕ Z/n_i`, where an order of zero stands for a copy of `Z`.
    pub fn from_cyclic_orders(orders: &[BigUint]) -> Self {
        let free_rank = orders.iter().filter(|o| o.is_zero()).count();
        let finite: Vec<BigUint> = orders
            .iter()
            .filter(|o| **o > BigUint::one())
            .cloned()
            .collect();
        if finite.is_empty() {
            return Self::free(free_rank);
        }
        let k = finite.len();
        let mut diag = IntMatrix::zeros(k, k);
        for (i, o) in finite.iter().enumerate() {
            diag[(i, i)] = BigInt::from_biguint(Sign::Plus, o.clone());
        }
        let torsion = smith_normal_form(&diag)
            .diagonal()
            .into_iter()
            .filter_map(|d| d.to_biguint())
            .filter(|d| *d > BigUint::one())
            .collect();
        Self { free_rank, torsion }
    }

    /// `Z^rows / A Z^cols`.
    pub fn cokernel_of(a: &IntMatrix) -> Self {
        let s = smith_normal_form(a);
        let diag = s.diagonal();
        let zero_rows = a.rows() - diag.len();
        let mut orders: Vec<BigUint> = diag.iter().filter_map(BigInt::to_biguint).collect();
        orders.extend(std::iter::repeat_n(BigUint::zero(), zero_rows));
        Self::from_cyclic_orders(&orders)
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion(&self) -> &[BigUint] {
        &self.torsion
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Order of the group, `None` when infinite.
    pub fn order(&self) -> Option<BigUint> {
        (self.free_rank == 0).then(|| self.torsion.iter().product())
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut orders: Vec<BigUint> = self.torsion.iter().chain(&other.torsion).cloned().collect();
        orders.extend(std::iter::repeat_n(
            BigUint::zero(),
            self.free_rank + other.free_rank,
        ));
        Self::from_cyclic_orders(&orders)
    }

    /// `Hom(G, Z)`: the free part survives, torsion maps to zero.
    pub fn hom_to_z(&self) -> Self {
        Self::free(self.free_rank)
    }

    /// `Ext^1(G, Z)`: `Ext(Z/d, Z) = Z/d` and `Ext(Z, Z) = 0`.
    pub fn ext_to_z(&self) -> Self {
        Self {
            free_rank: 0,
            torsion: self.torsion.clone(),
        }
    }

    /// Isomorphism test; invariant factors are a complete invariant.
    pub fn iso_eq(&self, other: &Self) -> bool {
        self == other
    }
}

pub fn hom_to_z(g: &FGAbelianGroup) -> FGAbelianGroup {
    g.hom_to_z()
}

pub fn ext_to_z(g: &FGAbelianGroup) -> FGAbelianGroup {
    g.ext_to_z()
}

pub fn group_iso_eq(g: &FGAbelianGroup, h: &FGAbelianGroup) -> bool {
    g.iso_eq(h)
}

pub fn cokernel(a: &IntMatrix) -> Result<FGAbelianGroup, LinalgError> {
    a.require_square("cokernel")?;
    Ok(FGAbelianGroup::cokernel_of(a))
}

impl fmt::Display for FGAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TorsionEntry {
    Small(u64),
    Big(String),
}

#[derive(Serialize, Deserialize)]
struct GroupRepr {
    free_rank: usize,
    torsion: Vec<TorsionEntry>,
}

impl Serialize for FGAbelianGroup {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GroupRepr {
            free_rank: self.free_rank,
            torsion: self
                .torsion
                .iter()
                .map(|t| match t.to_u64() {
                    Some(x) => TorsionEntry::Small(x),
                    None => TorsionEntry::Big(t.to_string()),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FGAbelianGroup {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = GroupRepr::deserialize(deserializer)?;
        let torsion = repr
            .torsion
            .into_iter()
            .map(|t| match t {
                TorsionEntry::Small(x) => Ok(BigUint::from(x)),
                TorsionEntry::Big(s) => s.parse::<BigUint>().map_err(D::Error::custom),
            })
            .collect::<Result<Vec<_>, _>>()?;
        FGAbelianGroup::new(repr.free_rank, torsion).map_err(D::Error::custom)
    }
}
