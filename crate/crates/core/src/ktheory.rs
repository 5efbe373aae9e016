//! K-groups of the unstable and stable algebras and the two Ruelle algebras,
//! assembled from Smith-form data of `I - M` and the universal coefficient
//! route `K^*(A) = Hom(K_*(A), Z) ⊕ Ext(K_{*-1}(A), Z)`.
//!
//! Groups are reported up to isomorphism only; no splitting maps are chosen.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dimgroup::DimensionGroup;
use crate::linalg::{smith_normal_form, FGAbelianGroup, IntMatrix};
use crate::presentation::{
    adjacency_matrix, check_axioms, iterate_rule, AxiomReport, GraphPresentation,
    PresentationError, DEFAULT_NONFOLDING_BOUND, DEFAULT_WORD_CAP,
};
use crate::spectral::{
    char_poly, default_precision, perron_vectors, IntPolynomial, PerronData, SpectralError,
};

pub const DEFAULT_FILTRATION_DEPTH: usize = 6;

const ISOMORPHISM_NOTE: &str = "Matching K-groups of R_u and R_s is the computable shadow of the \
    isomorphism R_u ≅ R_s; that isomorphism rests on the classification of purely infinite, \
    simple, separable, stable, nuclear algebras in the UCT class and is not verified here.";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KTheoryError {
    #[error("axiom gate failed: {}", .0.join("; "))]
    AxiomGate(Vec<String>),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KGroups {
    #[serde(rename = "K0")]
    pub k0: FGAbelianGroup,
    #[serde(rename = "K1")]
    pub k1: FGAbelianGroup,
}

impl KGroups {
    pub fn iso_eq(&self, other: &Self) -> bool {
        self.k0.iso_eq(&other.k0) && self.k1.iso_eq(&other.k1)
    }
}

/// The abstract group of `lim(Z^n, g ↦ Mg)`. Restricted to the eventual range,
/// `M` acts as an `r × r` integer matrix whose characteristic polynomial is
/// `char_poly(M) / x^{n-r}`; the limit is `Z^r` iff that matrix is unimodular.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationaryLimit {
    pub n: usize,
    pub eventual_rank: usize,
    pub finitely_generated: bool,
    pub notation: String,
}

impl StationaryLimit {
    pub fn of(m: &IntMatrix) -> Self {
        let n = m.rows();
        let p = char_poly(m).expect("square matrix");
        let (q, _) = p.strip_x_power();
        let r = q.degree().unwrap_or(0);
        debug_assert_eq!(r, m.pow(n as u32).expect("square").rank());
        let c0 = q.coeff(0).abs();
        let finitely_generated = r == 0 || c0 == BigInt::from(1);
        let notation = if r == 0 {
            "0".to_string()
        } else if finitely_generated {
            power_notation(r)
        } else if r == 1 {
            // the restricted map is multiplication by the single nonzero eigenvalue
            format!("Z[1/{c0}]")
        } else {
            format!("lim(Z^{r}, M)")
        };
        Self {
            n,
            eventual_rank: r,
            finitely_generated,
            notation,
        }
    }
}

fn power_notation(r: usize) -> String {
    if r == 1 {
        "Z".into()
    } else {
        format!("Z^{r}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnstableKGroups {
    #[serde(rename = "K0")]
    pub k0: StationaryLimit,
    #[serde(rename = "K1")]
    pub k1: FGAbelianGroup,
}

/// `K_*` of the unstable algebra together with the ordered group `Δ_M` behind `K_0`.
#[derive(Debug, Clone)]
pub struct UnstableWithOrder {
    pub groups: UnstableKGroups,
    pub k0_order: DimensionGroup,
}

/// `K_0 = Z ⊕ coker(I - M)`, `K_1 = Z ⊕ Z^{dim ker(I - M)}`. Not gated.
pub fn ruelle_unstable_of_matrix(m: &IntMatrix) -> KGroups {
    let a = m.identity_minus().expect("square matrix");
    let z = FGAbelianGroup::free(1);
    let kernel_rank = a.rows() - smith_normal_form(&a).rank();
    KGroups {
        k0: z.direct_sum(&FGAbelianGroup::cokernel_of(&a)),
        k1: z.direct_sum(&FGAbelianGroup::free(kernel_rank)),
    }
}

/// Stable Ruelle groups from the unstable ones by the universal coefficient route:
/// `K_0(R_s) = Hom(K_1(R_u)) ⊕ Ext(K_0(R_u))`, `K_1(R_s) = Hom(K_0(R_u)) ⊕ Ext(K_1(R_u))`.
pub fn ruelle_stable_from_unstable(ru: &KGroups) -> KGroups {
    KGroups {
        k0: ru.k1.hom_to_z().direct_sum(&ru.k0.ext_to_z()),
        k1: ru.k0.hom_to_z().direct_sum(&ru.k1.ext_to_z()),
    }
}

/// Closed form for the stable Ruelle algebra, written independently of the
/// unstable side: `Z ⊕ coker(I - M)` and `Z ⊕ ker(I - M)`.
pub fn ruelle_stable_closed_form(m: &IntMatrix) -> KGroups {
    let a = m.identity_minus().expect("square matrix");
    let diag = smith_normal_form(&a).diagonal();
    let zeros = diag.iter().filter(|d| d.is_zero()).count() + (a.rows() - diag.len());
    let mut orders: Vec<num_bigint::BigUint> = diag
        .iter()
        .filter(|d| !d.is_zero())
        .filter_map(BigInt::to_biguint)
        .collect();
    orders.extend(std::iter::repeat_n(num_bigint::BigUint::zero(), zeros + 1));
    KGroups {
        k0: FGAbelianGroup::from_cyclic_orders(&orders),
        k1: FGAbelianGroup::free(zeros + 1),
    }
}

fn gate(p: &GraphPresentation, bound: usize) -> Result<AxiomReport, KTheoryError> {
    let report = check_axioms(p, bound);
    if report.passes() {
        Ok(report)
    } else {
        Err(KTheoryError::AxiomGate(report.failures()))
    }
}

pub fn k_unstable(
    p: &GraphPresentation,
    precision: &BigRational,
) -> Result<UnstableWithOrder, KTheoryError> {
    gate(p, DEFAULT_NONFOLDING_BOUND)?;
    let m = adjacency_matrix(p);
    Ok(UnstableWithOrder {
        groups: UnstableKGroups {
            k0: StationaryLimit::of(&m),
            k1: FGAbelianGroup::free(1),
        },
        k0_order: DimensionGroup::new(&m, precision)?,
    })
}

pub fn k_ruelle_unstable(p: &GraphPresentation) -> Result<KGroups, KTheoryError> {
    gate(p, DEFAULT_NONFOLDING_BOUND)?;
    Ok(ruelle_unstable_of_matrix(&adjacency_matrix(p)))
}

pub fn k_ruelle_stable(p: &GraphPresentation) -> Result<KGroups, KTheoryError> {
    gate(p, DEFAULT_NONFOLDING_BOUND)?;
    Ok(ruelle_stable_from_unstable(&ruelle_unstable_of_matrix(
        &adjacency_matrix(p),
    )))
}

/// Stage sizes `Σ_e |f^k(e)| = 𝟙ᵀ M^k 𝟙` for `k = 1..=depth`: the number of
/// length-`k` preimage branches, counted from matrix powers and cross-checked
/// against iterated word lengths while those stay under the word cap.
pub fn stable_filtration(p: &GraphPresentation, depth: usize) -> Result<Vec<BigInt>, KTheoryError> {
    let m = adjacency_matrix(p);
    let mut power = m.clone();
    let mut sizes = Vec::with_capacity(depth);
    for k in 1..=depth {
        if k > 1 {
            power = power.mul(&m).expect("square");
        }
        let total: BigInt = power.entries().iter().sum();
        if total <= BigInt::from(DEFAULT_WORD_CAP) {
            let words = iterate_rule(p, k, DEFAULT_WORD_CAP)?;
            let lengths: usize = words.words().iter().map(Vec::len).sum();
            assert_eq!(
                BigInt::from(lengths),
                total,
                "word lengths disagree with M^{k}"
            );
        }
        sizes.push(total);
    }
    Ok(sizes)
}

pub fn k_stable_filtration(
    p: &GraphPresentation,
    depth: usize,
) -> Result<Vec<BigInt>, KTheoryError> {
    gate(p, DEFAULT_NONFOLDING_BOUND)?;
    stable_filtration(p, depth)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportOptions {
    pub precision: BigRational,
    pub nonfolding_bound: usize,
    pub filtration_depth: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            precision: default_precision(),
            nonfolding_bound: DEFAULT_NONFOLDING_BOUND,
            filtration_depth: DEFAULT_FILTRATION_DEPTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KTheoryReport {
    pub presentation: GraphPresentation,
    pub axioms: AxiomReport,
    pub adjacency: IntMatrix,
    pub char_poly: IntPolynomial,
    pub perron: Option<PerronData>,
    #[serde(rename = "U")]
    pub unstable: Option<UnstableKGroups>,
    #[serde(rename = "Ru")]
    pub ruelle_unstable: Option<KGroups>,
    #[serde(rename = "Rs")]
    pub ruelle_stable: Option<KGroups>,
    #[serde(rename = "Rs_closed_form")]
    pub ruelle_stable_closed: Option<KGroups>,
    pub duality_check: Option<bool>,
    pub closed_form_check: Option<bool>,
    pub transpose_check: Option<bool>,
    pub stable_filtration: Option<Vec<String>>,
    pub diagnostics: Vec<String>,
    pub notes: Vec<String>,
}

impl KTheoryReport {
    pub fn gate_passed(&self) -> bool {
        self.axioms.passes()
    }
}

/// Runs every stage. Stages that depend only on the matrix still run when the
/// axiom gate fails; the K-theory sections are then skipped with a diagnostic.
pub fn full_report(p: &GraphPresentation, options: &ReportOptions) -> KTheoryReport {
    let axioms = check_axioms(p, options.nonfolding_bound);
    let m = adjacency_matrix(p);
    let cp = char_poly(&m).expect("adjacency matrices are square");
    let mut diagnostics = Vec::new();

    let perron = if m.is_irreducible() {
        match perron_vectors(&m, &options.precision) {
            Ok(d) => Some(d),
            Err(e) => {
                diagnostics.push(format!("perron: {e}"));
                None
            }
        }
    } else {
        diagnostics.push("perron: skipped, adjacency matrix is reducible".into());
        None
    };

    let mut report = KTheoryReport {
        presentation: p.clone(),
        axioms,
        adjacency: m.clone(),
        char_poly: cp,
        perron,
        unstable: None,
        ruelle_unstable: None,
        ruelle_stable: None,
        ruelle_stable_closed: None,
        duality_check: None,
        closed_form_check: None,
        transpose_check: None,
        stable_filtration: None,
        diagnostics,
        notes: vec![ISOMORPHISM_NOTE.to_string()],
    };

    if !report.axioms.passes() {
        for f in report.axioms.failures() {
            report.diagnostics.push(format!("axioms: {f}"));
        }
        report
            .diagnostics
            .push("ktheory: skipped, axiom gate failed".into());
        return report;
    }

    report.unstable = Some(UnstableKGroups {
        k0: StationaryLimit::of(&m),
        k1: FGAbelianGroup::free(1),
    });
    let ru = ruelle_unstable_of_matrix(&m);
    let rs = ruelle_stable_from_unstable(&ru);
    let closed = ruelle_stable_closed_form(&m);
    let mt = m.transpose();
    let ru_t = ruelle_unstable_of_matrix(&mt);
    let rs_t = ruelle_stable_from_unstable(&ru_t);

    report.duality_check = Some(ru.iso_eq(&rs));
    report.closed_form_check = Some(rs.iso_eq(&closed));
    report.transpose_check = Some(ru.iso_eq(&ru_t) && rs.iso_eq(&rs_t));
    report.ruelle_unstable = Some(ru);
    report.ruelle_stable = Some(rs);
    report.ruelle_stable_closed = Some(closed);
    report.notes.push(
        "Cokernel and kernel of I - M and of I - Mᵀ have the same invariant factors, so the \
         choice of connecting map g ↦ Mg versus g ↦ Mᵀg does not affect the groups."
            .into(),
    );

    match stable_filtration(p, options.filtration_depth) {
        Ok(sizes) => report.stable_filtration = Some(sizes.iter().map(|s| s.to_string()).collect()),
        Err(e) => report.diagnostics.push(format!("stable filtration: {e}")),
    }
    report
}
