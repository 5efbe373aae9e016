use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::orient::{check_orientable, Orientability, ParityWitness};
use super::{adjacency_matrix, GraphPresentation, Sign, Word, DEFAULT_WORD_CAP};
use crate::spectral::is_expanding;

pub const DEFAULT_NONFOLDING_BOUND: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Outgoing,
    Incoming,
}

/// A germ of an edge at the branch point: its start (`Outgoing`) or its end (`Incoming`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Direction {
    pub edge: usize,
    pub end: End,
}

impl Direction {
    fn index(self) -> usize {
        2 * self.edge + usize::from(self.end == End::Incoming)
    }

    fn from_index(i: usize) -> Self {
        Self {
            edge: i / 2,
            end: if i.is_multiple_of(2) {
                End::Outgoing
            } else {
                End::Incoming
            },
        }
    }

    pub fn format(&self, p: &GraphPresentation) -> String {
        let end = match self.end {
            End::Outgoing => "out",
            End::Incoming => "in",
        };
        format!("({},{end})", p.edge_name(self.edge))
    }
}

/// Action of `f` on the `2n` germs at the vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionMap {
    targets: Vec<usize>,
}

impl DirectionMap {
    pub fn apply(&self, d: Direction) -> Direction {
        Direction::from_index(self.targets[d.index()])
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &DirectionMap) -> DirectionMap {
        DirectionMap {
            targets: other.targets.iter().map(|&t| self.targets[t]).collect(),
        }
    }

    pub fn power(&self, k: usize) -> DirectionMap {
        let mut out = DirectionMap {
            targets: (0..self.targets.len()).collect(),
        };
        for _ in 0..k {
            out = self.compose(&out);
        }
        out
    }

    pub fn image(&self) -> BTreeSet<Direction> {
        self.targets
            .iter()
            .map(|&t| Direction::from_index(t))
            .collect()
    }

    pub fn pairs(&self) -> Vec<(Direction, Direction)> {
        self.targets
            .iter()
            .enumerate()
            .map(|(i, &t)| (Direction::from_index(i), Direction::from_index(t)))
            .collect()
    }
}

/// `(e, out)` goes to the germ of the first letter of `f(e)`, `(e, in)` to that of the last.
pub fn direction_map(p: &GraphPresentation) -> DirectionMap {
    let mut targets = Vec::with_capacity(2 * p.edge_count());
    for w in p.rule().words() {
        let first = w[0];
        let last = w[w.len() - 1];
        let start_of = |l: super::Letter| Direction {
            edge: l.edge,
            end: if l.sign == Sign::Plus {
                End::Outgoing
            } else {
                End::Incoming
            },
        };
        let end_of = |l: super::Letter| Direction {
            edge: l.edge,
            end: if l.sign == Sign::Plus {
                End::Incoming
            } else {
                End::Outgoing
            },
        };
        targets.push(start_of(first).index());
        targets.push(end_of(last).index());
    }
    DirectionMap { targets }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum OrientabilityVerdict {
    Yes { signs: Vec<i8> },
    No { witness: ParityWitness },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Flattening {
    /// Minimal `k` whose germ image has at most two elements.
    Yes {
        k: usize,
        image: Vec<Direction>,
        warning: Option<String>,
    },
    No {
        stable_image_size: usize,
    },
    Undecided {
        bound: usize,
    },
}

/// Adjacent `l l^{-1}` pairs in the word of `edge` under `f^iteration`; positions are 1-based
/// and name the first letter of each cancelling pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldWitness {
    pub iteration: usize,
    pub edge: usize,
    pub positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Nonfolding {
    /// `checked_up_to = None` when all letters are positive and no fold can occur.
    Yes {
        checked_up_to: Option<usize>,
    },
    Fails {
        witness: FoldWitness,
    },
    /// The word cap stopped the scan after `checked_up_to` iterations.
    Undecided {
        checked_up_to: usize,
        bound: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub orientable: OrientabilityVerdict,
    pub markov: bool,
    pub irreducible: bool,
    pub primitive: bool,
    pub flattening: Flattening,
    pub nonfolding: Nonfolding,
    pub expanding: bool,
}

impl AxiomReport {
    pub fn orientable(&self) -> bool {
        matches!(self.orientable, OrientabilityVerdict::Yes { .. })
    }

    /// Every axiom holds or was decided yes. Primitivity is reported separately.
    pub fn passes(&self) -> bool {
        self.orientable()
            && self.markov
            && self.irreducible
            && matches!(self.flattening, Flattening::Yes { .. })
            && matches!(self.nonfolding, Nonfolding::Yes { .. })
            && self.expanding
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let OrientabilityVerdict::No { witness } = &self.orientable {
            out.push(format!(
                "not orientable: parity conflict along {} constraint(s)",
                witness.cycle.len()
            ));
        }
        if !self.irreducible {
            out.push(
                "adjacency matrix is reducible (indecomposability/nonwandering proxy fails)".into(),
            );
        }
        match &self.flattening {
            Flattening::Yes { .. } => {}
            Flattening::No { stable_image_size } => out.push(format!(
                "flattening fails: {stable_image_size} germs survive at the vertex"
            )),
            Flattening::Undecided { bound } => {
                out.push(format!("flattening undecided up to k = {bound}"))
            }
        }
        match &self.nonfolding {
            Nonfolding::Yes { .. } => {}
            Nonfolding::Fails { witness } => out.push(format!(
                "folding: cancelling letters at positions {:?} of f^{}(edge #{})",
                witness.positions, witness.iteration, witness.edge
            )),
            Nonfolding::Undecided { checked_up_to, bound } => out.push(format!(
                "nonfolding undecided: checked {checked_up_to} of {bound} iterations before the word cap"
            )),
        }
        if !self.expanding {
            out.push("not expanding: Perron eigenvalue is 1".into());
        }
        out
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yn = |b: bool| if b { "yes" } else { "no" };
        writeln!(f, "orientable:   {}", yn(self.orientable()))?;
        writeln!(f, "markov:       {}", yn(self.markov))?;
        writeln!(f, "irreducible:  {}", yn(self.irreducible))?;
        writeln!(f, "primitive:    {}", yn(self.primitive))?;
        match &self.flattening {
            Flattening::Yes { k, .. } => writeln!(f, "flattening:   yes (k = {k})")?,
            Flattening::No { .. } => writeln!(f, "flattening:   no")?,
            Flattening::Undecided { bound } => {
                writeln!(f, "flattening:   undecided (k <= {bound})")?
            }
        }
        match &self.nonfolding {
            Nonfolding::Yes {
                checked_up_to: None,
            } => writeln!(f, "nonfolding:   yes (orientation preserving)")?,
            Nonfolding::Yes {
                checked_up_to: Some(b),
            } => writeln!(f, "nonfolding:   yes (checked to f^{b})")?,
            Nonfolding::Fails { witness } => writeln!(
                f,
                "nonfolding:   fails (f^{} of edge #{}, positions {:?})",
                witness.iteration, witness.edge, witness.positions
            )?,
            Nonfolding::Undecided { checked_up_to, .. } => {
                writeln!(f, "nonfolding:   undecided (checked to f^{checked_up_to})")?
            }
        }
        write!(f, "expanding:    {}", yn(self.expanding))
    }
}

fn flattening(p: &GraphPresentation) -> Flattening {
    let dm = direction_map(p);
    let limit = 2 * p.edge_count();
    let mut power = dm.clone();
    for k in 1..=limit {
        let image = power.image();
        if image.len() <= 2 {
            let warning = (image.len() == 1)
                .then(|| "eventual germ image is a single half-line germ".to_string());
            return Flattening::Yes {
                k,
                image: image.into_iter().collect(),
                warning,
            };
        }
        power = dm.compose(&power);
    }
    // images form a decreasing chain of subsets of 2n germs, so they are stable by now
    Flattening::No {
        stable_image_size: power.image().len(),
    }
}

fn cancelling_positions(word: &Word) -> Vec<usize> {
    word.windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].cancels(w[1]))
        .map(|(i, _)| i + 1)
        .collect()
}

fn nonfolding(p: &GraphPresentation, bound: usize, cap: usize) -> Nonfolding {
    if p.rule().all_positive() {
        return Nonfolding::Yes {
            checked_up_to: None,
        };
    }
    let base = p.rule();
    let mut words: Vec<Word> = base.words().to_vec();
    for j in 1..=bound {
        if j > 1 {
            match words
                .iter()
                .map(|w| base.substitute(w, cap))
                .collect::<Result<Vec<_>, _>>()
            {
                Ok(next) => words = next,
                Err(_) => {
                    return Nonfolding::Undecided {
                        checked_up_to: j - 1,
                        bound,
                    }
                }
            }
        }
        for (edge, w) in words.iter().enumerate() {
            let positions = cancelling_positions(w);
            if !positions.is_empty() {
                return Nonfolding::Fails {
                    witness: FoldWitness {
                        iteration: j,
                        edge,
                        positions,
                    },
                };
            }
        }
    }
    Nonfolding::Yes {
        checked_up_to: Some(bound),
    }
}

/// Runs every combinatorial axiom check. Non-orientable input is still
/// scanned (on its raw letters) so folding and expansion get reported.
pub fn check_axioms(p: &GraphPresentation, bound: usize) -> AxiomReport {
    check_axioms_with_cap(p, bound, DEFAULT_WORD_CAP)
}

pub fn check_axioms_with_cap(p: &GraphPresentation, bound: usize, cap: usize) -> AxiomReport {
    let (orientable, working) = match check_orientable(p) {
        Orientability::Orientable { signs, oriented } => (
            OrientabilityVerdict::Yes {
                signs: signs.iter().map(|s| s.as_i8()).collect(),
            },
            oriented,
        ),
        Orientability::NonOrientable { witness } => {
            (OrientabilityVerdict::No { witness }, p.clone())
        }
    };
    let m = adjacency_matrix(p);
    let irreducible = m.is_irreducible();
    AxiomReport {
        orientable,
        // the single vertex is fixed by construction
        markov: true,
        irreducible,
        primitive: m.is_primitive(),
        flattening: flattening(&working),
        nonfolding: nonfolding(&working, bound, cap),
        expanding: is_expanding(&m),
    }
}
