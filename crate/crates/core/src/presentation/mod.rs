//! Elementary graph presentations `(X, f)`: a wedge of circles whose single
//! vertex is fixed, together with the wrapping rule that records, edge by
//! edge, the signed word traversed by the image of that edge.

mod axioms;
mod orient;
mod parse;

pub use axioms::{
    check_axioms, check_axioms_with_cap, direction_map, AxiomReport, Direction, DirectionMap, End,
    Flattening, FoldWitness, Nonfolding, OrientabilityVerdict, DEFAULT_NONFOLDING_BOUND,
};
pub use orient::{check_orientable, Orientability, ParityConstraint, ParityWitness};
pub use parse::{parse_presentation, ParseError, ParseErrorKind};

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::linalg::IntMatrix;

/// Default cap on the length of any single iterated word.
pub const DEFAULT_WORD_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// One traversal of an edge, forwards or backwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub edge: usize,
    pub sign: Sign,
}

impl Letter {
    pub fn new(edge: usize, sign: Sign) -> Self {
        Self { edge, sign }
    }

    pub fn pos(edge: usize) -> Self {
        Self::new(edge, Sign::Plus)
    }

    pub fn inverse(self) -> Self {
        Self::new(self.edge, self.sign.flip())
    }

    pub fn cancels(self, next: Letter) -> bool {
        self.edge == next.edge && self.sign != next.sign
    }
}

pub type Word = Vec<Letter>;

/// Image of a word under the reversal `w -> w^{-1}`.
pub fn inverse_word(word: &[Letter]) -> Word {
    word.iter().rev().map(|l| l.inverse()).collect()
}

/// The words `f(e_1), ..., f(e_n)` in edge declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WrappingRule {
    words: Vec<Word>,
}

impl WrappingRule {
    pub fn new(words: Vec<Word>) -> Result<Self, PresentationError> {
        let n = words.len();
        if n == 0 {
            return Err(PresentationError::NoEdges);
        }
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() {
                return Err(PresentationError::EmptyWord(i));
            }
            if let Some(l) = w.iter().find(|l| l.edge >= n) {
                return Err(PresentationError::UnknownEdge(l.edge));
            }
        }
        Ok(Self { words })
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn word(&self, edge: usize) -> &[Letter] {
        &self.words[edge]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn all_positive(&self) -> bool {
        self.words.iter().flatten().all(|l| l.sign == Sign::Plus)
    }

    /// Applies the rule letter by letter to `word`; negative letters pick up the inverse image.
    pub fn substitute(&self, word: &[Letter], cap: usize) -> Result<Word, PresentationError> {
        let len: usize = word.iter().map(|l| self.words[l.edge].len()).sum();
        if len > cap {
            return Err(PresentationError::WordTooLong { length: len, cap });
        }
        let mut out = Vec::with_capacity(len);
        for l in word {
            match l.sign {
                Sign::Plus => out.extend_from_slice(&self.words[l.edge]),
                Sign::Minus => out.extend(inverse_word(&self.words[l.edge])),
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraphPresentation {
    edges: Vec<String>,
    rule: WrappingRule,
}

impl GraphPresentation {
    pub fn new(edges: Vec<String>, rule: WrappingRule) -> Result<Self, PresentationError> {
        if edges.is_empty() {
            return Err(PresentationError::NoEdges);
        }
        if edges.len() != rule.len() {
            return Err(PresentationError::RuleCount {
                edges: edges.len(),
                words: rule.len(),
            });
        }
        for (i, e) in edges.iter().enumerate() {
            if edges[..i].contains(e) {
                return Err(PresentationError::DuplicateEdge(e.clone()));
            }
        }
        Ok(Self { edges, rule })
    }

    /// Builds a presentation from edge names and words spelled with names (`~name` for a reversed letter).
    pub fn from_words(edges: &[&str], words: &[&[&str]]) -> Result<Self, PresentationError> {
        let names: Vec<String> = edges.iter().map(|s| s.to_string()).collect();
        let idx = |name: &str| {
            let (sign, bare) = match name.strip_prefix('~') {
                Some(rest) => (Sign::Minus, rest),
                None => (Sign::Plus, name),
            };
            names
                .iter()
                .position(|n| n == bare)
                .map(|e| Letter::new(e, sign))
                .ok_or_else(|| PresentationError::UndeclaredName(bare.to_string()))
        };
        let words = words
            .iter()
            .map(|w| w.iter().map(|s| idx(s)).collect::<Result<Word, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(names, WrappingRule::new(words)?)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[String] {
        &self.edges
    }

    pub fn edge_name(&self, edge: usize) -> &str {
        &self.edges[edge]
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e == name)
    }

    pub fn rule(&self) -> &WrappingRule {
        &self.rule
    }

    pub fn with_rule(&self, rule: WrappingRule) -> Result<Self, PresentationError> {
        Self::new(self.edges.clone(), rule)
    }

    pub fn format_letter(&self, l: Letter) -> String {
        match l.sign {
            Sign::Plus => self.edges[l.edge].clone(),
            Sign::Minus => format!("~{}", self.edges[l.edge]),
        }
    }

    pub fn format_word(&self, word: &[Letter]) -> String {
        word.iter()
            .map(|&l| self.format_letter(l))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Renders the presentation in the input file format.
    pub fn to_source(&self) -> String {
        let mut out = format!("edges: {}\n", self.edges.join(" "));
        for (e, w) in self.edges.iter().zip(self.rule.words()) {
            out.push_str(&format!("{e} -> {}\n", self.format_word(w)));
        }
        out
    }
}

impl fmt::Display for GraphPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .edges
            .iter()
            .zip(self.rule.words())
            .map(|(e, w)| format!("{e} -> {}", self.format_word(w)))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

#[derive(Serialize, Deserialize)]
struct PresentationRepr {
    edges: Vec<String>,
    words: Vec<String>,
}

impl Serialize for GraphPresentation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PresentationRepr {
            edges: self.edges.clone(),
            words: self
                .rule
                .words()
                .iter()
                .map(|w| self.format_word(w))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GraphPresentation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = PresentationRepr::deserialize(deserializer)?;
        if repr.edges.len() != repr.words.len() {
            return Err(D::Error::custom("edges and words differ in length"));
        }
        let mut src = format!("edges: {}\n", repr.edges.join(" "));
        for (e, w) in repr.edges.iter().zip(&repr.words) {
            src.push_str(&format!("{e} -> {w}\n"));
        }
        parse_presentation(&src).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("a presentation needs at least one edge")]
    NoEdges,
    #[error("edge #{0} has an empty word")]
    EmptyWord(usize),
    #[error("letter refers to unknown edge #{0}")]
    UnknownEdge(usize),
    #[error("undeclared edge `{0}`")]
    UndeclaredName(String),
    #[error("duplicate edge `{0}`")]
    DuplicateEdge(String),
    #[error("{edges} edges but {words} words")]
    RuleCount { edges: usize, words: usize },
    #[error("iterated word length {length} exceeds the cap of {cap} letters")]
    WordTooLong { length: usize, cap: usize },
}

/// `M(i, k)` = number of occurrences of edge `k` (either sign) in the word of edge `i`.
pub fn adjacency_matrix(p: &GraphPresentation) -> IntMatrix {
    let n = p.edge_count();
    let mut m = IntMatrix::zeros(n, n);
    for (i, w) in p.rule().words().iter().enumerate() {
        for l in w {
            m[(i, l.edge)] += BigInt::from(1);
        }
    }
    m
}

/// Wrapping rule of `f^k`.
pub fn iterate_rule(
    p: &GraphPresentation,
    k: usize,
    cap: usize,
) -> Result<WrappingRule, PresentationError> {
    assert!(k >= 1, "iteration count must be positive");
    let base = p.rule();
    let mut words: Vec<Word> = base.words().to_vec();
    for _ in 1..k {
        words = words
            .iter()
            .map(|w| base.substitute(w, cap))
            .collect::<Result<_, _>>()?;
    }
    WrappingRule::new(words)
}
