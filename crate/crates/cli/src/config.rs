use std::fmt;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use solk_core::dimgroup::DEFAULT_POSITIVITY_BOUND;
use solk_core::linalg::IntMatrix;
use solk_core::presentation::{parse_presentation, GraphPresentation, DEFAULT_NONFOLDING_BOUND};
use solk_core::smale::DEFAULT_SMALE_DEPTH;
use solk_core::spectral::parse_rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    Text,
    Json,
}

/// Resolved options shared by every subcommand. `precision > 0`, bounds `≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub precision: BigRational,
    pub nonfolding_bound: usize,
    pub positivity_bound: usize,
    pub smale_depth: usize,
    pub output: Output,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            precision: solk_core::spectral::default_precision(),
            nonfolding_bound: DEFAULT_NONFOLDING_BOUND,
            positivity_bound: DEFAULT_POSITIVITY_BOUND,
            smale_depth: DEFAULT_SMALE_DEPTH,
            output: Output::Text,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        if !self.precision.is_positive() {
            return Err(Failure::Usage("precision must be positive".into()));
        }
        if self.nonfolding_bound == 0 || self.positivity_bound == 0 || self.smale_depth == 0 {
            return Err(Failure::Usage("bounds and depth must be at least 1".into()));
        }
        Ok(())
    }

    pub fn json(&self) -> bool {
        self.output == Output::Json
    }
}

/// Hard failures. Exit 4 (a cross-check disagreed) is reported through a normal outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Usage(String),
    Axiom(String),
    Resource(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Axiom(_) => 2,
            Failure::Resource(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Axiom(m) | Failure::Resource(m) => write!(f, "{m}"),
        }
    }
}

pub fn parse_precision(s: &str) -> Result<BigRational, Failure> {
    parse_rational(s.trim()).ok_or_else(|| Failure::Usage(format!("cannot parse precision `{s}`")))
}

pub fn load_presentation(path: &Path) -> Result<GraphPresentation, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_presentation(&text).map_err(|e| Failure::Usage(format!("{}:{e}", path.display())))
}

/// A single file, or the sorted `*.sol` files of a directory.
pub fn inputs(path: &Path) -> Result<Vec<PathBuf>, Failure> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "sol"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::Usage(format!("{}: no .sol files", path.display())));
    }
    Ok(files)
}

/// Integer vector from `1,0`, `1 0`, `(1, 0)` or `[1,0]`.
pub fn parse_vector(s: &str) -> Result<Vec<BigInt>, Failure> {
    let inner = s
        .trim()
        .trim_start_matches(['(', '['])
        .trim_end_matches([')', ']']);
    inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<BigInt>()
                .map_err(|_| Failure::Usage(format!("bad vector entry `{t}`")))
        })
        .collect()
}

/// Square matrix from `[[2,1],[1,1]]` or `2,1;1,1`.
pub fn parse_matrix(s: &str) -> Result<IntMatrix, Failure> {
    let t = s.trim();
    let rows: Vec<Vec<BigInt>> = if t.starts_with("[[") {
        let v: Vec<Vec<serde_json::Value>> = serde_json::from_str(t)
            .map_err(|e| Failure::Usage(format!("bad matrix `{s}`: {e}")))?;
        v.into_iter()
            .map(|r| {
                r.iter()
                    .map(|x| parse_vector(&x.to_string()).map(|v| v[0].clone()))
                    .collect()
            })
            .collect::<Result<_, _>>()?
    } else {
        t.trim_start_matches('[')
            .trim_end_matches(']')
            .split(';')
            .map(parse_vector)
            .collect::<Result<_, _>>()?
    };
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Failure::Usage(format!("matrix `{s}` is not square")));
    }
    Ok(IntMatrix::new(n, n, rows.into_iter().flatten().collect()).expect("shape checked"))
}
