//! Numerical model of the solenoid as a Smale space.
//!
//! Each edge `e_i` is an interval `[0, v_i)` in measure coordinates (`v` the
//! right Perron vector), the branch point is position 0 of every edge, and
//! `f` is piecewise linear with slope `λ`: letter `j` of the word of `e_i`
//! covers `[c_ij, c_ij + v_target/λ)` where `c_ij` is the sum of the earlier
//! letters' lengths. Points of the inverse limit are truncated to
//! `(x_0, …, x_N)` with `f(x_{k+1}) = x_k`.

mod checks;
mod ddouble;

pub use checks::{
    contraction_from_sample, run_smale_checks, sample_near, sample_point, sample_stable_partner,
    IdentityStats, SmaleCheckOptions, SmaleCheckReport,
};
pub use ddouble::DD;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presentation::{adjacency_matrix, check_orientable, GraphPresentation, Orientability};
use crate::spectral::{is_expanding, perron_vectors, SpectralError};

pub const DEFAULT_SMALE_DEPTH: usize = 30;
pub const CONSISTENCY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmaleError {
    #[error("presentation is not orientable")]
    NotOrientable,
    #[error("presentation is not expanding")]
    NotExpanding,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("depth mismatch: {0} vs {1}")]
    DepthMismatch(usize, usize),
    #[error("backward shift needs depth at least 1")]
    BackwardAtDepthZero,
    #[error("points too far apart for the bracket: distance up to {distance} exceeds {limit}")]
    TooFar { distance: String, limit: String },
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("bad coordinate `{0}`")]
    BadCoordinate(String),
    #[error("inconsistent point: f(x_{index}) differs from x_{prev} by {gap:e}", prev = .index - 1)]
    Inconsistent { index: usize, gap: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPoint {
    pub edge: usize,
    pub pos: DD,
}

impl GraphPoint {
    pub fn new(edge: usize, pos: DD) -> Self {
        Self { edge, pos }
    }

    pub fn is_vertex(&self) -> bool {
        self.pos.is_zero()
    }
}

/// Image of a point under `f`, with a flag when it sits on a subdivision boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Image {
    pub point: GraphPoint,
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolenoidPoint {
    coords: Vec<GraphPoint>,
}

impl SolenoidPoint {
    pub fn coords(&self) -> &[GraphPoint] {
        &self.coords
    }

    pub fn depth(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn head(&self) -> GraphPoint {
        self.coords[0]
    }

    pub fn truncate(&self, depth: usize) -> SolenoidPoint {
        SolenoidPoint {
            coords: self.coords[..=depth.min(self.depth())].to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftDirection {
    Forward,
    Backward,
}

/// Enclosure `[head, head + tail]` of the series metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue {
    pub head: DD,
    pub tail: DD,
}

impl MetricValue {
    pub fn lo(&self) -> DD {
        self.head
    }

    pub fn hi(&self) -> DD {
        self.head + self.tail
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BracketResult {
    pub point: SolenoidPoint,
    pub certified_depth: usize,
    /// Set when certification stopped before full depth.
    pub diagnostic: Option<String>,
}

impl BracketResult {
    pub fn fully_certified(&self) -> bool {
        self.diagnostic.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoordRepr {
    pub edge: String,
    pub pos: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointRepr {
    pub coords: Vec<CoordRepr>,
    pub depth: usize,
}

#[derive(Debug, Clone)]
pub struct SolenoidModel {
    presentation: GraphPresentation,
    targets: Vec<Vec<usize>>,
    starts: Vec<Vec<DD>>,
    lengths: Vec<DD>,
    lambda: DD,
    inv_lambda: DD,
    diam: DD,
}

impl SolenoidModel {
    /// Builds the model on the oriented form of `p`; needs orientable,
    /// irreducible and expanding input.
    pub fn new(p: &GraphPresentation, precision: &BigRational) -> Result<Self, SmaleError> {
        let oriented = match check_orientable(p) {
            Orientability::Orientable { oriented, .. } => oriented,
            Orientability::NonOrientable { .. } => return Err(SmaleError::NotOrientable),
        };
        let m = adjacency_matrix(&oriented);
        if !is_expanding(&m) {
            return Err(SmaleError::NotExpanding);
        }
        let perron = perron_vectors(&m, precision)?;
        let lambda = DD::from_rational(&perron.lambda.midpoint());
        let inv_lambda = lambda.recip();
        let lengths: Vec<DD> = perron
            .v
            .iter()
            .map(|v| DD::from_rational(&v.midpoint()))
            .collect();
        let mut targets = Vec::new();
        let mut starts = Vec::new();
        for w in oriented.rule().words() {
            let mut acc = DD::ZERO;
            let mut st = Vec::with_capacity(w.len());
            for l in w {
                st.push(acc);
                acc = acc + lengths[l.edge] * inv_lambda;
            }
            targets.push(w.iter().map(|l| l.edge).collect());
            starts.push(st);
        }
        let diam = lengths.iter().copied().fold(DD::ZERO, DD::max);
        Ok(Self {
            presentation: oriented,
            targets,
            starts,
            lengths,
            lambda,
            inv_lambda,
            diam,
        })
    }

    pub fn presentation(&self) -> &GraphPresentation {
        &self.presentation
    }

    pub fn lambda(&self) -> DD {
        self.lambda
    }

    pub fn inv_lambda(&self) -> DD {
        self.inv_lambda
    }

    pub fn lengths(&self) -> &[DD] {
        &self.lengths
    }

    pub fn edge_count(&self) -> usize {
        self.lengths.len()
    }

    pub fn diameter(&self) -> DD {
        self.diam
    }

    pub fn vertex(&self) -> GraphPoint {
        GraphPoint::new(0, DD::ZERO)
    }

    /// Keeps `0 ≤ pos < length`; the far end of an edge is the vertex.
    fn normalize(&self, p: GraphPoint) -> GraphPoint {
        let len = self.lengths[p.edge];
        if p.pos.is_negative() || p.pos >= len {
            GraphPoint::new(p.edge, DD::ZERO)
        } else {
            p
        }
    }

    pub fn apply_f(&self, p: GraphPoint) -> Image {
        let starts = &self.starts[p.edge];
        // last subinterval whose start is ≤ pos
        let j = starts.partition_point(|c| *c <= p.pos).saturating_sub(1);
        let offset = p.pos - starts[j];
        let boundary = offset.is_zero();
        let target = self.targets[p.edge][j];
        let point = if boundary {
            self.vertex()
        } else {
            self.normalize(GraphPoint::new(target, offset * self.lambda))
        };
        Image { point, boundary }
    }

    /// All `q` with `f(q) = p`. For the vertex these are the subdivision points.
    pub fn preimages(&self, p: GraphPoint) -> Vec<GraphPoint> {
        let mut out = Vec::new();
        if p.is_vertex() {
            out.push(self.vertex());
            for (i, st) in self.starts.iter().enumerate() {
                out.extend(st.iter().skip(1).map(|c| GraphPoint::new(i, *c)));
            }
            return out;
        }
        let shift = p.pos * self.inv_lambda;
        for (i, tg) in self.targets.iter().enumerate() {
            for (j, &t) in tg.iter().enumerate() {
                if t == p.edge {
                    out.push(self.normalize(GraphPoint::new(i, self.starts[i][j] + shift)));
                }
            }
        }
        out
    }

    /// Distance to the vertex along the edge.
    fn to_vertex(&self, p: GraphPoint) -> DD {
        p.pos.min(self.lengths[p.edge] - p.pos)
    }

    /// Measure of the shortest path between two graph points.
    pub fn d0(&self, p: GraphPoint, q: GraphPoint) -> DD {
        let through_vertex = self.to_vertex(p) + self.to_vertex(q);
        if p.edge == q.edge {
            (p.pos - q.pos).abs().min(through_vertex)
        } else {
            through_vertex
        }
    }

    /// Checks `f(x_{k+1}) = x_k` to within the consistency tolerance.
    pub fn point(&self, coords: Vec<GraphPoint>) -> Result<SolenoidPoint, SmaleError> {
        assert!(!coords.is_empty(), "a point needs at least x_0");
        let coords: Vec<GraphPoint> = coords.into_iter().map(|c| self.normalize(c)).collect();
        for k in 1..coords.len() {
            let gap = self
                .d0(self.apply_f(coords[k]).point, coords[k - 1])
                .to_f64();
            if gap > CONSISTENCY_TOLERANCE {
                return Err(SmaleError::Inconsistent { index: k, gap });
            }
        }
        Ok(SolenoidPoint { coords })
    }

    pub(crate) fn point_unchecked(&self, coords: Vec<GraphPoint>) -> SolenoidPoint {
        SolenoidPoint { coords }
    }

    /// Largest consistency gap over the coordinates.
    pub fn consistency_gap(&self, x: &SolenoidPoint) -> f64 {
        (1..x.coords.len())
            .map(|k| {
                self.d0(self.apply_f(x.coords[k]).point, x.coords[k - 1])
                    .to_f64()
            })
            .fold(0.0, f64::max)
    }

    /// Fixed point at the vertex.
    pub fn vertex_point(&self, depth: usize) -> SolenoidPoint {
        SolenoidPoint {
            coords: vec![self.vertex(); depth + 1],
        }
    }

    pub fn shift(
        &self,
        x: &SolenoidPoint,
        direction: ShiftDirection,
    ) -> Result<SolenoidPoint, SmaleError> {
        match direction {
            ShiftDirection::Forward => {
                let mut coords = Vec::with_capacity(x.coords.len());
                coords.push(self.apply_f(x.coords[0]).point);
                coords.extend_from_slice(&x.coords[..x.coords.len() - 1]);
                Ok(SolenoidPoint { coords })
            }
            ShiftDirection::Backward => {
                if x.depth() == 0 {
                    return Err(SmaleError::BackwardAtDepthZero);
                }
                Ok(SolenoidPoint {
                    coords: x.coords[1..].to_vec(),
                })
            }
        }
    }

    /// Bound on `Σ_{k>N} λ^{-k} d_0` for depth `N`.
    pub fn tail_bound(&self, depth: usize) -> DD {
        self.inv_lambda.powi(depth as u32) * self.diam / (DD::ONE - self.inv_lambda)
    }

    /// `Σ_{k≤N} λ^{-k} d_0(x_k, y_k)` plus the tail bound.
    pub fn metric_d(
        &self,
        x: &SolenoidPoint,
        y: &SolenoidPoint,
    ) -> Result<MetricValue, SmaleError> {
        if x.depth() != y.depth() {
            return Err(SmaleError::DepthMismatch(x.depth(), y.depth()));
        }
        Ok(MetricValue {
            head: self.series_head(x, y),
            tail: self.tail_bound(x.depth()),
        })
    }

    pub(crate) fn series_head(&self, x: &SolenoidPoint, y: &SolenoidPoint) -> DD {
        let mut weight = DD::ONE;
        let mut head = DD::ZERO;
        for (a, b) in x.coords.iter().zip(&y.coords) {
            head = head + weight * self.d0(*a, *b);
            weight = weight * self.inv_lambda;
        }
        head
    }

    /// `z_0 = x_0`; `z_n` is the preimage of `z_{n-1}` nearest `y_n`. Depth `n`
    /// is certified when that preimage lies within `λ^{-(n+1)}` of `y_n` and no
    /// other preimage does.
    pub fn bracket(
        &self,
        x: &SolenoidPoint,
        y: &SolenoidPoint,
    ) -> Result<BracketResult, SmaleError> {
        let d = self.metric_d(x, y)?;
        let limit = DD::from_f64(2.0) * self.inv_lambda;
        if d.hi() > limit {
            return Err(SmaleError::TooFar {
                distance: d.hi().to_decimal(12),
                limit: limit.to_decimal(12),
            });
        }
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &SolenoidPoint, y: &SolenoidPoint) -> BracketResult {
        let depth = x.depth();
        let mut coords = Vec::with_capacity(depth + 1);
        coords.push(x.coords[0]);
        let mut certified_depth = depth;
        let mut diagnostic = None;
        let mut radius = self.inv_lambda;
        for n in 1..=depth {
            radius = radius * self.inv_lambda;
            let target = y.coords[n];
            let mut cands: Vec<(DD, GraphPoint)> = self
                .preimages(coords[n - 1])
                .into_iter()
                .map(|c| (self.d0(c, target), c))
                .collect();
            cands.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("distances are finite"));
            let (best_d, best) = cands[0];
            let unique = cands.get(1).is_none_or(|(d2, _)| *d2 > radius);
            if diagnostic.is_none() && !(best_d <= radius && unique) {
                certified_depth = n - 1;
                diagnostic = Some(format!(
                    "depth {n}: nearest preimage at {} with {} inside the radius {}",
                    best_d.to_decimal(6),
                    cands.iter().filter(|(d, _)| *d <= radius).count(),
                    radius.to_decimal(6)
                ));
            }
            coords.push(best);
        }
        BracketResult {
            point: SolenoidPoint { coords },
            certified_depth,
            diagnostic,
        }
    }

    /// Ratios `d(φ^{k+1}x, φ^{k+1}y) / d(φ^k x, φ^k y)` of series heads for
    /// `k < steps`; `None` entries mark coincident points.
    pub fn stable_contraction_ratios(
        &self,
        x: &SolenoidPoint,
        y: &SolenoidPoint,
        steps: usize,
    ) -> Result<Vec<Option<DD>>, SmaleError> {
        if x.depth() != y.depth() {
            return Err(SmaleError::DepthMismatch(x.depth(), y.depth()));
        }
        let (mut a, mut b) = (x.clone(), y.clone());
        let mut prev = self.series_head(&a, &b);
        let mut out = Vec::with_capacity(steps);
        for _ in 0..steps {
            a = self.shift(&a, ShiftDirection::Forward)?;
            b = self.shift(&b, ShiftDirection::Forward)?;
            let next = self.series_head(&a, &b);
            out.push((!prev.is_zero()).then(|| next / prev));
            prev = next;
        }
        Ok(out)
    }

    pub fn to_repr(&self, x: &SolenoidPoint) -> PointRepr {
        PointRepr {
            coords: x
                .coords
                .iter()
                .map(|c| CoordRepr {
                    edge: self.presentation.edge_name(c.edge).to_string(),
                    pos: c.pos.to_decimal(32),
                })
                .collect(),
            depth: x.depth(),
        }
    }

    pub fn from_repr(&self, r: &PointRepr) -> Result<SolenoidPoint, SmaleError> {
        let coords = r
            .coords
            .iter()
            .map(|c| {
                let edge = self
                    .presentation
                    .edge_index(&c.edge)
                    .ok_or_else(|| SmaleError::UnknownEdge(c.edge.clone()))?;
                let pos =
                    DD::parse(&c.pos).ok_or_else(|| SmaleError::BadCoordinate(c.pos.clone()))?;
                Ok(GraphPoint::new(edge, pos))
            })
            .collect::<Result<Vec<_>, SmaleError>>()?;
        self.point(coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::default_precision;

    fn model(edges: &[&str], words: &[&[&str]]) -> SolenoidModel {
        SolenoidModel::new(
            &GraphPresentation::from_words(edges, words).unwrap(),
            &default_precision(),
        )
        .unwrap()
    }

    fn doubling() -> SolenoidModel {
        model(&["a"], &[&["a", "a"]])
    }

    fn fib() -> SolenoidModel {
        model(&["a", "b"], &[&["a", "a", "b"], &["a", "b"]])
    }

    fn dd(x: f64) -> DD {
        DD::from_f64(x)
    }

    #[test]
    fn circle_map_in_measure_coordinates() {
        let m = model(&["a"], &[&["a", "a", "a"]]);
        let img = m.apply_f(GraphPoint::new(0, dd(0.4)));
        assert!((img.point.pos.to_f64() - 0.2).abs() < 1e-15);
        assert!(!img.boundary);
        let img = m.apply_f(GraphPoint::new(0, DD::ZERO));
        assert!(img.boundary && img.point.is_vertex());
    }

    #[test]
    fn last_letter_of_aab_lands_on_b() {
        let m = fib();
        let va = m.lengths()[0];
        let img = m.apply_f(GraphPoint::new(0, va - dd(1e-9)));
        assert_eq!(img.point.edge, 1);
        assert!((m.lengths()[1] - img.point.pos).to_f64() < 1e-8);
    }

    #[test]
    fn preimage_counts_are_column_sums() {
        let m = fib();
        assert_eq!(m.preimages(GraphPoint::new(0, dd(0.1))).len(), 3);
        assert_eq!(m.preimages(GraphPoint::new(1, dd(0.1))).len(), 2);
        let d = doubling();
        assert_eq!(d.preimages(GraphPoint::new(0, dd(0.3))).len(), 2);
        let v = d.preimages(d.vertex());
        assert!(v.iter().any(GraphPoint::is_vertex));
        for q in m.preimages(GraphPoint::new(0, dd(0.1))) {
            let back = m.apply_f(q).point;
            assert_eq!(back.edge, 0);
            assert!((back.pos - dd(0.1)).abs().to_f64() < 1e-28);
        }
    }

    #[test]
    fn d0_on_the_wedge() {
        let d = doubling();
        assert!(
            (d.d0(GraphPoint::new(0, dd(0.1)), GraphPoint::new(0, dd(0.9)))
                .to_f64()
                - 0.2)
                .abs()
                < 1e-15
        );
        assert!(
            (d.d0(GraphPoint::new(0, dd(0.0)), GraphPoint::new(0, dd(0.5)))
                .to_f64()
                - 0.5)
                .abs()
                < 1e-15
        );
        let m = fib();
        let p = GraphPoint::new(0, dd(0.05));
        let q = GraphPoint::new(1, dd(0.03));
        assert!((m.d0(p, q).to_f64() - 0.08).abs() < 1e-15);
    }

    #[test]
    fn shifts_and_fixed_point() {
        let d = doubling();
        let x = d
            .point(vec![
                GraphPoint::new(0, dd(0.3)),
                GraphPoint::new(0, dd(0.15)),
                GraphPoint::new(0, dd(0.075)),
            ])
            .unwrap();
        let f = d.shift(&x, ShiftDirection::Forward).unwrap();
        assert!((f.head().pos.to_f64() - 0.6).abs() < 1e-15);
        let back = d.shift(&f, ShiftDirection::Backward).unwrap();
        assert_eq!(back, x.truncate(1));
        let v = d.vertex_point(4);
        assert_eq!(d.shift(&v, ShiftDirection::Forward).unwrap(), v);
        assert!(d
            .shift(&d.vertex_point(0), ShiftDirection::Backward)
            .is_err());
    }

    #[test]
    fn inconsistent_points_are_rejected() {
        let d = doubling();
        let r = d.point(vec![
            GraphPoint::new(0, dd(0.3)),
            GraphPoint::new(0, dd(0.2)),
        ]);
        assert!(matches!(r, Err(SmaleError::Inconsistent { index: 1, .. })));
    }

    #[test]
    fn metric_head_for_antipodal_doubling_points() {
        let d = doubling();
        let x = d
            .point(vec![
                GraphPoint::new(0, dd(0.0)),
                GraphPoint::new(0, dd(0.0)),
            ])
            .unwrap();
        let y = d
            .point(vec![
                GraphPoint::new(0, dd(0.5)),
                GraphPoint::new(0, dd(0.25)),
            ])
            .unwrap();
        let m = d.metric_d(&x, &y).unwrap();
        // 1/2 + (1/2)(1/4)
        assert!((m.head.to_f64() - 0.625).abs() < 1e-15);
        assert_eq!(d.metric_d(&y, &x).unwrap(), m);
        let z = d.metric_d(&x, &x).unwrap();
        assert!(z.head.is_zero() && z.tail > DD::ZERO);
    }

    #[test]
    fn bracket_of_a_point_with_itself() {
        let d = fib();
        let mut coords = vec![GraphPoint::new(0, dd(0.2))];
        for _ in 0..10 {
            let pre = d.preimages(*coords.last().unwrap());
            coords.push(pre[1]);
        }
        let x = d.point(coords).unwrap();
        let b = d.bracket(&x, &x).unwrap();
        assert_eq!(b.certified_depth, 10);
        assert!(d.series_head(&b.point, &x).to_f64() < 1e-28);
    }

    #[test]
    fn bracket_rejects_distant_points() {
        // λ = 5 allows distances up to 2/5; antipodal heads are 1/2 apart
        let d = model(&["a"], &[&["a", "a", "a", "a", "a"]]);
        let x = d.vertex_point(3);
        let mut coords = vec![GraphPoint::new(0, dd(0.5))];
        for _ in 0..3 {
            let pre = d.preimages(*coords.last().unwrap());
            coords.push(pre[0]);
        }
        let y = d.point(coords).unwrap();
        assert!(matches!(d.bracket(&x, &y), Err(SmaleError::TooFar { .. })));
    }

    #[test]
    fn non_orientable_input_has_no_model() {
        let p = GraphPresentation::from_words(&["a", "b"], &[&["a", "~b"], &["a", "b"]]).unwrap();
        assert_eq!(
            SolenoidModel::new(&p, &default_precision()).unwrap_err(),
            SmaleError::NotOrientable
        );
    }

    #[test]
    fn repr_round_trip() {
        let d = fib();
        let x = d
            .point(vec![
                GraphPoint::new(1, dd(0.125)),
                d.preimages(GraphPoint::new(1, dd(0.125)))[0],
            ])
            .unwrap();
        let r = d.to_repr(&x);
        assert_eq!(r.coords[0].edge, "b");
        let back = d.from_repr(&r).unwrap();
        assert!(d.series_head(&back, &x).to_f64() < 1e-30);
    }
}
