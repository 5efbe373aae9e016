//! Seeded sampling of nearby points and the Smale-space identity checks:
//! `[x,x] = x`, `[[x,y],z] = [x,z]`, `[x,[y,z]] = [x,z]`, `[φx, φy] = φ[x,y]`,
//! and contraction by `1/λ` along stable pairs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GraphPoint, ShiftDirection, SmaleError, SolenoidModel, SolenoidPoint, DD};

/// Allowed excess of a contraction ratio over `1/λ`.
pub const CONTRACTION_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmaleCheckOptions {
    pub depth: usize,
    pub samples: usize,
    pub seed: u64,
    /// Forward steps per stable pair.
    pub contraction_steps: usize,
    /// Sampling attempts allowed per requested sample.
    pub attempts_per_sample: usize,
}

impl Default for SmaleCheckOptions {
    fn default() -> Self {
        Self {
            depth: super::DEFAULT_SMALE_DEPTH,
            samples: 1000,
            seed: 0,
            contraction_steps: 10,
            attempts_per_sample: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityStats {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    /// Largest upper metric bound seen (display only).
    pub max_distance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmaleCheckReport {
    pub depth: usize,
    pub seed: u64,
    pub lambda: String,
    pub tolerance: String,
    pub tuples_requested: usize,
    pub tuples_accepted: usize,
    pub tuple_attempts: usize,
    pub rejected_precondition: usize,
    pub rejected_uncertified: usize,
    pub identities: Vec<IdentityStats>,
    pub stable_pairs: usize,
    pub stable_attempts: usize,
    pub coincident_ratios: usize,
    pub max_contraction_ratio: String,
    pub contraction_bound: String,
    pub contraction_violations: usize,
    pub max_consistency_gap: String,
    pub passes: bool,
}

fn random_preimage(model: &SolenoidModel, rng: &mut ChaCha8Rng, p: GraphPoint) -> GraphPoint {
    *model
        .preimages(p)
        .choose(rng)
        .expect("every point has a preimage")
}

fn nearest_preimage(model: &SolenoidModel, p: GraphPoint, target: GraphPoint) -> GraphPoint {
    model
        .preimages(p)
        .into_iter()
        .min_by(|a, b| {
            model
                .d0(*a, target)
                .partial_cmp(&model.d0(*b, target))
                .expect("finite distances")
        })
        .expect("every point has a preimage")
}

/// Uniform edge, uniform position, then uniformly chosen preimages.
pub fn sample_point(model: &SolenoidModel, rng: &mut ChaCha8Rng, depth: usize) -> SolenoidPoint {
    let edge = rng.gen_range(0..model.edge_count());
    let pos = model.lengths()[edge] * DD::from_f64(rng.gen_range(0.0..1.0));
    let mut coords = vec![GraphPoint::new(edge, pos)];
    for _ in 0..depth {
        let next = random_preimage(model, rng, *coords.last().unwrap());
        coords.push(next);
    }
    model.point_unchecked(coords)
}

/// `y_0` within `radius` of `x_0` on the same edge, and each later `y_k` the
/// preimage of `y_{k-1}` nearest `x_k`.
pub fn sample_near(
    model: &SolenoidModel,
    rng: &mut ChaCha8Rng,
    x: &SolenoidPoint,
    radius: f64,
) -> SolenoidPoint {
    let x0 = x.head();
    let len = model.lengths()[x0.edge];
    let delta = DD::from_f64(rng.gen_range(-radius..=radius));
    let mut pos = x0.pos + delta;
    if pos.is_negative() {
        pos = pos + len;
    } else if pos >= len {
        pos = pos - len;
    }
    let mut coords = vec![GraphPoint::new(x0.edge, pos)];
    for k in 1..=x.depth() {
        let next = nearest_preimage(model, *coords.last().unwrap(), x.coords()[k]);
        coords.push(next);
    }
    model.point_unchecked(coords)
}

/// Agrees with `x` up to index `split - 1`, then takes another preimage and
/// follows `x` as closely as possible; `y_0 = x_0` makes it a stable partner.
pub fn sample_stable_partner(
    model: &SolenoidModel,
    rng: &mut ChaCha8Rng,
    x: &SolenoidPoint,
    split: usize,
) -> SolenoidPoint {
    let split = split.clamp(1, x.depth().max(1));
    let mut coords: Vec<GraphPoint> = x.coords()[..split.min(x.depth() + 1)].to_vec();
    if split <= x.depth() {
        let others: Vec<GraphPoint> = model
            .preimages(coords[split - 1])
            .into_iter()
            .filter(|q| *q != x.coords()[split])
            .collect();
        let pick = others.choose(rng).copied().unwrap_or(x.coords()[split]);
        coords.push(pick);
        for k in split + 1..=x.depth() {
            let next = nearest_preimage(model, *coords.last().unwrap(), x.coords()[k]);
            coords.push(next);
        }
    }
    model.point_unchecked(coords)
}

/// Largest contraction ratio over `steps` forward shifts, `None` if the points coincide.
pub fn contraction_from_sample(
    model: &SolenoidModel,
    x: &SolenoidPoint,
    y: &SolenoidPoint,
    steps: usize,
) -> Result<Option<DD>, SmaleError> {
    let ratios = model.stable_contraction_ratios(x, y, steps)?;
    Ok(ratios
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<DD>, r| Some(acc.map_or(r, |a| a.max(r)))))
}

struct Tracker {
    name: &'static str,
    checked: usize,
    violations: usize,
    max: DD,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checked: 0,
            violations: 0,
            max: DD::ZERO,
        }
    }

    fn record(&mut self, distance: DD, tol: DD) {
        self.checked += 1;
        self.max = self.max.max(distance);
        if distance > tol {
            self.violations += 1;
        }
    }

    fn finish(self) -> IdentityStats {
        IdentityStats {
            name: self.name.to_string(),
            checked: self.checked,
            violations: self.violations,
            max_distance: self.max.to_decimal(6),
        }
    }
}

enum Rejection {
    Precondition,
    Uncertified,
}

fn certified(
    model: &SolenoidModel,
    a: &SolenoidPoint,
    b: &SolenoidPoint,
) -> Result<SolenoidPoint, Rejection> {
    match model.bracket(a, b) {
        Ok(r) if r.fully_certified() => Ok(r.point),
        Ok(_) => Err(Rejection::Uncertified),
        Err(_) => Err(Rejection::Precondition),
    }
}

struct Tuple {
    xx: SolenoidPoint,
    x: SolenoidPoint,
    xy_z: SolenoidPoint,
    x_yz: SolenoidPoint,
    xz: SolenoidPoint,
    f_xy: SolenoidPoint,
    fx_fy: SolenoidPoint,
}

fn build_tuple(
    model: &SolenoidModel,
    x: &SolenoidPoint,
    y: &SolenoidPoint,
    z: &SolenoidPoint,
) -> Result<Tuple, Rejection> {
    let fwd = |p: &SolenoidPoint| {
        model
            .shift(p, ShiftDirection::Forward)
            .expect("forward shift")
    };
    let xx = certified(model, x, x)?;
    let xy = certified(model, x, y)?;
    let xz = certified(model, x, z)?;
    let yz = certified(model, y, z)?;
    let xy_z = certified(model, &xy, z)?;
    let x_yz = certified(model, x, &yz)?;
    let fx_fy = certified(model, &fwd(x), &fwd(y))?;
    Ok(Tuple {
        xx,
        x: x.clone(),
        xy_z,
        x_yz,
        xz,
        f_xy: fwd(&xy),
        fx_fy,
    })
}

/// Samples `options.samples` fully certified triples and stable pairs and
/// checks the bracket identities at tolerance `10 · tail_bound(depth)`.
pub fn run_smale_checks(model: &SolenoidModel, options: &SmaleCheckOptions) -> SmaleCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let depth = options.depth;
    let tol = DD::from_f64(10.0) * model.tail_bound(depth);
    let radius = 0.5 * model.inv_lambda().to_f64() * model.inv_lambda().to_f64();
    let max_attempts = options.samples * options.attempts_per_sample;

    let mut idem = Tracker::new("[x,x] = x");
    let mut left = Tracker::new("[[x,y],z] = [x,z]");
    let mut right = Tracker::new("[x,[y,z]] = [x,z]");
    let mut equi = Tracker::new("[f(x),f(y)] = f([x,y])");
    let mut max_gap = 0.0f64;
    let (mut accepted, mut attempts, mut rej_pre, mut rej_cert) = (0, 0, 0, 0);

    while accepted < options.samples && attempts < max_attempts {
        attempts += 1;
        let x = sample_point(model, &mut rng, depth);
        let y = sample_near(model, &mut rng, &x, radius);
        let z = sample_near(model, &mut rng, &x, radius);
        let t = match build_tuple(model, &x, &y, &z) {
            Ok(t) => t,
            Err(Rejection::Precondition) => {
                rej_pre += 1;
                continue;
            }
            Err(Rejection::Uncertified) => {
                rej_cert += 1;
                continue;
            }
        };
        accepted += 1;
        let d =
            |a: &SolenoidPoint, b: &SolenoidPoint| model.metric_d(a, b).expect("equal depth").hi();
        idem.record(d(&t.xx, &t.x), tol);
        left.record(d(&t.xy_z, &t.xz), tol);
        right.record(d(&t.x_yz, &t.xz), tol);
        equi.record(d(&t.f_xy, &t.fx_fy), tol);
        for p in [&x, &y, &z, &t.xz, &t.f_xy] {
            max_gap = max_gap.max(model.consistency_gap(p));
        }
    }

    let bound = model.inv_lambda() + DD::from_f64(CONTRACTION_SLACK);
    let (mut pairs, mut stable_attempts, mut coincident, mut violations) = (0, 0, 0, 0);
    let mut max_ratio = DD::ZERO;
    while pairs < options.samples && stable_attempts < max_attempts {
        stable_attempts += 1;
        let x = sample_point(model, &mut rng, depth);
        let split = rng.gen_range(1..=4usize);
        let y = sample_stable_partner(model, &mut rng, &x, split);
        // local stable partner: the bracket must reproduce y
        let Ok(b) = certified(model, &x, &y) else {
            continue;
        };
        if model.metric_d(&b, &y).expect("equal depth").hi() > tol {
            continue;
        }
        pairs += 1;
        match contraction_from_sample(model, &x, &y, options.contraction_steps) {
            Ok(Some(r)) => {
                max_ratio = max_ratio.max(r);
                if r > bound {
                    violations += 1;
                }
            }
            Ok(None) => coincident += 1,
            Err(_) => violations += 1,
        }
    }

    let identities: Vec<IdentityStats> = [idem, left, right, equi]
        .into_iter()
        .map(Tracker::finish)
        .collect();
    let passes = accepted == options.samples
        && pairs == options.samples
        && violations == 0
        && identities.iter().all(|s| s.violations == 0)
        && max_gap <= super::CONSISTENCY_TOLERANCE;
    SmaleCheckReport {
        depth,
        seed: options.seed,
        lambda: model.lambda().to_decimal(20),
        tolerance: tol.to_decimal(6),
        tuples_requested: options.samples,
        tuples_accepted: accepted,
        tuple_attempts: attempts,
        rejected_precondition: rej_pre,
        rejected_uncertified: rej_cert,
        identities,
        stable_pairs: pairs,
        stable_attempts,
        coincident_ratios: coincident,
        max_contraction_ratio: max_ratio.to_decimal(12),
        contraction_bound: bound.to_decimal(12),
        contraction_violations: violations,
        max_consistency_gap: crate::spectral::rational_to_decimal(
            &num_rational::BigRational::from_float(max_gap).unwrap_or_default(),
            6,
        ),
        passes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::GraphPresentation;
    use crate::spectral::default_precision;

    fn fib() -> SolenoidModel {
        let p =
            GraphPresentation::from_words(&["a", "b"], &[&["a", "a", "b"], &["a", "b"]]).unwrap();
        SolenoidModel::new(&p, &default_precision()).unwrap()
    }

    #[test]
    fn sampled_points_are_consistent() {
        let m = fib();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = sample_point(&m, &mut rng, 30);
            assert!(m.consistency_gap(&x) <= 1e-12);
            let y = sample_near(&m, &mut rng, &x, 0.05);
            assert!(m.consistency_gap(&y) <= 1e-12);
            let s = sample_stable_partner(&m, &mut rng, &x, 2);
            assert_eq!(s.head(), x.head());
        }
    }

    #[test]
    fn small_run_passes() {
        let m = fib();
        let report = run_smale_checks(
            &m,
            &SmaleCheckOptions {
                depth: 20,
                samples: 50,
                seed: 11,
                ..SmaleCheckOptions::default()
            },
        );
        assert!(report.passes, "{report:#?}");
    }

    #[test]
    fn stable_pairs_contract_by_one_over_lambda() {
        let m = fib();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = sample_point(&m, &mut rng, 30);
        let y = sample_stable_partner(&m, &mut rng, &x, 3);
        let r = contraction_from_sample(&m, &x, &y, 10).unwrap().unwrap();
        assert!(r <= m.inv_lambda() + DD::from_f64(1e-12));
        assert_eq!(contraction_from_sample(&m, &x, &x, 5).unwrap(), None);
    }
}
