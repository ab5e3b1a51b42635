//! Random deployments, log-normal shadowing on ranges, and anchor position
//! error, all driven by seeded ChaCha streams.

use std::collections::HashSet;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{self, NeighborSets, Point2, Scenario};
use crate::scalar::Scalar;

/// Default cap on connectivity rejections in [`generate_scenario`].
pub const MAX_GENERATION_ATTEMPTS: usize = 10_000;

/// Stream reserved for measurement noise, disjoint from the streams used by
/// rejection sampling.
pub const MEASUREMENT_STREAM: u64 = 1 << 40;

/// Radio channel and deployment parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ChannelParams<T> {
    /// Path-loss exponent.
    pub gamma_p: T,
    /// Shadowing standard deviation in dB.
    pub sigma_db: T,
    /// Anchor position error scale in meters.
    pub epsilon: T,
    /// Maximum ranging distance in meters.
    pub d_max: T,
}

impl<T: Scalar> Default for ChannelParams<T> {
    fn default() -> Self {
        Self {
            gamma_p: T::of(3.0),
            sigma_db: T::of(3.5),
            epsilon: T::of(0.01),
            d_max: T::of(0.5),
        }
    }
}

impl<T: Scalar> ChannelParams<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v.is_finite();
        if !(ok(self.gamma_p) && self.gamma_p > T::zero()) {
            return Err(Error::InvalidInput(format!("gamma_p must be > 0, got {}", self.gamma_p)));
        }
        if !(ok(self.sigma_db) && self.sigma_db >= T::zero()) {
            return Err(Error::InvalidInput(format!("sigma_dB must be >= 0, got {}", self.sigma_db)));
        }
        if !(ok(self.epsilon) && self.epsilon >= T::zero()) {
            return Err(Error::InvalidInput(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(ok(self.d_max) && self.d_max > T::zero()) {
            return Err(Error::InvalidInput(format!("d_max must be > 0, got {}", self.d_max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    /// Unknown to unknown; `j` indexes unknowns.
    #[serde(rename = "uu")]
    UnknownUnknown,
    /// Unknown to anchor; `j` indexes anchors.
    #[serde(rename = "ua")]
    UnknownAnchor,
}

/// One measured range. `i` always indexes an unknown node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Edge<T> {
    pub i: usize,
    pub j: usize,
    pub kind: EdgeKind,
    pub dbar: T,
}

/// Everything the estimator is allowed to see.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "MeasurementJson<T>",
    into = "MeasurementJson<T>",
    bound = "T: Scalar"
)]
pub struct MeasurementSet<T> {
    n: usize,
    m: usize,
    d_max: T,
    anchors_reported: Vec<Point2<T>>,
    edges: Vec<Edge<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct MeasurementJson<T> {
    n: usize,
    m: usize,
    d_max: T,
    anchors_reported: Vec<Point2<T>>,
    edges: Vec<Edge<T>>,
}

impl<T: Scalar> TryFrom<MeasurementJson<T>> for MeasurementSet<T> {
    type Error = Error;

    fn try_from(j: MeasurementJson<T>) -> Result<Self> {
        if j.m != j.anchors_reported.len() {
            return Err(Error::DimensionMismatch { expected: j.m, got: j.anchors_reported.len() });
        }
        MeasurementSet::new(j.n, j.d_max, j.anchors_reported, j.edges)
    }
}

impl<T: Scalar> From<MeasurementSet<T>> for MeasurementJson<T> {
    fn from(s: MeasurementSet<T>) -> Self {
        Self {
            n: s.n,
            m: s.m,
            d_max: s.d_max,
            anchors_reported: s.anchors_reported,
            edges: s.edges,
        }
    }
}

impl<T: Scalar> MeasurementSet<T> {
    /// Validates and builds a measurement set. The anchor count is taken from
    /// `anchors_reported`.
    pub fn new(
        n: usize,
        d_max: T,
        anchors_reported: Vec<Point2<T>>,
        edges: Vec<Edge<T>>,
    ) -> Result<Self> {
        let m = anchors_reported.len();
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput("need at least one unknown and one anchor".into()));
        }
        if !anchors_reported.iter().all(Point2::is_finite) {
            return Err(Error::InvalidInput("non-finite anchor coordinate".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.i >= n {
                return Err(Error::IndexOutOfRange { what: "unknowns", index: e.i, len: n });
            }
            let key = match e.kind {
                EdgeKind::UnknownUnknown => {
                    if e.j >= n {
                        return Err(Error::IndexOutOfRange { what: "unknowns", index: e.j, len: n });
                    }
                    if e.i == e.j {
                        return Err(Error::InvalidInput(format!("self edge on node {}", e.i)));
                    }
                    (e.kind, e.i.min(e.j), e.i.max(e.j))
                }
                EdgeKind::UnknownAnchor => {
                    if e.j >= m {
                        return Err(Error::IndexOutOfRange { what: "anchors", index: e.j, len: m });
                    }
                    (e.kind, e.i, e.j)
                }
            };
            if !seen.insert(key) {
                return Err(Error::InvalidInput(format!(
                    "pair ({}, {}) measured more than once",
                    e.i, e.j
                )));
            }
            if !(e.dbar > T::zero() && e.dbar.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "distance on ({}, {}) must be positive, got {}",
                    e.i, e.j, e.dbar
                )));
            }
        }
        Ok(Self { n, m, d_max, anchors_reported, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d_max(&self) -> T {
        self.d_max
    }

    pub fn anchors_reported(&self) -> &[Point2<T>] {
        &self.anchors_reported
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    /// Neighbor sets implied by the measured edges.
    pub fn neighbor_sets(&self) -> NeighborSets {
        let uu = self
            .edges
            .iter()
            .filter(|e| e.kind == EdgeKind::UnknownUnknown)
            .map(|e| (e.i, e.j));
        let ua = self
            .edges
            .iter()
            .filter(|e| e.kind == EdgeKind::UnknownAnchor)
            .map(|e| (e.i, e.j));
        NeighborSets::from_edges(self.n, uu, ua)
    }

    /// Connectivity measure computed from the measured edges.
    pub fn connectivity(&self) -> T {
        net::connectivity_measure(&self.neighbor_sets(), self.n, self.m)
    }
}

/// Applies a given shadowing gain `alpha` (dB) to a true distance.
pub fn fade_with_gain<T: Scalar>(d: T, gamma_p: T, alpha: T) -> T {
    d * T::of(10.0).powf(alpha / (T::of(10.0) * gamma_p))
}

/// Draws a zero-mean Gaussian gain with standard deviation `sigma_dB` and
/// returns the shadowed distance estimate.
pub fn fade_distance<T: Scalar, R: Rng + ?Sized>(d: T, params: &ChannelParams<T>, rng: &mut R) -> T {
    let z: f64 = rng.sample(StandardNormal);
    let alpha = params.sigma_db * T::of(z);
    fade_with_gain(d, params.gamma_p, alpha)
}

/// Moves an anchor by `epsilon * r * (cos theta, sin theta)`.
pub fn perturb_with<T: Scalar>(a: &Point2<T>, epsilon: T, r: T, theta: T) -> Point2<T> {
    Point2::new(a.x + epsilon * r * theta.cos(), a.y + epsilon * r * theta.sin())
}

/// Anchor position error with `r ~ N(0, 1)` and `theta ~ U(0, 2 pi)`.
pub fn perturb_anchor<T: Scalar, R: Rng + ?Sized>(a: &Point2<T>, epsilon: T, rng: &mut R) -> Point2<T> {
    let r: f64 = rng.sample(StandardNormal);
    let theta: f64 = rng.random::<f64>() * 2.0 * PI;
    perturb_with(a, epsilon, T::of(r), T::of(theta))
}

fn uniform_points<T: Scalar, R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<Point2<T>> {
    (0..count)
        .map(|_| {
            let x: f64 = rng.random();
            let y: f64 = rng.random();
            Point2::new(T::of(x), T::of(y))
        })
        .collect()
}

/// Draws a connected deployment in the unit square.
///
/// Attempt `k` uses ChaCha stream `k` of `seed`; every attempt redraws all
/// positions. Gives up after [`MAX_GENERATION_ATTEMPTS`].
pub fn generate_scenario<T: Scalar>(
    n: usize,
    m: usize,
    params: &ChannelParams<T>,
    seed: u64,
) -> Result<Scenario<T>> {
    generate_scenario_with_limit(n, m, params, seed, MAX_GENERATION_ATTEMPTS)
}

pub fn generate_scenario_with_limit<T: Scalar>(
    n: usize,
    m: usize,
    params: &ChannelParams<T>,
    seed: u64,
    max_attempts: usize,
) -> Result<Scenario<T>> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput("need N >= 1 and M >= 1".into()));
    }
    params.validate()?;
    for attempt in 0..max_attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let unknowns = uniform_points(n, &mut rng);
        let anchors_true = uniform_points(m, &mut rng);
        let mut scenario = Scenario::new(unknowns, anchors_true.clone(), anchors_true, params.d_max, seed)?;
        let sets = net::neighbor_sets(&scenario);
        if !net::is_fully_connected(&sets, n, m) {
            continue;
        }
        scenario.anchors_reported = scenario
            .anchors_true
            .iter()
            .map(|a| perturb_anchor(a, params.epsilon, &mut rng))
            .collect();
        return Ok(scenario);
    }
    Err(Error::DisconnectedNetwork { attempts: max_attempts })
}

/// Measures every in-range pair once: unknown pairs first (`i < j`), then
/// unknown-anchor pairs, each with its own shadowing draw.
pub fn make_measurements<T: Scalar, R: Rng + ?Sized>(
    scenario: &Scenario<T>,
    params: &ChannelParams<T>,
    rng: &mut R,
) -> Result<MeasurementSet<T>> {
    let sets = net::neighbor_sets(scenario);
    let mut edges = Vec::with_capacity(sets.total_degree());
    for (i, j) in sets.lu_pairs() {
        let d = net::true_distance(&scenario.unknowns[i], &scenario.unknowns[j]);
        edges.push(Edge {
            i,
            j,
            kind: EdgeKind::UnknownUnknown,
            dbar: fade_distance(d, params, rng),
        });
    }
    for (i, a) in sets.anchor_pairs() {
        let d = net::true_distance(&scenario.unknowns[i], &scenario.anchors_true[a]);
        edges.push(Edge {
            i,
            j: a,
            kind: EdgeKind::UnknownAnchor,
            dbar: fade_distance(d, params, rng),
        });
    }
    MeasurementSet::new(scenario.n(), scenario.d_max, scenario.anchors_reported.clone(), edges)
}

/// Measurement RNG for a scenario seed, on its own stream.
pub fn measurement_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(MEASUREMENT_STREAM);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(sigma_db: f64, epsilon: f64, d_max: f64) -> ChannelParams<f64> {
        ChannelParams { gamma_p: 3.0, sigma_db, epsilon, d_max }
    }

    #[test]
    fn generation_is_deterministic() {
        let p = ChannelParams::<f64>::default();
        let a = generate_scenario(15, 5, &p, 7).unwrap();
        let b = generate_scenario(15, 5, &p, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_scenario(15, 5, &p, 8).unwrap());
    }

    #[test]
    fn full_range_accepts_first_draw() {
        let p = params(3.5, 0.01, 2f64.sqrt());
        let s = generate_scenario_with_limit(3, 2, &p, 11, 1).unwrap();
        let sets = net::neighbor_sets(&s);
        assert_eq!(sets.total_degree(), 3 * 2 + 3 * 2);
    }

    #[test]
    fn generation_gives_up() {
        let p = params(3.5, 0.01, 1e-6);
        match generate_scenario_with_limit::<f64>(4, 2, &p, 1, 20) {
            Err(Error::DisconnectedNetwork { attempts: 20 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn default_deployments_are_mostly_moderately_connected() {
        let p = ChannelParams::<f64>::default();
        let mut above = 0;
        for seed in 0..100 {
            let s = generate_scenario(15, 5, &p, seed).unwrap();
            let c: f64 = net::connectivity_measure(&net::neighbor_sets(&s), 15, 5);
            if c > 0.3 {
                above += 1;
            }
        }
        assert!(above >= 90, "only {above}/100 deployments had C > 0.3");
    }

    #[test]
    fn fading_examples() {
        assert_eq!(fade_with_gain(2.5f64, 3.0, 0.0), 2.5);
        assert!((fade_with_gain(1.0f64, 3.0, 3.0) - 1.2589254117941673).abs() < 1e-12);
        let p = params(0.0, 0.0, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(fade_distance(0.7, &p, &mut rng), 0.7);
        }
    }

    #[test]
    fn fading_log_ratio_has_zero_mean() {
        let p = ChannelParams::<f64>::default();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 100_000;
        let mean = (0..draws)
            .map(|_| (fade_distance(1.0, &p, &mut rng) as f64).log10())
            .sum::<f64>()
            / draws as f64;
        let se = p.sigma_db / (10.0 * p.gamma_p * (draws as f64).sqrt());
        assert!(mean.abs() <= 3.0 * se, "mean {mean} vs 3 se {}", 3.0 * se);
    }

    #[test]
    fn perturbation_examples() {
        let a = Point2::new(0.2f64, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(perturb_anchor(&a, 0.0, &mut rng), a);
        let moved = perturb_with(&a, 0.01, 1.0, 0.0);
        assert!((moved.x - 0.21).abs() < 1e-15 && moved.y == 0.7);
    }

    #[test]
    fn perturbation_second_moment() {
        let eps = 0.01;
        let a = Point2::new(0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 100_000;
        let m2 = (0..draws)
            .map(|_| perturb_anchor(&a, eps, &mut rng).norm_squared())
            .sum::<f64>()
            / draws as f64;
        assert!((m2 / (eps * eps) - 1.0).abs() < 0.05, "E|delta|^2 / eps^2 = {}", m2 / (eps * eps));
    }

    #[test]
    fn measurement_counts_and_noise_free_values() {
        let p = params(0.0, 0.0, 2.0);
        let s = Scenario::new(
            vec![Point2::new(0.1, 0.1), Point2::new(0.4, 0.5)],
            vec![Point2::new(0.9, 0.9)],
            vec![Point2::new(0.9, 0.9)],
            2.0,
            0,
        )
        .unwrap();
        let meas = make_measurements(&s, &p, &mut measurement_rng(0)).unwrap();
        assert_eq!(meas.edges().len(), 3);
        assert!((meas.edges()[0].dbar - 0.5).abs() < 1e-15);
        for e in meas.edges() {
            let other = match e.kind {
                EdgeKind::UnknownUnknown => s.unknowns[e.j],
                EdgeKind::UnknownAnchor => s.anchors_true[e.j],
            };
            assert_eq!(e.dbar, net::true_distance(&s.unknowns[e.i], &other));
        }
    }

    #[test]
    fn measurements_follow_neighbor_sets_and_seed() {
        let p = ChannelParams::<f64>::default();
        for seed in 0..10 {
            let s = generate_scenario(15, 5, &p, seed).unwrap();
            let sets = net::neighbor_sets(&s);
            let a = make_measurements(&s, &p, &mut measurement_rng(seed)).unwrap();
            let b = make_measurements(&s, &p, &mut measurement_rng(seed)).unwrap();
            assert_eq!(a, b);
            let lu: usize = sets.lu_lu.iter().map(Vec::len).sum();
            let la: usize = sets.lu_anchor.iter().map(Vec::len).sum();
            assert_eq!(a.edges().len(), la + lu / 2);
            assert_eq!(a.neighbor_sets(), sets);
            assert!(a.edges().iter().all(|e| e.dbar > 0.0));
        }
    }

    #[test]
    fn measurement_json_schema_and_validation() {
        let meas = MeasurementSet::new(
            2,
            0.5,
            vec![Point2::new(1.0, 1.0)],
            vec![
                Edge { i: 0, j: 1, kind: EdgeKind::UnknownUnknown, dbar: 0.3 },
                Edge { i: 1, j: 0, kind: EdgeKind::UnknownAnchor, dbar: 0.4 },
            ],
        )
        .unwrap();
        let v = serde_json::to_value(&meas).unwrap();
        assert_eq!(v["m"], 1);
        assert_eq!(v["edges"][0]["kind"], "uu");
        assert_eq!(v["edges"][1]["kind"], "ua");
        assert_eq!(serde_json::from_value::<MeasurementSet<f64>>(v.clone()).unwrap(), meas);

        let mut dup = v.clone();
        dup["edges"][1] = serde_json::json!({"i": 1, "j": 0, "kind": "uu", "dbar": 0.3});
        assert!(serde_json::from_value::<MeasurementSet<f64>>(dup).is_err());
        let mut neg = v.clone();
        neg["edges"][0]["dbar"] = serde_json::json!(-1.0);
        assert!(serde_json::from_value::<MeasurementSet<f64>>(neg).is_err());
        let mut oob = v;
        oob["edges"][1]["j"] = serde_json::json!(3);
        assert!(serde_json::from_value::<MeasurementSet<f64>>(oob).is_err());
    }
}
