//! Network geometry: positions, ranging-limited neighbor sets, the
//! connectivity measure and graph connectedness.

use petgraph::algo::connected_components;
use petgraph::graph::UnGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point in the plane, in meters. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]", bound = "T: Scalar")]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm_squared(&self) -> T {
        self.x * self.x + self.y * self.y
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T> From<[T; 2]> for Point2<T> {
    fn from([x, y]: [T; 2]) -> Self {
        Self { x, y }
    }
}

impl<T> From<Point2<T>> for [T; 2] {
    fn from(p: Point2<T>) -> Self {
        [p.x, p.y]
    }
}

/// Euclidean distance between two points.
pub fn true_distance<T: Scalar>(p: &Point2<T>, q: &Point2<T>) -> T {
    (p.x - q.x).hypot(p.y - q.y)
}

/// Ground truth for one deployment plus what the anchors report about
/// themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "ScenarioJson<T>",
    into = "ScenarioJson<T>",
    bound = "T: Scalar"
)]
pub struct Scenario<T> {
    /// True positions of the location-unaware nodes.
    pub unknowns: Vec<Point2<T>>,
    /// True anchor positions.
    pub anchors_true: Vec<Point2<T>>,
    /// Anchor positions as reported, i.e. perturbed by position error.
    pub anchors_reported: Vec<Point2<T>>,
    pub d_max: T,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct ScenarioJson<T> {
    n: usize,
    m: usize,
    d_max: T,
    seed: u64,
    unknowns: Vec<Point2<T>>,
    anchors_true: Vec<Point2<T>>,
    anchors_reported: Vec<Point2<T>>,
}

impl<T: Scalar> TryFrom<ScenarioJson<T>> for Scenario<T> {
    type Error = Error;

    fn try_from(j: ScenarioJson<T>) -> Result<Self> {
        if j.unknowns.len() != j.n {
            return Err(Error::DimensionMismatch {
                expected: j.n,
                got: j.unknowns.len(),
            });
        }
        if j.anchors_true.len() != j.m || j.anchors_reported.len() != j.m {
            return Err(Error::InvalidInput(format!(
                "scenario declares m = {} anchors but lists {} true and {} reported",
                j.m,
                j.anchors_true.len(),
                j.anchors_reported.len()
            )));
        }
        Scenario::new(
            j.unknowns,
            j.anchors_true,
            j.anchors_reported,
            j.d_max,
            j.seed,
        )
    }
}

impl<T: Scalar> From<Scenario<T>> for ScenarioJson<T> {
    fn from(s: Scenario<T>) -> Self {
        Self {
            n: s.unknowns.len(),
            m: s.anchors_true.len(),
            d_max: s.d_max,
            seed: s.seed,
            unknowns: s.unknowns,
            anchors_true: s.anchors_true,
            anchors_reported: s.anchors_reported,
        }
    }
}

impl<T: Scalar> Scenario<T> {
    pub fn new(
        unknowns: Vec<Point2<T>>,
        anchors_true: Vec<Point2<T>>,
        anchors_reported: Vec<Point2<T>>,
        d_max: T,
        seed: u64,
    ) -> Result<Self> {
        if unknowns.is_empty() {
            return Err(Error::InvalidInput("need at least one unknown node".into()));
        }
        if anchors_true.is_empty() {
            return Err(Error::InvalidInput("need at least one anchor".into()));
        }
        if anchors_true.len() != anchors_reported.len() {
            return Err(Error::DimensionMismatch {
                expected: anchors_true.len(),
                got: anchors_reported.len(),
            });
        }
        if !(d_max > T::zero()) || !d_max.is_finite() {
            return Err(Error::InvalidInput(format!("d_max must be positive, got {d_max}")));
        }
        let all = unknowns
            .iter()
            .chain(&anchors_true)
            .chain(&anchors_reported);
        if !all.into_iter().all(Point2::is_finite) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        Ok(Self {
            unknowns,
            anchors_true,
            anchors_reported,
            d_max,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.unknowns.len()
    }

    pub fn m(&self) -> usize {
        self.anchors_true.len()
    }
}

/// Per-unknown neighbor sets. Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NeighborSets {
    /// `lu_lu[n]`: unknowns within range of unknown `n` (never contains `n`).
    pub lu_lu: Vec<Vec<usize>>,
    /// `lu_anchor[n]`: anchors within range of unknown `n`.
    pub lu_anchor: Vec<Vec<usize>>,
}

impl NeighborSets {
    /// Builds sets from an unordered edge list. `uu` holds unknown pairs,
    /// `ua` holds (unknown, anchor) pairs.
    pub fn from_edges(
        n: usize,
        uu: impl IntoIterator<Item = (usize, usize)>,
        ua: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let mut lu_lu = vec![Vec::new(); n];
        let mut lu_anchor = vec![Vec::new(); n];
        for (i, j) in uu {
            lu_lu[i].push(j);
            lu_lu[j].push(i);
        }
        for (i, a) in ua {
            lu_anchor[i].push(a);
        }
        for s in lu_lu.iter_mut().chain(lu_anchor.iter_mut()) {
            s.sort_unstable();
            s.dedup();
        }
        Self { lu_lu, lu_anchor }
    }

    /// Unordered unknown-unknown pairs `(i, j)` with `i < j`.
    pub fn lu_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.lu_lu
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// `(unknown, anchor)` pairs.
    pub fn anchor_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.lu_anchor
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&a| (i, a)))
    }

    /// Sum of all set cardinalities.
    pub fn total_degree(&self) -> usize {
        self.lu_lu.iter().chain(&self.lu_anchor).map(Vec::len).sum()
    }
}

/// Neighbor sets under the ranging limit, decided from true positions.
/// A pair at exactly `d_max` is in range.
pub fn neighbor_sets<T: Scalar>(scenario: &Scenario<T>) -> NeighborSets {
    let n = scenario.n();
    let d_max = scenario.d_max;
    let mut uu = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if true_distance(&scenario.unknowns[i], &scenario.unknowns[j]) <= d_max {
                uu.push((i, j));
            }
        }
    }
    let mut ua = Vec::new();
    for (i, x) in scenario.unknowns.iter().enumerate() {
        for (a, anchor) in scenario.anchors_true.iter().enumerate() {
            if true_distance(x, anchor) <= d_max {
                ua.push((i, a));
            }
        }
    }
    NeighborSets::from_edges(n, uu, ua)
}

/// Connectivity measure `sum_n (|N1(n)| + |N2(n)|) / (N^2 + N M)`.
///
/// Self-pairs are counted in the denominator, so the value stays below 1
/// even for a complete graph.
pub fn connectivity_measure<T: Scalar>(sets: &NeighborSets, n: usize, m: usize) -> T {
    let denom = n * n + n * m;
    if denom == 0 {
        return T::zero();
    }
    T::of_usize(sets.total_degree()) / T::of_usize(denom)
}

/// Number of connected components of the graph on `n + m` vertices
/// (unknowns first, then anchors) spanned by the neighbor sets.
pub fn component_count(sets: &NeighborSets, n: usize, m: usize) -> usize {
    let mut g = UnGraph::<(), ()>::with_capacity(n + m, sets.total_degree());
    let nodes: Vec<_> = (0..n + m).map(|_| g.add_node(())).collect();
    for (i, j) in sets.lu_pairs() {
        g.add_edge(nodes[i], nodes[j], ());
    }
    for (i, a) in sets.anchor_pairs() {
        g.add_edge(nodes[i], nodes[n + a], ());
    }
    connected_components(&g)
}

/// True when unknowns and anchors together form one connected component.
/// Anchors need not be adjacent to each other.
pub fn is_fully_connected(sets: &NeighborSets, n: usize, m: usize) -> bool {
    component_count(sets, n, m) == 1
}
