//! Assembly of the connectivity-regularized semidefinite relaxation.
//!
//! The relaxation works on one symmetric block
//!
//! ```text
//!     D = [ Y   X^T ]      Y: N x N,  X: 2 x N (column n is node n)
//!         [ X   I_2 ]
//! ```
//!
//! and `D >= 0` is equivalent to `Y >= X^T X`. For a selector vector `v`,
//! `v^T D v` is linear in the entries of `D` and equals a squared distance
//! whenever `Y = X^T X`.
//!
//! Variables of the assembled [`ConicProblem`] are laid out as the scalar
//! epigraph variables first (one per measured edge), followed by the upper
//! triangle of `D` in row-major order. A PSD variable holds the matrix entry
//! itself, so off-diagonal coefficients carry the factor 2 of the symmetric
//! expansion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::net::Point2;
use crate::scalar::Scalar;
use crate::sim::{EdgeKind, MeasurementSet};

/// Lower connectivity threshold; at or below it the regularizer is off.
pub const CONNECTIVITY_LOW: f64 = 0.3;
/// Upper end of the constant low-weight band.
pub const CONNECTIVITY_MID: f64 = 0.5;
/// Connectivity above which the full weight applies.
pub const CONNECTIVITY_HIGH: f64 = 0.7;
/// Weight on the low band.
pub const KAPPA_LOW: f64 = 0.01;
/// Weight for well connected networks.
pub const KAPPA_HIGH: f64 = 0.1;

/// Coefficients `v` such that `v^T D v` extracts a squared-distance surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorVector<T> {
    pub coefficients: Vec<T>,
}

impl<T: Scalar> SelectorVector<T> {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Linear expression of `v^T D v` over the upper-triangle entries of `D`,
    /// as `(row, col, coefficient)` with `row <= col`.
    pub fn quad_terms(&self) -> Vec<(usize, usize, T)> {
        let v = &self.coefficients;
        let two = T::of(2.0);
        let mut out = Vec::new();
        for i in 0..v.len() {
            if v[i] == T::zero() {
                continue;
            }
            out.push((i, i, v[i] * v[i]));
            for j in (i + 1)..v.len() {
                if v[j] != T::zero() {
                    out.push((i, j, two * v[i] * v[j]));
                }
            }
        }
        out
    }
}

/// Selector for the pair of unknowns `(n, n_prime)`, zero-based:
/// `e_n - e_n'` padded with two zeros.
pub fn selector_lu<T: Scalar>(n: usize, n_prime: usize, big_n: usize) -> Result<SelectorVector<T>> {
    for idx in [n, n_prime] {
        if idx >= big_n {
            return Err(Error::IndexOutOfRange { what: "unknowns", index: idx, len: big_n });
        }
    }
    if n == n_prime {
        return Err(Error::InvalidInput(format!("selector needs two distinct nodes, got {n} twice")));
    }
    let mut coefficients = vec![T::zero(); big_n + 2];
    coefficients[n] = T::one();
    coefficients[n_prime] = -T::one();
    Ok(SelectorVector { coefficients })
}

/// Selector for unknown `n` and an anchor reported at `a`: `e_n` followed by
/// `-a`, so that `v^T D v = |x_n - a|^2` when `Y = X^T X`.
pub fn selector_anchor<T: Scalar>(n: usize, a: &Point2<T>, big_n: usize) -> Result<SelectorVector<T>> {
    if n >= big_n {
        return Err(Error::IndexOutOfRange { what: "unknowns", index: n, len: big_n });
    }
    let mut coefficients = vec![T::zero(); big_n + 2];
    coefficients[n] = T::one();
    coefficients[big_n] = -a.x;
    coefficients[big_n + 1] = -a.y;
    Ok(SelectorVector { coefficients })
}

/// `v^T D v`.
pub fn quad_form<T: Scalar>(d: &Mat<T>, v: &SelectorVector<T>) -> Result<T> {
    if !d.is_square() || d.rows() != v.len() {
        return Err(Error::DimensionMismatch { expected: d.rows(), got: v.len() });
    }
    let c = &v.coefficients;
    let mut acc = T::zero();
    for i in 0..c.len() {
        if c[i] == T::zero() {
            continue;
        }
        let row: T = d.row(i).iter().zip(c).map(|(&dij, &cj)| dij * cj).sum();
        acc = acc + c[i] * row;
    }
    Ok(acc)
}

/// Regularizer weight as a function of connectivity: zero up to 0.3, 0.01
/// up to 0.5, linear to 0.1 at 0.7, then 0.1. At exactly 0.3 the weight is 0.
pub fn weight_kappa<T: Scalar>(c: T) -> T {
    let (gl, ga, gh) = (T::of(CONNECTIVITY_LOW), T::of(CONNECTIVITY_MID), T::of(CONNECTIVITY_HIGH));
    let (cl, ch) = (T::of(KAPPA_LOW), T::of(KAPPA_HIGH));
    if c <= gl {
        T::zero()
    } else if c <= ga {
        cl
    } else if c <= gh {
        // Weighted-average form: exact at the midpoint, unlike cl + slope * (c - ga).
        (cl * (gh - c) + ch * (c - ga)) / (gh - ga)
    } else {
        ch
    }
}

/// Pairs without a measurement, which the regularizer pushes apart.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizerSpec<T> {
    /// Unknown pairs `(n, n')` with `n < n'` and no measured edge.
    pub non_edge_lu_pairs: Vec<(usize, usize)>,
    /// `(unknown, anchor)` pairs with no measured edge, over every unknown.
    pub non_edge_anchor_pairs: Vec<(usize, usize)>,
    pub kappa: T,
}

pub fn regularizer_spec<T: Scalar>(meas: &MeasurementSet<T>, kappa: T) -> RegularizerSpec<T> {
    let sets = meas.neighbor_sets();
    let (n, m) = (meas.n(), meas.m());
    let mut non_edge_lu_pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if sets.lu_lu[i].binary_search(&j).is_err() {
                non_edge_lu_pairs.push((i, j));
            }
        }
    }
    let mut non_edge_anchor_pairs = Vec::new();
    for i in 0..n {
        for a in 0..m {
            if sets.lu_anchor[i].binary_search(&a).is_err() {
                non_edge_anchor_pairs.push((i, a));
            }
        }
    }
    RegularizerSpec { non_edge_lu_pairs, non_edge_anchor_pairs, kappa }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    #[serde(rename = "eq")]
    Eq,
    #[serde(rename = "ge")]
    Ge,
}

/// `sum(coef * var) (= | >=) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint<T> {
    pub terms: Vec<(usize, T)>,
    pub sense: Sense,
    pub rhs: T,
}

/// Linear objective and constraints over scalar variables plus the entries
/// of one PSD block.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem<T> {
    pub num_scalar_vars: usize,
    pub psd_block_dim: usize,
    /// One coefficient per variable (`num_vars()` long).
    pub objective: Vec<T>,
    pub constraints: Vec<LinearConstraint<T>>,
    /// PSD entries `(row, col, value)` fixed by equality constraints.
    pub pinned: Vec<(usize, usize, T)>,
}

impl<T: Scalar> ConicProblem<T> {
    pub fn num_psd_vars(&self) -> usize {
        self.psd_block_dim * (self.psd_block_dim + 1) / 2
    }

    pub fn num_vars(&self) -> usize {
        self.num_scalar_vars + self.num_psd_vars()
    }

    /// Variable index of PSD entry `(i, j)`; the order of `i, j` is irrelevant.
    pub fn psd_var(&self, i: usize, j: usize) -> usize {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        let n = self.psd_block_dim;
        // Entries in rows before r: sum_{k<r} (n - k).
        self.num_scalar_vars + r * n - r * (r.saturating_sub(1)) / 2 - r + c
    }

    /// PSD entry addressed by a variable index, if it is one.
    pub fn psd_entry(&self, var: usize) -> Option<(usize, usize)> {
        let mut k = var.checked_sub(self.num_scalar_vars)?;
        let n = self.psd_block_dim;
        for r in 0..n {
            let len = n - r;
            if k < len {
                return Some((r, r + k));
            }
            k -= len;
        }
        None
    }

    /// Packs a symmetric block and scalar values into a variable vector.
    pub fn pack(&self, psd: &Mat<T>, scalars: &[T]) -> Vec<T> {
        let mut vars = Vec::with_capacity(self.num_vars());
        vars.extend_from_slice(scalars);
        for i in 0..self.psd_block_dim {
            for j in i..self.psd_block_dim {
                vars.push(psd[(i, j)]);
            }
        }
        vars
    }

    /// Inverse of [`ConicProblem::pack`].
    pub fn unpack(&self, vars: &[T]) -> (Mat<T>, Vec<T>) {
        let n = self.psd_block_dim;
        let mut d = Mat::zeros(n, n);
        let mut k = self.num_scalar_vars;
        for i in 0..n {
            for j in i..n {
                d[(i, j)] = vars[k];
                d[(j, i)] = vars[k];
                k += 1;
            }
        }
        (d, vars[..self.num_scalar_vars].to_vec())
    }

    pub fn objective_value(&self, vars: &[T]) -> T {
        self.objective.iter().zip(vars).map(|(&c, &v)| c * v).sum()
    }

    /// Largest violation over all linear constraints (0 when satisfied).
    pub fn max_violation(&self, vars: &[T]) -> T {
        self.constraints.iter().fold(T::zero(), |worst, con| {
            let lhs: T = con.terms.iter().map(|&(k, a)| a * vars[k]).sum();
            let v = match con.sense {
                Sense::Eq => (lhs - con.rhs).abs(),
                Sense::Ge => (con.rhs - lhs).max(T::zero()),
            };
            worst.max(v)
        })
    }

    /// Linear terms of `v^T D v` over this problem's variables.
    pub fn quad_form_terms(&self, v: &SelectorVector<T>) -> Vec<(usize, T)> {
        v.quad_terms()
            .into_iter()
            .map(|(i, j, a)| (self.psd_var(i, j), a))
            .collect()
    }

    /// Flat debug view for diffing against other implementations.
    pub fn debug_dump(&self) -> ConicDump<T> {
        let mut triplets = Vec::new();
        let mut sense = Vec::with_capacity(self.constraints.len());
        let mut rhs = Vec::with_capacity(self.constraints.len());
        for (row, con) in self.constraints.iter().enumerate() {
            triplets.extend(con.terms.iter().map(|&(var, a)| (row, var, a)));
            sense.push(con.sense);
            rhs.push(con.rhs);
        }
        ConicDump {
            num_scalar_vars: self.num_scalar_vars,
            psd_block_dim: self.psd_block_dim,
            num_vars: self.num_vars(),
            objective: self.objective.clone(),
            constraints: ConstraintDump { triplets, sense, rhs },
            pinned: self.pinned.clone(),
        }
    }
}

/// JSON shape of [`ConicProblem::debug_dump`].
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ConicDump<T> {
    pub num_scalar_vars: usize,
    pub psd_block_dim: usize,
    pub num_vars: usize,
    pub objective: Vec<T>,
    pub constraints: ConstraintDump<T>,
    pub pinned: Vec<(usize, usize, T)>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ConstraintDump<T> {
    /// `(row, var, coefficient)`.
    pub triplets: Vec<(usize, usize, T)>,
    pub sense: Vec<Sense>,
    pub rhs: Vec<T>,
}

fn edge_selector<T: Scalar>(meas: &MeasurementSet<T>, kind: EdgeKind, i: usize, j: usize) -> Result<SelectorVector<T>> {
    match kind {
        EdgeKind::UnknownUnknown => selector_lu(i, j, meas.n()),
        EdgeKind::UnknownAnchor => selector_anchor(i, &meas.anchors_reported()[j], meas.n()),
    }
}

/// Builds `minimize sum_e t_e - kappa * sum_{non-edges} v^T D v` subject to
/// `t_e >= |v_e^T D v_e - dbar_e^2|`, the identity corner of `D` and `D >= 0`.
pub fn assemble_problem<T: Scalar>(meas: &MeasurementSet<T>, kappa: T) -> Result<ConicProblem<T>> {
    if meas.edges().is_empty() {
        return Err(Error::EmptyEdgeList);
    }
    if !(kappa >= T::zero()) || !kappa.is_finite() {
        return Err(Error::InvalidInput(format!("kappa must be >= 0, got {kappa}")));
    }
    let n = meas.n();
    let edges = meas.edges();
    let mut problem = ConicProblem {
        num_scalar_vars: edges.len(),
        psd_block_dim: n + 2,
        objective: Vec::new(),
        constraints: Vec::with_capacity(3 + 2 * edges.len()),
        pinned: vec![(n, n, T::one()), (n, n + 1, T::zero()), (n + 1, n + 1, T::one())],
    };
    problem.objective = vec![T::zero(); problem.num_vars()];

    for &(i, j, value) in &problem.pinned {
        problem.constraints.push(LinearConstraint {
            terms: vec![(problem.psd_var(i, j), T::one())],
            sense: Sense::Eq,
            rhs: value,
        });
    }

    for (e, edge) in edges.iter().enumerate() {
        let v = edge_selector(meas, edge.kind, edge.i, edge.j)?;
        let q = problem.quad_form_terms(&v);
        let d2 = edge.dbar * edge.dbar;
        problem.objective[e] = T::one();
        // t_e - q_e >= -dbar^2
        let mut below = vec![(e, T::one())];
        below.extend(q.iter().map(|&(k, a)| (k, -a)));
        problem.constraints.push(LinearConstraint { terms: below, sense: Sense::Ge, rhs: -d2 });
        // t_e + q_e >= dbar^2
        let mut above = vec![(e, T::one())];
        above.extend(q.iter().copied());
        problem.constraints.push(LinearConstraint { terms: above, sense: Sense::Ge, rhs: d2 });
    }

    if kappa > T::zero() {
        let reg = regularizer_spec(meas, kappa);
        let lu = reg.non_edge_lu_pairs.iter().map(|&(i, j)| selector_lu(i, j, n));
        let ua = reg
            .non_edge_anchor_pairs
            .iter()
            .map(|&(i, a)| selector_anchor(i, &meas.anchors_reported()[a], n));
        for v in lu.chain(ua) {
            for (k, a) in problem.quad_form_terms(&v?) {
                problem.objective[k] = problem.objective[k] - kappa * a;
            }
        }
    }
    Ok(problem)
}

/// The block `[[X^T X, X^T], [X, I]]` for the given node positions.
pub fn lifted_block<T: Scalar>(positions: &[Point2<T>]) -> Mat<T> {
    let n = positions.len();
    let mut d = Mat::identity(n + 2);
    for (i, p) in positions.iter().enumerate() {
        for (j, q) in positions.iter().enumerate() {
            d[(i, j)] = p.x * q.x + p.y * q.y;
        }
        d[(n, i)] = p.x;
        d[(i, n)] = p.x;
        d[(n + 1, i)] = p.y;
        d[(i, n + 1)] = p.y;
    }
    d
}
