//! Primal-dual interior-point method for a [`ConicProblem`] with one PSD
//! block.
//!
//! Pinned entries are substituted out, leaving free variables `y` and the
//! cone slack
//!
//! ```text
//!     S(y) = C0 + sum_k y_k G_k  in  K = PSD(n) x R_+^L
//! ```
//!
//! where the PSD part of `S` is the block `D` itself and the LP part holds
//! one slack per `>=` constraint. The solver minimizes `c^T y` together with
//! the multiplier problem `max -<C0, W>` s.t. `<G_k, W> = c_k`, `W in K`,
//! following an infeasible central path with the HKM search direction and a
//! Mehrotra predictor-corrector step.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::net::Point2;
use crate::scalar::Scalar;
use crate::sdr::{ConicProblem, Sense};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Relative primal and dual residual tolerance.
    pub feas_tol: T,
    /// Relative duality gap tolerance.
    pub gap_tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for SolverOptions<T> {
    /// `1e-8` in double precision; single precision cannot get that close,
    /// so the tolerance never drops below `1000 * epsilon`.
    fn default() -> Self {
        let tol = T::of(1e-8).max(T::epsilon() * T::of(1e3));
        Self { feas_tol: tol, gap_tol: tol, max_iter: 200 }
    }
}

impl<T: Scalar> SolverOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.feas_tol > T::zero() && self.gap_tol > T::zero() && self.max_iter > 0) {
            return Err(Error::InvalidInput("solver tolerances and iteration limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Stopped within 1000x of the requested tolerances.
    NearOptimal,
    Failed,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near_optimal",
            SolveStatus::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ConicSolution<T> {
    pub status: SolveStatus,
    /// Objective evaluated at the returned variables.
    pub objective_value: T,
    /// The optimal block `D`, pinned entries included.
    pub psd_block: Mat<T>,
    pub scalar_vars: Vec<T>,
    pub iterations: usize,
    pub primal_residual: T,
    pub dual_residual: T,
    pub relative_gap: T,
    /// Human-readable reason for the final status.
    pub message: String,
}

impl<T: Scalar> ConicSolution<T> {
    fn require_usable(&self) -> Result<()> {
        if self.status == SolveStatus::Failed {
            return Err(Error::SolverFailed(self.message.clone()));
        }
        Ok(())
    }
}

/// Columns of the `X` block of `D` (its last two rows), one per unknown.
pub fn extract_positions<T: Scalar>(sol: &ConicSolution<T>, n: usize) -> Result<Vec<Point2<T>>> {
    sol.require_usable()?;
    if sol.psd_block.rows() != n + 2 {
        return Err(Error::DimensionMismatch { expected: n + 2, got: sol.psd_block.rows() });
    }
    let d = &sol.psd_block;
    Ok((0..n).map(|i| Point2::new(d[(n, i)], d[(n + 1, i)])).collect())
}

/// `trace(Y - X^T X)`; zero when the relaxation is rank consistent.
pub fn tightness<T: Scalar>(sol: &ConicSolution<T>, n: usize) -> Result<T> {
    sol.require_usable()?;
    if sol.psd_block.rows() != n + 2 {
        return Err(Error::DimensionMismatch { expected: n + 2, got: sol.psd_block.rows() });
    }
    let d = &sol.psd_block;
    Ok((0..n)
        .map(|i| d[(i, i)] - d[(n, i)] * d[(n, i)] - d[(n + 1, i)] * d[(n + 1, i)])
        .sum())
}

/// Element of `PSD(n) x R_+^L`.
#[derive(Debug, Clone)]
struct ConePoint<T> {
    psd: Mat<T>,
    lp: Vec<T>,
}

impl<T: Scalar> ConePoint<T> {
    fn dot(&self, other: &Self) -> T {
        self.psd.dot(&other.psd) + self.lp.iter().zip(&other.lp).map(|(&a, &b)| a * b).sum::<T>()
    }

    fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    fn add_scaled(&self, other: &Self, s: T) -> Self {
        Self {
            psd: self.psd.add_scaled(&other.psd, s),
            lp: self.lp.iter().zip(&other.lp).map(|(&a, &b)| a + s * b).collect(),
        }
    }

    fn scaled_identity(n: usize, l: usize, s: T) -> Self {
        Self { psd: Mat::identity(n).scaled(s), lp: vec![s; l] }
    }
}

/// Sparse coefficient `G_k` of one free variable.
#[derive(Debug, Clone, Default)]
struct Coefficient<T> {
    /// Full (both triangles) listing of PSD entries.
    psd: Vec<(usize, usize, T)>,
    lp: Vec<(usize, T)>,
}

impl<T: Scalar> Coefficient<T> {
    fn frobenius_norm(&self) -> T {
        self.psd
            .iter()
            .map(|&(_, _, v)| v * v)
            .chain(self.lp.iter().map(|&(_, v)| v * v))
            .sum::<T>()
            .sqrt()
    }

    /// `<G_k, H>` for a possibly nonsymmetric PSD part.
    fn inner(&self, psd: &Mat<T>, lp: &[T]) -> T {
        let a: T = self.psd.iter().map(|&(p, q, v)| v * psd[(p, q)]).sum();
        let b: T = self.lp.iter().map(|&(r, v)| v * lp[r]).sum();
        a + b
    }
}

#[derive(Debug, Clone, Copy)]
enum Slot<T> {
    Fixed(T),
    Free(usize),
}

/// The problem with pinned variables substituted out.
struct Standard<T> {
    n: usize,
    l: usize,
    cost: Vec<T>,
    coeffs: Vec<Coefficient<T>>,
    constant: ConePoint<T>,
    slots: Vec<Slot<T>>,
}

impl<T: Scalar> Standard<T> {
    fn from_problem(problem: &ConicProblem<T>) -> Result<Self> {
        let nv = problem.num_vars();
        if problem.objective.len() != nv {
            return Err(Error::DimensionMismatch { expected: nv, got: problem.objective.len() });
        }
        let mut fixed: Vec<Option<T>> = vec![None; nv];
        let mut ineqs = Vec::new();
        for con in &problem.constraints {
            if let Some(&(k, _)) = con.terms.iter().find(|&&(k, _)| k >= nv) {
                return Err(Error::IndexOutOfRange { what: "variables", index: k, len: nv });
            }
            match con.sense {
                Sense::Ge => ineqs.push(con),
                Sense::Eq => {
                    let nonzero: Vec<_> = con.terms.iter().filter(|t| t.1 != T::zero()).collect();
                    match nonzero.as_slice() {
                        [&(k, a)] => {
                            let value = con.rhs / a;
                            if let Some(prev) = fixed[k] {
                                if prev != value {
                                    return Err(Error::InvalidInput(format!("variable {k} pinned to two values")));
                                }
                            }
                            fixed[k] = Some(value);
                        }
                        _ => {
                            return Err(Error::Unsupported(
                                "equality constraints must pin a single variable".into(),
                            ))
                        }
                    }
                }
            }
        }
        for &(i, j, v) in &problem.pinned {
            let k = problem.psd_var(i, j);
            match fixed[k] {
                Some(f) if f == v => {}
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "pinned entry ({i}, {j}) lacks a matching equality constraint"
                    )))
                }
            }
        }

        let n = problem.psd_block_dim;
        let l = ineqs.len();
        let mut slots = Vec::with_capacity(nv);
        let mut coeffs: Vec<Coefficient<T>> = Vec::new();
        let mut cost = Vec::new();
        let mut constant = ConePoint { psd: Mat::zeros(n, n), lp: vec![T::zero(); l] };
        for (k, f) in fixed.iter().enumerate() {
            match f {
                Some(v) => {
                    slots.push(Slot::Fixed(*v));
                    if let Some((i, j)) = problem.psd_entry(k) {
                        constant.psd[(i, j)] = *v;
                        constant.psd[(j, i)] = *v;
                    }
                }
                None => {
                    let mut g = Coefficient::default();
                    if let Some((i, j)) = problem.psd_entry(k) {
                        g.psd.push((i, j, T::one()));
                        if i != j {
                            g.psd.push((j, i, T::one()));
                        }
                    }
                    slots.push(Slot::Free(coeffs.len()));
                    coeffs.push(g);
                    cost.push(problem.objective[k]);
                }
            }
        }
        for (r, con) in ineqs.iter().enumerate() {
            let mut c0 = -con.rhs;
            for &(k, a) in &con.terms {
                if a == T::zero() {
                    continue;
                }
                match slots[k] {
                    Slot::Fixed(v) => c0 = c0 + a * v,
                    Slot::Free(idx) => coeffs[idx].lp.push((r, a)),
                }
            }
            constant.lp[r] = c0;
        }
        for (k, g) in coeffs.iter().enumerate() {
            if g.psd.is_empty() && g.lp.is_empty() && cost[k] != T::zero() {
                return Err(Error::InvalidInput("unconstrained variable with nonzero cost".into()));
            }
        }
        Ok(Self { n, l, cost, coeffs, constant, slots })
    }

    fn m(&self) -> usize {
        self.coeffs.len()
    }

    /// `C0 + sum_k y_k G_k`.
    fn slack_at(&self, y: &[T]) -> ConePoint<T> {
        let mut s = self.constant.clone();
        for (g, &yk) in self.coeffs.iter().zip(y) {
            for &(p, q, v) in &g.psd {
                s.psd[(p, q)] = s.psd[(p, q)] + yk * v;
            }
            for &(r, v) in &g.lp {
                s.lp[r] = s.lp[r] + yk * v;
            }
        }
        s
    }

    /// `sum_k dy_k G_k` without the constant.
    fn apply(&self, dy: &[T]) -> ConePoint<T> {
        let mut s = ConePoint { psd: Mat::zeros(self.n, self.n), lp: vec![T::zero(); self.l] };
        for (g, &yk) in self.coeffs.iter().zip(dy) {
            for &(p, q, v) in &g.psd {
                s.psd[(p, q)] = s.psd[(p, q)] + yk * v;
            }
            for &(r, v) in &g.lp {
                s.lp[r] = s.lp[r] + yk * v;
            }
        }
        s
    }

    /// `(<G_k, H>)_k`.
    fn adjoint(&self, psd: &Mat<T>, lp: &[T]) -> Vec<T> {
        self.coeffs.iter().map(|g| g.inner(psd, lp)).collect()
    }

    fn variables(&self, y: &[T]) -> Vec<T> {
        self.slots
            .iter()
            .map(|s| match *s {
                Slot::Fixed(v) => v,
                Slot::Free(k) => y[k],
            })
            .collect()
    }

    /// Schur complement `M_ij = <G_i, W G_j S^-1>` (HKM).
    fn schur(&self, w: &ConePoint<T>, s_inv: &ConePoint<T>) -> Mat<T> {
        let m = self.m();
        let mut out = Mat::zeros(m, m);
        let psd_vars: Vec<usize> = (0..m).filter(|&k| !self.coeffs[k].psd.is_empty()).collect();
        for (a, &i) in psd_vars.iter().enumerate() {
            for &j in &psd_vars[a..] {
                let mut acc = T::zero();
                for &(p, q, v) in &self.coeffs[i].psd {
                    for &(r, s, u) in &self.coeffs[j].psd {
                        acc = acc + v * u * w.psd[(p, r)] * s_inv.psd[(s, q)];
                    }
                }
                out[(i, j)] = acc;
            }
        }
        // Row-wise view of the LP part: variables touching each slack.
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.l];
        for (k, g) in self.coeffs.iter().enumerate() {
            for &(r, v) in &g.lp {
                rows[r].push((k, v));
            }
        }
        for (r, row) in rows.iter().enumerate() {
            let scale = w.lp[r] * s_inv.lp[r];
            for &(i, vi) in row {
                for &(j, vj) in row {
                    if i <= j {
                        out[(i, j)] = out[(i, j)] + scale * vi * vj;
                    }
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                out[(i, j)] = out[(j, i)];
            }
        }
        out
    }
}

/// Largest `alpha` with `x + alpha * dx` in the cone (may be infinite).
fn max_step<T: Scalar>(x: &ConePoint<T>, dx: &ConePoint<T>) -> Option<T> {
    let mut alpha = T::infinity();
    for (&xi, &di) in x.lp.iter().zip(&dx.lp) {
        if di < T::zero() {
            alpha = alpha.min(-xi / di);
        }
    }
    if x.psd.rows() > 0 {
        let l = linalg::cholesky(&x.psd)?;
        let li = linalg::lower_inverse(&l);
        let scaled = li.matmul(&dx.psd).matmul(&li.transpose());
        let lambda = linalg::min_eigenvalue(&scaled);
        if lambda < T::zero() {
            alpha = alpha.min(-T::one() / lambda);
        }
    }
    Some(alpha)
}

fn inverse<T: Scalar>(x: &ConePoint<T>) -> Option<ConePoint<T>> {
    let psd = if x.psd.rows() > 0 {
        linalg::spd_inverse_from_factor(&linalg::cholesky(&x.psd)?)
    } else {
        Mat::zeros(0, 0)
    };
    if x.lp.iter().any(|&v| !(v > T::zero())) {
        return None;
    }
    Some(ConePoint { psd, lp: x.lp.iter().map(|&v| T::one() / v).collect() })
}

fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&a| a * a).sum::<T>().sqrt()
}

struct Direction<T> {
    dy: Vec<T>,
    ds: ConePoint<T>,
    dw: ConePoint<T>,
}

/// Solves the assembled conic problem.
pub fn solve<T: Scalar>(problem: &ConicProblem<T>, opts: &SolverOptions<T>) -> Result<ConicSolution<T>> {
    opts.validate()?;
    let std = Standard::from_problem(problem)?;
    Ok(run(problem, &std, opts))
}

fn run<T: Scalar>(problem: &ConicProblem<T>, std: &Standard<T>, opts: &SolverOptions<T>) -> ConicSolution<T> {
    let (n, l, m) = (std.n, std.l, std.m());
    let one = T::one();
    let nu = T::of_usize(n + l);

    let cost_norm = norm(&std.cost);
    let const_norm = std.constant.norm();
    let coeff_norm = std.coeffs.iter().map(Coefficient::frobenius_norm).fold(T::zero(), T::max);

    let ten = T::of(10.0);
    let w0 = std
        .coeffs
        .iter()
        .zip(&std.cost)
        .map(|(g, &c)| nu * (one + c.abs()) / (one + g.frobenius_norm()))
        .fold(ten.max(nu.sqrt()), T::max);
    let s0 = ten.max(nu.sqrt()).max(coeff_norm).max(const_norm);

    let mut y = vec![T::zero(); m];
    let mut s = ConePoint::scaled_identity(n, l, s0);
    let mut w = ConePoint::scaled_identity(n, l, w0);

    let near = T::of(1e3);
    let divergence = T::of(1e12) * (one + cost_norm + const_norm);
    let mut status = SolveStatus::Failed;
    let mut message = format!("iteration limit {} reached", opts.max_iter);
    let mut iterations = 0;
    let (mut pres, mut dres, mut gap) = (T::infinity(), T::infinity(), T::infinity());
    let mut best_near: Option<(Vec<T>, T, T, T)> = None;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        // Residuals at the current iterate.
        let rp: Vec<T> = std
            .cost
            .iter()
            .zip(std.adjoint(&w.psd, &w.lp))
            .map(|(&c, g)| c - g)
            .collect();
        let rd = std.slack_at(&y).add_scaled(&s, -one);
        let pobj = std.cost.iter().zip(&y).map(|(&c, &v)| c * v).sum::<T>();
        let dobj = -std.constant.dot(&w);
        let complementarity = w.dot(&s);
        pres = rd.norm() / (one + const_norm);
        dres = norm(&rp) / (one + cost_norm);
        let denom = one + pobj.abs() + dobj.abs();
        gap = (complementarity / denom).max((pobj - dobj).abs() / denom);

        if !(pres.is_finite() && dres.is_finite() && gap.is_finite()) {
            message = "numerical breakdown: non-finite residuals".into();
            break;
        }
        if pres <= opts.feas_tol && dres <= opts.feas_tol && gap <= opts.gap_tol {
            status = SolveStatus::Optimal;
            message = "converged".into();
            break;
        }
        if pres <= near * opts.feas_tol && dres <= near * opts.feas_tol && gap <= near * opts.gap_tol {
            let better = best_near.as_ref().is_none_or(|b| gap.max(pres).max(dres) < b.1.max(b.2).max(b.3));
            if better {
                best_near = Some((y.clone(), pres, dres, gap));
            }
        }
        if y.iter().any(|v| v.abs() > divergence) {
            message = "iterates diverge; objective appears unbounded below".into();
            break;
        }
        if iter == opts.max_iter {
            break;
        }

        let mu = complementarity / nu;
        let Some(s_inv) = inverse(&s) else {
            message = "numerical breakdown: slack left the cone".into();
            break;
        };
        let schur = std.schur(&w, &s_inv);
        let Some(factor) = factor_schur(&schur) else {
            message = "numerical breakdown: Schur complement not positive definite".into();
            break;
        };

        // W Rd S^-1, shared by both solves.
        let w_rd_sinv = ConePoint {
            psd: w.psd.matmul(&rd.psd).matmul(&s_inv.psd),
            lp: (0..l).map(|r| w.lp[r] * rd.lp[r] * s_inv.lp[r]).collect(),
        };

        let newton = |target: &ConePoint<T>| -> Direction<T> {
            // target = R, the HKM centering term.
            let diff = target.add_scaled(&w_rd_sinv, -one);
            let mut dy: Vec<T> = std
                .adjoint(&diff.psd, &diff.lp)
                .into_iter()
                .zip(&std.cost)
                .map(|(a, &c)| a - c)
                .collect();
            linalg::cholesky_solve(&factor, &mut dy);
            let ds = rd.add_scaled(&std.apply(&dy), one);
            let psd = target
                .psd
                .add_scaled(&w.psd, -one)
                .add_scaled(&w.psd.matmul(&ds.psd).matmul(&s_inv.psd), -one)
                .symmetrized();
            let lp = (0..l)
                .map(|r| target.lp[r] - w.lp[r] - w.lp[r] * ds.lp[r] * s_inv.lp[r])
                .collect();
            Direction { dy, ds, dw: ConePoint { psd, lp } }
        };

        let zero = ConePoint { psd: Mat::zeros(n, n), lp: vec![T::zero(); l] };
        let pred = newton(&zero);
        let (Some(ap), Some(ad)) = (max_step(&w, &pred.dw), max_step(&s, &pred.ds)) else {
            message = "numerical breakdown: iterate left the cone".into();
            break;
        };
        let ap = ap.min(one);
        let ad = ad.min(one);
        let mu_aff = w.add_scaled(&pred.dw, ap).dot(&s.add_scaled(&pred.ds, ad)) / nu;
        let sigma = (mu_aff / mu).powi(3).max(T::zero()).min(one);

        let correction = ConePoint {
            psd: pred.dw.psd.matmul(&pred.ds.psd).matmul(&s_inv.psd),
            lp: (0..l).map(|r| pred.dw.lp[r] * pred.ds.lp[r] * s_inv.lp[r]).collect(),
        };
        let target = s_inv.clone().scale_by(sigma * mu).add_scaled(&correction, -one);
        let dir = newton(&target);
        let (Some(aw), Some(as_)) = (max_step(&w, &dir.dw), max_step(&s, &dir.ds)) else {
            message = "numerical breakdown: iterate left the cone".into();
            break;
        };
        let tau = T::of(0.98);
        let aw = (tau * aw).min(one);
        let as_ = (tau * as_).min(one);
        if aw < T::of(1e-12) && as_ < T::of(1e-12) {
            message = "stalled: step lengths vanished".into();
            break;
        }

        w = w.add_scaled(&dir.dw, aw);
        s = s.add_scaled(&dir.ds, as_);
        for (yk, dk) in y.iter_mut().zip(&dir.dy) {
            *yk = *yk + as_ * *dk;
        }
    }

    if status != SolveStatus::Optimal {
        if let Some((y_near, p, d, g)) = best_near {
            y = y_near;
            pres = p;
            dres = d;
            gap = g;
            status = SolveStatus::NearOptimal;
            message = format!("stopped within loose tolerance ({message})");
        }
    }

    let vars = std.variables(&y);
    let (psd_block, scalar_vars) = problem.unpack(&vars);
    let mut solution = ConicSolution {
        status,
        objective_value: problem.objective_value(&vars),
        psd_block,
        scalar_vars,
        iterations,
        primal_residual: pres,
        dual_residual: dres,
        relative_gap: gap,
        message,
    };
    if solution.status != SolveStatus::Failed {
        verify_feasible(problem, &vars, &mut solution, opts);
    }
    solution
}

impl<T: Scalar> ConePoint<T> {
    fn scale_by(mut self, s: T) -> Self {
        self.psd = self.psd.scaled(s);
        self.lp.iter_mut().for_each(|v| *v = *v * s);
        self
    }
}

/// Cholesky of the Schur complement, with a tiny diagonal lift when the
/// plain factorization fails near the end of the path.
fn factor_schur<T: Scalar>(schur: &Mat<T>) -> Option<Mat<T>> {
    if let Some(l) = linalg::cholesky(schur) {
        return Some(l);
    }
    let scale = (0..schur.rows()).map(|i| schur[(i, i)].abs()).fold(T::zero(), T::max);
    let mut lifted = schur.clone();
    let shift = scale * T::epsilon() * T::of(1e2) + T::min_positive_value();
    for i in 0..schur.rows() {
        lifted[(i, i)] = lifted[(i, i)] + shift;
    }
    linalg::cholesky(&lifted)
}

/// Demotes the status when the returned variables violate the constraints
/// by more than the feasibility tolerance.
fn verify_feasible<T: Scalar>(problem: &ConicProblem<T>, vars: &[T], sol: &mut ConicSolution<T>, opts: &SolverOptions<T>) {
    let scale = T::one() + sol.psd_block.max_abs();
    let linear = problem.max_violation(vars);
    let min_eig = linalg::min_eigenvalue(&sol.psd_block);
    let allowed = match sol.status {
        SolveStatus::Optimal => opts.feas_tol,
        _ => opts.feas_tol * T::of(1e3),
    } * scale;
    if linear > allowed || min_eig < -allowed {
        sol.status = SolveStatus::Failed;
        sol.message = format!(
            "returned point violates constraints (linear {linear:e}, min eigenvalue {min_eig:e})"
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdr::{assemble_problem, lifted_block, LinearConstraint};
    use crate::sim::{Edge, EdgeKind, MeasurementSet};

    fn trilateration<T: Scalar>(target: (f64, f64), kappa: f64) -> (ConicProblem<T>, MeasurementSet<T>) {
        let anchors = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
        let edges = anchors
            .iter()
            .enumerate()
            .map(|(j, a)| Edge {
                i: 0,
                j,
                kind: EdgeKind::UnknownAnchor,
                dbar: T::of(((target.0 - a.0).powi(2) + (target.1 - a.1).powi(2)).sqrt()),
            })
            .collect();
        let pts = anchors.iter().map(|a| Point2::new(T::of(a.0), T::of(a.1))).collect();
        let meas = MeasurementSet::new(1, T::of(2.0), pts, edges).unwrap();
        (assemble_problem(&meas, T::of(kappa)).unwrap(), meas)
    }

    #[test]
    fn recovers_trilateration_target() {
        let (p, _) = trilateration::<f64>((0.3, 0.4), 0.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "{}", sol.message);
        let x = extract_positions(&sol, 1).unwrap();
        assert!((x[0].x - 0.3).abs() < 1e-6 && (x[0].y - 0.4).abs() < 1e-6, "{x:?}");
        assert!(tightness(&sol, 1).unwrap().abs() < 1e-6);
        assert!(sol.objective_value >= -1e-9);
        assert!(linalg::min_eigenvalue(&sol.psd_block) >= -1e-8);
    }

    #[test]
    fn single_precision_solve() {
        let (p, _) = trilateration::<f32>((0.3, 0.4), 0.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_ne!(sol.status, SolveStatus::Failed, "{}", sol.message);
        let x = extract_positions(&sol, 1).unwrap();
        assert!((x[0].x - 0.3).abs() < 1e-2 && (x[0].y - 0.4).abs() < 1e-2, "{x:?}");
    }

    #[test]
    fn solve_is_deterministic() {
        let (p, _) = trilateration::<f64>((0.6, 0.2), 0.0);
        let a = solve(&p, &SolverOptions::default()).unwrap();
        let b = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(a.objective_value, b.objective_value);
        assert_eq!(a.psd_block, b.psd_block);
    }

    #[test]
    fn block_read_back() {
        let pts = [Point2::new(0.1f64, 0.9), Point2::new(-0.4, 0.25)];
        let mut sol = ConicSolution {
            status: SolveStatus::Optimal,
            objective_value: 0.0,
            psd_block: lifted_block(&pts),
            scalar_vars: vec![],
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            relative_gap: 0.0,
            message: String::new(),
        };
        assert_eq!(extract_positions(&sol, 2).unwrap(), pts.to_vec());
        assert!(tightness(&sol, 2).unwrap().abs() < 1e-15);
        for i in 0..2 {
            sol.psd_block[(i, i)] += 1.0;
        }
        assert!((tightness(&sol, 2).unwrap() - 2.0).abs() < 1e-15);

        sol.status = SolveStatus::Failed;
        assert!(extract_positions(&sol, 2).is_err());
        assert!(tightness(&sol, 2).is_err());
        sol.status = SolveStatus::Optimal;
        assert!(extract_positions(&sol, 3).is_err());
    }

    #[test]
    fn rejects_general_equalities() {
        let (mut p, _) = trilateration::<f64>((0.3, 0.4), 0.0);
        p.constraints.push(LinearConstraint { terms: vec![(0, 1.0), (1, 1.0)], sense: Sense::Eq, rhs: 0.0 });
        assert!(matches!(solve(&p, &SolverOptions::default()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn unbounded_problem_fails() {
        // A single measured pair and many unmeasured anchors: with the full
        // weight, pushing node 0 away from the anchors gains more than the
        // residual costs.
        let anchors: Vec<_> = (0..30).map(|k| Point2::new(k as f64 * 0.01, 1.0)).collect();
        let meas = MeasurementSet::new(
            1,
            0.5,
            anchors,
            vec![Edge { i: 0, j: 0, kind: EdgeKind::UnknownAnchor, dbar: 0.2 }],
        )
        .unwrap();
        let p = assemble_problem(&meas, 0.1).unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Failed, "{}", sol.message);
    }

    #[test]
    fn invalid_options() {
        let (p, _) = trilateration::<f64>((0.3, 0.4), 0.0);
        let opts = SolverOptions { feas_tol: 0.0, gap_tol: 1e-8, max_iter: 10 };
        assert!(solve(&p, &opts).is_err());
    }
}
