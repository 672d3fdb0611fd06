//! Minimization of the discretized modular `F(c) = Σᵢ wᵢ Φ(|f(xᵢ) − Σⱼ cⱼ δⱼ(xᵢ)|)`.
//!
//! Each start runs three stages:
//!
//! 1. subgradient descent with diminishing steps `step_init/√t`,
//! 2. a coordinate-wise golden-section polish,
//! 3. an active-set refinement. Residual magnitudes where `t ↦ Φ(|t|)` has a
//!    corner (0 when `φ⁺(0) > 0`, and the jump points of `φ`) are "kink levels".
//!    The refinement moves along Newton or gradient directions inside the face
//!    where a set of pinned nodes keeps its residuals on kink levels, with an
//!    exact convex line search that stops on the first kink where the one-sided
//!    slope turns nonnegative. At a stationary face it tries releasing pins.
//!    For piecewise-linear `Φ` this walks vertices like a simplex method and ends
//!    on an exact vertex; for smooth `Φ` it reduces to Newton with exact line
//!    search.
//!
//! `converged` reports that no descent direction was found among the Newton,
//! gradient, pin-release and `±eⱼ` directions at the returned point.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{pairwise_sum, same_grid, GridFunction};
use crate::phi::PhiFunction;
use crate::subspace::Subspace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Initial subgradient step, relative to `1 + ‖f‖∞`.
    pub step_init: f64,
    pub tol_obj: f64,
    pub tol_coeff: f64,
    pub n_starts: usize,
    pub rng_seed: u64,
    pub polish_sweeps: usize,
    pub refine_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 400,
            step_init: 0.5,
            tol_obj: 1e-10,
            tol_coeff: 1e-6,
            n_starts: 8,
            rng_seed: 0,
            polish_sweeps: 12,
            refine_steps: 400,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be positive"));
        }
        if self.n_starts == 0 {
            return Err(invalid("n_starts", "must be positive"));
        }
        for (name, v) in [
            ("step_init", self.step_init),
            ("tol_obj", self.tol_obj),
            ("tol_coeff", self.tol_coeff),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, "must be positive and finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestApproxSolution {
    pub coeffs: Vec<f64>,
    pub modular_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub start_id: usize,
}

/// The discretized objective with everything the stages share.
pub(crate) struct Objective<'a> {
    f: &'a [f64],
    s: &'a Subspace,
    w: &'a [f64],
    phi: &'a PhiFunction,
    eta: f64,
    /// Signed kink residual values, ascending.
    levels: Vec<f64>,
    snap: f64,
    f_sup: f64,
}

impl<'a> Objective<'a> {
    pub(crate) fn new(f: &'a GridFunction, s: &'a Subspace, phi: &'a PhiFunction) -> Result<Self> {
        if !same_grid(f.grid(), s.grid()) {
            return Err(Error::GridMismatch);
        }
        let mut levels = Vec::new();
        for k in phi.kink_magnitudes() {
            levels.push(k);
            if k > 0.0 {
                levels.push(-k);
            }
        }
        levels.sort_by(f64::total_cmp);
        let f_sup = f.sup_norm();
        Ok(Objective {
            f: f.values(),
            s,
            w: s.grid().weights(),
            phi,
            eta: s.grid().equality_tol(),
            levels,
            snap: 1e-12 * (1.0 + f_sup),
            f_sup,
        })
    }

    fn dim(&self) -> usize {
        self.s.dim()
    }

    pub(crate) fn residual(&self, c: &[f64]) -> Vec<f64> {
        let p = self.s.combine(c);
        self.f.iter().zip(p).map(|(f, p)| f - p).collect()
    }

    fn value_of_residual(&self, r: &[f64]) -> f64 {
        let terms: Vec<f64> = self
            .w
            .iter()
            .zip(r)
            .map(|(w, r)| w * self.phi.value(r.abs()))
            .collect();
        pairwise_sum(&terms)
    }

    pub(crate) fn value(&self, c: &[f64]) -> f64 {
        self.value_of_residual(&self.residual(c))
    }

    fn checked_value(&self, c: &[f64]) -> Result<f64> {
        self.checked(&self.residual(c))
    }

    fn checked(&self, r: &[f64]) -> Result<f64> {
        let v = self.value_of_residual(r);
        if v.is_finite() {
            return Ok(v);
        }
        let node = r
            .iter()
            .position(|r| !self.phi.value(r.abs()).is_finite())
            .unwrap_or(0);
        Err(Error::NonFinite {
            node,
            x: self.s.grid().nodes()[node],
        })
    }

    /// `gⱼ = Σᵢ wᵢ φ⁺(|rᵢ|) sgn(rᵢ) (−δⱼ(xᵢ))`, with `η`-zero residuals contributing 0.
    fn subgradient(&self, r: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = r
            .iter()
            .zip(self.w)
            .map(|(&r, w)| {
                if r.abs() <= self.eta {
                    0.0
                } else {
                    w * self.phi.right(r.abs()) * r.signum()
                }
            })
            .collect();
        (0..self.dim())
            .map(|j| -self.s.basis_values(j).iter().zip(&d).map(|(b, d)| b * d).sum::<f64>())
            .collect()
    }

    /// Nearest kink level when within the snapping tolerance.
    fn snapped(&self, u: f64) -> f64 {
        if self.levels.is_empty() {
            return u;
        }
        let i = self.levels.partition_point(|&l| l < u);
        for k in [i.wrapping_sub(1), i] {
            if let Some(&l) = self.levels.get(k) {
                if (u - l).abs() <= self.snap {
                    return l;
                }
            }
        }
        u
    }

    /// Right derivative of `s ↦ F` at residual `r − s·q`. Entries of `fixed` that
    /// are finite override the residual of a pinned node.
    fn slope(&self, r: &[f64], q: &[f64], fixed: &[f64], s: f64) -> f64 {
        let mut terms = Vec::with_capacity(r.len());
        for i in 0..r.len() {
            let rate = -q[i];
            if rate == 0.0 {
                continue;
            }
            let u = if fixed[i].is_finite() {
                fixed[i]
            } else {
                self.snapped(r[i] - s * q[i])
            };
            let t = if u == 0.0 {
                self.phi.right(0.0) * rate.abs()
            } else {
                let along = u.signum() * rate;
                let a = u.abs();
                if along > 0.0 {
                    self.phi.right(a) * along
                } else {
                    self.phi.left(a) * along
                }
            };
            terms.push(self.w[i] * t);
        }
        pairwise_sum(&terms)
    }

    /// Magnitude against which slopes are judged to be zero.
    fn slope_scale(&self, r: &[f64], q: &[f64]) -> f64 {
        r.iter()
            .zip(q)
            .zip(self.w)
            .map(|((r, q), w)| w * self.phi.right(r.abs() + q.abs()) * q.abs())
            .sum::<f64>()
            + f64::MIN_POSITIVE
    }

    /// Exact minimization of the convex function `s ↦ F` along `r − s·q`, `s ≥ 0`.
    /// Returns the step and the nodes that land on a kink level at that step.
    fn line_search(&self, r: &[f64], q: &[f64], fixed: &[f64]) -> (f64, Vec<(usize, f64)>) {
        let tol = 1e-12 * self.slope_scale(r, q);
        if self.slope(r, q, fixed, 0.0) >= -tol {
            return (0.0, Vec::new());
        }
        let mut breaks: Vec<(f64, usize, f64)> = Vec::new();
        for i in 0..r.len() {
            if fixed[i].is_finite() || q[i] == 0.0 {
                continue;
            }
            for &l in &self.levels {
                if (r[i] - l).abs() <= self.snap {
                    continue;
                }
                let s = (r[i] - l) / q[i];
                if s > 0.0 && s.is_finite() {
                    breaks.push((s, i, l));
                }
            }
        }
        breaks.sort_by(|a, b| a.0.total_cmp(&b.0));

        let h = |s: f64| self.slope(r, q, fixed, s);
        // first breakpoint whose right slope is nonnegative
        let (mut lo_k, mut hi_k) = (0usize, breaks.len());
        while lo_k < hi_k {
            let mid = (lo_k + hi_k) / 2;
            if h(breaks[mid].0) >= 0.0 {
                hi_k = mid;
            } else {
                lo_k = mid + 1;
            }
        }
        let k = lo_k;
        let lo = if k == 0 { 0.0 } else { breaks[k - 1].0 };
        let hi = if k < breaks.len() {
            let sk = breaks[k].0;
            let neg_q: Vec<f64> = q.iter().map(|v| -v).collect();
            let left = -self.slope(r, &neg_q, fixed, -sk);
            if left <= 0.0 {
                let hits = breaks[k..]
                    .iter()
                    .take_while(|b| b.0 <= sk * (1.0 + 1e-13))
                    .map(|b| (b.1, b.2))
                    .collect();
                return (sk, hits);
            }
            sk
        } else {
            let qmax = q.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            let rmax = r.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            let mut step = (1.0 + rmax) / qmax.max(f64::MIN_POSITIVE);
            let mut hi = lo + step;
            let mut guard = 0;
            while h(hi) < 0.0 && guard < 200 {
                step *= 2.0;
                hi = lo + step;
                guard += 1;
            }
            hi
        };
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if h(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        // the smaller objective of the two bracket ends
        let fa = self.value_of_residual(&shifted(r, q, a));
        let fb = self.value_of_residual(&shifted(r, q, b));
        (if fb <= fa { b } else { a }, Vec::new())
    }

    fn row(&self, i: usize) -> Vec<f64> {
        (0..self.dim()).map(|j| self.s.basis_values(j)[i]).collect()
    }

    fn direction_values(&self, d: &[f64]) -> Vec<f64> {
        self.s.combine(d)
    }
}

fn shifted(r: &[f64], q: &[f64], s: f64) -> Vec<f64> {
    r.iter().zip(q).map(|(r, q)| r - s * q).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn pin_matrix(obj: &Objective, pins: &[(usize, f64)]) -> DMatrix<f64> {
    let n = obj.dim();
    DMatrix::from_fn(pins.len(), n, |k, j| obj.s.basis_values(j)[pins[k].0])
}

fn rows_independent(m: &DMatrix<f64>) -> bool {
    if m.nrows() == 0 {
        return true;
    }
    if m.nrows() > m.ncols() {
        return false;
    }
    let sv = m.clone().svd(false, false).singular_values;
    sv.min() > 1e-9 * sv.max()
}

/// Orthonormal basis (columns) of the null space of the pinned rows.
fn null_basis(m: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let gram = m.transpose() * m;
    let eig = SymmetricEigen::new(gram);
    let max = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&k| eig.eigenvalues[k] <= 1e-12 * max)
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

struct RefineOutcome {
    steps: usize,
    stationary: bool,
}

fn fixed_vector(len: usize, pins: &[(usize, f64)]) -> Vec<f64> {
    let mut fixed = vec![f64::NAN; len];
    for &(i, l) in pins {
        fixed[i] = l;
    }
    fixed
}

fn try_pin(obj: &Objective, pins: &mut Vec<(usize, f64)>, hits: &[(usize, f64)]) {
    for &(i, l) in hits {
        if pins.len() >= obj.dim() || pins.iter().any(|p| p.0 == i) {
            continue;
        }
        pins.push((i, l));
        if !rows_independent(&pin_matrix(obj, pins)) {
            pins.pop();
        }
    }
}

/// Candidate descent directions on the current face: Newton, then gradient.
fn face_directions(obj: &Objective, r: &[f64], fixed: &[f64], pins: &[(usize, f64)]) -> Vec<Vec<f64>> {
    let n = obj.dim();
    let basis = null_basis(&pin_matrix(obj, pins), n);
    if basis.ncols() == 0 {
        return Vec::new();
    }
    let mut g = DVector::<f64>::zeros(n);
    let mut h = DMatrix::<f64>::zeros(n, n);
    for i in 0..r.len() {
        if fixed[i].is_finite() {
            continue;
        }
        let u = obj.snapped(r[i]);
        let a = u.abs();
        let psi = if u == 0.0 { 0.0 } else { obj.phi.right(a) * u.signum() };
        let curv = obj.phi.curvature(a);
        let b = DVector::from_vec(obj.row(i));
        g -= &b * (obj.w[i] * psi);
        if curv.is_finite() && curv > 0.0 {
            h.ger(obj.w[i] * curv, &b, &b, 1.0);
        }
    }
    let gz = basis.transpose() * &g;
    if gz.norm() == 0.0 {
        return Vec::new();
    }
    let hz = basis.transpose() * &h * &basis;
    let mut out = Vec::new();
    if let Some(chol) = hz.clone().cholesky() {
        let step = -(&basis * chol.solve(&gz));
        if step.iter().all(|v| v.is_finite()) {
            out.push(step.as_slice().to_vec());
        }
    }
    out.push((-(&basis * &gz)).as_slice().to_vec());
    out
}

fn refine(obj: &Objective, c: &mut Vec<f64>, budget: usize) -> RefineOutcome {
    let n = obj.dim();
    let mut pins: Vec<(usize, f64)> = Vec::new();
    let mut steps = 0;
    let mut current = obj.value(c);

    let take = |c: &mut Vec<f64>, d: &[f64], r: &[f64], fixed: &[f64], current: &mut f64| -> Option<Vec<(usize, f64)>> {
        let q = obj.direction_values(d);
        let tol = 1e-10 * obj.slope_scale(r, &q);
        if obj.slope(r, &q, fixed, 0.0) >= -tol {
            return None;
        }
        let (s, hits) = obj.line_search(r, &q, fixed);
        if s <= 0.0 {
            return None;
        }
        let trial: Vec<f64> = c.iter().zip(d).map(|(c, d)| c + s * d).collect();
        let value = obj.value(&trial);
        if value > *current + 1e-14 * current.abs().max(f64::MIN_POSITIVE) {
            return None;
        }
        *c = trial;
        *current = value.min(*current);
        Some(hits)
    };

    while steps < budget {
        let r = obj.residual(c);
        // nodes that already sit on a kink level start out pinned
        let on_kink: Vec<(usize, f64)> = r
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| {
                let u = obj.snapped(v);
                obj.levels.contains(&u).then_some((i, u))
            })
            .collect();
        try_pin(obj, &mut pins, &on_kink);
        let fixed = fixed_vector(r.len(), &pins);

        let mut moved = false;
        for d in face_directions(obj, &r, &fixed, &pins) {
            if let Some(hits) = take(c, &d, &r, &fixed, &mut current) {
                try_pin(obj, &mut pins, &hits);
                moved = true;
                break;
            }
        }
        if moved {
            steps += 1;
            continue;
        }

        // release one pin along the edge that leaves its kink
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        if !pins.is_empty() {
            let m = pin_matrix(obj, &pins);
            if let Some(inv) = (&m * m.transpose()).try_inverse() {
                let pinv = m.transpose() * inv;
                for k in 0..pins.len() {
                    let mut rest = fixed.clone();
                    rest[pins[k].0] = f64::NAN;
                    for sign in [1.0, -1.0] {
                        let d: Vec<f64> = pinv.column(k).iter().map(|v| sign * v).collect();
                        let q = obj.direction_values(&d);
                        let rel = obj.slope(&r, &q, &rest, 0.0) / obj.slope_scale(&r, &q);
                        if rel < -1e-10 && best.as_ref().is_none_or(|b| rel < b.0) {
                            best = Some((rel, k, d));
                        }
                    }
                }
            }
        }
        if let Some((_, k, d)) = best {
            let released = pins.remove(k);
            let fixed = fixed_vector(r.len(), &pins);
            match take(c, &d, &r, &fixed, &mut current) {
                Some(hits) => {
                    try_pin(obj, &mut pins, &hits);
                    steps += 1;
                    continue;
                }
                None => pins.insert(k, released),
            }
        }

        // coordinate directions as a last resort
        let mut moved = false;
        for j in 0..n {
            for sign in [1.0, -1.0] {
                let mut d = vec![0.0; n];
                d[j] = sign;
                let free = vec![f64::NAN; r.len()];
                if let Some(hits) = take(c, &d, &r, &free, &mut current) {
                    pins.clear();
                    try_pin(obj, &mut pins, &hits);
                    moved = true;
                    break;
                }
            }
            if moved {
                break;
            }
        }
        if moved {
            steps += 1;
            continue;
        }
        return RefineOutcome { steps, stationary: true };
    }
    RefineOutcome { steps, stationary: false }
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 > f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Runs all three stages from one start. Also returns the best-so-far objective
/// after every subgradient iteration.
pub fn solve_from(
    f: &GridFunction,
    s: &Subspace,
    phi: &PhiFunction,
    cfg: &SolverConfig,
    start: &[f64],
    start_id: usize,
) -> Result<(BestApproxSolution, Vec<f64>)> {
    cfg.validate()?;
    if start.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: start.len(),
        });
    }
    let obj = Objective::new(f, s, phi)?;
    run_start(&obj, cfg, start.to_vec(), start_id)
}

fn run_start(
    obj: &Objective,
    cfg: &SolverConfig,
    start: Vec<f64>,
    start_id: usize,
) -> Result<(BestApproxSolution, Vec<f64>)> {
    let n = obj.dim();
    let basis_scale = norm(&obj.s.sup_norms()).max(f64::MIN_POSITIVE);
    let step0 = cfg.step_init * (1.0 + obj.f_sup) / basis_scale;

    let mut c = start;
    let mut r = obj.residual(&c);
    let mut best_value = obj.checked(&r)?;
    let mut best_c = c.clone();
    let mut history = vec![best_value];
    let mut window: std::collections::VecDeque<(f64, Vec<f64>)> = std::collections::VecDeque::new();
    window.push_back((best_value, best_c.clone()));
    let mut iterations = 0;

    for t in 1..=cfg.max_iters {
        iterations = t;
        let g = obj.subgradient(&r);
        let gn = norm(&g);
        if gn == 0.0 {
            break;
        }
        let step = step0 / (t as f64).sqrt();
        for (c, g) in c.iter_mut().zip(&g) {
            *c -= step * g / gn;
        }
        r = obj.residual(&c);
        let value = obj.checked(&r)?;
        if value < best_value {
            best_value = value;
            best_c.clone_from(&c);
        }
        history.push(best_value);
        window.push_back((best_value, best_c.clone()));
        if window.len() > 51 {
            window.pop_front();
        }
        if window.len() == 51 {
            let (old_value, old_c) = &window[0];
            let moved = norm(&old_c.iter().zip(&best_c).map(|(a, b)| a - b).collect::<Vec<_>>());
            if old_value - best_value < cfg.tol_obj * (1.0 + best_value) && moved < cfg.tol_coeff {
                break;
            }
        }
    }

    let mut c = best_c;
    let mut value = best_value;
    let mut radius = step0.max(1e-3 * (1.0 + norm(&c)));
    for _ in 0..cfg.polish_sweeps.min(cfg.max_iters) {
        for j in 0..n {
            let base = c.clone();
            let (t, v) = golden_min(
                |t| {
                    let mut trial = base.clone();
                    trial[j] += t;
                    obj.value(&trial)
                },
                -radius,
                radius,
                48,
            );
            if v < value {
                c[j] += t;
                value = v;
            }
        }
        radius *= 0.5;
    }

    let polished = c.clone();
    let outcome = refine(obj, &mut c, cfg.refine_steps.min(cfg.max_iters));
    let refined = obj.checked_value(&c)?;
    let (coeffs, modular_value) = if refined <= value { (c, refined) } else { (polished, value) };

    Ok((
        BestApproxSolution {
            coeffs,
            modular_value,
            iterations: iterations + outcome.steps,
            converged: outcome.stationary,
            start_id,
        },
        history,
    ))
}

/// Seeded Gaussian starts, coordinate `j` scaled by `‖f‖∞ / ‖δⱼ‖∞`.
pub fn start_points(f: &GridFunction, s: &Subspace, cfg: &SolverConfig) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let scale = f.sup_norm().max(1e-3);
    let sups = s.sup_norms();
    (0..cfg.n_starts)
        .map(|_| {
            sups.iter()
                .map(|&b| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    scale * z / b.max(f64::MIN_POSITIVE)
                })
                .collect()
        })
        .collect()
}

/// Runs every start and returns all results in start order.
pub fn solve_all(
    f: &GridFunction,
    s: &Subspace,
    phi: &PhiFunction,
    cfg: &SolverConfig,
) -> Result<Vec<BestApproxSolution>> {
    cfg.validate()?;
    let obj = Objective::new(f, s, phi)?;
    let starts = start_points(f, s, cfg);
    starts
        .into_par_iter()
        .enumerate()
        .map(|(id, start)| run_start(&obj, cfg, start, id).map(|(sol, _)| sol))
        .collect()
}

/// Best of `n_starts` runs, ties broken by start id.
pub fn solve(
    f: &GridFunction,
    s: &Subspace,
    phi: &PhiFunction,
    cfg: &SolverConfig,
) -> Result<BestApproxSolution> {
    let all = solve_all(f, s, phi, cfg)?;
    Ok(all
        .into_iter()
        .min_by(|a, b| {
            a.modular_value
                .total_cmp(&b.modular_value)
                .then(a.start_id.cmp(&b.start_id))
        })
        .expect("at least one start"))
}

/// Exhaustive search over a box with `resolution` points per coordinate
/// (endpoints included). Only for `n ≤ 3`.
pub fn brute_force_oracle(
    f: &GridFunction,
    s: &Subspace,
    phi: &PhiFunction,
    bounds: &[(f64, f64)],
    resolution: usize,
) -> Result<BestApproxSolution> {
    brute_force_zoom(f, s, phi, bounds, resolution, 1)
}

/// [`brute_force_oracle`] repeated `levels` times, each pass re-gridding
/// `±1.5` cells around the previous minimizer.
pub fn brute_force_zoom(
    f: &GridFunction,
    s: &Subspace,
    phi: &PhiFunction,
    bounds: &[(f64, f64)],
    resolution: usize,
    levels: usize,
) -> Result<BestApproxSolution> {
    let n = s.dim();
    if n > 3 {
        return Err(invalid("dimension", format!("brute force supports n <= 3, got {n}")));
    }
    if resolution < 10 {
        return Err(invalid("resolution", "need at least 10 points per coordinate"));
    }
    if bounds.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bounds.len(),
        });
    }
    if bounds.iter().any(|(lo, hi)| !(lo <= hi)) {
        return Err(invalid("bounds", "each interval needs lo <= hi"));
    }
    let obj = Objective::new(f, s, phi)?;
    let mut bounds = bounds.to_vec();
    let mut best = (f64::INFINITY, vec![0.0; n]);
    let mut evaluations = 0;
    for _ in 0..levels.max(1) {
        let axis = |j: usize, k: usize| {
            let (lo, hi) = bounds[j];
            lo + (hi - lo) * k as f64 / (resolution - 1) as f64
        };
        let total = resolution.pow(n as u32);
        let level_best = (0..total)
            .into_par_iter()
            .map(|idx| {
                let mut rest = idx;
                let c: Vec<f64> = (0..n)
                    .map(|j| {
                        let k = rest % resolution;
                        rest /= resolution;
                        axis(j, k)
                    })
                    .collect();
                (obj.value(&c), idx, c)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .expect("non-empty search grid");
        evaluations += total;
        if level_best.0 < best.0 {
            best = (level_best.0, level_best.2);
        }
        bounds = bounds
            .iter()
            .zip(&best.1)
            .map(|(&(lo, hi), &c)| {
                let cell = (hi - lo) / (resolution - 1) as f64;
                (c - 1.5 * cell, c + 1.5 * cell)
            })
            .collect();
    }
    if !best.0.is_finite() {
        return Err(invalid("bounds", "objective is not finite anywhere in the box"));
    }
    Ok(BestApproxSolution {
        coeffs: best.1,
        modular_value: best.0,
        iterations: evaluations,
        converged: true,
        start_id: 0,
    })
}

/// Weighted least-squares coefficients (the `Φ(x) = x²` minimizer).
pub fn least_squares(f: &GridFunction, s: &Subspace) -> Result<Vec<f64>> {
    if !same_grid(f.grid(), s.grid()) {
        return Err(Error::GridMismatch);
    }
    let w = s.grid().weights();
    let rhs = DVector::from_fn(s.dim(), |j, _| {
        s.basis_values(j)
            .iter()
            .zip(f.values())
            .zip(w)
            .map(|((b, f), w)| w * b * f)
            .sum()
    });
    let gram = s.gram();
    let sol = gram
        .lu()
        .solve(&rhs)
        .ok_or(Error::DependentBasis { ratio: 0.0 })?;
    Ok(sol.as_slice().to_vec())
}
