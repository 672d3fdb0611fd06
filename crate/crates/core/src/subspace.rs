//! Finite-dimensional approximation classes sampled on a grid, with randomized
//! probes for the Tchebycheff (Haar), 0-space and 1-space properties.
//!
//! Grid probes only see nodes. A pass verdict means no counterexample was drawn;
//! a fail verdict always carries a witness that can be re-evaluated.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{measure, Grid, GridFunction, NodeSet};

/// An `n`-dimensional span of basis functions sampled on a grid.
#[derive(Debug, Clone)]
pub struct Subspace {
    grid: Arc<Grid>,
    basis: Vec<Vec<f64>>,
    labels: Vec<String>,
}

impl Subspace {
    /// Wraps sampled basis functions, rejecting numerically dependent ones.
    pub fn new(grid: Arc<Grid>, basis: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        if basis.is_empty() {
            return Err(invalid("basis", "need at least one basis element"));
        }
        if labels.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: labels.len(),
            });
        }
        if basis.len() > grid.len() {
            return Err(invalid("basis", "more basis elements than grid nodes"));
        }
        for col in &basis {
            if col.len() != grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    got: col.len(),
                });
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(invalid("basis", "non-finite basis value"));
            }
        }
        let s = Subspace { grid, basis, labels };
        let sv = s.gram().svd(false, false).singular_values;
        let max = sv.max();
        let min = sv.min();
        if !(max > 0.0) || min <= 1e-10 * max {
            return Err(Error::DependentBasis {
                ratio: if max > 0.0 { min / max } else { 0.0 },
            });
        }
        Ok(s)
    }

    /// `1, x, …, x^(n−1)` sampled on the grid.
    pub fn monomial(grid: &Arc<Grid>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "dimension must be at least 1"));
        }
        if n > grid.len() {
            return Err(invalid("n", format!("dimension {n} exceeds node count {}", grid.len())));
        }
        let basis = (0..n)
            .map(|k| grid.nodes().iter().map(|x| x.powi(k as i32)).collect())
            .collect();
        let labels = (0..n).map(|k| format!("x^{k}")).collect();
        Subspace::new(grid.clone(), basis, labels)
    }

    /// Continuous piecewise-linear hats on the given knots, extended as constants
    /// beyond the outer knots so that they sum to 1 on all of `[a, b]`.
    pub fn hat(grid: &Arc<Grid>, knots: &[f64]) -> Result<Self> {
        if knots.is_empty() {
            return Err(invalid("knots", "need at least one knot"));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("knots", "knots must be strictly increasing"));
        }
        if knots[0] < grid.a() || knots[knots.len() - 1] > grid.b() {
            return Err(invalid("knots", "knots must lie in [a, b]"));
        }
        let basis = (0..knots.len())
            .map(|j| grid.nodes().iter().map(|&x| hat_value(knots, j, x)).collect())
            .collect();
        let labels = knots.iter().map(|k| format!("hat@{k}")).collect();
        Subspace::new(grid.clone(), basis, labels)
    }

    /// Loads a basis from CSV: a `node` column followed by one column per element.
    pub fn from_csv(grid: &Arc<Grid>, path: impl AsRef<Path>) -> Result<Self> {
        let mut r = crate::error::open_csv(path.as_ref())?;
        let headers = r.headers()?.clone();
        if headers.len() < 2 {
            return Err(invalid("csv", "need a node column and at least one basis column"));
        }
        let n = headers.len() - 1;
        let labels = headers.iter().skip(1).map(str::to_owned).collect();
        let mut basis = vec![Vec::with_capacity(grid.len()); n];
        let tol = 1e-9 * (grid.b() - grid.a());
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| invalid("csv", format!("row {i}, column {k} is not a number")))
            };
            let x = parse(0)?;
            match grid.nodes().get(i) {
                Some(&node) if (node - x).abs() <= tol => {}
                _ => return Err(invalid("csv", format!("row {i}: node {x} does not match the grid"))),
            }
            for (j, col) in basis.iter_mut().enumerate() {
                col.push(parse(j + 1)?);
            }
        }
        Subspace::new(grid.clone(), basis, labels)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn basis_values(&self, j: usize) -> &[f64] {
        &self.basis[j]
    }

    pub fn basis_element(&self, j: usize) -> GridFunction {
        GridFunction::new(self.grid.clone(), self.basis[j].clone())
            .expect("basis values are validated at construction")
    }

    /// `Σ cⱼ δⱼ` at every node.
    pub fn evaluate(&self, coeffs: &[f64]) -> Result<GridFunction> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: coeffs.len(),
            });
        }
        GridFunction::new(self.grid.clone(), self.combine(coeffs))
    }

    pub(crate) fn combine(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (c, col) in coeffs.iter().zip(&self.basis) {
            if *c == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(col) {
                *o += c * v;
            }
        }
        out
    }

    /// Weighted Gram matrix `Σᵢ wᵢ δⱼ(xᵢ) δₖ(xᵢ)`.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.dim();
        let w = self.grid.weights();
        DMatrix::from_fn(n, n, |j, k| {
            self.basis[j]
                .iter()
                .zip(&self.basis[k])
                .zip(w)
                .map(|((a, b), w)| w * a * b)
                .sum()
        })
    }

    pub(crate) fn sup_norms(&self) -> Vec<f64> {
        self.basis
            .iter()
            .map(|col| col.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
            .collect()
    }
}

fn hat_value(knots: &[f64], j: usize, x: f64) -> f64 {
    let m = knots.len();
    if m == 1 {
        return 1.0;
    }
    let t = knots[j];
    if x <= t {
        if j == 0 {
            1.0
        } else if x <= knots[j - 1] {
            0.0
        } else {
            (x - knots[j - 1]) / (t - knots[j - 1])
        }
    } else if j == m - 1 {
        1.0
    } else if x >= knots[j + 1] {
        0.0
    } else {
        (knots[j + 1] - x) / (knots[j + 1] - t)
    }
}

/// Counts sign changes between consecutive nodes with `|v| > η`; runs of
/// `η`-zeros are skipped, so a crossing through a zero run counts once.
pub fn count_sign_changes(values: &[f64], eta: f64) -> usize {
    let mut last = 0i8;
    let mut changes = 0;
    for &v in values {
        if v.abs() <= eta {
            continue;
        }
        let s = if v > 0.0 { 1 } else { -1 };
        if last != 0 && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

/// Zero count at grid resolution: every run of `η`-zero nodes counts as one zero,
/// and every direct sign change between adjacent nonzero nodes counts as one more.
/// Returns the count and the index of the first zero found.
pub fn count_zeros(values: &[f64], eta: f64) -> (usize, Option<usize>) {
    let mut zeros = 0;
    let mut first = None;
    let mut prev: Option<i8> = None;
    let mut in_run = false;
    for (i, &v) in values.iter().enumerate() {
        if v.abs() <= eta {
            if !in_run {
                zeros += 1;
                first.get_or_insert(i);
                in_run = true;
            }
            prev = Some(0);
            continue;
        }
        in_run = false;
        let s = if v > 0.0 { 1 } else { -1 };
        if let Some(p) = prev {
            if p != 0 && p != s {
                zeros += 1;
                first.get_or_insert(i);
            }
        }
        prev = Some(s);
    }
    (zeros, first)
}

/// A re-checkable counterexample produced by a structural probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeWitness {
    pub coeffs: Vec<f64>,
    pub node: usize,
    pub x: f64,
    /// Zero count for the Tchebycheff probe, zero-set measure for the 0-space probe.
    pub evidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ProbeVerdict {
    Pass,
    Fail { witness: ProbeWitness },
    Inconclusive,
}

impl ProbeVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, ProbeVerdict::Pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub tchebycheff_verdict: ProbeVerdict,
    pub one_space_witness: Option<Vec<f64>>,
    pub zero_space_verdict: ProbeVerdict,
    pub trials: usize,
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Rescales `v` to unit sup norm; `None` for a numerically zero element.
fn normalized(v: &mut [f64], scale: &mut [f64], eta: f64) -> bool {
    let sup = v.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    if sup <= eta {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= sup);
    scale.iter_mut().for_each(|c| *c /= sup);
    true
}

/// Draws random elements and looks for one with `n` or more zeros.
pub fn tchebycheff_verdict(s: &Subspace, trials: usize, rng_seed: u64) -> ProbeVerdict {
    let eta = s.grid.equality_tol();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut informative = 0;
    for _ in 0..trials {
        let mut coeffs = gaussian(&mut rng, s.dim());
        let mut v = s.combine(&coeffs);
        if !normalized(&mut v, &mut coeffs, eta) {
            continue;
        }
        informative += 1;
        let (zeros, first) = count_zeros(&v, eta);
        if zeros >= s.dim() {
            let node = first.unwrap_or(0);
            return ProbeVerdict::Fail {
                witness: ProbeWitness {
                    coeffs,
                    node,
                    x: s.grid.nodes()[node],
                    evidence: zeros as f64,
                },
            };
        }
    }
    if informative == 0 {
        ProbeVerdict::Inconclusive
    } else {
        ProbeVerdict::Pass
    }
}

/// Looks for a nonzero element (equivalently a pair `P₁ ≠ P₂`) whose `η`-zero set
/// has measure above `10·η·(b − a)`. Basis elements and pairwise differences are
/// tried before random draws.
pub fn zero_space_verdict(s: &Subspace, trials: usize, rng_seed: u64) -> ProbeVerdict {
    let n = s.dim();
    let eta = s.grid.equality_tol();
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        candidates.push(e);
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e[k] = -1.0;
            candidates.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    candidates.extend((0..trials).map(|_| gaussian(&mut rng, n)));

    for mut coeffs in candidates {
        let mut v = s.combine(&coeffs);
        if !normalized(&mut v, &mut coeffs, eta) {
            continue;
        }
        let zero = NodeSet::new(v.iter().map(|x| x.abs() <= eta).collect());
        let m = measure(&s.grid, &zero).expect("mask built from the same grid");
        if m > s.grid.measure_tol() {
            let node = zero.mask().iter().position(|&z| z).unwrap_or(0);
            return ProbeVerdict::Fail {
                witness: ProbeWitness {
                    coeffs,
                    node,
                    x: s.grid.nodes()[node],
                    evidence: m,
                },
            };
        }
    }
    ProbeVerdict::Pass
}

/// Full structural report: Tchebycheff and 0-space probes plus a 1-space witness.
pub fn tchebycheff_probe(s: &Subspace, trials: usize, rng_seed: u64) -> StructureReport {
    StructureReport {
        tchebycheff_verdict: tchebycheff_verdict(s, trials, rng_seed),
        one_space_witness: one_space_witness(s, 40),
        zero_space_verdict: zero_space_verdict(s, trials, rng_seed.wrapping_add(1)),
        trials,
    }
}

fn min_over_norm(s: &Subspace, c: &[f64]) -> f64 {
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return f64::NEG_INFINITY;
    }
    s.combine(c).into_iter().fold(f64::INFINITY, f64::min) / norm
}

/// Searches for `h ∈ S` with `h > 0` at every node by maximizing
/// `minᵢ h(xᵢ) / ‖c‖₂` with multi-start coordinate ascent. The returned
/// coefficients are rescaled so their largest magnitude is 1.
pub fn one_space_witness(s: &Subspace, iterations: usize) -> Option<Vec<f64>> {
    let n = s.dim();
    let mut starts: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        starts.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    starts.extend((0..4).map(|_| gaussian(&mut rng, n)));

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mut c in starts {
        let mut value = min_over_norm(s, &c);
        let mut radius = 0.5;
        for _ in 0..iterations {
            for j in 0..n {
                let (t, v) = golden_max(
                    |t| {
                        let mut trial = c.clone();
                        trial[j] = t;
                        min_over_norm(s, &trial)
                    },
                    c[j] - radius,
                    c[j] + radius,
                    40,
                );
                if v > value + 1e-14 {
                    c[j] = t;
                    value = v;
                }
            }
            radius *= 0.7;
        }
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, c));
        }
    }
    let (value, c) = best?;
    if value > 0.0 {
        let scale = c.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        Some(c.into_iter().map(|x| x / scale).collect())
    } else {
        None
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
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
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
