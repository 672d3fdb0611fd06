//! Empirical uniqueness experiments and the non-uniqueness witness for
//! generators that are constant near zero.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::certify::{check_characterization, default_tol, is_gamma_set, CertifyOptions};
use crate::error::{invalid, Error, Result};
use crate::grid::{measure, modular, Grid, GridFunction, NodeSet};
use crate::phi::PhiFunction;
use crate::solver::{solve_all, BestApproxSolution, SolverConfig};
use crate::subspace::{count_sign_changes, one_space_witness, Subspace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Coefficients of the member with the smallest modular value.
    pub representative: Vec<f64>,
    pub modular_value: f64,
    /// Largest distance from the representative to a member.
    pub radius: f64,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum UniquenessVerdict {
    Singleton,
    Multiple { diameter: f64 },
    Inconclusive { reason: String },
}

impl UniquenessVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            UniquenessVerdict::Singleton => "singleton",
            UniquenessVerdict::Multiple { .. } => "multiple",
            UniquenessVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub instance: String,
    pub theorem_tag: String,
    pub clusters: Vec<Cluster>,
    pub verdict: UniquenessVerdict,
    /// Largest distance between any two solver outputs.
    pub diameter: f64,
    /// Clusters are more than 10× the largest radius apart.
    pub well_separated: bool,
    pub n_starts: usize,
    pub converged_starts: usize,
}

impl UniquenessReport {
    pub fn representatives(&self) -> Vec<&[f64]> {
        self.clusters.iter().map(|c| c.representative.as_slice()).collect()
    }

    pub fn with_labels(mut self, instance: impl Into<String>, theorem_tag: impl Into<String>) -> Self {
        self.instance = instance.into();
        self.theorem_tag = theorem_tag.into();
        self
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut i = i;
    while parent[i] != r {
        let next = parent[i];
        parent[i] = r;
        i = next;
    }
    r
}

/// Single-linkage clusters at distance `threshold`, ordered by first member.
pub fn cluster_solutions(solutions: &[BestApproxSolution], threshold: f64) -> Vec<Cluster> {
    let m = solutions.len();
    let mut parent: Vec<usize> = (0..m).collect();
    for i in 0..m {
        for j in i + 1..m {
            if dist(&solutions[i].coeffs, &solutions[j].coeffs) <= threshold {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..m {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(i),
            None => groups.push((root, vec![i])),
        }
    }
    groups
        .into_iter()
        .map(|(_, idx)| {
            let rep = *idx
                .iter()
                .min_by(|&&a, &&b| {
                    solutions[a]
                        .modular_value
                        .total_cmp(&solutions[b].modular_value)
                        .then(solutions[a].start_id.cmp(&solutions[b].start_id))
                })
                .expect("nonempty cluster");
            let representative = solutions[rep].coeffs.clone();
            let radius = idx
                .iter()
                .map(|&i| dist(&solutions[i].coeffs, &representative))
                .fold(0.0, f64::max);
            Cluster {
                representative,
                modular_value: solutions[rep].modular_value,
                radius,
                members: idx.iter().map(|&i| solutions[i].start_id).collect(),
            }
        })
        .collect()
}

/// Runs the solver from `n_starts` seeded starts and clusters the outputs at
/// `10³·tol_coeff`. `Multiple` needs every cluster representative to reach the
/// smallest modular value and to pass the certificate; anything else that
/// yields several clusters is `Inconclusive`, as is any non-converged start.
pub fn uniqueness_probe(
    f: &GridFunction,
    s: &Subspace,
    phi: &PhiFunction,
    cfg: &SolverConfig,
    n_starts: usize,
) -> Result<UniquenessReport> {
    if n_starts == 0 {
        return Err(invalid("n_starts", "must be positive"));
    }
    let cfg = SolverConfig {
        n_starts,
        ..cfg.clone()
    };
    let solutions = solve_all(f, s, phi, &cfg)?;
    let clusters = cluster_solutions(&solutions, 1e3 * cfg.tol_coeff);

    let mut diameter: f64 = 0.0;
    for (i, a) in solutions.iter().enumerate() {
        for b in &solutions[i + 1..] {
            diameter = diameter.max(dist(&a.coeffs, &b.coeffs));
        }
    }
    let max_radius = clusters.iter().map(|c| c.radius).fold(0.0, f64::max);
    let mut well_separated = true;
    for (i, a) in clusters.iter().enumerate() {
        for b in &clusters[i + 1..] {
            well_separated &= dist(&a.representative, &b.representative) > 10.0 * max_radius;
        }
    }
    let converged_starts = solutions.iter().filter(|s| s.converged).count();

    let verdict = if converged_starts < solutions.len() {
        UniquenessVerdict::Inconclusive {
            reason: format!("{} of {} starts did not converge", solutions.len() - converged_starts, solutions.len()),
        }
    } else if clusters.len() == 1 {
        UniquenessVerdict::Singleton
    } else {
        let best = clusters.iter().map(|c| c.modular_value).fold(f64::INFINITY, f64::min);
        let tol = default_tol(best);
        let opts = CertifyOptions {
            tol: Some(tol),
            seed: cfg.rng_seed,
            ..CertifyOptions::default()
        };
        let mut reason = None;
        for (i, c) in clusters.iter().enumerate() {
            if c.modular_value > best + tol {
                reason = Some(format!("cluster {i} has modular {} above the minimum {best}", c.modular_value));
                break;
            }
            let p = s.evaluate(&c.representative)?;
            if !check_characterization(f, &p, s, phi, &opts)?.verdict {
                reason = Some(format!("cluster {i} representative fails the certificate"));
                break;
            }
        }
        match reason {
            None => {
                let mut d: f64 = 0.0;
                for (i, a) in clusters.iter().enumerate() {
                    for b in &clusters[i + 1..] {
                        d = d.max(dist(&a.representative, &b.representative));
                    }
                }
                UniquenessVerdict::Multiple { diameter: d }
            }
            Some(reason) => UniquenessVerdict::Inconclusive { reason },
        }
    };

    Ok(UniquenessReport {
        instance: String::new(),
        theorem_tag: String::new(),
        clusters,
        verdict,
        diameter,
        well_separated,
        n_starts,
        converged_starts,
    })
}

/// Sign changes of `f − p` with `η`-zeros collapsed.
pub fn residual_sign_changes(f: &GridFunction, p: &GridFunction) -> Result<usize> {
    let r = f.sub(p)?;
    Ok(count_sign_changes(r.values(), f.grid().equality_tol()))
}

/// Seeded random continuous target: a trigonometric sum of degree 5 in
/// `t = (x − a)/(b − a)` with coefficients `N(0, 1)·amplitude/(1 + k)`.
pub fn random_target(grid: &Arc<Grid>, amplitude: f64, seed: u64) -> Result<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coef = [[0.0; 2]; 6];
    for (k, c) in coef.iter_mut().enumerate() {
        for v in c.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = amplitude * z / (1.0 + k as f64);
        }
    }
    let (a, b) = (grid.a(), grid.b());
    crate::grid::sample(grid, |x| {
        let t = (x - a) / (b - a);
        coef.iter()
            .enumerate()
            .map(|(k, [u, v])| u * (k as f64 * PI * t).cos() + v * (k as f64 * PI * t).sin())
            .sum()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonUniqWitness {
    pub p3: Vec<f64>,
    #[serde(serialize_with = "node_values")]
    pub h: GridFunction,
    pub epsilons: Vec<f64>,
    /// `|modular(h − εP₃) − modular(h)|` per epsilon.
    pub gaps: Vec<f64>,
    pub modular_gap: f64,
    pub k: f64,
    pub c: f64,
}

fn node_values<S: serde::Serializer>(g: &GridFunction, ser: S) -> std::result::Result<S::Ok, S::Error> {
    g.values().serialize(ser)
}

pub const DEFAULT_EPSILONS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn eta_zeros(values: &[f64], eta: f64) -> NodeSet {
    NodeSet::new(values.iter().map(|v| v.abs() <= eta).collect())
}

/// Builds `h = |P₃|·sgn(f − p₁)` and measures how far `εP₃` moves the modular.
///
/// Requires an affine head `Φ(x) = kx` on `[0, c]`, `P₃ ≠ 0`, `‖P₃‖∞ ≤ c/2`,
/// `‖f − p₁‖∞ ≤ c` and `Z(f − p₁) ⊆ Z(P₃)` at tolerance `η`.
pub fn build_nonuniq_witness(
    s: &Subspace,
    phi: &PhiFunction,
    p3_coeffs: &[f64],
    f: &GridFunction,
    p1: &GridFunction,
    epsilons: Option<&[f64]>,
) -> Result<NonUniqWitness> {
    let (k, c) = phi
        .affine_head()
        .ok_or_else(|| Error::Precondition("generator has no affine segment [0, c] (Φ(x) = kx near 0)".into()))?;
    let p3 = s.evaluate(p3_coeffs)?;
    let r = f.sub(p1)?;
    f.check_same_grid(&p3)?;
    let eta = f.grid().equality_tol();

    let p3_sup = p3.sup_norm();
    if p3_sup <= eta {
        return Err(Error::Precondition("P3 must be nonzero".into()));
    }
    if p3_sup > c / 2.0 * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("bound ‖P3‖∞ ≤ c/2 violated: {p3_sup} > {}", c / 2.0)));
    }
    let r_sup = r.sup_norm();
    if r_sup > c * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("bound ‖f − p1‖∞ ≤ c violated: {r_sup} > {c}")));
    }
    if !eta_zeros(r.values(), eta).is_subset_of(&eta_zeros(p3.values(), eta)) {
        return Err(Error::Precondition("zero set of f − p1 is not contained in the zero set of P3".into()));
    }

    let epsilons = epsilons.map_or_else(|| DEFAULT_EPSILONS.to_vec(), <[f64]>::to_vec);
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(invalid("epsilons", format!("{e} is outside (0, 1)")));
    }

    let h_values = p3
        .values()
        .iter()
        .zip(r.values())
        .map(|(q, r)| if r.abs() <= eta { 0.0 } else { q.abs() * r.signum() })
        .collect();
    let h = GridFunction::new(f.grid().clone(), h_values)?;
    let base = modular(phi, &h);
    let gaps = epsilons
        .iter()
        .map(|&e| Ok((modular(phi, &h.combine(1.0, &p3, -e)?) - base).abs()))
        .collect::<Result<Vec<_>>>()?;
    let modular_gap = gaps.iter().copied().fold(0.0, f64::max);
    Ok(NonUniqWitness {
        p3: p3_coeffs.to_vec(),
        h,
        epsilons,
        gaps,
        modular_gap,
        k,
        c,
    })
}

/// Whether `{|f − p₁| > c}` has measure above `10·η·(b − a)`.
pub fn condition_b_check(f: &GridFunction, p1: &GridFunction, phi: &PhiFunction) -> Result<bool> {
    let (_, c) = phi
        .affine_head()
        .ok_or_else(|| Error::Precondition("generator has no affine segment [0, c]".into()))?;
    let r = f.sub(p1)?;
    let set = NodeSet::new(r.values().iter().map(|v| v.abs() > c).collect());
    let grid = f.grid();
    Ok(measure(grid, &set)? > grid.measure_tol())
}

/// A nonzero span element (unit coefficient norm) that is `η`-small on `set`,
/// if one exists. Found from the smallest right singular vector of the basis
/// restricted to `set`.
pub fn vanishing_element(s: &Subspace, set: &NodeSet) -> Option<Vec<f64>> {
    let rows: Vec<usize> = set.mask().iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i).collect();
    let n = s.dim();
    if rows.len() < n {
        // an underdetermined system always has a null vector
        let m = DMatrix::from_fn(n, n, |i, j| if i < rows.len() { s.basis_values(j)[rows[i]] } else { 0.0 });
        return smallest_singular(&m);
    }
    let m = DMatrix::from_fn(rows.len(), n, |i, j| s.basis_values(j)[rows[i]]);
    let c = smallest_singular(&m)?;
    let eta = s.grid().equality_tol();
    let values = s.combine(&c);
    rows.iter().all(|&i| values[i].abs() <= eta).then_some(c)
}

fn smallest_singular(m: &DMatrix<f64>) -> Option<Vec<f64>> {
    let gram = m.transpose() * m;
    let eig = gram.symmetric_eigen();
    let j = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?.0;
    Some(eig.eigenvectors.column(j).iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionA {
    /// `Z(f)` is a γ-set.
    pub gamma_set: bool,
    /// A nonzero element vanishing on `Z(f)`, when one exists.
    pub vanishing: Option<Vec<f64>>,
}

/// Checks the γ-set part of condition (a) for the zero set of one `f`.
pub fn condition_a_check(
    f: &GridFunction,
    s: &Subspace,
    phi: &PhiFunction,
    opts: &CertifyOptions,
) -> Result<ConditionA> {
    let gamma_set = is_gamma_set(f, s, phi, opts)?;
    let zeros = eta_zeros(f.values(), f.grid().equality_tol());
    Ok(ConditionA {
        gamma_set,
        vanishing: vanishing_element(s, &zeros),
    })
}

/// Uniqueness probes over seeded random targets, one report per instance.
#[allow(clippy::too_many_arguments)]
pub fn random_suite(
    s: &Subspace,
    phi: &PhiFunction,
    n_instances: usize,
    rng_seed: u64,
    amplitude: f64,
    cfg: &SolverConfig,
    n_starts: usize,
    theorem_tag: &str,
) -> Result<Vec<UniquenessReport>> {
    (0..n_instances)
        .map(|i| {
            let seed = rng_seed.wrapping_add(i as u64);
            let f = random_target(s.grid(), amplitude, seed)?;
            let cfg = SolverConfig {
                rng_seed: seed,
                ..cfg.clone()
            };
            Ok(uniqueness_probe(&f, s, phi, &cfg, n_starts)?.with_labels(format!("random-{i}"), theorem_tag))
        })
        .collect()
}

pub const JUMP_SUITE_TAG: &str = "jump-generator-1-space";

/// Random-target suite for a jump generator over a 1-space. Rejects spaces
/// without a positive element.
pub fn jump_phi_uniqueness_suite(
    s: &Subspace,
    phi: &PhiFunction,
    n_instances: usize,
    rng_seed: u64,
    amplitude: f64,
    cfg: &SolverConfig,
    n_starts: usize,
) -> Result<Vec<UniquenessReport>> {
    if one_space_witness(s, 30).is_none() {
        return Err(Error::Precondition("subspace has no strictly positive element".into()));
    }
    random_suite(s, phi, n_instances, rng_seed, amplitude, cfg, n_starts, JUMP_SUITE_TAG)
}

/// Writes `instance,theorem_tag,verdict,diameter` rows to a file.
pub fn write_suite_csv(reports: &[UniquenessReport], path: impl AsRef<Path>) -> Result<()> {
    write_suite(reports, std::fs::File::create(path)?)
}

/// Writes `instance,theorem_tag,verdict,diameter` rows.
pub fn write_suite(reports: &[UniquenessReport], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["instance", "theorem_tag", "verdict", "diameter"])?;
    for r in reports {
        w.write_record([
            r.instance.as_str(),
            r.theorem_tag.as_str(),
            r.verdict.name(),
            &r.diameter.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample;
    use crate::phi::{make_linear_then_convex_phi, make_power_phi};

    fn unit(n: usize) -> Arc<Grid> {
        Grid::uniform(0.0, 1.0, n, 1e-9).unwrap()
    }

    #[test]
    fn strictly_convex_is_singleton() {
        let grid = unit(501);
        let s = Subspace::monomial(&grid, 3).unwrap();
        let f = random_target(&grid, 1.0, 3).unwrap();
        let sq = make_power_phi(2.0).unwrap();
        let rep = uniqueness_probe(&f, &s, &sq, &SolverConfig::default(), 16).unwrap();
        assert_eq!(rep.verdict, UniquenessVerdict::Singleton);
        assert!(rep.diameter < 1e-3);
        assert_eq!(rep.clusters[0].members.len(), 16);
    }

    #[test]
    fn step_median_plateau_is_multiple() {
        let grid = unit(1000);
        let s = Subspace::monomial(&grid, 1).unwrap();
        let f = sample(&grid, |x| if x < 0.5 { -1.0 } else { 1.0 }).unwrap();
        let l1 = make_power_phi(1.0).unwrap();
        let rep = uniqueness_probe(&f, &s, &l1, &SolverConfig::default(), 16).unwrap();
        assert!(matches!(rep.verdict, UniquenessVerdict::Multiple { diameter } if diameter > 0.1));
        for c in &rep.clusters {
            assert!(c.representative[0].abs() <= 1.0 + 1e-9);
            assert!((c.modular_value - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn span_target_is_singleton() {
        let grid = unit(301);
        let s = Subspace::monomial(&grid, 2).unwrap();
        let f = s.evaluate(&[0.5, -1.0]).unwrap();
        let rep = uniqueness_probe(&f, &s, &make_power_phi(1.0).unwrap(), &SolverConfig::default(), 8).unwrap();
        assert_eq!(rep.verdict, UniquenessVerdict::Singleton);
        assert!(dist(&rep.clusters[0].representative, &[0.5, -1.0]) < 1e-6);
    }

    #[test]
    fn forced_non_convergence_is_inconclusive() {
        let grid = unit(301);
        let s = Subspace::monomial(&grid, 3).unwrap();
        let f = random_target(&grid, 1.0, 1).unwrap();
        let cfg = SolverConfig {
            max_iters: 1,
            ..SolverConfig::default()
        };
        let rep = uniqueness_probe(&f, &s, &make_power_phi(1.0).unwrap(), &cfg, 4).unwrap();
        assert!(matches!(rep.verdict, UniquenessVerdict::Inconclusive { .. }));
    }

    #[test]
    fn clustering_assigns_every_start() {
        let sol = |c: f64, v: f64, id| BestApproxSolution {
            coeffs: vec![c],
            modular_value: v,
            iterations: 0,
            converged: true,
            start_id: id,
        };
        let sols = [sol(0.0, 1.0, 0), sol(5.0, 1.0, 1), sol(0.0005, 0.5, 2), sol(5.0, 1.0, 3)];
        let cl = cluster_solutions(&sols, 1e-3);
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[0].members, vec![0, 2]);
        assert_eq!(cl[0].representative, vec![0.0005]);
        assert_eq!(cl[1].members, vec![1, 3]);
    }

    #[test]
    fn sign_change_examples() {
        let grid = unit(1000);
        let s = Subspace::monomial(&grid, 2).unwrap();
        let f = sample(&grid, |x| x * x).unwrap();
        let p = s.evaluate(&[-1.0 / 6.0, 1.0]).unwrap();
        assert_eq!(residual_sign_changes(&f, &p).unwrap(), 2);
        let below = sample(&grid, |_| -1.0).unwrap();
        assert_eq!(residual_sign_changes(&f, &below).unwrap(), 0);
    }

    fn witness_instance() -> (Arc<Grid>, Subspace, GridFunction, GridFunction) {
        let grid = unit(2000);
        let s = Subspace::monomial(&grid, 2).unwrap();
        let p1 = s.evaluate(&[0.2, 0.1]).unwrap();
        let r = sample(&grid, |x| {
            let t = 2.0 * x - 1.0;
            0.4 * (4.0 * t * t - 1.0) / 3.0
        })
        .unwrap();
        let f = p1.combine(1.0, &r, 1.0).unwrap();
        (grid, s, f, p1)
    }

    #[test]
    fn witness_has_flat_modular_and_certifies() {
        let (_, s, f, p1) = witness_instance();
        let phi = make_linear_then_convex_phi(1.0, 1.0, 2.0).unwrap();
        let w = build_nonuniq_witness(&s, &phi, &[0.3, 0.0], &f, &p1, None).unwrap();
        assert_eq!(w.epsilons.len(), 9);
        assert!(w.modular_gap < 1e-8, "{}", w.modular_gap);
        for e in [0.25, 0.75] {
            let p = s.evaluate(&[0.3 * e, 0.0]).unwrap();
            assert!(check_characterization(&w.h, &p, &s, &phi, &CertifyOptions::default()).unwrap().verdict);
        }
        assert!(!condition_b_check(&f, &p1, &phi).unwrap());
    }

    #[test]
    fn witness_preconditions() {
        let (_, s, f, p1) = witness_instance();
        let phi = make_linear_then_convex_phi(1.0, 1.0, 2.0).unwrap();
        let err = |c: &[f64], phi: &PhiFunction| build_nonuniq_witness(&s, phi, c, &f, &p1, None).unwrap_err().to_string();
        assert!(err(&[0.0, 0.0], &phi).contains("nonzero"));
        assert!(err(&[0.6, 0.0], &phi).contains("c/2"));
        assert!(err(&[0.3, 0.0], &make_power_phi(2.0).unwrap()).contains("affine"));
        let narrow = make_linear_then_convex_phi(1.0, 0.3, 2.0).unwrap();
        assert!(err(&[0.1, 0.0], &narrow).contains("‖f − p1‖∞"));
    }

    #[test]
    fn condition_b_examples() {
        let grid = unit(1000);
        let phi = make_linear_then_convex_phi(1.0, 1.0, 2.0).unwrap();
        let zero = GridFunction::zeros(&grid);
        assert!(!condition_b_check(&sample(&grid, |_| 0.5).unwrap(), &zero, &phi).unwrap());
        assert!(condition_b_check(&sample(&grid, |_| 2.0).unwrap(), &zero, &phi).unwrap());
        let f = sample(&grid, |x| if (0.2..0.5).contains(&x) { 1.5 } else { 0.1 }).unwrap();
        let set = NodeSet::new(f.values().iter().map(|v| v.abs() > 1.0).collect());
        assert!((measure(&grid, &set).unwrap() - 0.3).abs() <= 2e-3);
        assert!(condition_b_check(&f, &zero, &make_power_phi(2.0).unwrap()).is_err());
    }

    #[test]
    fn vanishing_element_on_sets() {
        let grid = unit(100);
        let s = Subspace::monomial(&grid, 2).unwrap();
        // a single node: some line passes through zero there
        let mut mask = vec![false; 100];
        mask[30] = true;
        let c = vanishing_element(&s, &NodeSet::new(mask.clone())).unwrap();
        assert!(s.evaluate(&c).unwrap().values()[30].abs() < 1e-12);
        mask[70] = true;
        assert!(vanishing_element(&s, &NodeSet::new(mask)).is_none());
    }

    #[test]
    fn jump_suite_requires_positive_element() {
        let grid = unit(200);
        let s = Subspace::new(grid.clone(), vec![grid.nodes().iter().map(|x| x - 0.5).collect()], vec!["x-1/2".into()]).unwrap();
        let phi = make_power_phi(1.0).unwrap();
        assert!(jump_phi_uniqueness_suite(&s, &phi, 1, 0, 1.0, &SolverConfig::default(), 4).is_err());
        let hats = Subspace::hat(&grid, &[0.0, 1.0]).unwrap();
        assert!(jump_phi_uniqueness_suite(&hats, &phi, 0, 0, 1.0, &SolverConfig::default(), 4).unwrap().is_empty());
    }
}
