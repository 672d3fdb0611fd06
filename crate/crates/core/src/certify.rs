//! Optimality certificates for best Φ-approximations.
//!
//! For a candidate `P` and a direction `Q` in the subspace, with `r = f − P`:
//!
//! ```text
//! lhs(Q) = Σ_{Q>0, r>0 or Q<0, r<0} w φ⁻(|r|)|Q| − Σ_{Q<0, r>0 or Q>0, r<0} w φ⁺(|r|)|Q|
//! rhs(Q) = φ⁺(0) Σ_{|r| ≤ η} w |Q|
//! ```
//!
//! `P` is optimal iff `lhs(Q) ≤ rhs(Q)` for every `Q`. Nodes with `|r| ≤ η` form
//! the equality set and only enter `rhs`. A residual magnitude within `η` of a
//! jump point of `φ` is read as sitting on that jump, so both one-sided values
//! of the jump are used.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{measure, pairwise_sum, GridFunction, NodeSet};
use crate::phi::PhiFunction;
use crate::subspace::Subspace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionCheck {
    pub label: String,
    /// Coefficients of `Q` in the subspace basis.
    pub coeffs: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub directions: Vec<DirectionCheck>,
    pub verdict: bool,
    pub tol: f64,
}

impl Certificate {
    pub fn min_margin(&self) -> f64 {
        self.directions.iter().map(|d| d.margin).fold(f64::INFINITY, f64::min)
    }

    /// The direction with the smallest margin.
    pub fn worst(&self) -> Option<&DirectionCheck> {
        self.directions.iter().min_by(|a, b| a.margin.total_cmp(&b.margin))
    }
}

/// Direction set and tolerance for a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyOptions {
    /// Absolute tolerance on margins; `None` means `10⁻⁴·(1 + modular)`.
    pub tol: Option<f64>,
    /// Number of random span directions; each is used with both signs.
    pub n_random: usize,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            tol: None,
            n_random: 8,
            seed: 0,
        }
    }
}

/// Default certificate tolerance for a given modular value.
pub fn default_tol(modular: f64) -> f64 {
    1e-4 * (1.0 + modular)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Side {
    Equal,
    /// `f > P` with the (possibly snapped) residual magnitude.
    Above(f64),
    Below(f64),
}

struct Classified<'a> {
    sides: Vec<Side>,
    weights: &'a [f64],
    phi: &'a PhiFunction,
}

fn classify<'a>(f: &'a GridFunction, p: &GridFunction, phi: &'a PhiFunction) -> Result<Classified<'a>> {
    f.check_same_grid(p)?;
    let grid = f.grid();
    let eta = grid.equality_tol();
    let jumps = phi.jump_points();
    let sides = f
        .values()
        .iter()
        .zip(p.values())
        .map(|(f, p)| {
            let r = f - p;
            if r.abs() <= eta {
                return Side::Equal;
            }
            let mut a = r.abs();
            if let Some(&b) = jumps.iter().find(|&&b| (a - b).abs() <= eta) {
                a = b;
            }
            if r > 0.0 {
                Side::Above(a)
            } else {
                Side::Below(a)
            }
        })
        .collect();
    Ok(Classified {
        sides,
        weights: grid.weights(),
        phi,
    })
}

impl Classified<'_> {
    fn sides(&self, q: &[f64]) -> (f64, f64) {
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        for ((side, &q), &w) in self.sides.iter().zip(q).zip(self.weights) {
            if q == 0.0 {
                continue;
            }
            match *side {
                Side::Equal => rhs.push(w * q.abs()),
                Side::Above(a) if q > 0.0 => lhs.push(w * self.phi.left(a) * q.abs()),
                Side::Below(a) if q < 0.0 => lhs.push(w * self.phi.left(a) * q.abs()),
                Side::Above(a) | Side::Below(a) => lhs.push(-w * self.phi.right(a) * q.abs()),
            }
        }
        (pairwise_sum(&lhs), self.phi.right(0.0) * pairwise_sum(&rhs))
    }

    /// Five-term right derivative of `ε ↦ F(P + εQ)` at 0.
    fn derivative(&self, q: &[f64]) -> f64 {
        let mut above_pos = Vec::new(); // {Q>0, f>P}: φ⁻
        let mut above_neg = Vec::new(); // {Q<0, f>P}: φ⁺
        let mut below_pos = Vec::new(); // {Q>0, f<P}: φ⁺
        let mut equal = Vec::new(); // {f=P}: |Q|
        let mut below_neg = Vec::new(); // {Q<0, f<P}: φ⁻
        for ((side, &q), &w) in self.sides.iter().zip(q).zip(self.weights) {
            match *side {
                Side::Equal => equal.push(w * q.abs()),
                Side::Above(a) if q > 0.0 => above_pos.push(w * self.phi.left(a) * q),
                Side::Above(a) if q < 0.0 => above_neg.push(w * self.phi.right(a) * q),
                Side::Below(a) if q > 0.0 => below_pos.push(w * self.phi.right(a) * q),
                Side::Below(a) if q < 0.0 => below_neg.push(w * self.phi.left(a) * q),
                _ => {}
            }
        }
        -pairwise_sum(&above_pos) - pairwise_sum(&above_neg)
            + pairwise_sum(&below_pos)
            + self.phi.right(0.0) * pairwise_sum(&equal)
            + pairwise_sum(&below_neg)
    }
}

/// Labeled direction set: `±δⱼ` followed by `±` seeded random span elements.
pub fn certificate_directions(s: &Subspace, n_random: usize, seed: u64) -> Vec<(String, Vec<f64>)> {
    let n = s.dim();
    let mut out = Vec::with_capacity(2 * (n + n_random));
    for j in 0..n {
        for (sign, tag) in [(1.0, '+'), (-1.0, '-')] {
            let mut e = vec![0.0; n];
            e[j] = sign;
            out.push((format!("{tag}{}", s.labels()[j]), e));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..n_random {
        let mut c: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        c.iter_mut().for_each(|x| *x /= norm);
        out.push((format!("+random{k}"), c.clone()));
        out.push((format!("-random{k}"), c.into_iter().map(|x| -x).collect()));
    }
    out
}

/// `(lhs, rhs)` of the characterization inequality for one direction.
pub fn characterization_sides(
    f: &GridFunction,
    p: &GridFunction,
    q: &GridFunction,
    phi: &PhiFunction,
) -> Result<(f64, f64)> {
    f.check_same_grid(q)?;
    Ok(classify(f, p, phi)?.sides(q.values()))
}

/// Checks the characterization inequality along the certificate directions.
pub fn check_characterization(
    f: &GridFunction,
    p: &GridFunction,
    s: &Subspace,
    phi: &PhiFunction,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    f.check_same_grid(&s.basis_element(0))?;
    let classes = classify(f, p, phi)?;
    let tol = resolve_tol(f, p, phi, opts)?;
    let directions: Vec<DirectionCheck> = certificate_directions(s, opts.n_random, opts.seed)
        .into_iter()
        .map(|(label, coeffs)| {
            let q = s.combine(&coeffs);
            let (lhs, rhs) = classes.sides(&q);
            DirectionCheck {
                label,
                coeffs,
                lhs,
                rhs,
                margin: rhs - lhs,
            }
        })
        .collect();
    let verdict = directions.iter().all(|d| d.margin >= -tol);
    Ok(Certificate {
        directions,
        verdict,
        tol,
    })
}

fn resolve_tol(f: &GridFunction, p: &GridFunction, phi: &PhiFunction, opts: &CertifyOptions) -> Result<f64> {
    match opts.tol {
        Some(t) if t >= 0.0 && t.is_finite() => Ok(t),
        Some(_) => Err(invalid("tol", "must be nonnegative and finite")),
        None => Ok(default_tol(crate::grid::modular(phi, &f.sub(p)?))),
    }
}

/// Two-sided form for generators without jumps:
/// `|Σ w φ(|r|) sgn(r) Q| ≤ φ(0⁺) Σ_{|r|≤η} w |Q|`. Each direction of
/// [`certificate_directions`] is visited once per `±` pair.
pub fn check_smooth_characterization(
    f: &GridFunction,
    p: &GridFunction,
    s: &Subspace,
    phi: &PhiFunction,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    if !phi.is_smooth() {
        return Err(Error::Precondition(format!(
            "generator jumps at {:?}; use the one-sided characterization",
            phi.jump_points()
        )));
    }
    f.check_same_grid(&s.basis_element(0))?;
    let classes = classify(f, p, phi)?;
    let tol = resolve_tol(f, p, phi, opts)?;
    let directions: Vec<DirectionCheck> = certificate_directions(s, opts.n_random, opts.seed)
        .into_iter()
        .step_by(2)
        .map(|(label, coeffs)| {
            let q = s.combine(&coeffs);
            let mut signed = Vec::new();
            let mut equal = Vec::new();
            for ((side, &q), &w) in classes.sides.iter().zip(&q).zip(classes.weights) {
                match *side {
                    Side::Equal => equal.push(w * q.abs()),
                    Side::Above(a) => signed.push(w * phi.right(a) * q),
                    Side::Below(a) => signed.push(-w * phi.right(a) * q),
                }
            }
            let lhs = pairwise_sum(&signed).abs();
            let rhs = phi.right(0.0) * pairwise_sum(&equal);
            DirectionCheck {
                label: label.trim_start_matches('+').to_owned(),
                coeffs,
                lhs,
                rhs,
                margin: rhs - lhs,
            }
        })
        .collect();
    let verdict = directions.iter().all(|d| d.margin >= -tol);
    Ok(Certificate {
        directions,
        verdict,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalDerivative {
    pub q: GridFunction,
    pub value: f64,
}

/// `F_Q⁺(0)` for `F_Q(ε) = Σ w Φ(|f − (P + εQ)|)`, via the five-term expression.
pub fn directional_derivative(
    f: &GridFunction,
    p: &GridFunction,
    q: &GridFunction,
    phi: &PhiFunction,
) -> Result<DirectionalDerivative> {
    f.check_same_grid(q)?;
    let value = classify(f, p, phi)?.derivative(q.values());
    Ok(DirectionalDerivative { q: q.clone(), value })
}

/// Measure of nodes where `(f − p₁)(f − p₂) < −η²`, and whether it stays within
/// `10·η·(b − a)`.
pub fn sign_consistency(f: &GridFunction, p1: &GridFunction, p2: &GridFunction) -> Result<(f64, bool)> {
    f.check_same_grid(p1)?;
    f.check_same_grid(p2)?;
    let grid = f.grid();
    let eta = grid.equality_tol();
    let mask = f
        .values()
        .iter()
        .zip(p1.values())
        .zip(p2.values())
        .map(|((f, a), b)| (f - a) * (f - b) < -eta * eta)
        .collect();
    let violation = measure(grid, &NodeSet::new(mask))?;
    Ok((violation, violation <= grid.measure_tol()))
}

/// Whether `Z(f)` is a γ-set, i.e. `0` certifies as a best approximation of `f`.
pub fn is_gamma_set(f: &GridFunction, s: &Subspace, phi: &PhiFunction, opts: &CertifyOptions) -> Result<bool> {
    let zero = GridFunction::zeros(f.grid());
    Ok(check_characterization(f, &zero, s, phi, opts)?.verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{modular, sample, Grid};
    use crate::phi::{dyadic_jumps, make_power_phi, make_staircase_phi};

    fn setup(n: usize) -> (std::sync::Arc<Grid>, Subspace) {
        let grid = Grid::uniform(0.0, 1.0, n, 1e-9).unwrap();
        let s = Subspace::monomial(&grid, 1).unwrap();
        (grid, s)
    }

    #[test]
    fn mean_certifies_and_shift_fails() {
        let (grid, s) = setup(1000);
        let f = sample(&grid, |x| x).unwrap();
        let sq = make_power_phi(2.0).unwrap();
        let mean = sample(&grid, |_| 0.5).unwrap();
        let cert = check_characterization(&f, &mean, &s, &sq, &CertifyOptions::default()).unwrap();
        assert!(cert.verdict && cert.min_margin() >= -1e-6);

        let shifted = sample(&grid, |_| 0.6).unwrap();
        let cert = check_characterization(&f, &shifted, &s, &sq, &CertifyOptions::default()).unwrap();
        assert!(!cert.verdict);
        let worst = cert.worst().unwrap();
        assert_eq!(worst.label, "-x^0");
        // F_Q⁺(0) for Q = −1 is 2∫(x − 0.6) = −0.2
        assert!((worst.margin + 0.2).abs() < 1e-9);
    }

    #[test]
    fn exact_interpolation_certifies() {
        let (grid, _) = setup(64);
        let s = Subspace::monomial(&grid, 3).unwrap();
        let p = s.evaluate(&[0.3, -1.0, 2.0]).unwrap();
        for phi in [make_power_phi(1.0).unwrap(), make_power_phi(2.0).unwrap()] {
            let cert = check_characterization(&p, &p, &s, &phi, &CertifyOptions::default()).unwrap();
            assert!(cert.verdict);
            assert!(cert.directions.iter().all(|d| d.lhs == 0.0 && d.rhs >= 0.0));
        }
    }

    #[test]
    fn smooth_check_rejects_jumps_and_accepts_median() {
        let (grid, s) = setup(1001);
        let stair = make_staircase_phi(make_power_phi(1.0).unwrap().generator(), &dyadic_jumps(3, 1.0)).unwrap();
        let f = sample(&grid, |x| x).unwrap();
        assert!(check_smooth_characterization(&f, &f, &s, &stair, &CertifyOptions::default()).is_err());

        // even node count: the median lies between the two middle nodes
        let (grid, s) = setup(1000);
        let f = sample(&grid, |x| x).unwrap();
        let median = sample(&grid, |_| 0.5).unwrap();
        let l1 = make_power_phi(1.0).unwrap();
        let cert = check_smooth_characterization(&f, &median, &s, &l1, &CertifyOptions::default()).unwrap();
        assert!(cert.verdict);
        assert!(cert.min_margin().abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_sides() {
        let (grid, _) = setup(300);
        let s = Subspace::monomial(&grid, 2).unwrap();
        let f = sample(&grid, |x| (4.0 * x).sin()).unwrap();
        let p = s.evaluate(&[0.1, 0.2]).unwrap();
        let stair = make_staircase_phi(make_power_phi(1.0).unwrap().generator(), &dyadic_jumps(4, 0.5)).unwrap();
        for (_, c) in certificate_directions(&s, 4, 9) {
            let q = s.evaluate(&c).unwrap();
            let (lhs, rhs) = characterization_sides(&f, &p, &q, &stair).unwrap();
            let d = directional_derivative(&f, &p, &q, &stair).unwrap().value;
            assert!((d - (rhs - lhs)).abs() < 1e-12);
        }
        let zero = GridFunction::zeros(&grid);
        assert_eq!(directional_derivative(&f, &p, &zero, &stair).unwrap().value, 0.0);
    }

    #[test]
    fn derivative_matches_one_sided_difference() {
        let (grid, _) = setup(500);
        let f = sample(&grid, |x| x.exp()).unwrap();
        let p = sample(&grid, |x| 1.0 + 1.5 * x).unwrap();
        let q = sample(&grid, |x| 0.3 - x).unwrap();
        let phi = make_power_phi(3.0).unwrap();
        let eps = 1e-6;
        let base = modular(&phi, &f.sub(&p).unwrap());
        let moved = modular(&phi, &f.sub(&p.combine(1.0, &q, eps).unwrap()).unwrap());
        let fd = (moved - base) / eps;
        let d = directional_derivative(&f, &p, &q, &phi).unwrap().value;
        assert!((fd - d).abs() < 1e-4);
    }

    #[test]
    fn sign_consistency_examples() {
        let (grid, _) = setup(100);
        let f = sample(&grid, |x| (9.0 * x).sin()).unwrap();
        let p = sample(&grid, |x| x - 0.5).unwrap();
        assert_eq!(sign_consistency(&f, &p, &p).unwrap(), (0.0, true));
        assert_eq!(sign_consistency(&f, &p, &f).unwrap(), (0.0, true));
        let q = p.scale(-1.0);
        let (v, ok) = sign_consistency(&f, &p, &q).unwrap();
        assert!(v > 0.0 && !ok);
    }

    #[test]
    fn gamma_set_examples() {
        let grid = Grid::uniform(-1.0, 1.0, 1000, 1e-9).unwrap();
        let s = Subspace::monomial(&grid, 1).unwrap();
        let sq = make_power_phi(2.0).unwrap();
        let opts = CertifyOptions::default();
        assert!(is_gamma_set(&GridFunction::zeros(&grid), &s, &sq, &opts).unwrap());
        assert!(is_gamma_set(&sample(&grid, |x| x).unwrap(), &s, &sq, &opts).unwrap());
        assert!(!is_gamma_set(&sample(&grid, |x| x + 10.0).unwrap(), &s, &sq, &opts).unwrap());
    }

    #[test]
    fn grid_mismatch() {
        let (grid, _) = setup(10);
        let other = Grid::uniform(0.0, 2.0, 10, 1e-9).unwrap();
        let f = GridFunction::zeros(&grid);
        let g = GridFunction::zeros(&other);
        assert!(matches!(sign_consistency(&f, &g, &f), Err(Error::GridMismatch)));
        let phi = make_power_phi(2.0).unwrap();
        assert!(matches!(directional_derivative(&f, &f, &g, &phi), Err(Error::GridMismatch)));
    }
}
