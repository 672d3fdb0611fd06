//! Young-type convex functions `Φ(x) = ∫₀ˣ φ(t) dt` built from piecewise generators.
//!
//! A generator is a finite list of pieces, each valid from its `start` up to the
//! next piece's start (the last piece is the unbounded tail). A piece is a sum of
//! terms `coef · (t − anchor)^power` with real `power ≥ 0`, which covers
//! polynomials as well as the power family `p·t^(p−1)`. Antiderivatives are
//! closed form, so `Φ`, `φ⁺` and `φ⁻` are exact up to floating point.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One term `coef · (t − anchor)^power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub anchor: f64,
    pub power: f64,
}

impl Term {
    pub fn constant(value: f64) -> Self {
        Term {
            coef: value,
            anchor: 0.0,
            power: 0.0,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        if self.power == 0.0 {
            return self.coef;
        }
        self.coef * pow((t - self.anchor).max(0.0), self.power)
    }

    /// Derivative in `t`, taken from the right.
    fn slope(&self, t: f64) -> f64 {
        if self.power == 0.0 || self.coef == 0.0 {
            return 0.0;
        }
        let u = (t - self.anchor).max(0.0);
        if self.power < 1.0 && u == 0.0 {
            return f64::INFINITY;
        }
        self.coef * self.power * pow(u, self.power - 1.0)
    }

    /// `∫_lo^x coef (t − anchor)^power dt`.
    fn integral(&self, lo: f64, x: f64) -> f64 {
        let e = self.power + 1.0;
        let hi = pow((x - self.anchor).max(0.0), e);
        let base = pow((lo - self.anchor).max(0.0), e);
        self.coef / e * (hi - base)
    }

    fn is_constant(&self) -> bool {
        self.power == 0.0 || self.coef == 0.0
    }
}

/// `u^e` for `u ≥ 0`, exact repeated multiplication for small integer `e`.
fn pow(u: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e == e.trunc() && e <= 8.0 {
        u.powi(e as i32)
    } else {
        u.powf(e)
    }
}

/// A generator piece valid on `[start, next start)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub start: f64,
    pub terms: Vec<Term>,
}

impl Piece {
    fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.eval(t)).sum()
    }

    fn slope(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.slope(t)).sum()
    }

    fn integral(&self, lo: f64, x: f64) -> f64 {
        self.terms.iter().map(|term| term.integral(lo, x)).sum()
    }

    fn is_constant(&self) -> bool {
        self.terms.iter().all(Term::is_constant)
    }
}

/// A nondecreasing generator `φ ≥ 0` with `φ(t) > 0` for `t > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pieces: Vec<Piece>,
}

impl Generator {
    /// Validates and wraps a list of pieces. The first piece must start at 0.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(invalid("pieces", "generator needs at least one piece"));
        }
        if pieces[0].start != 0.0 {
            return Err(invalid("pieces", "first piece must start at 0"));
        }
        for w in pieces.windows(2) {
            if !(w[1].start > w[0].start) || !w[1].start.is_finite() {
                return Err(invalid("pieces", "piece starts must be finite and strictly increasing"));
            }
        }
        for (i, piece) in pieces.iter().enumerate() {
            if piece.terms.is_empty() {
                return Err(invalid("pieces", format!("piece {i} has no terms")));
            }
            for term in &piece.terms {
                if !(term.coef.is_finite() && term.anchor.is_finite() && term.power.is_finite()) {
                    return Err(invalid("pieces", format!("piece {i} has a non-finite term")));
                }
                if term.power < 0.0 {
                    return Err(invalid("pieces", format!("piece {i} has a negative power")));
                }
                if term.power > 0.0 && term.coef < 0.0 {
                    return Err(invalid(
                        "pieces",
                        format!("piece {i}: non-constant terms need nonnegative coefficients"),
                    ));
                }
                if term.power > 0.0 && term.anchor > piece.start {
                    return Err(invalid(
                        "pieces",
                        format!("piece {i}: term anchor lies to the right of the piece start"),
                    ));
                }
            }
        }
        let first = &pieces[0];
        let at_zero = first.eval(0.0);
        let rises = first.terms.iter().any(|t| t.power > 0.0 && t.coef > 0.0);
        if at_zero < 0.0 || (at_zero == 0.0 && !rises) {
            return Err(invalid("pieces", "generator must be positive for t > 0"));
        }
        for w in pieces.windows(2) {
            let left = w[0].eval(w[1].start);
            let right = w[1].eval(w[1].start);
            if right < left - 1e-12 * left.abs().max(1.0) {
                return Err(invalid(
                    "pieces",
                    format!("generator decreases at breakpoint {}", w[1].start),
                ));
            }
        }
        Ok(Generator { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    fn index(&self, t: f64) -> usize {
        self.pieces.partition_point(|p| p.start <= t).saturating_sub(1)
    }

    /// Interior breakpoints (starts of every piece after the first).
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.iter().skip(1).map(|p| p.start)
    }
}

/// `Φ` together with its generator and the accumulated constants that make it continuous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiFunction {
    generator: Generator,
    offsets: Vec<f64>,
}

/// An interval on which `Φ` is exactly affine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineSegment {
    pub lo: f64,
    /// `f64::INFINITY` for the unbounded tail.
    pub hi: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl PhiFunction {
    pub fn new(generator: Generator) -> Self {
        let mut offsets = Vec::with_capacity(generator.pieces.len());
        let mut acc = 0.0;
        offsets.push(0.0);
        for w in generator.pieces.windows(2) {
            acc += w[0].integral(w[0].start, w[1].start);
            offsets.push(acc);
        }
        PhiFunction { generator, offsets }
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    /// `Φ(x)`; negative arguments are treated as 0.
    pub fn value(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        let i = self.generator.index(x);
        let piece = &self.generator.pieces[i];
        self.offsets[i] + piece.integral(piece.start, x)
    }

    /// Right derivative `φ⁺(x)`.
    pub fn phi_right(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(invalid("x", "one-sided derivatives need x >= 0"));
        }
        Ok(self.right(x))
    }

    /// Left derivative `φ⁻(x)`; undefined at 0.
    pub fn phi_left(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Err(Error::UndefinedLeftDerivative);
        }
        if !(x > 0.0) {
            return Err(invalid("x", "one-sided derivatives need x >= 0"));
        }
        Ok(self.left(x))
    }

    pub(crate) fn right(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        self.generator.pieces[self.generator.index(x)].eval(x)
    }

    /// `φ⁻`, with `φ⁻(0) := φ⁺(0)` for internal callers.
    pub(crate) fn left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.right(0.0);
        }
        let pieces = &self.generator.pieces;
        let i = self.generator.index(x);
        if i > 0 && pieces[i].start == x {
            pieces[i - 1].eval(x)
        } else {
            pieces[i].eval(x)
        }
    }

    /// Right derivative of the generator (`Φ''` from the right).
    pub(crate) fn curvature(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        self.generator.pieces[self.generator.index(x)].slope(x)
    }

    /// Breakpoints `b > 0` where `φ⁻(b) < φ⁺(b)`.
    pub fn jump_points(&self) -> Vec<f64> {
        self.generator
            .breakpoints()
            .filter(|&b| self.left(b) < self.right(b))
            .collect()
    }

    /// True when `φ` is continuous on `(0, ∞)`.
    pub fn is_smooth(&self) -> bool {
        self.jump_points().is_empty()
    }

    /// Residual magnitudes where `t ↦ Φ(|t|)` has a corner: 0 when `φ⁺(0) > 0`,
    /// plus every jump point.
    pub fn kink_magnitudes(&self) -> Vec<f64> {
        let mut out = Vec::new();
        if self.right(0.0) > 0.0 {
            out.push(0.0);
        }
        out.extend(self.jump_points());
        out
    }

    /// The affine segment starting at 0, as `(slope k, end c)`, if it is bounded.
    pub fn affine_head(&self) -> Option<(f64, f64)> {
        find_affine_segments(self)
            .into_iter()
            .find(|s| s.lo == 0.0 && s.hi.is_finite())
            .map(|s| (s.slope, s.hi))
    }
}

/// `Φ(x) = x^p`, generator `p·t^(p−1)`.
pub fn make_power_phi(p: f64) -> Result<PhiFunction> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid("p", format!("power family needs p >= 1, got {p}")));
    }
    let term = Term {
        coef: p,
        anchor: 0.0,
        power: p - 1.0,
    };
    let generator = Generator::new(vec![Piece {
        start: 0.0,
        terms: vec![term],
    }])?;
    Ok(PhiFunction::new(generator))
}

/// `φ = k` on `[0, c)` and `φ(t) = k + (t − c)^(p−1)` beyond, so `Φ` is affine on
/// `[0, c]` and strictly convex after.
pub fn make_linear_then_convex_phi(k: f64, c: f64, p: f64) -> Result<PhiFunction> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(invalid("k", "slope must be positive"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid("c", "affine head length must be positive"));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(invalid("p", "tail exponent must exceed 1"));
    }
    let generator = Generator::new(vec![
        Piece {
            start: 0.0,
            terms: vec![Term::constant(k)],
        },
        Piece {
            start: c,
            terms: vec![
                Term::constant(k),
                Term {
                    coef: 1.0,
                    anchor: c,
                    power: p - 1.0,
                },
            ],
        },
    ])?;
    Ok(PhiFunction::new(generator))
}

/// Adds upward jumps `(point, size)` to `base`. Points must be positive and strictly
/// decreasing, mirroring a truncated sequence `a_n ↓ 0`.
pub fn make_staircase_phi(base: &Generator, jumps: &[(f64, f64)]) -> Result<PhiFunction> {
    for w in jumps.windows(2) {
        if !(w[1].0 < w[0].0) {
            return Err(invalid("jumps", "jump points must be strictly decreasing"));
        }
    }
    for &(point, size) in jumps {
        if !(point > 0.0) || !point.is_finite() {
            return Err(invalid("jumps", format!("jump point {point} must be positive")));
        }
        if !(size > 0.0) || !size.is_finite() {
            return Err(invalid("jumps", format!("jump size at {point} must be positive")));
        }
    }
    let mut starts: Vec<f64> = base.pieces.iter().map(|p| p.start).collect();
    starts.extend(jumps.iter().map(|j| j.0));
    starts.sort_by(f64::total_cmp);
    starts.dedup();

    let pieces = starts
        .into_iter()
        .map(|start| {
            let mut terms = base.pieces[base.index(start)].terms.clone();
            let lift: f64 = jumps.iter().filter(|j| j.0 <= start).map(|j| j.1).sum();
            if lift > 0.0 {
                terms.push(Term::constant(lift));
            }
            Piece { start, terms }
        })
        .collect();
    Ok(PhiFunction::new(Generator::new(pieces)?))
}

/// Jumps of size `size` at `2⁻¹, 2⁻², …, 2⁻ⁿ`.
pub fn dyadic_jumps(n: usize, size: f64) -> Vec<(f64, f64)> {
    (1..=n).map(|k| (0.5f64.powi(k as i32), size)).collect()
}

/// Maximum of `Φ(2x)/Φ(x)` over `x = x_max·i/samples`, `i = 1..=samples`.
/// This is an empirical lower bound for the Δ₂ constant.
pub fn delta2_ratio(phi: &PhiFunction, x_max: f64, samples: usize) -> Result<f64> {
    if !(x_max > 0.0) {
        return Err(invalid("x_max", "must be positive"));
    }
    if samples < 2 {
        return Err(invalid("samples", "need at least 2 samples"));
    }
    let ratio = (1..=samples)
        .map(|i| {
            let x = x_max * i as f64 / samples as f64;
            phi.value(2.0 * x) / phi.value(x)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ratio)
}

/// Maximal intervals on which the generator is constant, i.e. where `Φ` is a line.
pub fn find_affine_segments(phi: &PhiFunction) -> Vec<AffineSegment> {
    let pieces = &phi.generator.pieces;
    let mut out: Vec<AffineSegment> = Vec::new();
    for (i, piece) in pieces.iter().enumerate() {
        if !piece.is_constant() {
            continue;
        }
        let lo = piece.start;
        let hi = pieces.get(i + 1).map_or(f64::INFINITY, |p| p.start);
        let slope = piece.eval(lo);
        if let Some(last) = out.last_mut() {
            if last.hi == lo && (last.slope - slope).abs() <= 1e-15 * slope.abs().max(1.0) {
                last.hi = hi;
                continue;
            }
        }
        out.push(AffineSegment {
            lo,
            hi,
            slope,
            intercept: phi.value(lo) - slope * lo,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_base() -> Generator {
        make_power_phi(1.0).unwrap().generator().clone()
    }

    fn riemann(phi: &PhiFunction, x: f64, n: usize) -> f64 {
        let h = x / n as f64;
        (0..n).map(|i| phi.right((i as f64 + 0.5) * h) * h).sum()
    }

    #[test]
    fn power_values() {
        let sq = make_power_phi(2.0).unwrap();
        assert_eq!(sq.value(3.0), 9.0);
        assert!((riemann(&sq, 3.0, 1_000_000) - 9.0).abs() < 1e-8);
        assert_eq!(sq.value(0.0), 0.0);
        assert_eq!(make_power_phi(1.0).unwrap().value(5.0), 5.0);
        assert!(make_power_phi(0.5).is_err());
    }

    #[test]
    fn linear_then_convex_values() {
        let phi = make_linear_then_convex_phi(1.0, 1.0, 2.0).unwrap();
        assert!((phi.value(0.5) - 0.5).abs() < 1e-15);
        assert!((phi.value(2.0) - 2.5).abs() < 1e-14);
        assert!((riemann(&phi, 2.0, 1_000_000) - 2.5).abs() < 1e-9);

        let phi = make_linear_then_convex_phi(2.0, 0.5, 2.0).unwrap();
        assert_eq!(phi.phi_left(0.5).unwrap(), 2.0);
        assert_eq!(phi.phi_right(0.5).unwrap(), 2.0);

        let phi = make_linear_then_convex_phi(3.0, 1.0, 2.0).unwrap();
        assert_eq!(phi.phi_right(0.0).unwrap(), 3.0);
    }

    #[test]
    fn staircase_one_sided_values() {
        let phi = make_staircase_phi(&unit_base(), &[(0.5, 1.0), (0.25, 1.0)]).unwrap();
        assert_eq!(phi.phi_left(0.5).unwrap(), 2.0);
        assert_eq!(phi.phi_right(0.5).unwrap(), 3.0);
        assert_eq!(phi.right(0.5 - 1e-12), 2.0);
        assert_eq!(phi.right(0.5 + 1e-12), 3.0);
        assert_eq!(phi.phi_left(0.25).unwrap(), 1.0);
        assert_eq!(phi.phi_right(0.25).unwrap(), 2.0);
        let jump = (phi.value(0.5 + 1e-13) - phi.value(0.5 - 1e-13)).abs();
        assert!(jump < 1e-12);
    }

    #[test]
    fn empty_staircase_matches_base() {
        let base = make_linear_then_convex_phi(1.0, 0.7, 2.5).unwrap();
        let phi = make_staircase_phi(base.generator(), &[]).unwrap();
        for i in 0..100 {
            let x = 0.037 * i as f64;
            assert_eq!(phi.value(x), base.value(x));
        }
    }

    #[test]
    fn staircase_rejects_bad_jumps() {
        let base = unit_base();
        assert!(make_staircase_phi(&base, &[(0.25, 1.0), (0.5, 1.0)]).is_err());
        assert!(make_staircase_phi(&base, &[(0.0, 1.0)]).is_err());
        assert!(make_staircase_phi(&base, &[(0.5, -1.0)]).is_err());
    }

    #[test]
    fn left_derivative_at_zero_is_an_error() {
        let phi = make_power_phi(2.0).unwrap();
        assert!(matches!(phi.phi_left(0.0), Err(Error::UndefinedLeftDerivative)));
        assert_eq!(phi.phi_left(1.0).unwrap(), 2.0);
        assert_eq!(phi.phi_right(1.0).unwrap(), 2.0);
    }

    #[test]
    fn delta2_examples() {
        let sq = make_power_phi(2.0).unwrap();
        assert!((delta2_ratio(&sq, 3.0, 17).unwrap() - 4.0).abs() < 1e-9);
        let lin = make_power_phi(1.0).unwrap();
        assert_eq!(delta2_ratio(&lin, 1.0, 10).unwrap(), 2.0);

        let ltc = make_linear_then_convex_phi(1.0, 1.0, 2.0).unwrap();
        let r = delta2_ratio(&ltc, 4.0, 1000).unwrap();
        // dense oracle
        let dense = (1..=100_000)
            .map(|i| {
                let x = 4.0 * i as f64 / 1e5;
                ltc.value(2.0 * x) / ltc.value(x)
            })
            .fold(0.0, f64::max);
        assert!(r.is_finite() && r >= 2.0);
        assert!(r <= dense + 1e-12 && dense - r < 1e-2);
        assert!(delta2_ratio(&ltc, 0.0, 10).is_err());
        assert!(delta2_ratio(&ltc, 1.0, 1).is_err());
    }

    #[test]
    fn affine_segments() {
        assert!(find_affine_segments(&make_power_phi(2.0).unwrap()).is_empty());

        let ltc = make_linear_then_convex_phi(1.5, 0.8, 3.0).unwrap();
        let segs = find_affine_segments(&ltc);
        assert_eq!(segs.len(), 1);
        assert_eq!((segs[0].lo, segs[0].hi, segs[0].slope), (0.0, 0.8, 1.5));
        assert_eq!(ltc.affine_head(), Some((1.5, 0.8)));

        let stair = make_staircase_phi(&unit_base(), &[(0.5, 1.0)]).unwrap();
        let segs = find_affine_segments(&stair);
        assert_eq!(segs.len(), 2);
        assert_eq!((segs[0].lo, segs[0].hi, segs[0].slope), (0.0, 0.5, 1.0));
        assert_eq!((segs[1].lo, segs[1].slope), (0.5, 2.0));
        assert!(segs[1].hi.is_infinite());
        for s in &segs {
            for i in 0..=50 {
                let x = s.lo + (s.hi.min(3.0) - s.lo) * i as f64 / 50.0;
                assert!((stair.value(x) - (s.slope * x + s.intercept)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn generator_validation() {
        let decreasing = Generator::new(vec![
            Piece { start: 0.0, terms: vec![Term::constant(2.0)] },
            Piece { start: 1.0, terms: vec![Term::constant(1.0)] },
        ]);
        assert!(decreasing.is_err());
        let zero = Generator::new(vec![Piece { start: 0.0, terms: vec![Term::constant(0.0)] }]);
        assert!(zero.is_err());
        let ok = Generator::new(vec![Piece {
            start: 0.0,
            terms: vec![Term { coef: 1.0, anchor: 0.0, power: 2.0 }],
        }]);
        assert!(ok.is_ok());
    }
}
