//! Experiment configuration (TOML) and its translation into library objects.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::certify::CertifyOptions;
use crate::error::{invalid, Result};
use crate::grid::{default_equality_tol, sample, Grid, GridFunction};
use crate::phi::{
    dyadic_jumps, make_linear_then_convex_phi, make_power_phi, make_staircase_phi, Generator, Piece, PhiFunction,
};
use crate::solver::SolverConfig;
use crate::subspace::Subspace;
use crate::uniqueness::random_target;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Mandatory for every command that draws random numbers; `--seed` overrides it.
    pub seed: Option<u64>,
    pub phi: PhiSpec,
    pub grid: GridSpec,
    pub subspace: SubspaceSpec,
    pub target: Option<TargetSpec>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub certify: Option<CertifySpec>,
    pub unique: Option<UniqueSpec>,
    pub witness: Option<WitnessSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Power {
        p: f64,
    },
    LinearThenConvex {
        k: f64,
        c: f64,
        p: f64,
    },
    /// Either explicit `jumps = [[point, size], …]` or `dyadic = N` jumps of
    /// `jump_size` at `2⁻¹ … 2⁻ᴺ`.
    Staircase {
        base: Box<PhiSpec>,
        #[serde(default)]
        jumps: Vec<[f64; 2]>,
        dyadic: Option<usize>,
        #[serde(default = "one")]
        jump_size: f64,
    },
    Explicit {
        pieces: Vec<Piece>,
    },
}

fn one() -> f64 {
    1.0
}

impl PhiSpec {
    pub fn build(&self) -> Result<PhiFunction> {
        match self {
            PhiSpec::Power { p } => make_power_phi(*p),
            PhiSpec::LinearThenConvex { k, c, p } => make_linear_then_convex_phi(*k, *c, *p),
            PhiSpec::Staircase {
                base,
                jumps,
                dyadic,
                jump_size,
            } => {
                let base = base.build()?;
                let jumps: Vec<(f64, f64)> = match dyadic {
                    Some(_) if !jumps.is_empty() => {
                        return Err(invalid("phi.jumps", "give either `jumps` or `dyadic`, not both"))
                    }
                    Some(n) => dyadic_jumps(*n, *jump_size),
                    None => jumps.iter().map(|[a, s]| (*a, *s)).collect(),
                };
                make_staircase_phi(base.generator(), &jumps)
            }
            PhiSpec::Explicit { pieces } => Ok(PhiFunction::new(Generator::new(pieces.clone())?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub a: f64,
    pub b: f64,
    pub n_nodes: usize,
    /// Defaults to `10⁻⁸·(1 + ‖f‖∞)` once the target is known.
    pub equality_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubspaceSpec {
    Monomial { n: usize },
    Hat { knots: Vec<f64> },
    Csv { path: PathBuf },
}

impl SubspaceSpec {
    pub fn build(&self, grid: &Arc<Grid>) -> Result<Subspace> {
        match self {
            SubspaceSpec::Monomial { n } => Subspace::monomial(grid, *n),
            SubspaceSpec::Hat { knots } => Subspace::hat(grid, knots),
            SubspaceSpec::Csv { path } => Subspace::from_csv(grid, path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    /// `Σ coeffs[k] xᵏ`.
    Polynomial { coeffs: Vec<f64> },
    /// `amplitude · sin(frequency · x + phase)`.
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `left` below `at`, `right` from `at` on.
    Step { at: f64, left: f64, right: f64 },
    /// `scale · |x − center|`.
    Abs {
        center: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// An element of the subspace.
    Span { coeffs: Vec<f64> },
    /// Seeded random trigonometric sum, drawn from the experiment seed.
    Random {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Two-column `node,value` file.
    Csv { path: PathBuf },
}

impl TargetSpec {
    /// Samples the target on `grid`. `s` is only consulted for `span` targets.
    pub fn build(&self, grid: &Arc<Grid>, s: &Subspace, seed: Option<u64>) -> Result<GridFunction> {
        match self {
            TargetSpec::Polynomial { coeffs } => sample(grid, |x| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)),
            TargetSpec::Sine {
                amplitude,
                frequency,
                phase,
            } => sample(grid, |x| amplitude * (frequency * x + phase).sin()),
            TargetSpec::Step { at, left, right } => sample(grid, |x| if x < *at { *left } else { *right }),
            TargetSpec::Abs { center, scale } => sample(grid, |x| scale * (x - center).abs()),
            TargetSpec::Span { coeffs } => s.evaluate(coeffs),
            TargetSpec::Random { amplitude } => {
                let seed = seed.ok_or_else(|| invalid("seed", "a random target needs a seed"))?;
                random_target(grid, *amplitude, seed)
            }
            TargetSpec::Csv { path } => GridFunction::read_csv(grid, path),
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, TargetSpec::Random { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySpec {
    /// Candidate coefficients to certify.
    pub coeffs: Vec<f64>,
    pub tol: Option<f64>,
    #[serde(default = "default_n_random")]
    pub n_random: usize,
}

fn default_n_random() -> usize {
    CertifyOptions::default().n_random
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniqueMode {
    Probe,
    JumpSuite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniqueSpec {
    #[serde(default = "default_unique_starts")]
    pub n_starts: usize,
    #[serde(default = "default_mode")]
    pub mode: UniqueMode,
    /// Number of random targets in `jump_suite` mode.
    #[serde(default = "default_instances")]
    pub n_instances: usize,
    /// Amplitude of the random targets in `jump_suite` mode.
    #[serde(default = "one")]
    pub amplitude: f64,
    pub theorem_tag: Option<String>,
}

fn default_unique_starts() -> usize {
    16
}

fn default_mode() -> UniqueMode {
    UniqueMode::Probe
}

fn default_instances() -> usize {
    20
}

impl Default for UniqueSpec {
    fn default() -> Self {
        UniqueSpec {
            n_starts: default_unique_starts(),
            mode: default_mode(),
            n_instances: default_instances(),
            amplitude: 1.0,
            theorem_tag: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    pub p3_coeffs: Vec<f64>,
    pub p1_coeffs: Vec<f64>,
    pub epsilons: Option<Vec<f64>>,
    #[serde(default = "default_witness_tol")]
    pub tol: f64,
}

fn default_witness_tol() -> f64 {
    1e-8
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Grid with the configured `η`, or the default `η` for a target of sup-norm `f_sup`.
    pub fn build_grid(&self, f_sup: Option<f64>) -> Result<Arc<Grid>> {
        let g = &self.grid;
        let eta = g
            .equality_tol
            .unwrap_or_else(|| default_equality_tol(f_sup.unwrap_or(0.0)));
        Grid::uniform(g.a, g.b, g.n_nodes, eta)
    }
}

/// Shared by the config tests and the examples in the README.
pub const EXAMPLE: &str = r#"
seed = 7

[phi]
family = "power"
p = 2.0

[grid]
a = 0.0
b = 1.0
n_nodes = 1001

[subspace]
family = "monomial"
n = 1

[target]
family = "polynomial"
coeffs = [0.0, 1.0]
"#;

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn example_parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.solver, SolverConfig::default());
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = EXAMPLE.replace("n_nodes = 1001", "n_nodes = 1001\nnodes = 3");
        let err = ExperimentConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("nodes"), "{err}");
        let bad = format!("{EXAMPLE}\n[solver]\ntol_objective = 1e-3\n");
        let err = ExperimentConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("tol_objective"), "{err}");
        let bad = EXAMPLE.replace("p = 2.0", "p = 2.0\nq = 1.0");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn phi_families_build() {
        let stair: PhiSpec = toml::from_str(
            r#"
            family = "staircase"
            dyadic = 2
            base = { family = "power", p = 1.0 }
            "#,
        )
        .unwrap();
        let phi = stair.build().unwrap();
        assert_eq!(phi.jump_points(), vec![0.25, 0.5]);
        let explicit: PhiSpec = toml::from_str(
            r#"
            family = "explicit"
            [[pieces]]
            start = 0.0
            terms = [{ coef = 2.0, anchor = 0.0, power = 1.0 }]
            "#,
        )
        .unwrap();
        assert_eq!(explicit.build().unwrap().value(3.0), 9.0);
        let both = PhiSpec::Staircase {
            base: Box::new(PhiSpec::Power { p: 1.0 }),
            jumps: vec![[0.5, 1.0]],
            dyadic: Some(2),
            jump_size: 1.0,
        };
        assert!(both.build().is_err());
    }

    #[test]
    fn targets_sample() {
        let cfg = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        let grid = cfg.build_grid(None).unwrap();
        let s = cfg.subspace.build(&grid).unwrap();
        let poly = TargetSpec::Polynomial { coeffs: vec![1.0, 0.0, 2.0] }.build(&grid, &s, None).unwrap();
        let x = grid.nodes()[10];
        assert!((poly.values()[10] - (1.0 + 2.0 * x * x)).abs() < 1e-15);
        let sine = TargetSpec::Sine {
            amplitude: 2.0,
            frequency: PI,
            phase: 0.0,
        }
        .build(&grid, &s, None)
        .unwrap();
        assert!((sine.values()[10] - 2.0 * (PI * x).sin()).abs() < 1e-15);
        assert!(TargetSpec::Random { amplitude: 1.0 }.build(&grid, &s, None).is_err());
    }
}
