//! Quadrature grids on `[a, b]`, grid functions, node subsets and the modular.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::phi::PhiFunction;

/// Nodes and positive weights on `[a, b]`, plus the tolerance `η` that decides
/// when two grid values count as equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    equality_tol: f64,
}

impl Grid {
    /// Composite midpoint rule with `n_nodes` equal cells.
    pub fn uniform(a: f64, b: f64, n_nodes: usize, equality_tol: f64) -> Result<Arc<Grid>> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(invalid("interval", format!("need a < b, got [{a}, {b}]")));
        }
        if n_nodes < 2 {
            return Err(invalid("n_nodes", "need at least 2 nodes"));
        }
        let h = (b - a) / n_nodes as f64;
        let nodes = (0..n_nodes).map(|i| a + (i as f64 + 0.5) * h).collect();
        Grid::new(a, b, nodes, vec![h; n_nodes], equality_tol)
    }

    pub fn new(
        a: f64,
        b: f64,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        equality_tol: f64,
    ) -> Result<Arc<Grid>> {
        if !(a < b) {
            return Err(invalid("interval", "need a < b"));
        }
        if nodes.len() != weights.len() || nodes.len() < 2 {
            return Err(invalid("nodes", "need matching node and weight lists of length >= 2"));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) || nodes[0] < a || nodes[nodes.len() - 1] > b {
            return Err(invalid("nodes", "nodes must be strictly increasing inside [a, b]"));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(invalid("weights", "weights must be positive"));
        }
        let total = pairwise_sum(&weights);
        if (total - (b - a)).abs() > 1e-12 * (b - a).max(1.0) {
            return Err(invalid("weights", format!("weights sum to {total}, expected {}", b - a)));
        }
        if !(equality_tol > 0.0) {
            return Err(invalid("equality_tol", "must be positive"));
        }
        Ok(Arc::new(Grid {
            a,
            b,
            nodes,
            weights,
            equality_tol,
        }))
    }

    /// Same nodes with a different `η`.
    pub fn with_equality_tol(&self, equality_tol: f64) -> Result<Arc<Grid>> {
        Grid::new(self.a, self.b, self.nodes.clone(), self.weights.clone(), equality_tol)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn equality_tol(&self) -> f64 {
        self.equality_tol
    }

    /// Measure tolerance used for "a.e." statements: `10·η·(b − a)`.
    pub fn measure_tol(&self) -> f64 {
        10.0 * self.equality_tol * (self.b - self.a)
    }

    pub fn measure(&self, set: &NodeSet) -> Result<f64> {
        measure(self, set)
    }
}

/// Samples a closed-form function onto the grid.
pub fn sample(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
    GridFunction::new(grid.clone(), grid.nodes.iter().map(|&x| f(x)).collect())
}

pub(crate) fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Values of a function at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                node: i,
                x: grid.nodes[i],
            });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        GridFunction {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if same_grid(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `self − other`.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(GridFunction {
            grid: self.grid.clone(),
            values,
        })
    }

    /// `α·self + β·other`.
    pub fn combine(&self, alpha: f64, other: &GridFunction, beta: f64) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        GridFunction::new(self.grid.clone(), values)
    }

    pub fn scale(&self, alpha: f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Writes `node,value` rows with a header.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["node", "value"])?;
        for (x, v) in self.grid.nodes.iter().zip(&self.values) {
            w.write_record([format!("{x:e}"), format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `node,value` rows; nodes must match the grid to `1e-9·(b − a)`.
    pub fn read_csv(grid: &Arc<Grid>, path: impl AsRef<Path>) -> Result<GridFunction> {
        let mut r = crate::error::open_csv(path.as_ref())?;
        let tol = 1e-9 * (grid.b - grid.a);
        let mut values = Vec::with_capacity(grid.len());
        for (i, rec) in r.deserialize::<(f64, f64)>().enumerate() {
            let (x, v) = rec?;
            match grid.nodes.get(i) {
                Some(&node) if (node - x).abs() <= tol => values.push(v),
                _ => return Err(invalid("csv", format!("row {i}: node {x} does not match the grid"))),
            }
        }
        GridFunction::new(grid.clone(), values)
    }
}

/// A subset of grid nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSet {
    mask: Vec<bool>,
}

impl NodeSet {
    pub fn new(mask: Vec<bool>) -> Self {
        NodeSet { mask }
    }

    pub fn full(len: usize) -> Self {
        NodeSet { mask: vec![true; len] }
    }

    pub fn empty(len: usize) -> Self {
        NodeSet { mask: vec![false; len] }
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_subset_of(&self, other: &NodeSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }
}

/// Sum of weights over the masked nodes.
pub fn measure(grid: &Grid, set: &NodeSet) -> Result<f64> {
    if set.mask.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: set.mask.len(),
        });
    }
    let picked: Vec<f64> = grid
        .weights
        .iter()
        .zip(&set.mask)
        .filter(|(_, &m)| m)
        .map(|(w, _)| *w)
        .collect();
    Ok(pairwise_sum(&picked))
}

/// `Σᵢ wᵢ Φ(|g(xᵢ)|)`.
pub fn modular(phi: &PhiFunction, g: &GridFunction) -> f64 {
    modular_of_values(phi, g.grid.weights(), &g.values)
}

pub(crate) fn modular_of_values(phi: &PhiFunction, weights: &[f64], values: &[f64]) -> f64 {
    let terms: Vec<f64> = weights
        .iter()
        .zip(values)
        .map(|(w, v)| w * phi.value(v.abs()))
        .collect();
    pairwise_sum(&terms)
}

/// Nodes where `|f − p| ≤ η`.
pub fn equality_set(f: &GridFunction, p: &GridFunction) -> Result<NodeSet> {
    f.check_same_grid(p)?;
    let eta = f.grid.equality_tol;
    Ok(NodeSet {
        mask: f.values.iter().zip(&p.values).map(|(a, b)| (a - b).abs() <= eta).collect(),
    })
}

/// Default equality tolerance `10⁻⁸·(1 + ‖f‖∞)`.
pub fn default_equality_tol(f_sup: f64) -> f64 {
    1e-8 * (1.0 + f_sup)
}

/// Pairwise summation with a fixed split order, so results do not depend on
/// how the caller batches the work.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
