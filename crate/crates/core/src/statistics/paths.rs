use super::univariate::covariance_with_stderr;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::sampler::CycleStructure;
use crate::saddle::{b_t, solve_saddle};
use rayon::prelude::*;
use serde::Serialize;

/// Default number of uniform points in `[0, 1]` for path experiments.
pub const DEFAULT_GRID_POINTS: usize = 101;

/// Minimum number of paths for covariance estimation.
pub const MIN_BRIDGE_PATHS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    /// `K_{b_t} / (n / alpha)`.
    Shape,
    /// `S_{b_t} / n`.
    IndexShape,
    /// `(K_{b_t} - sum_{j<=b_t} x^j/j) / sqrt(n / alpha)`.
    Fluctuation,
    /// `(S_{b_t} - sum_{j<=b_t} x^j) / sqrt(n alpha)`.
    IndexFluctuation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessPath {
    pub kind: PathKind,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl ProcessPath {
    /// `max_t |value(t) - t|` over the grid.
    pub fn sup_deviation(&self) -> f64 {
        self.t_grid
            .iter()
            .zip(&self.values)
            .map(|(t, v)| (v - t).abs())
            .fold(0.0, f64::max)
    }

    pub fn value_at(&self, t: f64) -> Option<f64> {
        grid_index(&self.t_grid, t).map(|i| self.values[i])
    }
}

pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![1.0],
        p => (0..p).map(|i| i as f64 / (p - 1) as f64).collect(),
    }
}

fn grid_index(grid: &[f64], t: f64) -> Option<usize> {
    grid.iter().position(|&g| (g - t).abs() <= 1e-12)
}

/// Cutoffs `b_t` and centering sums for one `(n, alpha, grid)`.
#[derive(Debug, Clone, Serialize)]
pub struct PathGrid {
    pub n: usize,
    pub alpha: usize,
    pub x: f64,
    pub t_grid: Vec<f64>,
    pub cutoffs: Vec<usize>,
    /// `sum_{j<=b_t} x^j / j` per grid point.
    pub cycle_centering: Vec<f64>,
    /// `sum_{j<=b_t} x^j` per grid point; exactly `n` where `b_t = alpha`.
    pub index_centering: Vec<f64>,
}

impl PathGrid {
    pub fn new(n: usize, alpha: usize, t_grid: &[f64]) -> Result<Self> {
        if alpha == 0 || alpha >= n {
            return Err(Error::InvalidArgument(format!(
                "path statistics need 1 <= alpha < n (got n = {n}, alpha = {alpha})"
            )));
        }
        if t_grid.is_empty() {
            return Err(Error::InvalidArgument("empty t grid".into()));
        }
        if t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) || t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "t grid must be strictly increasing inside [0, 1]".into(),
            ));
        }
        let sp = solve_saddle(n, alpha)?;
        let cutoffs = t_grid.iter().map(|&t| b_t(n, alpha, t)).collect::<Result<Vec<_>>>()?;

        let mut cyc = Vec::with_capacity(alpha + 1);
        let mut idx = Vec::with_capacity(alpha + 1);
        let (mut c, mut s) = (CompensatedSum::new(), CompensatedSum::new());
        cyc.push(0.0);
        idx.push(0.0);
        for j in 1..=alpha {
            let xj = (j as f64 * sp.ln_x).exp();
            c.add(xj / j as f64);
            s.add(xj);
            cyc.push(c.value());
            idx.push(s.value());
        }
        idx[alpha] = n as f64;

        Ok(PathGrid {
            n,
            alpha,
            x: sp.x,
            t_grid: t_grid.to_vec(),
            cycle_centering: cutoffs.iter().map(|&b| cyc[b]).collect(),
            index_centering: cutoffs.iter().map(|&b| idx[b]).collect(),
            cutoffs,
        })
    }

    pub fn uniform(n: usize, alpha: usize, points: usize) -> Result<Self> {
        Self::new(n, alpha, &uniform_grid(points))
    }

    fn check(&self, s: &CycleStructure) -> Result<()> {
        if s.n() != self.n || s.longest() > self.alpha {
            return Err(Error::InvalidArgument(format!(
                "sample of size {} with longest cycle {} does not fit n = {}, alpha = {}",
                s.n(),
                s.longest(),
                self.n,
                self.alpha
            )));
        }
        Ok(())
    }

    /// `(K_{b_t}, S_{b_t})` per grid point.
    fn cumulative(&self, s: &CycleStructure) -> Vec<(usize, usize)> {
        let parts = s.parts();
        let mut out = Vec::with_capacity(self.cutoffs.len());
        let (mut i, mut k, mut idx) = (0usize, 0usize, 0usize);
        for &b in &self.cutoffs {
            while i < parts.len() && parts[i].0 <= b {
                k += parts[i].1;
                idx += parts[i].0 * parts[i].1;
                i += 1;
            }
            out.push((k, idx));
        }
        out
    }

    pub fn path(&self, s: &CycleStructure, kind: PathKind) -> Result<ProcessPath> {
        self.check(s)?;
        let (n, alpha) = (self.n as f64, self.alpha as f64);
        let cum = self.cumulative(s);
        let values = cum
            .iter()
            .enumerate()
            .map(|(g, &(k, idx))| match kind {
                PathKind::Shape => k as f64 * alpha / n,
                PathKind::IndexShape => idx as f64 / n,
                PathKind::Fluctuation => (k as f64 - self.cycle_centering[g]) / (n / alpha).sqrt(),
                PathKind::IndexFluctuation => (idx as f64 - self.index_centering[g]) / (n * alpha).sqrt(),
            })
            .collect();
        Ok(ProcessPath {
            kind,
            t_grid: self.t_grid.clone(),
            values,
        })
    }

    pub fn paths(&self, samples: &[CycleStructure], kind: PathKind) -> Result<Vec<ProcessPath>> {
        samples.par_iter().map(|s| self.path(s, kind)).collect()
    }
}

pub fn shape_path(s: &CycleStructure, grid: &PathGrid) -> Result<ProcessPath> {
    grid.path(s, PathKind::Shape)
}

pub fn index_shape_path(s: &CycleStructure, grid: &PathGrid) -> Result<ProcessPath> {
    grid.path(s, PathKind::IndexShape)
}

pub fn fluctuation_path(s: &CycleStructure, grid: &PathGrid) -> Result<ProcessPath> {
    grid.path(s, PathKind::Fluctuation)
}

pub fn index_fluctuation_path(s: &CycleStructure, grid: &PathGrid) -> Result<ProcessPath> {
    grid.path(s, PathKind::IndexFluctuation)
}

/// Fraction of paths whose sup deviation from the diagonal exceeds `eps`.
pub fn exceedance_probability(paths: &[ProcessPath], eps: f64) -> f64 {
    if paths.is_empty() {
        return f64::NAN;
    }
    paths.iter().filter(|p| p.sup_deviation() > eps).count() as f64 / paths.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceEntry {
    pub s: f64,
    pub t: f64,
    pub estimate: f64,
    /// Bridge covariance `s (1 - t)`.
    pub predicted: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceEstimate {
    pub paths: usize,
    pub entries: Vec<CovarianceEntry>,
}

/// Empirical covariance of path values at each `(s, t)`; pairs are reordered
/// so that `s <= t`. Both times must lie on the paths' grid.
pub fn bridge_covariance(paths: &[ProcessPath], pairs: &[(f64, f64)]) -> Result<CovarianceEstimate> {
    if paths.len() < MIN_BRIDGE_PATHS {
        return Err(Error::TooFewSamples {
            got: paths.len(),
            need: MIN_BRIDGE_PATHS,
        });
    }
    let grid = &paths[0].t_grid;
    if paths.iter().any(|p| p.t_grid != *grid) {
        return Err(Error::InvalidArgument("paths use different grids".into()));
    }
    let column = |i: usize| paths.iter().map(|p| p.values[i]).collect::<Vec<f64>>();
    let entries = pairs
        .iter()
        .map(|&(a, b)| {
            let (s, t) = if a <= b { (a, b) } else { (b, a) };
            let lookup = |v: f64| {
                grid_index(grid, v)
                    .ok_or_else(|| Error::InvalidArgument(format!("time {v} is not on the path grid")))
            };
            let (i, j) = (lookup(s)?, lookup(t)?);
            let (estimate, stderr) = covariance_with_stderr(&column(i), &column(j));
            Ok(CovarianceEntry {
                s,
                t,
                estimate,
                predicted: s * (1.0 - t),
                stderr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CovarianceEstimate {
        paths: paths.len(),
        entries,
    })
}
