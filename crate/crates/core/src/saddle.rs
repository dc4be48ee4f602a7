//! The saddle-point equation `n = sum_j q_j x^j` and the quantities derived
//! from its root: the moments `lambda_p`, the cycle-count scale `mu_m`, the
//! length scale `b_t(n)` and the admissibility ratios.

use crate::error::{Error, Result};
use crate::exact_counts::WeightRow;
use crate::numeric::{compensated_sum, floor_pow};
use serde::{Deserialize, Serialize};

/// Bisection stops once the bracket is narrower than this (in `x`).
pub const BISECTION_WIDTH: f64 = 1e-13;
/// Newton polishing steps after bisection.
pub const MAX_NEWTON_STEPS: usize = 5;
/// Required `|sum_j q_j x^j - n| / n`.
pub const RESIDUAL_TOL: f64 = 1e-12;

const MAX_BISECTION_STEPS: usize = 400;

/// Root of the saddle-point equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddlePoint {
    pub x: f64,
    pub ln_x: f64,
    /// `|sum_j q_j x^j - n|`, evaluated by compensated direct summation.
    pub residual: f64,
    pub n: usize,
    pub alpha: usize,
    /// Proven bracket `[x_lower, x_upper]` the root was searched in.
    pub x_lower: f64,
    pub x_upper: f64,
    pub tolerance: f64,
    /// `None` means unit weights on `1..=alpha`.
    pub weights: Option<WeightRow>,
}

impl SaddlePoint {
    pub fn weight(&self, j: usize) -> f64 {
        match &self.weights {
            None => {
                if (1..=self.alpha).contains(&j) {
                    1.0
                } else {
                    0.0
                }
            }
            Some(w) => w.get(j),
        }
    }

    pub fn relative_residual(&self) -> f64 {
        self.residual / self.n as f64
    }

    /// `mu_m = x^m / m`.
    pub fn mu(&self, m: usize) -> f64 {
        (m as f64 * self.ln_x).exp() / m as f64
    }

    /// `sum_{j<=b} q_j x^j / j`.
    pub fn centering_cycles(&self, b: usize) -> f64 {
        compensated_sum((1..=b.min(self.alpha)).map(|j| self.weight(j) * (j as f64 * self.ln_x).exp() / j as f64))
    }

    /// `sum_{j<=b} q_j x^j`.
    pub fn centering_indices(&self, b: usize) -> f64 {
        compensated_sum((1..=b.min(self.alpha)).map(|j| self.weight(j) * (j as f64 * self.ln_x).exp()))
    }
}

/// Moments `lambda_p = sum_j q_j j^{p-1} x^j` for `p = 0..=p_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaMoments {
    pub lambda: Vec<f64>,
}

impl LambdaMoments {
    pub fn get(&self, p: usize) -> f64 {
        self.lambda[p]
    }
}

fn ln_expm1(v: f64) -> f64 {
    if v > 30.0 {
        v + (-(-v).exp_m1()).ln()
    } else {
        v.exp_m1().ln()
    }
}

/// `ln sum_j q_j e^{j u}`.
fn ln_sum(w: &Objective, u: f64) -> f64 {
    match w {
        Objective::Block { lo, hi } => {
            let len = (hi - lo + 1) as f64;
            if u == 0.0 {
                len.ln()
            } else if u > 0.0 {
                *lo as f64 * u + ln_expm1(len * u) - ln_expm1(u)
            } else {
                // sum_{j=lo}^{hi} e^{ju} = e^{hi u} sum_{k=0}^{len-1} e^{-k u}
                *hi as f64 * u + ln_expm1(-len * u) - ln_expm1(-u)
            }
        }
        Objective::General(row) => {
            let mut max = f64::NEG_INFINITY;
            for (j, q) in row.support() {
                max = max.max(q.ln() + j as f64 * u);
            }
            max + compensated_sum(row.support().map(|(j, q)| (q.ln() + j as f64 * u - max).exp())).ln()
        }
    }
}

/// `d/du ln sum_j q_j e^{ju}`, i.e. `lambda_2 / lambda_1`.
fn dln_sum(w: &Objective, u: f64) -> f64 {
    let row;
    let r = match w {
        Objective::General(r) => r,
        Objective::Block { lo, hi } => {
            row = WeightRow::indicator(*lo, *hi);
            &row
        }
    };
    let ls = ln_sum(w, u);
    compensated_sum(r.support().map(|(j, q)| j as f64 * (q.ln() + j as f64 * u - ls).exp()))
}

enum Objective {
    Block { lo: usize, hi: usize },
    General(WeightRow),
}

fn direct_sum(w: &WeightRow, ln_x: f64) -> f64 {
    compensated_sum(w.support().map(|(j, q)| q * (j as f64 * ln_x).exp()))
}

/// Solves `n = sum_{j<=alpha} x^j`. `alpha >= n` is treated as `alpha = n`
/// and gives `x = 1` exactly.
pub fn solve_saddle(n: usize, alpha: usize) -> Result<SaddlePoint> {
    if n == 0 || alpha == 0 {
        return Err(Error::InvalidArgument(format!(
            "saddle point needs n >= 1 and alpha >= 1 (got n = {n}, alpha = {alpha})"
        )));
    }
    let alpha = alpha.min(n);
    if alpha == n {
        return Ok(SaddlePoint {
            x: 1.0,
            ln_x: 0.0,
            residual: 0.0,
            n,
            alpha,
            x_lower: 1.0,
            x_upper: 1.0,
            tolerance: RESIDUAL_TOL,
            weights: None,
        });
    }
    let nf = n as f64;
    let a = alpha as f64;
    let u_lo = (nf / a).ln() / a;
    let u_hi = nf.ln() / a;
    let ln_x = solve_in_bracket(&Objective::Block { lo: 1, hi: alpha }, nf, u_lo, u_hi)?;
    let residual = (direct_sum(&WeightRow::unit(alpha), ln_x) - nf).abs();
    Ok(SaddlePoint {
        x: ln_x.exp(),
        ln_x,
        residual,
        n,
        alpha,
        x_lower: u_lo.exp(),
        x_upper: u_hi.exp(),
        tolerance: RESIDUAL_TOL,
        weights: None,
    })
}

/// Solves `n = sum_j q_j x^j` for a nonnegative, not identically zero row.
pub fn solve_saddle_weighted(n: usize, weights: &WeightRow) -> Result<SaddlePoint> {
    if n == 0 {
        return Err(Error::InvalidArgument("saddle point needs n >= 1".into()));
    }
    if weights.is_zero() {
        return Err(Error::ZeroWeights);
    }
    let nf = n as f64;
    let total: f64 = compensated_sum(weights.support().map(|(_, q)| q));
    let (j_min, q_min_j) = weights.support().next().expect("nonzero row");
    let (j_max, q_max_j) = weights.support().last().expect("nonzero row");

    let objective = match weights.unit_block() {
        Some((lo, hi)) => Objective::Block { lo, hi },
        None => Objective::General(weights.clone()),
    };
    let ln_x = if total == nf {
        0.0
    } else {
        let (u_lo, u_hi) = if total < nf {
            // q_J e^{Ju} <= n and n <= Q e^{Ju}
            ((nf / total).ln() / j_max as f64, (nf / q_max_j).ln() / j_max as f64)
        } else {
            // n <= Q e^{j_min u} and q_{j_min} e^{j_min u} <= n, with u < 0
            ((nf / total).ln() / j_min as f64, ((nf / q_min_j).ln() / j_min as f64).min(0.0))
        };
        solve_in_bracket(&objective, nf, u_lo.min(u_hi), u_hi.max(u_lo))?
    };
    let residual = (direct_sum(weights, ln_x) - nf).abs();
    let (x_lower, x_upper) = bracket_of(total, nf, j_min, q_min_j, j_max, q_max_j);
    Ok(SaddlePoint {
        x: ln_x.exp(),
        ln_x,
        residual,
        n,
        alpha: weights.alpha(),
        x_lower,
        x_upper,
        tolerance: RESIDUAL_TOL,
        weights: Some(weights.clone()),
    })
}

fn bracket_of(total: f64, nf: f64, j_min: usize, q_min: f64, j_max: usize, q_max: f64) -> (f64, f64) {
    if total == nf {
        (1.0, 1.0)
    } else if total < nf {
        (
            ((nf / total).ln() / j_max as f64).exp(),
            ((nf / q_max).ln() / j_max as f64).exp(),
        )
    } else {
        (
            ((nf / total).ln() / j_min as f64).exp(),
            ((nf / q_min).ln() / j_min as f64).min(0.0).exp(),
        )
    }
}

/// Bisection on `ln S(u) = ln n` followed by guarded Newton steps.
fn solve_in_bracket(w: &Objective, nf: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let target = nf.ln();
    let f = |u: f64| ln_sum(w, u) - target;
    debug_assert!(f(lo) <= 1e-12 && f(hi) >= -1e-12, "root not bracketed");
    let mut steps = 0;
    while (hi.exp() - lo.exp()) > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
        if steps > MAX_BISECTION_STEPS {
            return Err(Error::NoConvergence {
                method: "saddle bisection",
                iterations: steps,
                last_change: hi - lo,
            });
        }
    }
    let mut u = 0.5 * (lo + hi);
    let mut fu = f(u);
    for _ in 0..MAX_NEWTON_STEPS {
        if fu == 0.0 {
            break;
        }
        let d = dln_sum(w, u);
        if !(d > 0.0) {
            break;
        }
        let next = u - fu / d;
        if !(next >= lo && next <= hi) {
            break;
        }
        let fnext = f(next);
        if fnext.abs() >= fu.abs() {
            break;
        }
        u = next;
        fu = fnext;
    }
    Ok(u)
}

/// `lambda_p` for `p = 0..=p_max` at a solved saddle point.
pub fn lambda_moments(sp: &SaddlePoint, p_max: usize) -> LambdaMoments {
    let lambda = (0..=p_max)
        .map(|p| {
            compensated_sum((1..=sp.alpha).filter_map(|j| {
                let q = sp.weight(j);
                (q > 0.0).then(|| q * (j as f64).powi(p as i32 - 1) * (j as f64 * sp.ln_x).exp())
            }))
        })
        .collect();
    LambdaMoments { lambda }
}

/// `mu_m = x_{n,alpha}^m / m`.
pub fn mu(n: usize, alpha: usize, m: usize) -> Result<f64> {
    let alpha_eff = alpha.min(n);
    if m == 0 || m > alpha_eff {
        return Err(Error::InvalidArgument(format!(
            "m = {m} must lie in 1..={alpha_eff}"
        )));
    }
    Ok(solve_saddle(n, alpha)?.mu(m))
}

/// Predicted `ln(m mu_m)`: `(m/alpha)(ln(n/alpha) + ln ln(n/alpha))`.
pub fn mu_log_asymptotic(n: usize, alpha: usize, m: usize) -> Result<f64> {
    let ratio = n as f64 / alpha as f64;
    if alpha == 0 || ratio <= std::f64::consts::E {
        return Err(Error::InvalidArgument(format!(
            "n/alpha = {ratio} must exceed e"
        )));
    }
    if m == 0 || m > alpha {
        return Err(Error::InvalidArgument(format!("m = {m} must lie in 1..={alpha}")));
    }
    Ok(m as f64 / alpha as f64 * (ratio.ln() + ratio.ln().ln()))
}

/// Asymptotic behaviour of `E[C_m]` for the given scale of `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `m log n < alpha`: `m mu_m` close to one, as without the constraint.
    Classical,
    /// The constraint inflates `m mu_m` but `mu_m` stays bounded.
    Intermediate,
    /// `m / alpha >= beta / (1 - beta)` with `alpha = n^beta`: `mu_m` diverges.
    DivergentBoundary,
}

/// Classifies `m` against `alpha = n^beta` (with `beta = ln alpha / ln n`).
pub fn regime_classify(n: usize, alpha: usize, m: usize) -> Result<Regime> {
    if n < 2 || alpha == 0 || m == 0 || m > alpha {
        return Err(Error::InvalidArgument(format!(
            "need n >= 2 and 1 <= m <= alpha (got n = {n}, alpha = {alpha}, m = {m})"
        )));
    }
    let ln_n = (n as f64).ln();
    let beta = (alpha as f64).ln() / ln_n;
    let c = m as f64 / alpha as f64;
    if beta < 1.0 && c >= beta / (1.0 - beta) {
        return Ok(Regime::DivergentBoundary);
    }
    let y = m as f64 * ln_n / alpha as f64;
    Ok(if y < 1.0 {
        Regime::Classical
    } else {
        Regime::Intermediate
    })
}

/// `b_t(n) = max(alpha + floor(ln(t) alpha / ln(n/alpha)), 0)`, with
/// `b_0 = 0` and `b_1 = alpha`.
pub fn b_t(n: usize, alpha: usize, t: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("t = {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(0);
    }
    if t == 1.0 {
        return Ok(alpha);
    }
    let ratio = n as f64 / alpha as f64;
    if ratio <= 1.0 {
        // scale ln(n/alpha) vanishes: everything below t = 1 collapses to 0
        return Ok(0);
    }
    let shift = (t.ln() * alpha as f64 / ratio.ln()).floor();
    Ok((alpha as f64 + shift).max(0.0) as usize)
}

/// How `alpha` depends on `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlphaRule {
    Fixed(usize),
    /// `alpha = floor(n^beta)`.
    Power(f64),
}

impl AlphaRule {
    pub fn alpha(&self, n: usize) -> usize {
        match *self {
            AlphaRule::Fixed(a) => a,
            AlphaRule::Power(beta) => floor_pow(n, beta).max(1),
        }
    }
}

impl std::str::FromStr for AlphaRule {
    type Err = Error;

    /// Accepts an integer or `pow:BETA`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(b) = s.strip_prefix("pow:") {
            let beta: f64 = b
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad exponent in {s:?}")))?;
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::InvalidArgument(format!("exponent {beta} outside (0, 1]")));
            }
            Ok(AlphaRule::Power(beta))
        } else {
            let a: usize = s
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad alpha {s:?}")))?;
            if a == 0 {
                return Err(Error::InvalidArgument("alpha must be at least 1".into()));
            }
            Ok(AlphaRule::Fixed(a))
        }
    }
}

impl std::fmt::Display for AlphaRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlphaRule::Fixed(a) => write!(f, "{a}"),
            AlphaRule::Power(b) => write!(f, "pow:{b}"),
        }
    }
}

/// Admissibility diagnostics of one weight row at one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub n: usize,
    pub alpha: usize,
    /// `alpha ln x / ln(n/alpha)`.
    pub cond_ratio_i: f64,
    /// `lambda_2 / (n alpha)`.
    pub cond_ratio_ii: f64,
    pub cond_iii_ok: bool,
    /// Start `b` of the longest tail `b..=alpha` with positive weights
    /// (`alpha + 1` when `q_alpha = 0`).
    pub witness_b: usize,
    /// Smallest weight on that tail.
    pub witness_c: f64,
    /// `1 - b/alpha`.
    pub witness_delta: f64,
}

/// Summary over an `n` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityGrid {
    pub reports: Vec<AdmissibilityReport>,
    pub ratio_i_range: (f64, f64),
    pub ratio_ii_range: (f64, f64),
    /// Condition (iii) holds with a common `delta > 0` and `c > 0`.
    pub cond_iii_uniform: bool,
}

pub fn admissibility_at(n: usize, weights: &WeightRow) -> Result<AdmissibilityReport> {
    let sp = solve_saddle_weighted(n, weights)?;
    let alpha = weights.alpha();
    let lm = lambda_moments(&sp, 2);
    let ratio = n as f64 / alpha as f64;
    let cond_ratio_i = alpha as f64 * sp.ln_x / ratio.ln();
    let cond_ratio_ii = lm.get(2) / (n as f64 * alpha as f64);

    let q = weights.as_slice();
    let tail_len = q.iter().rev().take_while(|&&v| v > 0.0).count();
    let witness_b = alpha + 1 - tail_len;
    let witness_c = q[alpha - tail_len..].iter().copied().fold(f64::INFINITY, f64::min);
    let witness_c = if tail_len == 0 { 0.0 } else { witness_c };
    let witness_delta = 1.0 - witness_b as f64 / alpha as f64;
    Ok(AdmissibilityReport {
        n,
        alpha,
        cond_ratio_i,
        cond_ratio_ii,
        cond_iii_ok: tail_len > 0 && witness_delta > 0.0 && witness_c > 0.0,
        witness_b,
        witness_c,
        witness_delta,
    })
}

/// Evaluates the admissibility ratios of `family(n)` for every `n` in the grid.
pub fn check_admissibility(
    family: impl Fn(usize) -> WeightRow,
    n_grid: &[usize],
) -> Result<AdmissibilityGrid> {
    let reports = n_grid
        .iter()
        .map(|&n| admissibility_at(n, &family(n)))
        .collect::<Result<Vec<_>>>()?;
    let range = |f: fn(&AdmissibilityReport) -> f64| {
        reports.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
    };
    let cond_iii_uniform = !reports.is_empty()
        && reports.iter().all(|r| r.cond_iii_ok)
        && reports.iter().map(|r| r.witness_delta).fold(f64::INFINITY, f64::min) > 0.0
        && reports.iter().map(|r| r.witness_c).fold(f64::INFINITY, f64::min) > 0.0;
    Ok(AdmissibilityGrid {
        ratio_i_range: range(|r| r.cond_ratio_i),
        ratio_ii_range: range(|r| r.cond_ratio_ii),
        cond_iii_uniform,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Plain bisection on the direct power sum, independent of the solver's
    /// log-space objective.
    fn oracle_root(n: f64, q: &[(usize, f64)], mut lo: f64, mut hi: f64) -> f64 {
        let s = |x: f64| q.iter().map(|&(j, w)| w * x.powi(j as i32)).sum::<f64>();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if s(mid) < n {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn unconstrained_root_is_one() {
        for n in [1, 2, 17, 1000] {
            let sp = solve_saddle(n, n).unwrap();
            assert_eq!(sp.x, 1.0);
            assert_eq!(solve_saddle(n, n + 5).unwrap().x, 1.0);
        }
    }

    #[test]
    fn two_over_one() {
        let sp = solve_saddle(2, 1).unwrap();
        assert!((sp.x - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hundred_over_ten() {
        let sp = solve_saddle(100, 10).unwrap();
        let q: Vec<_> = (1..=10).map(|j| (j, 1.0)).collect();
        let oracle = oracle_root(100.0, &q, 1.0, 100f64.powf(0.1));
        assert!((sp.x - oracle).abs() < 1e-13);
        assert!(sp.relative_residual() <= RESIDUAL_TOL);
        // x^alpha <= n <= alpha x^alpha forces x^10 into [10, 100]
        let xa = sp.x.powi(10);
        assert!((10.0..=100.0).contains(&xa));
        let m10 = mu(100, 10, 10).unwrap();
        assert!((m10 - oracle.powi(10) / 10.0).abs() < 1e-12);
        assert!((m10 - 2.977880131180905).abs() < 1e-9);
        assert!((mu(100, 10, 1).unwrap() - sp.x).abs() < 1e-15);
    }

    #[test]
    fn weighted_examples() {
        let a = solve_saddle(6, 3).unwrap();
        let b = solve_saddle_weighted(6, &WeightRow::unit(3)).unwrap();
        assert!((a.x - b.x).abs() < 1e-14);

        let c = solve_saddle_weighted(6, &WeightRow::new(vec![2.0, 2.0, 2.0]).unwrap()).unwrap();
        assert_eq!(c.x, 1.0);

        let w = WeightRow::indicator(2, 5);
        let d = solve_saddle_weighted(10, &w).unwrap();
        let q: Vec<_> = (2..=5).map(|j| (j, 1.0)).collect();
        assert!((d.x - oracle_root(10.0, &q, 0.5, 3.0)).abs() < 1e-13);
        assert!(d.relative_residual() <= RESIDUAL_TOL);

        // root below one when the weights are large
        let big = WeightRow::new(vec![5.0, 7.0, 0.0, 1.0]).unwrap();
        let e = solve_saddle_weighted(3, &big).unwrap();
        assert!(e.x < 1.0);
        let q = vec![(1, 5.0), (2, 7.0), (4, 1.0)];
        assert!((e.x - oracle_root(3.0, &q, 0.0, 1.0)).abs() < 1e-13);
        assert!(e.x >= e.x_lower && e.x <= e.x_upper);

        assert!(matches!(
            solve_saddle_weighted(5, &WeightRow::new(vec![0.0, 0.0]).unwrap()),
            Err(Error::ZeroWeights)
        ));
    }

    #[test]
    fn lambda_examples() {
        let sp = solve_saddle(50, 50).unwrap();
        let lm = lambda_moments(&sp, 4);
        assert_eq!(lm.get(1), 50.0);
        assert_eq!(lm.get(2), (50 * 51 / 2) as f64);

        let sp = solve_saddle(100, 10).unwrap();
        let lm = lambda_moments(&sp, 4);
        assert!((lm.get(1) - 100.0).abs() < 1e-10 * 100.0);
        let direct: f64 = (1..=10).map(|j| j as f64 * sp.x.powi(j)).sum();
        assert!((lm.get(2) - direct).abs() < 1e-12 * direct);
        let r = lm.get(2) / 1000.0;
        assert!(r > 0.5 && r < 1.0, "lambda_2/(n alpha) = {r}");
        for p in 1..=4 {
            assert!(lm.get(p) <= 100.0 * 10f64.powi(p as i32 - 1) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn mu_rules() {
        assert!((mu(30, 30, 7).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        assert!(mu(30, 5, 6).is_err());
        let l = mu_log_asymptotic(1000, 10, 10).unwrap();
        let r = 100f64;
        assert!((l - (r.ln() + r.ln().ln())).abs() < 1e-14);
        assert!(mu_log_asymptotic(20, 10, 3).is_err());
    }

    #[test]
    fn regimes() {
        // alpha = n^{1/3}: c >= 1/2 diverges
        let n = 1_000_000;
        let alpha = 100;
        assert_eq!(regime_classify(n, alpha, 60).unwrap(), Regime::DivergentBoundary);
        assert_eq!(regime_classify(n, alpha, 1).unwrap(), Regime::Classical);
        assert_eq!(regime_classify(n, alpha, 20).unwrap(), Regime::Intermediate);
        // alpha = n^{2/3}: never divergent
        let alpha = 10_000;
        for m in [1, 100, 1000, 5000, 10_000] {
            assert_ne!(regime_classify(n, alpha, m).unwrap(), Regime::DivergentBoundary);
        }
        assert!(regime_classify(n, alpha, alpha + 1).is_err());
    }

    #[test]
    fn b_t_examples() {
        assert_eq!(b_t(10_000, 100, 1.0).unwrap(), 100);
        assert_eq!(b_t(10_000, 100, 0.0).unwrap(), 0);
        assert_eq!(b_t(10_000, 100, 0.5).unwrap(), 84);
        assert_eq!(b_t(10_000, 100, 1e-30).unwrap(), 0);
        assert!(b_t(10, 3, 1.5).is_err());
    }

    #[test]
    fn admissibility_unit_weights() {
        let grid: Vec<usize> = vec![1000, 10_000, 100_000, 1_000_000];
        let rep = check_admissibility(|n| WeightRow::unit(floor_pow(n, 0.5)), &grid).unwrap();
        assert!(rep.ratio_i_range.0 > 1.0 && rep.ratio_i_range.1 < 2.0, "{:?}", rep.ratio_i_range);
        assert!(rep.cond_iii_uniform);
        let last = rep.reports.last().unwrap().cond_ratio_ii;
        let first = rep.reports[0].cond_ratio_ii;
        assert!(last > first && last < 1.0 && last > 0.7, "ratio ii {first} -> {last}");
    }

    #[test]
    fn admissibility_fails_without_tail() {
        let rep = check_admissibility(
            |n| {
                let a = floor_pow(n, 0.5);
                WeightRow::from_fn(a, |j| if j <= a / 2 { 1.0 } else { 0.0 }).unwrap()
            },
            &[1000, 10_000],
        )
        .unwrap();
        assert!(!rep.cond_iii_uniform);
        assert!(rep.reports.iter().all(|r| !r.cond_iii_ok));
    }

    #[test]
    fn alpha_rule_parsing() {
        assert_eq!("pow:0.5".parse::<AlphaRule>().unwrap(), AlphaRule::Power(0.5));
        assert_eq!("12".parse::<AlphaRule>().unwrap(), AlphaRule::Fixed(12));
        assert!("pow:1.5".parse::<AlphaRule>().is_err());
        assert!("0".parse::<AlphaRule>().is_err());
        assert_eq!(AlphaRule::Power(0.6).alpha(100_000), 1000);
    }

    proptest! {
        #[test]
        fn bracket_and_residual(n in 2usize..1_000_000, beta in 0.05f64..0.95) {
            let alpha = floor_pow(n, beta).max(1).min(n - 1);
            let sp = solve_saddle(n, alpha).unwrap();
            let a = alpha as f64;
            let lo = (n as f64 / a).powf(1.0 / a);
            let hi = (n as f64).powf(1.0 / a);
            prop_assert!(sp.x >= lo * (1.0 - 1e-14) && sp.x <= hi * (1.0 + 1e-14));
            prop_assert!(sp.x > 1.0);
            prop_assert!(sp.relative_residual() <= RESIDUAL_TOL);
            let lm = lambda_moments(&sp, 1);
            prop_assert!((lm.get(1) / n as f64 - 1.0).abs() < 1e-10);
        }

        #[test]
        fn root_monotone(n in 10usize..100_000, alpha in 2usize..50) {
            prop_assume!(alpha + 1 < n);
            let a = solve_saddle(n, alpha).unwrap().x;
            let b = solve_saddle(n, alpha + 1).unwrap().x;
            let c = solve_saddle(n + 1, alpha).unwrap().x;
            prop_assert!(b < a);
            prop_assert!(c > a);
        }

        #[test]
        fn b_t_monotone(n in 100usize..1_000_000, beta in 0.2f64..0.9, s in 0.0f64..1.0, t in 0.0f64..1.0) {
            let alpha = floor_pow(n, beta);
            let (s, t) = if s <= t { (s, t) } else { (t, s) };
            prop_assert!(b_t(n, alpha, s).unwrap() <= b_t(n, alpha, t).unwrap());
            prop_assert!(b_t(n, alpha, t).unwrap() <= alpha);
        }
    }
}
