//! Saddle-point estimates of `[z^n] f(z) exp(sum_j q_j z^j / j)` and a
//! trapezoid-rule contour integral on `|z| = x` that checks them.

use crate::error::{Error, Result};
use crate::exact_counts::{log_coefficients, LogReal, WeightRow};
use crate::numeric::pairwise_sum;
use crate::saddle::{lambda_moments, solve_saddle_weighted, SaddlePoint};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Number of points in the `theta` grid used by [`fnorm`].
pub const FNORM_GRID_POINTS: usize = 33;
/// Relative change between successive node doublings accepted as converged.
pub const QUADRATURE_TOL: f64 = 1e-8;
pub const MAX_QUADRATURE_NODES: usize = 1 << 20;

/// Prefactor `f_n(z)` multiplying the exponential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionSpec {
    /// `f = 1`.
    One,
    /// `f = z^m / m`.
    Monomial { m: usize },
    /// `f = exp(sum_k (e^{s_k} - 1) z^{m_k} / m_k)`, entries `(s_k, m_k)`.
    ExpLinear { terms: Vec<(f64, usize)> },
    /// `f = exp(sum_{j<=b} (z^j - 1) / j)`.
    ExpPartialSum { b: usize },
    /// `factor * inner`, `factor > 0`.
    Scaled { factor: f64, inner: Box<FunctionSpec> },
}

/// `z^j` for `z = x e^{i theta}`, given `ln x`.
#[inline]
fn zpow(ln_x: f64, theta: f64, j: usize) -> Complex64 {
    Complex64::from_polar((j as f64 * ln_x).exp(), j as f64 * theta)
}

/// `z^j - x^j` without cancellation at small `theta`.
#[inline]
fn zpow_minus_real(ln_x: f64, theta: f64, j: usize) -> Complex64 {
    let r = (j as f64 * ln_x).exp();
    let a = j as f64 * theta;
    let half = (0.5 * a).sin();
    Complex64::new(-2.0 * r * half * half, r * a.sin())
}

impl std::str::FromStr for FunctionSpec {
    type Err = Error;

    /// `one`, `monomial:M` or `exp-partial:B`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown function {s:?} (expected one, monomial:M or exp-partial:B)"));
        if s == "one" {
            return Ok(FunctionSpec::One);
        }
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let v: usize = arg.parse().map_err(|_| bad())?;
        match kind {
            "monomial" => Ok(FunctionSpec::Monomial { m: v }),
            "exp-partial" => Ok(FunctionSpec::ExpPartialSum { b: v }),
            _ => Err(bad()),
        }
    }
}

impl FunctionSpec {
    fn validate(&self) -> Result<()> {
        match self {
            FunctionSpec::Monomial { m: 0 } => {
                Err(Error::InvalidArgument("monomial needs m >= 1".into()))
            }
            FunctionSpec::ExpLinear { terms } if terms.iter().any(|&(s, m)| m == 0 || !s.is_finite()) => {
                Err(Error::InvalidArgument("exp-linear terms need finite s and m >= 1".into()))
            }
            FunctionSpec::Scaled { factor, inner } => {
                if !(factor.is_finite() && *factor > 0.0) {
                    return Err(Error::InvalidArgument(format!("scale factor {factor} must be positive")));
                }
                inner.validate()
            }
            _ => Ok(()),
        }
    }

    /// `ln f(x)` for real `x = e^{ln_x}`.
    pub fn ln_at_real(&self, ln_x: f64) -> f64 {
        match self {
            FunctionSpec::One => 0.0,
            FunctionSpec::Monomial { m } => *m as f64 * ln_x - (*m as f64).ln(),
            FunctionSpec::ExpLinear { terms } => terms
                .iter()
                .map(|&(s, m)| s.exp_m1() * (m as f64 * ln_x).exp() / m as f64)
                .sum(),
            FunctionSpec::ExpPartialSum { b } => (1..=*b)
                .map(|j| (j as f64 * ln_x).exp_m1() / j as f64)
                .sum(),
            FunctionSpec::Scaled { factor, inner } => factor.ln() + inner.ln_at_real(ln_x),
        }
    }

    /// `ln f(z) - ln f(x)` at `z = x e^{i theta}` (a branch consistent
    /// along the circle).
    pub fn ln_ratio_on_circle(&self, ln_x: f64, theta: f64) -> Complex64 {
        match self {
            FunctionSpec::One => Complex64::new(0.0, 0.0),
            FunctionSpec::Monomial { m } => Complex64::new(0.0, *m as f64 * theta),
            FunctionSpec::ExpLinear { terms } => terms
                .iter()
                .map(|&(s, m)| zpow_minus_real(ln_x, theta, m) * (s.exp_m1() / m as f64))
                .sum(),
            FunctionSpec::ExpPartialSum { b } => (1..=*b)
                .map(|j| zpow_minus_real(ln_x, theta, j) / j as f64)
                .sum(),
            FunctionSpec::Scaled { inner, .. } => inner.ln_ratio_on_circle(ln_x, theta),
        }
    }

    /// `f'(z) / f(z)` at `z = x e^{i theta}`.
    pub fn log_derivative(&self, ln_x: f64, theta: f64) -> Complex64 {
        match self {
            FunctionSpec::One => Complex64::new(0.0, 0.0),
            FunctionSpec::Monomial { m } => Complex64::from_polar(*m as f64 * (-ln_x).exp(), -theta),
            FunctionSpec::ExpLinear { terms } => terms
                .iter()
                .map(|&(s, m)| zpow(ln_x, theta, m - 1) * s.exp_m1())
                .sum(),
            FunctionSpec::ExpPartialSum { b } => (0..*b).map(|j| zpow(ln_x, theta, j)).sum(),
            FunctionSpec::Scaled { inner, .. } => inner.log_derivative(ln_x, theta),
        }
    }

    /// Upper bound of `sup_{|theta|<=theta_n} |f'(x e^{i theta})| / |f(x)|`.
    pub fn derivative_bound(&self, ln_x: f64, theta_n: f64) -> f64 {
        let x = ln_x.exp();
        match self {
            FunctionSpec::One => 0.0,
            // |f'(z)| = x^{m-1} on the whole circle
            FunctionSpec::Monomial { m } => *m as f64 / x,
            FunctionSpec::ExpLinear { terms } => {
                // |f(z)/f(x)| <= exp(sum |e^s - 1| x^m |e^{i m theta} - 1| / m)
                let growth: f64 = terms
                    .iter()
                    .map(|&(s, m)| {
                        s.exp_m1().abs() * (m as f64 * ln_x).exp() * (m as f64 * theta_n).min(2.0) / m as f64
                    })
                    .sum();
                let deriv: f64 = terms
                    .iter()
                    .map(|&(s, m)| s.exp_m1().abs() * ((m - 1) as f64 * ln_x).exp())
                    .sum();
                deriv * growth.exp()
            }
            // nonnegative Taylor coefficients: |f(z)| <= f(x), |f'(z)| <= f'(x)
            FunctionSpec::ExpPartialSum { b } => (0..*b).map(|j| (j as f64 * ln_x).exp()).sum(),
            FunctionSpec::Scaled { inner, .. } => inner.derivative_bound(ln_x, theta_n),
        }
    }
}

/// `theta_n = n^{-5/12} alpha^{-7/12}`.
pub fn theta_n(n: usize, alpha: usize) -> f64 {
    (n as f64).powf(-5.0 / 12.0) * (alpha as f64).powf(-7.0 / 12.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnormReport {
    pub theta_n: f64,
    /// `theta_n` times the largest ratio seen on the grid.
    pub grid_value: f64,
    /// `theta_n` times the analytic bound of the descriptor.
    pub analytic_value: f64,
    /// `max` of the two; an upper estimate of the norm.
    pub value: f64,
}

fn fnorm_at(fspec: &FunctionSpec, sp: &SaddlePoint, n: usize) -> FnormReport {
    let th = theta_n(n, sp.alpha);
    let grid_sup = (0..FNORM_GRID_POINTS)
        .map(|i| {
            let theta = -th + 2.0 * th * i as f64 / (FNORM_GRID_POINTS - 1) as f64;
            let ratio = fspec.ln_ratio_on_circle(sp.ln_x, theta);
            fspec.log_derivative(sp.ln_x, theta).norm() * ratio.re.exp()
        })
        .fold(0.0, f64::max);
    let analytic = fspec.derivative_bound(sp.ln_x, th);
    FnormReport {
        theta_n: th,
        grid_value: th * grid_sup,
        analytic_value: th * analytic,
        value: th * grid_sup.max(analytic),
    }
}

/// `|||f|||_n = theta_n sup_{|theta|<=theta_n} |f'(x e^{i theta})| / |f(x)|`.
pub fn fnorm(fspec: &FunctionSpec, weights: &WeightRow, n: usize) -> Result<FnormReport> {
    fspec.validate()?;
    let sp = solve_saddle_weighted(n, weights)?;
    Ok(fnorm_at(fspec, &sp, n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateComponents {
    pub ln_f_at_x: f64,
    pub lambda_0: f64,
    pub lambda_2: f64,
    pub x: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffEstimate {
    pub value: LogReal,
    pub components: EstimateComponents,
    /// `alpha/n + |||f|||_n`.
    pub claimed_rel_error: f64,
    pub fnorm: FnormReport,
    pub warnings: Vec<String>,
}

impl EstimateComponents {
    /// `ln( f(x) e^{lambda_0} / (x^n sqrt(2 pi lambda_2)) )`.
    pub fn ln_value(&self) -> f64 {
        self.ln_f_at_x + self.lambda_0
            - self.n as f64 * self.x.ln()
            - 0.5 * (2.0 * PI * self.lambda_2).ln()
    }
}

/// Saddle-point estimate `f(x) e^{lambda_0} / (x^n sqrt(2 pi lambda_2))`.
pub fn coeff_estimate(fspec: &FunctionSpec, weights: &WeightRow, n: usize) -> Result<CoeffEstimate> {
    fspec.validate()?;
    let sp = solve_saddle_weighted(n, weights)?;
    let lm = lambda_moments(&sp, 2);
    let ln_f = fspec.ln_at_real(sp.ln_x);
    if !ln_f.is_finite() {
        return Err(Error::NotEvaluable(sp.x));
    }
    let components = EstimateComponents {
        ln_f_at_x: ln_f,
        lambda_0: lm.get(0),
        lambda_2: lm.get(2),
        x: sp.x,
        n,
    };
    let fn_report = fnorm_at(fspec, &sp, n);
    let alpha = weights.alpha();
    let mut warnings = Vec::new();
    let ratio = n as f64 / alpha as f64;
    if ratio > 1.0 {
        let r_i = alpha as f64 * sp.ln_x / ratio.ln();
        let r_ii = lm.get(2) / (n as f64 * alpha as f64);
        if !(0.1..=10.0).contains(&r_i) || !(0.1..=10.0).contains(&r_ii) {
            warnings.push(format!(
                "weights look inadmissible at n = {n}: ratio (i) = {r_i:.3}, ratio (ii) = {r_ii:.3}"
            ));
        }
    } else {
        warnings.push(format!("alpha = {alpha} >= n = {n}: error claim is void"));
    }
    if fn_report.value >= 1.0 {
        warnings.push(format!("prefactor norm {:.3} is not small", fn_report.value));
    }
    Ok(CoeffEstimate {
        value: LogReal::from_ln(components.ln_value()),
        claimed_rel_error: alpha as f64 / n as f64 + fn_report.value,
        components,
        fnorm: fn_report,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: LogReal,
    /// `|Im| / |Re|` of the normalized integral.
    pub imag_ratio: f64,
    pub nodes: usize,
    pub last_rel_change: f64,
}

/// `g_n(theta) = sum_j q_j (e^{ij theta} - 1) x^j / j - i n theta`.
fn g_n(sp: &SaddlePoint, weights: &WeightRow, theta: f64) -> Complex64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (j, q) in weights.support() {
        let d = zpow_minus_real(sp.ln_x, theta, j) * (q / j as f64);
        re += d.re;
        im += d.im;
    }
    Complex64::new(re, im - sp.n as f64 * theta)
}

fn integrand(fspec: &FunctionSpec, sp: &SaddlePoint, weights: &WeightRow, theta: f64) -> Complex64 {
    (fspec.ln_ratio_on_circle(sp.ln_x, theta) + g_n(sp, weights, theta)).exp()
}

fn node_sum(values: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = values.iter().map(|c| c.re).collect();
    let im: Vec<f64> = values.iter().map(|c| c.im).collect();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

/// `x^{-n} (2 pi)^{-1} int_{-pi}^{pi} f(x e^{i theta}) exp(sum_j q_j (x e^{i theta})^j / j) e^{-i n theta} d theta`
/// by the periodic trapezoid rule, doubling the node count from `nodes`
/// until two successive results agree to [`QUADRATURE_TOL`].
pub fn coeff_quadrature(
    fspec: &FunctionSpec,
    weights: &WeightRow,
    n: usize,
    nodes: usize,
) -> Result<QuadratureResult> {
    coeff_quadrature_with(fspec, weights, n, nodes, QUADRATURE_TOL, MAX_QUADRATURE_NODES)
}

pub fn coeff_quadrature_with(
    fspec: &FunctionSpec,
    weights: &WeightRow,
    n: usize,
    nodes: usize,
    tol: f64,
    max_nodes: usize,
) -> Result<QuadratureResult> {
    fspec.validate()?;
    if nodes < 64 {
        return Err(Error::InvalidArgument(format!("need at least 64 nodes, got {nodes}")));
    }
    let sp = solve_saddle_weighted(n, weights)?;
    let lm = lambda_moments(&sp, 0);
    let eval = |count: usize, offset: usize, stride: usize| -> Complex64 {
        let values: Vec<Complex64> = (0..count)
            .into_par_iter()
            .map(|k| {
                let idx = offset + k * stride;
                let theta = -PI + 2.0 * PI * idx as f64 / (count * stride) as f64;
                integrand(fspec, &sp, weights, theta)
            })
            .collect();
        node_sum(&values)
    };

    let mut count = nodes;
    let mut sum = eval(count, 0, 1);
    let mut mean = sum / count as f64;
    let mut change = f64::INFINITY;
    while count * 2 <= max_nodes {
        // new nodes sit halfway between the old ones
        let odd = eval(count, 1, 2);
        let next_sum = sum + odd;
        let next_mean = next_sum / (2 * count) as f64;
        change = ((next_mean - mean).norm() / next_mean.norm()).min(f64::MAX);
        sum = next_sum;
        mean = next_mean;
        count *= 2;
        if change <= tol {
            break;
        }
    }
    if change > tol {
        return Err(Error::NoConvergence {
            method: "contour quadrature",
            iterations: count,
            last_change: change,
        });
    }
    if !(mean.re > 0.0) {
        return Err(Error::NotEvaluable(sp.x));
    }
    let ln_value = fspec.ln_at_real(sp.ln_x) + lm.get(0) - n as f64 * sp.ln_x + mean.re.ln();
    Ok(QuadratureResult {
        value: LogReal::from_ln(ln_value),
        imag_ratio: mean.im.abs() / mean.re,
        nodes: count,
        last_rel_change: change,
    })
}

/// The coefficient computed exactly from the power-series recurrence: the
/// prefactor is folded into the weights (all descriptors are exponentials
/// of polynomials, or a monomial shift).
pub fn exact_coefficient(fspec: &FunctionSpec, weights: &WeightRow, n: usize) -> Result<LogReal> {
    fspec.validate()?;
    match fspec {
        FunctionSpec::One => Ok(log_coefficients(weights, n).coeffs[n]),
        FunctionSpec::Monomial { m } => {
            if *m > n {
                return Ok(LogReal::ZERO);
            }
            let c = log_coefficients(weights, n - m).coeffs[n - m];
            Ok(c / LogReal::from_f64(*m as f64))
        }
        FunctionSpec::ExpLinear { terms } => {
            let top = terms.iter().map(|t| t.1).max().unwrap_or(0).max(weights.alpha());
            let mut q: Vec<f64> = (1..=top).map(|j| weights.get(j)).collect();
            for &(s, m) in terms {
                q[m - 1] += s.exp_m1();
            }
            let row = WeightRow::new(q)?;
            Ok(log_coefficients(&row, n).coeffs[n])
        }
        FunctionSpec::ExpPartialSum { b } => {
            let top = (*b).max(weights.alpha());
            let q: Vec<f64> = (1..=top)
                .map(|j| weights.get(j) + if j <= *b { 1.0 } else { 0.0 })
                .collect();
            let row = WeightRow::new(q)?;
            let h = crate::exact_counts::harmonic_range(0, *b);
            Ok(log_coefficients(&row, n).coeffs[n] * LogReal::from_ln(-h))
        }
        FunctionSpec::Scaled { factor, inner } => {
            Ok(exact_coefficient(inner, weights, n)? * LogReal::from_f64(*factor))
        }
    }
}

/// One line of the estimate-versus-exact comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub n: usize,
    pub alpha: usize,
    pub exact: LogReal,
    pub estimate: LogReal,
    pub quadrature: Option<LogReal>,
    pub rel_err: f64,
    pub claimed_err: f64,
}

/// Compares the saddle-point estimate (and, when `quadrature_nodes` is
/// given, the contour integral) with the exact coefficient at unit weights.
pub fn verify_unit_weights(
    fspec: &FunctionSpec,
    n: usize,
    alpha: usize,
    quadrature_nodes: Option<usize>,
) -> Result<VerifyRow> {
    let weights = WeightRow::unit(alpha.min(n));
    let exact = exact_coefficient(fspec, &weights, n)?;
    let est = coeff_estimate(fspec, &weights, n)?;
    let quadrature = quadrature_nodes
        .map(|nodes| coeff_quadrature(fspec, &weights, n, nodes).map(|q| q.value))
        .transpose()?;
    Ok(VerifyRow {
        n,
        alpha: weights.alpha(),
        exact,
        estimate: est.value,
        quadrature,
        rel_err: est.value.rel_diff(exact),
        claimed_err: est.claimed_rel_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_counts::{z_norm, CountTable};
    use crate::numeric::floor_pow;

    #[test]
    fn theta_examples() {
        assert_eq!(theta_n(1, 1), 1.0);
        let t = theta_n(1 << 12, 1 << 12);
        assert!((t * 4096.0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lambda2_theta_squared_grows_like_sixth_root() {
        for (n, a) in [(10_000usize, 100usize), (1_000_000, 1000)] {
            let sp = crate::saddle::solve_saddle(n, a).unwrap();
            let l2 = lambda_moments(&sp, 2).get(2);
            let v = l2 * theta_n(n, a).powi(2);
            let pred = (n as f64 / a as f64).powf(1.0 / 6.0);
            assert!(v / pred > 0.5 && v / pred < 1.0, "{v} vs {pred}");
        }
    }

    #[test]
    fn fnorm_constant_and_monomial() {
        let w = WeightRow::unit(20);
        assert_eq!(fnorm(&FunctionSpec::One, &w, 400).unwrap().value, 0.0);
        let m = 7;
        let r = fnorm(&FunctionSpec::Monomial { m }, &w, 400).unwrap();
        let sp = solve_saddle_weighted(400, &w).unwrap();
        let th = theta_n(400, 20);
        let x = sp.x;
        assert!(r.value <= th * m as f64 * x.powi(m as i32 - 1) / (x.powi(m as i32) / m as f64));
        assert!((r.value - th * m as f64 / x).abs() < 1e-14);
        assert!((r.grid_value - r.analytic_value).abs() < 1e-12);
    }

    #[test]
    fn fnorm_partial_sum_bound() {
        let (n, alpha, b) = (10_000, 100, 3);
        let w = WeightRow::indicator(b + 1, alpha);
        let r = fnorm(&FunctionSpec::ExpPartialSum { b }, &w, n).unwrap();
        let x = solve_saddle_weighted(n, &w).unwrap().x;
        assert!(r.grid_value <= r.analytic_value * (1.0 + 1e-12));
        assert!(r.value <= theta_n(n, alpha) * b as f64 * x.powi(b as i32));
    }

    #[test]
    fn fnorm_exp_linear_is_upper_bound() {
        let f = FunctionSpec::ExpLinear { terms: vec![(0.3, 5), (-0.4, 9)] };
        let r = fnorm(&f, &WeightRow::unit(10), 200).unwrap();
        assert!(r.grid_value <= r.analytic_value);
    }

    #[test]
    fn estimate_close_to_exact_z() {
        let est = coeff_estimate(&FunctionSpec::One, &WeightRow::unit(14), 200).unwrap();
        let exact = z_norm(200, 14).unwrap();
        assert!(est.value.rel_diff(exact) <= 0.25);
        assert!(est.warnings.is_empty(), "{:?}", est.warnings);
        let c = &est.components;
        assert!((c.ln_value() - est.value.ln()).abs() < 1e-12);
    }

    #[test]
    fn estimate_scale_covariance() {
        // exp-linear with a single term of s = 0 is the constant one
        let w = WeightRow::unit(12);
        let a = coeff_estimate(&FunctionSpec::One, &w, 150).unwrap();
        let b = coeff_estimate(&FunctionSpec::ExpPartialSum { b: 0 }, &w, 150).unwrap();
        assert_eq!(a.value, b.value);
        for inner in [FunctionSpec::One, FunctionSpec::Monomial { m: 5 }] {
            let base = coeff_estimate(&inner, &w, 150).unwrap();
            let scaled = FunctionSpec::Scaled { factor: 3.5, inner: Box::new(inner) };
            let s = coeff_estimate(&scaled, &w, 150).unwrap();
            assert!((s.value.ln() - base.value.ln() - 3.5f64.ln()).abs() < 1e-14);
            assert_eq!(s.claimed_rel_error, base.claimed_rel_error);
        }
    }

    #[test]
    fn estimate_reproduces_mean_cycle_count() {
        let (n, alpha) = (2000, 44);
        let w = WeightRow::unit(alpha);
        let table = CountTable::auto(alpha, n).unwrap();
        let z = coeff_estimate(&FunctionSpec::One, &w, n).unwrap().value;
        for m in [1, 10, alpha] {
            let est = coeff_estimate(&FunctionSpec::Monomial { m }, &w, n).unwrap().value;
            let ratio = (est / z).to_f64();
            let mu = crate::saddle::mu(n, alpha, m).unwrap();
            assert!((ratio / mu - 1.0).abs() < 1e-12);
            let exact = table.mean_cycle_count(n, m).unwrap();
            assert!((exact / mu - 1.0).abs() < 0.05, "m = {m}: {exact} vs {mu}");
        }
    }

    #[test]
    fn estimate_error_decays() {
        let errs: Vec<f64> = [100usize, 1000, 10_000]
            .iter()
            .map(|&n| {
                let a = floor_pow(n, 0.5);
                verify_unit_weights(&FunctionSpec::One, n, a, None).unwrap().rel_err
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn quadrature_examples() {
        let q = coeff_quadrature(&FunctionSpec::One, &WeightRow::unit(50), 50, 64).unwrap();
        assert!(q.value.rel_diff(LogReal::ONE) < 1e-8);
        let q = coeff_quadrature(&FunctionSpec::One, &WeightRow::unit(5), 20, 64).unwrap();
        assert!(q.value.rel_diff(z_norm(20, 5).unwrap()) < 1e-8);
        assert!(q.imag_ratio <= 1e-10);
        assert!(coeff_quadrature(&FunctionSpec::One, &WeightRow::unit(5), 20, 32).is_err());
    }

    #[test]
    fn quadrature_matches_exact_for_every_descriptor() {
        let specs = [
            FunctionSpec::One,
            FunctionSpec::Monomial { m: 4 },
            FunctionSpec::ExpLinear { terms: vec![(0.5, 3), (-0.2, 7)] },
            FunctionSpec::ExpPartialSum { b: 2 },
        ];
        let w = WeightRow::unit(15);
        for f in &specs {
            let exact = exact_coefficient(f, &w, 240).unwrap();
            let quad = coeff_quadrature(f, &w, 240, 64).unwrap();
            assert!(quad.value.rel_diff(exact) < 1e-8, "{f:?}");
            assert!(quad.imag_ratio < 1e-10);
        }
    }

    #[test]
    fn exact_coefficient_of_partial_sum_is_poisson_ratio() {
        // the partial-sum prefactor times exp(sum_{b<j<=alpha} z^j/j)
        // gives exp(-H_b) Z_{n,alpha}
        let (n, alpha, b) = (60, 8, 3);
        let w = WeightRow::indicator(b + 1, alpha);
        let c = exact_coefficient(&FunctionSpec::ExpPartialSum { b }, &w, n).unwrap();
        let h = crate::exact_counts::harmonic_range(0, b);
        let z = z_norm(n, alpha).unwrap();
        assert!((c.ln() - (z.ln() - h)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_descriptors() {
        let w = WeightRow::unit(3);
        assert!(coeff_estimate(&FunctionSpec::Monomial { m: 0 }, &w, 10).is_err());
        assert!(coeff_estimate(&FunctionSpec::ExpLinear { terms: vec![(f64::NAN, 1)] }, &w, 10).is_err());
    }
}
