//! Python bindings: exact counts, the saddle point, exact sampling and the
//! exact Poisson-prefix laws.

use bounded_cycles::asymptotics::{coeff_estimate as estimate, verify_unit_weights, FunctionSpec};
use bounded_cycles::exact_counts::{self as counts, Count, CountMode, WeightRow};
use bounded_cycles::saddle::{self, lambda_moments, SaddlePoint};
use bounded_cycles::sampler::{self, Method, SamplerConfig};
use bounded_cycles::statistics;
use bounded_cycles::Error;
use num_bigint::BigUint;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyTuple};
use std::collections::BTreeMap;

fn to_py(e: Error) -> PyErr {
    if e.is_numeric() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn parse_mode(mode: &str, n: usize) -> PyResult<CountMode> {
    match mode {
        "exact" => Ok(CountMode::Exact),
        "logspace" => Ok(CountMode::Logspace),
        "auto" if n <= counts::DEFAULT_EXACT_THRESHOLD => Ok(CountMode::Exact),
        "auto" => Ok(CountMode::Logspace),
        other => Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    }
}

/// Number of permutations of `n` elements with every cycle at most `alpha` long.
#[pyfunction]
fn count(n: usize, alpha: usize) -> PyResult<BigUint> {
    match counts::count_constrained(n, alpha, CountMode::Exact).map_err(to_py)? {
        Count::Exact(c) => Ok(c.0),
        Count::Approx { .. } => unreachable!("exact mode"),
    }
}

/// Natural log of the count; `mode` is "auto", "exact" or "logspace".
#[pyfunction]
#[pyo3(signature = (n, alpha, mode = "auto"))]
fn log_count(n: usize, alpha: usize, mode: &str) -> PyResult<f64> {
    Ok(counts::count_constrained(n, alpha, parse_mode(mode, n)?).map_err(to_py)?.ln())
}

/// `ln(count / n!)`.
#[pyfunction]
fn log_z_norm(n: usize, alpha: usize) -> PyResult<f64> {
    Ok(counts::z_norm(n, alpha).map_err(to_py)?.ln())
}

#[pyfunction]
fn z_norm(n: usize, alpha: usize) -> PyResult<f64> {
    Ok(counts::z_norm(n, alpha).map_err(to_py)?.to_f64())
}

/// Exact expected number of `m`-cycles.
#[pyfunction]
fn mean_cycle_count(n: usize, alpha: usize, m: usize) -> PyResult<f64> {
    let table = counts::CountTable::auto(alpha.min(n.max(1)), n).map_err(to_py)?;
    table.mean_cycle_count(n, m).map_err(to_py)
}

#[pyclass(name = "SaddlePoint", frozen)]
struct PySaddlePoint {
    inner: SaddlePoint,
}

#[pymethods]
impl PySaddlePoint {
    #[getter]
    fn x(&self) -> f64 {
        self.inner.x
    }

    #[getter]
    fn ln_x(&self) -> f64 {
        self.inner.ln_x
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn bracket(&self) -> (f64, f64) {
        (self.inner.x_lower, self.inner.x_upper)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn alpha(&self) -> usize {
        self.inner.alpha
    }

    /// `x^m / m`.
    fn mu(&self, m: usize) -> f64 {
        self.inner.mu(m)
    }

    /// `[lambda_0, ..., lambda_p_max]`.
    fn lambda_moments(&self, p_max: usize) -> Vec<f64> {
        lambda_moments(&self.inner, p_max).lambda
    }

    fn __repr__(&self) -> String {
        format!(
            "SaddlePoint(n={}, alpha={}, x={}, residual={:e})",
            self.inner.n, self.inner.alpha, self.inner.x, self.inner.residual
        )
    }
}

/// Saddle point of `sum_{j<=alpha} x^j = n`.
#[pyfunction]
fn solve_saddle(n: usize, alpha: usize) -> PyResult<PySaddlePoint> {
    Ok(PySaddlePoint {
        inner: saddle::solve_saddle(n, alpha).map_err(to_py)?,
    })
}

/// Saddle point for arbitrary nonnegative weights `q_1, q_2, ...`.
#[pyfunction]
fn solve_saddle_weighted(n: usize, weights: Vec<f64>) -> PyResult<PySaddlePoint> {
    let row = WeightRow::new(weights).map_err(to_py)?;
    Ok(PySaddlePoint {
        inner: saddle::solve_saddle_weighted(n, &row).map_err(to_py)?,
    })
}

#[pyfunction]
fn mu(n: usize, alpha: usize, m: usize) -> PyResult<f64> {
    saddle::mu(n, alpha, m).map_err(to_py)
}

#[pyfunction]
fn b_t(n: usize, alpha: usize, t: f64) -> PyResult<usize> {
    saddle::b_t(n, alpha, t).map_err(to_py)
}

/// `seed`-determined batch of cycle types, each a dict `{length: count}`.
#[pyfunction]
#[pyo3(signature = (n, alpha, samples, seed, method = "recursive"))]
fn sample_batch(
    py: Python<'_>,
    n: usize,
    alpha: usize,
    samples: usize,
    seed: u64,
    method: &str,
) -> PyResult<Vec<BTreeMap<usize, usize>>> {
    let method: Method = method.parse().map_err(to_py)?;
    let cfg = SamplerConfig::new(n, alpha, method, seed, samples);
    let batch = py.detach(|| sampler::sample_batch(&cfg)).map_err(to_py)?;
    Ok(batch.iter().map(|s| s.parts().iter().copied().collect()).collect())
}

/// Exact law of `(C_1, ..., C_b)` as `{counts tuple: probability}`.
#[pyfunction]
fn exact_prefix_law(py: Python<'_>, n: usize, alpha: usize, b: usize) -> PyResult<Bound<'_, PyDict>> {
    let law = counts::exact_prefix_law(n, alpha, b).map_err(to_py)?;
    let out = PyDict::new(py);
    for (a, p) in &law.probabilities {
        out.set_item(PyTuple::new(py, a)?, p)?;
    }
    Ok(out)
}

/// Total variation between `(C_1, ..., C_b)` and independent Poisson(1/j).
#[pyfunction]
fn tv_exact(n: usize, alpha: usize, b: usize) -> PyResult<f64> {
    counts::tv_exact(n, alpha, b).map_err(to_py)
}

/// Rows `(j, P[C_m = j], poisson_pmf(j; mu_m), ratio)`.
#[pyfunction]
fn tilted_poisson_check(n: usize, alpha: usize, m: usize) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    Ok(statistics::tilted_poisson_check(n, alpha, m)
        .map_err(to_py)?
        .into_iter()
        .map(|r| (r.j, r.exact, r.predicted, r.ratio))
        .collect())
}

/// Saddle-point estimate of `[z^n] f(z) exp(sum_{j<=alpha} z^j/j)` as
/// `(ln_estimate, claimed_rel_error)`. `function` is "one", "monomial:M"
/// or "exp-partial:B".
#[pyfunction]
#[pyo3(signature = (n, alpha, function = "one"))]
fn coeff_estimate(n: usize, alpha: usize, function: &str) -> PyResult<(f64, f64)> {
    let f: FunctionSpec = function.parse().map_err(to_py)?;
    let est = estimate(&f, &WeightRow::unit(alpha.min(n)), n).map_err(to_py)?;
    Ok((est.value.ln(), est.claimed_rel_error))
}

/// `(ln_exact, ln_estimate, rel_err, claimed_err)` at unit weights.
#[pyfunction]
#[pyo3(signature = (n, alpha, function = "one"))]
fn verify_asymptotics(n: usize, alpha: usize, function: &str) -> PyResult<(f64, f64, f64, f64)> {
    let f: FunctionSpec = function.parse().map_err(to_py)?;
    let row = verify_unit_weights(&f, n, alpha, None).map_err(to_py)?;
    Ok((row.exact.ln(), row.estimate.ln(), row.rel_err, row.claimed_err))
}

#[pymodule]
#[pyo3(name = "bounded_cycles")]
fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", bounded_cycles::VERSION)?;
    m.add("RNG_ID", sampler::RNG_ID)?;
    m.add_class::<PySaddlePoint>()?;
    m.add_function(wrap_pyfunction!(count, m)?)?;
    m.add_function(wrap_pyfunction!(log_count, m)?)?;
    m.add_function(wrap_pyfunction!(z_norm, m)?)?;
    m.add_function(wrap_pyfunction!(log_z_norm, m)?)?;
    m.add_function(wrap_pyfunction!(mean_cycle_count, m)?)?;
    m.add_function(wrap_pyfunction!(solve_saddle, m)?)?;
    m.add_function(wrap_pyfunction!(solve_saddle_weighted, m)?)?;
    m.add_function(wrap_pyfunction!(mu, m)?)?;
    m.add_function(wrap_pyfunction!(b_t, m)?)?;
    m.add_function(wrap_pyfunction!(sample_batch, m)?)?;
    m.add_function(wrap_pyfunction!(exact_prefix_law, m)?)?;
    m.add_function(wrap_pyfunction!(tv_exact, m)?)?;
    m.add_function(wrap_pyfunction!(tilted_poisson_check, m)?)?;
    m.add_function(wrap_pyfunction!(coeff_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_asymptotics, m)?)?;
    Ok(())
}
