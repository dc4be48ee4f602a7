use super::egf::log_coefficients;
use super::{LogReal, WeightRow};
use crate::error::{Error, Result};
use crate::numeric::ln_factorials;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::fs;
use std::path::{Path, PathBuf};

/// Largest `max_n` for which [`CountTable::auto`] keeps exact integers.
pub const DEFAULT_EXACT_THRESHOLD: usize = 2000;

/// Version tag of the on-disk table cache format.
pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    Exact,
    Logspace,
}

impl CountMode {
    pub fn name(self) -> &'static str {
        match self {
            CountMode::Exact => "exact",
            CountMode::Logspace => "logspace",
        }
    }
}

/// Exact number of permutations with bounded cycle lengths.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigCount(pub BigUint);

impl BigCount {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    /// Natural logarithm, accurate to double precision at any size.
    pub fn ln(&self) -> f64 {
        ln_biguint(&self.0)
    }
}

impl std::fmt::Display for BigCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Result of [`count_constrained`]: exact in exact mode, log-space otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Count {
    Exact(BigCount),
    Approx { value: LogReal, rel_error_bound: f64 },
}

impl Count {
    pub fn ln(&self) -> f64 {
        match self {
            Count::Exact(c) => c.ln(),
            Count::Approx { value, .. } => value.ln(),
        }
    }

    pub fn as_exact(&self) -> Option<&BigCount> {
        match self {
            Count::Exact(c) => Some(c),
            Count::Approx { .. } => None,
        }
    }
}

impl std::fmt::Display for Count {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Count::Exact(c) => c.fmt(f),
            Count::Approx { value, .. } => value.fmt(f),
        }
    }
}

pub(crate) fn ln_biguint(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Exact(Vec<BigUint>),
    Logspace { rel_error_bound: f64 },
}

/// Counts `a_0..=a_{max_n}` of permutations whose cycles are all at most
/// `alpha` long, together with `ln Z_n = ln(a_n / n!)` for every entry.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    alpha: usize,
    max_n: usize,
    storage: Storage,
    log_z: Vec<f64>,
}

impl CountTable {
    pub fn build(alpha: usize, max_n: usize, mode: CountMode) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::InvalidArgument("alpha must be at least 1".into()));
        }
        match mode {
            CountMode::Exact => Ok(Self::exact(alpha, max_n)),
            CountMode::Logspace => Ok(Self::logspace(alpha, max_n)),
        }
    }

    /// Exact up to [`DEFAULT_EXACT_THRESHOLD`], log-space beyond.
    pub fn auto(alpha: usize, max_n: usize) -> Result<Self> {
        Self::auto_with_threshold(alpha, max_n, DEFAULT_EXACT_THRESHOLD)
    }

    pub fn auto_with_threshold(alpha: usize, max_n: usize, threshold: usize) -> Result<Self> {
        let mode = if max_n <= threshold {
            CountMode::Exact
        } else {
            CountMode::Logspace
        };
        Self::build(alpha, max_n, mode)
    }

    fn exact(alpha: usize, max_n: usize) -> Self {
        let mut a: Vec<BigUint> = Vec::with_capacity(max_n + 1);
        a.push(BigUint::one());
        for n in 1..=max_n {
            // a_n = sum_{j<=J} (n-1)!/(n-j)! a_{n-j}, evaluated by Horner:
            // acc_J = a_{n-J}, acc_j = a_{n-j} + (n-j) acc_{j+1}.
            let top = n.min(alpha);
            let mut acc = a[n - top].clone();
            for j in (1..top).rev() {
                acc *= (n - j) as u64;
                acc += &a[n - j];
            }
            a.push(acc);
        }
        let lf = ln_factorials(max_n);
        let log_z = a.iter().zip(&lf).map(|(v, f)| ln_biguint(v) - f).collect();
        CountTable {
            alpha,
            max_n,
            storage: Storage::Exact(a),
            log_z,
        }
    }

    fn logspace(alpha: usize, max_n: usize) -> Self {
        let egf = log_coefficients(&WeightRow::unit(alpha.min(max_n.max(1))), max_n);
        CountTable {
            alpha,
            max_n,
            storage: Storage::Logspace {
                rel_error_bound: egf.rel_error_bound,
            },
            log_z: egf.coeffs.iter().map(|c| c.ln()).collect(),
        }
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn mode(&self) -> CountMode {
        match self.storage {
            Storage::Exact(_) => CountMode::Exact,
            Storage::Logspace { .. } => CountMode::Logspace,
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.max_n {
            Err(Error::TableTooSmall {
                requested: n,
                max_n: self.max_n,
                alpha: self.alpha,
            })
        } else {
            Ok(())
        }
    }

    /// `|S_{n,alpha}|`.
    pub fn count(&self, n: usize) -> Result<Count> {
        self.check(n)?;
        Ok(match &self.storage {
            Storage::Exact(a) => Count::Exact(BigCount(a[n].clone())),
            Storage::Logspace { rel_error_bound } => Count::Approx {
                value: LogReal::from_ln(self.log_z[n] + ln_gamma(n as f64 + 1.0)),
                rel_error_bound: *rel_error_bound,
            },
        })
    }

    pub fn exact_counts(&self) -> Option<&[BigUint]> {
        match &self.storage {
            Storage::Exact(a) => Some(a),
            Storage::Logspace { .. } => None,
        }
    }

    /// `Z_{n,alpha} = |S_{n,alpha}| / n!`.
    pub fn z_norm(&self, n: usize) -> Result<LogReal> {
        self.check(n)?;
        Ok(LogReal::from_ln(self.log_z[n]))
    }

    /// `ln Z_m` for `m = 0..=max_n`.
    pub fn log_z(&self) -> &[f64] {
        &self.log_z
    }

    pub fn rel_error_bound(&self) -> f64 {
        match self.storage {
            Storage::Exact(_) => 0.0,
            Storage::Logspace { rel_error_bound } => rel_error_bound,
        }
    }

    /// Exact `E[C_m]` under the uniform law on `S_{n,alpha}`:
    /// `Z_{n-m} / (m Z_n)` for `m <= min(n, alpha)`, zero otherwise.
    pub fn mean_cycle_count(&self, n: usize, m: usize) -> Result<f64> {
        self.check(n)?;
        if m == 0 || m > n || m > self.alpha {
            return Ok(0.0);
        }
        Ok((self.log_z[n - m] - self.log_z[n]).exp() / m as f64)
    }

    /// Exact `E[C_a C_b]`, `a != b`, or `E[C_a (C_a - 1)]` when `a == b`.
    pub fn factorial_moment2(&self, n: usize, a: usize, b: usize) -> Result<f64> {
        self.check(n)?;
        if a == 0 || b == 0 || a > self.alpha || b > self.alpha || a + b > n {
            return Ok(0.0);
        }
        Ok((self.log_z[n - a - b] - self.log_z[n]).exp() / (a * b) as f64)
    }

    pub fn cache_file_name(alpha: usize, max_n: usize, mode: CountMode) -> String {
        format!(
            "counts-v{CACHE_FORMAT_VERSION}-{}-a{alpha}-n{max_n}.json",
            mode.name()
        )
    }

    pub fn to_json(&self) -> String {
        let file = CacheFile {
            format_version: CACHE_FORMAT_VERSION,
            alpha: self.alpha,
            max_n: self.max_n,
            mode: self.mode(),
            counts: self
                .exact_counts()
                .map(|a| a.iter().map(|v| v.to_str_radix(10)).collect()),
            log_z: self.log_z.clone(),
            rel_error_bound: self.rel_error_bound(),
        };
        serde_json::to_string(&file).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: CacheFile =
            serde_json::from_str(s).map_err(|e| Error::Io(format!("bad table cache: {e}")))?;
        if file.format_version != CACHE_FORMAT_VERSION {
            return Err(Error::Io(format!(
                "table cache version {} (expected {CACHE_FORMAT_VERSION})",
                file.format_version
            )));
        }
        if file.log_z.len() != file.max_n + 1 {
            return Err(Error::Io("table cache length mismatch".into()));
        }
        let storage = match (file.mode, file.counts) {
            (CountMode::Exact, Some(c)) => {
                let a = c
                    .iter()
                    .map(|s| {
                        BigUint::parse_bytes(s.as_bytes(), 10)
                            .ok_or_else(|| Error::Io(format!("bad integer in cache: {s}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Storage::Exact(a)
            }
            (CountMode::Logspace, _) => Storage::Logspace {
                rel_error_bound: file.rel_error_bound,
            },
            (CountMode::Exact, None) => return Err(Error::Io("exact cache without counts".into())),
        };
        Ok(CountTable {
            alpha: file.alpha,
            max_n: file.max_n,
            storage,
            log_z: file.log_z,
        })
    }

    /// Loads `(alpha, max_n, mode)` from `dir` if cached, otherwise builds
    /// and stores it.
    pub fn load_or_build(dir: &Path, alpha: usize, max_n: usize, mode: CountMode) -> Result<Self> {
        let path: PathBuf = dir.join(Self::cache_file_name(alpha, max_n, mode));
        if let Ok(text) = fs::read_to_string(&path) {
            return Self::from_json(&text);
        }
        let table = Self::build(alpha, max_n, mode)?;
        fs::create_dir_all(dir).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(&path, table.to_json()).map_err(|e| Error::Io(e.to_string()))?;
        Ok(table)
    }
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format_version: u32,
    alpha: usize,
    max_n: usize,
    mode: CountMode,
    counts: Option<Vec<String>>,
    log_z: Vec<f64>,
    rel_error_bound: f64,
}
