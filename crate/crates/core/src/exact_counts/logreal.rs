use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Div, Mul};

/// A nonnegative real stored by its natural logarithm.
///
/// Zero is represented by `ln = -inf`, so products and quotients stay in
/// log-space without special casing.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogReal {
    ln: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal { ln: f64::NEG_INFINITY };
    pub const ONE: LogReal = LogReal { ln: 0.0 };

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan());
        LogReal { ln }
    }

    /// Panics on negative or NaN input.
    pub fn from_f64(v: f64) -> Self {
        assert!(v >= 0.0, "LogReal::from_f64 on negative value {v}");
        LogReal { ln: v.ln() }
    }

    pub fn ln(self) -> f64 {
        self.ln
    }

    pub fn is_zero(self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    /// `+1` for positive values, `0` for zero.
    pub fn sign(self) -> i32 {
        if self.is_zero() {
            0
        } else {
            1
        }
    }

    pub fn to_f64(self) -> f64 {
        self.ln.exp()
    }

    pub fn add(self, other: LogReal) -> LogReal {
        let (hi, lo) = if self.ln >= other.ln {
            (self.ln, other.ln)
        } else {
            (other.ln, self.ln)
        };
        if lo == f64::NEG_INFINITY {
            return LogReal { ln: hi };
        }
        LogReal {
            ln: hi + (lo - hi).exp().ln_1p(),
        }
    }

    pub fn powi(self, k: i32) -> LogReal {
        if self.is_zero() {
            return if k == 0 { LogReal::ONE } else { LogReal::ZERO };
        }
        LogReal { ln: self.ln * k as f64 }
    }

    /// `|self/other - 1|`, computed without leaving log-space.
    pub fn rel_diff(self, other: LogReal) -> f64 {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => 0.0,
            (true, false) | (false, true) => 1.0,
            _ => (self.ln - other.ln).exp_m1().abs(),
        }
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        LogReal { ln: self.ln + rhs.ln }
    }
}

impl Div for LogReal {
    type Output = LogReal;
    fn div(self, rhs: LogReal) -> LogReal {
        assert!(!rhs.is_zero(), "LogReal division by zero");
        if self.is_zero() {
            return LogReal::ZERO;
        }
        LogReal { ln: self.ln - rhs.ln }
    }
}

impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")
        } else if self.ln.abs() < 700.0 {
            write!(f, "{:e}", self.to_f64())
        } else {
            write!(f, "exp({})", self.ln)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let a = LogReal::from_f64(3.0);
        let b = LogReal::from_f64(5.0);
        assert!(((a * b).to_f64() - 15.0).abs() < 1e-12);
        assert!(((b / a).to_f64() - 5.0 / 3.0).abs() < 1e-12);
        assert!((a.add(b).to_f64() - 8.0).abs() < 1e-12);
        assert_eq!(a.add(LogReal::ZERO), a);
        assert_eq!(LogReal::ZERO.sign(), 0);
        assert_eq!((LogReal::ZERO / a), LogReal::ZERO);
    }

    #[test]
    fn huge_values_survive() {
        let big = LogReal::from_ln(5000.0);
        let r = (big * big) / big;
        assert!((r.ln() - 5000.0).abs() < 1e-9);
        assert!(big.rel_diff(big) < 1e-15);
    }
}
