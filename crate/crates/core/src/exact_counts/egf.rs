//! Coefficients of `exp(sum_j q_j z^j / j)`.
//!
//! Differentiating the exponential gives `m c_m = sum_j q_j c_{m-j}`, which is
//! run in floating point with a sliding power-of-two scale: mantissas of the
//! last `alpha` coefficients share one scale, and the window is rescaled by an
//! exact power of two whenever the newest mantissa drifts out of
//! `[2^-400, 2^400]`. Older coefficients are only kept as logarithms.

use super::{LogReal, WeightRow};
use crate::numeric::pairwise_sum;

const RESCALE_EXP: i32 = 400;

/// Log-space coefficients `c_0..=c_{n_max}` together with an a-priori
/// relative error bound for the last one.
#[derive(Debug, Clone)]
pub struct EgfCoefficients {
    pub coeffs: Vec<LogReal>,
    pub rel_error_bound: f64,
}

pub fn log_coefficients(weights: &WeightRow, n_max: usize) -> EgfCoefficients {
    let alpha = weights.alpha();
    let q = weights.as_slice();
    let block = weights.unit_block();

    let mut coeffs = Vec::with_capacity(n_max + 1);
    coeffs.push(LogReal::ONE);
    // mant[m] * 2^offset_exp is c_m for entries inside the live window.
    let mut mant: Vec<f64> = Vec::with_capacity(n_max + 1);
    mant.push(1.0);
    let mut offset_exp: i64 = 0;
    let mut scratch = Vec::with_capacity(alpha);
    let ln2 = std::f64::consts::LN_2;

    let mut err = 0.0f64;
    let step_terms = (alpha.max(2) as f64).log2().ceil() + 3.0;

    for m in 1..=n_max {
        let top = m.min(alpha);
        let s = if let Some((lo, hi)) = block {
            if m < lo {
                0.0
            } else {
                pairwise_sum(&mant[m - m.min(hi)..=m - lo])
            }
        } else {
            scratch.clear();
            // index m-j for j = top..=1, weight q_{j}
            scratch.extend((1..=top).rev().map(|j| q[j - 1] * mant[m - j]));
            pairwise_sum(&scratch)
        };
        let v = s / m as f64;
        mant.push(v);
        if v > 0.0 {
            coeffs.push(LogReal::from_ln(v.ln() + offset_exp as f64 * ln2));
            let e = frexp_exp(v);
            if e.abs() > RESCALE_EXP {
                let lo = m.saturating_sub(alpha);
                let factor = 2f64.powi(-e);
                for x in &mut mant[lo..=m] {
                    *x *= factor;
                }
                offset_exp += e as i64;
            }
        } else {
            coeffs.push(LogReal::ZERO);
        }
        err += step_terms * f64::EPSILON;
    }

    EgfCoefficients {
        coeffs,
        rel_error_bound: err,
    }
}

fn frexp_exp(v: f64) -> i32 {
    // exponent such that v = f * 2^e with f in [0.5, 1)
    ((v.to_bits() >> 52) & 0x7ff) as i32 - 1022
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_series() {
        // q = {1: 1} gives exp(z): c_m = 1/m!
        let c = log_coefficients(&WeightRow::unit(1), 200).coeffs;
        let lf = crate::numeric::ln_factorials(200);
        for m in 0..=200 {
            assert!((c[m].ln() + lf[m]).abs() < 1e-9 * lf[m].max(1.0), "m = {m}");
        }
    }

    #[test]
    fn zeros_are_exact() {
        // only length-2 cycles: odd coefficients vanish
        let c = log_coefficients(&WeightRow::indicator(2, 2), 9).coeffs;
        for m in (1..=9).step_by(2) {
            assert!(c[m].is_zero());
        }
        // c_4 = (1/2)^2 / 2! = 1/8
        assert!((c[4].to_f64() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn survives_deep_underflow() {
        // 1/3000! is far below f64 range
        let c = log_coefficients(&WeightRow::unit(1), 3000).coeffs;
        let lf = crate::numeric::ln_factorials(3000);
        assert!((c[3000].ln() + lf[3000]).abs() < 1e-9 * lf[3000]);
    }

    #[test]
    fn frexp() {
        assert_eq!(frexp_exp(1.0), 1);
        assert_eq!(frexp_exp(0.5), 0);
        assert_eq!(frexp_exp(8.0), 4);
    }
}
