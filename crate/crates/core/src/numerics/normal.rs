//! Standard normal distribution functions.
//!
//! The CDF is `Φ(x) = ½·erfc(−x/√2)` with `erfc` from `libm` (the fdlibm
//! rational approximations, accurate to within an ulp in double precision).
//! The quantile brackets the root by bisection and polishes it with Newton
//! steps on `Φ(x) − q`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const INV_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn normal_cdf<T: Scalar>(x: T) -> T {
    T::of(cdf64(x.as_f64()))
}

/// `P(|Z| ≥ |t|)` for standard normal `Z`, computed without cancellation.
pub fn two_sided_p_value<T: Scalar>(t: T) -> T {
    T::of(libm::erfc(t.as_f64().abs() * INV_SQRT_2))
}

pub fn normal_pdf<T: Scalar>(x: T) -> T {
    let x = x.as_f64();
    T::of((-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt())
}

pub fn normal_quantile<T: Scalar>(q: T) -> Result<T> {
    let q = q.as_f64();
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "normal quantile requires q in (0, 1), got {q}"
        )));
    }
    Ok(T::of(quantile64(q)))
}

fn cdf64(x: f64) -> f64 {
    0.5 * libm::erfc(-x * INV_SQRT_2)
}

fn quantile64(q: f64) -> f64 {
    if q == 0.5 {
        return 0.0;
    }
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if cdf64(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..50 {
        let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if pdf == 0.0 {
            break;
        }
        let step = (cdf64(x) - q) / pdf;
        let next = (x - step).clamp(lo, hi);
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    x
}
