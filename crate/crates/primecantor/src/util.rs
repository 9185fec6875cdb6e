//! Small numeric helpers used across modules.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, Zero};

/// Neumaier compensated summation. Deterministic for a fixed visit order.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Running log-sum-exp accumulator: tracks ln(Σ exp(ln_xᵢ)) without overflow.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp {
    max: f64,
    sum: f64, // Σ exp(ln_x - max)
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_ln(&mut self, ln_x: f64) {
        if ln_x == f64::NEG_INFINITY {
            return;
        }
        if ln_x <= self.max {
            self.sum += (ln_x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - ln_x).exp() + 1.0;
            self.max = ln_x;
        }
    }

    /// ln of the accumulated sum; −∞ when empty.
    pub fn ln_value(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// SplitMix64 finalizer. Used as a counter-based RNG: hashing (seed, n) gives
/// a membership draw for n that is independent of iteration order.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Uniform draw in [0, 1) keyed by (seed, counter).
#[inline]
pub fn keyed_unit(seed: u64, counter: u64) -> f64 {
    let h = splitmix64(seed ^ splitmix64(counter));
    // 53 high bits -> [0,1)
    (h >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Natural log of a positive BigInt, accurate to f64 precision.
pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.is_positive(), "ln_bigint needs a positive argument");
    let bits = x.bits();
    if bits <= 53 {
        let v: f64 = x.to_string().parse().unwrap_or(f64::MAX);
        return v.ln();
    }
    // top 64 bits as mantissa, rest as exponent
    let shift = bits - 53;
    let top = x >> shift;
    let mant: f64 = top.to_string().parse().unwrap_or(f64::MAX);
    mant.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn ln_bigrational(x: &BigRational) -> f64 {
    assert!(x.is_positive());
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// Rational → f64, via a 53-bit scaled quotient (exact rounding not required).
pub fn rational_to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let neg = x.is_negative();
    let a = x.abs();
    let ln = ln_bigrational(&a);
    if ln > 700.0 {
        return if neg {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
    }
    if ln < -700.0 {
        return 0.0;
    }
    // scale so numer/denom fits in f64
    let num_bits = a.numer().bits() as i64;
    let den_bits = a.denom().bits() as i64;
    let scale = (num_bits.max(den_bits) - 52).max(0) as u64;
    let n = a.numer() >> scale.min(num_bits.max(0) as u64);
    let d = a.denom() >> scale.min(den_bits.max(0) as u64);
    let nf: f64 = n.to_string().parse().unwrap_or(f64::MAX);
    let df: f64 = d.to_string().parse().unwrap_or(f64::MAX);
    let v = nf / df;
    if neg {
        -v
    } else {
        v
    }
}

/// Least-squares slope of y against x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    sxy / sxx
}

/// Two-regressor least squares: y ≈ c + b1·x1 + b2·x2; returns (b1, b2).
pub fn ls_two(x1: &[f64], x2: &[f64], y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let m1 = x1.iter().sum::<f64>() / n;
    let m2 = x2.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut s11, mut s22, mut s12, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..y.len() {
        let a = x1[i] - m1;
        let b = x2[i] - m2;
        let c = y[i] - my;
        s11 += a * a;
        s22 += b * b;
        s12 += a * b;
        s1y += a * c;
        s2y += b * c;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() < 1e-12 * s11 * s22 {
        // regressors collinear; fall back to single slope
        return (s1y / s11, 0.0);
    }
    ((s22 * s1y - s12 * s2y) / det, (s11 * s2y - s12 * s1y) / det)
}

/// Median of a slice (copies; NaNs not expected).
pub fn median(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Format with 17 significant digits, stable across runs.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}
