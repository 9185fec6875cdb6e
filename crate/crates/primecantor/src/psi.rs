//! Dimension-function registry: gauges ψ(r) = r^δ·Ψ(r).
//!
//! All families are evaluated through w = ln(1/r), because the interesting
//! radii are far below f64 range (the slow-φ gauge needs ln(1/r) > e^{e^e} ≈
//! 3.8e6 before its nested logs are even positive). The series evaluators only
//! ever need ln(1/Ψ^{-1}(y)), which stays representable; the r-space wrappers
//! are provided and fail honestly when r underflows.

use crate::error::{domain, Error, Result};

pub const W_MAX: f64 = 690.0; // ln(1/r) at the edge of f64 range for r

/// Gauge family; the parameter is the exponent on the log factor.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum Family {
    /// Ψ(r) = ln^s(1/r)
    LogPower { s: f64 },
    /// Ψ(r) = (ln ln(1/r))^s
    LogLogPower { s: f64 },
    /// Ψ(r) = φ^{−δ}(ln(1/r)) with φ(x) = ln x·lnln x·lnlnlnln x/(lnlnln x)²
    SlowPhi,
    /// ψ(r) = r^{δ+t}, i.e. Ψ(r) = r^t
    PowerOffset { t: f64 },
}

/// Monotonicity of Ψ: +1 decreasing, −1 increasing, 0 constant.
pub type Epsilon = i8;

#[derive(Debug, Clone, Copy)]
pub struct DimensionFunction {
    family: Family,
    delta: f64,
    epsilon: Epsilon,
    /// gauge domain: ψ is a dimension function (increasing, nested logs
    /// defined) only for w = ln(1/r) > w_min
    w_min: f64,
    /// inversion domain: Ψ is strictly monotone for w > w_min_inv, a weaker
    /// requirement than gauge validity; Ψ^{-1} uses this one
    w_min_inv: f64,
}

/// φ(x) = ln x · lnln x · lnlnlnln x / (lnlnln x)², for ln x > e^e.
pub fn slow_phi(x: f64) -> Result<f64> {
    let v1 = x.ln();
    if v1 <= 0.0 {
        return domain(format!("slow_phi needs x > 1, got {x}"));
    }
    let v2 = v1.ln();
    if v2 <= 1.0 {
        return domain(format!("slow_phi needs lnln x > 1 (x > e^e), got x = {x}"));
    }
    let v3 = v2.ln();
    let v4 = v3.ln();
    if v3 <= 1.0 {
        return domain(format!(
            "slow_phi positive only for lnlnln x > 1 (x > exp(e^e) ≈ 3.81e6), got x = {x}"
        ));
    }
    Ok(v1 * v2 * v4 / (v3 * v3))
}

impl DimensionFunction {
    pub fn new(family: Family, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.5) {
            return domain(format!("delta must lie in (0, 1.5), got {delta}"));
        }
        let (epsilon, mut w_min) = match family {
            Family::LogPower { s } => {
                let eps = if s > 0.0 {
                    1
                } else if s < 0.0 {
                    -1
                } else {
                    0
                };
                // ψ increasing needs w > s/δ on the decreasing-Ψ branch
                let w = if s > 0.0 { (s / delta).max(1.0) } else { 1.0 };
                (eps, w)
            }
            Family::LogLogPower { s } => {
                let eps = if s > 0.0 {
                    1
                } else if s < 0.0 {
                    -1
                } else {
                    0
                };
                let mut w = std::f64::consts::E;
                if s > 0.0 {
                    // smallest w with w·ln w > s/δ
                    let target = s / delta;
                    while w * w.ln() <= target {
                        w *= 1.5;
                    }
                }
                (eps, w)
            }
            Family::SlowPhi => (-1, (std::f64::consts::E.powf(std::f64::consts::E)).exp()),
            Family::PowerOffset { t } => {
                if t <= -delta {
                    return domain(format!(
                        "power offset t must exceed −δ for an increasing gauge, got {t}"
                    ));
                }
                let eps = if t < 0.0 {
                    1
                } else if t > 0.0 {
                    -1
                } else {
                    0
                };
                (eps, 0.0)
            }
        };
        w_min *= 1.0 + 1e-9;
        let w_min_inv = match family {
            Family::LogPower { .. } | Family::PowerOffset { .. } => 1e-8,
            Family::LogLogPower { .. } => 1.0 + 1e-9,
            Family::SlowPhi => w_min,
        };
        let f = DimensionFunction {
            family,
            delta,
            epsilon,
            w_min,
            w_min_inv,
        };
        f.verify_monotonicity()?;
        Ok(f)
    }

    fn verify_monotonicity(&self) -> Result<()> {
        // declared monotonicity of Ψ and the dimension-function law for ψ,
        // spot-checked on a log grid in w
        let lo = self.w_min.max(1e-6).ln().max(-10.0);
        let hi = (self.w_min.max(1.0) * 1e12).ln().min(700f64.ln() + 700.0);
        let n = 64;
        let mut prev_psi = f64::INFINITY;
        let mut prev_big = None;
        for i in 0..=n {
            let u = lo + (hi - lo) * i as f64 / n as f64;
            let w = u.exp();
            if w <= self.w_min {
                continue;
            }
            let big = self.ln_big_psi_w(w)?;
            let ln_psi = -self.delta * w + big;
            if ln_psi >= prev_psi + 1e-12 {
                return Err(Error::Numeric(format!(
                    "gauge not increasing in r at ln(1/r) = {w}"
                )));
            }
            prev_psi = ln_psi;
            if let Some(p) = prev_big {
                let decreasing_in_r = big > p; // w grid ascending = r descending
                match self.epsilon {
                    1 if !(decreasing_in_r || (big - p).abs() < 1e-12) => {
                        return Err(Error::Numeric("Ψ not decreasing as declared".into()))
                    }
                    -1 if !(big < p + 1e-12) => {
                        return Err(Error::Numeric("Ψ not increasing as declared".into()))
                    }
                    _ => {}
                }
            }
            prev_big = Some(big);
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    /// Largest radius in the valid domain.
    pub fn r_max(&self) -> f64 {
        (-self.w_min).exp()
    }

    pub fn w_min(&self) -> f64 {
        self.w_min
    }

    pub fn w_min_inv(&self) -> f64 {
        self.w_min_inv
    }

    pub fn label(&self) -> String {
        match self.family {
            Family::LogPower { s } => format!("log_power({s})"),
            Family::LogLogPower { s } => format!("loglog_power({s})"),
            Family::SlowPhi => "slow_phi".to_string(),
            Family::PowerOffset { t } => format!("power_offset({t})"),
        }
    }

    /// ln Ψ as a function of w = ln(1/r), on the gauge domain.
    pub fn ln_big_psi_w(&self, w: f64) -> Result<f64> {
        if !(w > self.w_min) {
            return domain(format!(
                "w = ln(1/r) = {w} outside the valid domain (> {})",
                self.w_min
            ));
        }
        self.ln_big_psi_raw(w)
    }

    /// ln Ψ on the monotonicity domain (used by the inverse).
    fn ln_big_psi_raw(&self, w: f64) -> Result<f64> {
        Ok(match self.family {
            Family::LogPower { s } => s * w.ln(),
            Family::LogLogPower { s } => s * w.ln().ln(),
            Family::SlowPhi => -self.delta * slow_phi(w)?.ln(),
            Family::PowerOffset { t } => -t * w,
        })
    }

    /// Ψ(r).
    pub fn big_psi(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return domain(format!("radius must be positive, got {r}"));
        }
        Ok(self.ln_big_psi_w(-(r.ln()))?.exp())
    }

    /// ψ(r) = r^δ Ψ(r).
    pub fn psi(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return domain(format!("radius must be positive, got {r}"));
        }
        let w = -(r.ln());
        Ok((-self.delta * w + self.ln_big_psi_w(w)?).exp())
    }

    /// ln(1/Ψ^{-1}(y)) from ln y, by monotone bisection in ln w over the
    /// monotonicity domain. This is the quantity every series term needs; it
    /// stays representable long after Ψ^{-1}(y) itself underflows.
    pub fn ln_inv_big_psi_from_ln(&self, ln_y: f64) -> Result<f64> {
        if self.epsilon == 0 {
            return domain("constant Ψ has no inverse");
        }
        let u_lo = self.w_min_inv.max(1e-12).ln() + 1e-9;
        let u_hi = 690.0f64.ln() + 690.0; // w up to ~1e300
        let g = |u: f64| self.ln_big_psi_raw(u.exp());
        let g_lo = g(u_lo)?;
        let g_hi = g(u_hi)?;
        let (a, b, ga, gb) = if g_lo <= g_hi {
            (u_lo, u_hi, g_lo, g_hi)
        } else {
            (u_hi, u_lo, g_hi, g_lo)
        };
        if ln_y < ga || ln_y > gb {
            return Err(Error::OutOfRange(format!(
                "ln y = {ln_y} outside the attained range [{ga}, {gb}] of ln Ψ on the domain"
            )));
        }
        let (mut lo, mut hi) = (a, b);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (hi - lo).abs() <= 1e-14 * mid.abs().max(1.0) {
                break;
            }
            let gm = g(mid)?;
            if gm < ln_y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }

    pub fn ln_inv_big_psi(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return domain(format!("Ψ-inverse needs y > 0, got {y}"));
        }
        self.ln_inv_big_psi_from_ln(y.ln())
    }

    /// Ψ^{-1}(y) as a radius; 0.0 when the true value underflows f64.
    pub fn psi_inverse(&self, y: f64) -> Result<f64> {
        Ok((-self.ln_inv_big_psi(y)?).exp())
    }
}
