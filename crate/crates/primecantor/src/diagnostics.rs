//! Convergence verdicts for term streams.
//!
//! Finite data cannot prove convergence; the three-way verdict with an
//! explicit inconclusive band keeps the diagnostics honest. The primary
//! statistic is the tail slope of ln(term) against ln(index); a two-regressor
//! fit against (ln k, lnln k) arbitrates the boundary zone around slope −1,
//! where the log-power correction decides (Σ1/k diverges, Σ1/(k ln²k)
//! converges, both sit at slope ≈ −1).

use crate::error::{domain, Result};
use crate::series::TermStream;
use crate::util::{ls_slope, ls_two, LogSumExp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct VerdictPolicy {
    /// margin around the critical slope −1
    pub margin: f64,
    /// margin around the critical log-power exponent 1 in the boundary zone
    pub q_margin: f64,
    /// fraction of trailing entries used for the tail slope
    pub tail_fraction: f64,
    pub min_terms: usize,
}

impl Default for VerdictPolicy {
    fn default() -> Self {
        VerdictPolicy {
            margin: 0.05,
            q_margin: 0.2,
            tail_fraction: 0.5,
            min_terms: 1000,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SeriesDiagnostics {
    pub label: String,
    pub terms_computed: usize,
    pub skipped: usize,
    /// (index, ln partial sum) checkpoints, geometrically thinned
    pub partial_sums: Vec<(f64, f64)>,
    pub ln_sum: f64,
    /// least-squares slope of ln(term) vs ln(index) over the tail
    pub fitted_exponent: f64,
    /// β̂ from ln(term) ≈ c − β ln k − q lnln k over the full range
    pub fitted_power: f64,
    /// q̂ from the same fit
    pub fitted_log_power: f64,
    pub verdict: Verdict,
    pub verdict_basis: String,
    pub policy: VerdictPolicy,
}

/// Apply the decision rules to a term stream.
pub fn verdict(stream: &TermStream, policy: VerdictPolicy) -> Result<SeriesDiagnostics> {
    let entries = &stream.entries;
    if entries.is_empty() {
        return domain(format!("stream {:?} produced no terms", stream.label));
    }
    let mut lse = LogSumExp::new();
    let mut partials = Vec::new();
    let mut next_mark = 1.0f64;
    for e in entries {
        lse.add_ln(e.ln_term);
        if e.index >= next_mark {
            partials.push((e.index, lse.ln_value()));
            next_mark = (next_mark * 1.3).max(e.index + 1.0);
        }
    }
    let ln_sum = lse.ln_value();

    let mut d = SeriesDiagnostics {
        label: stream.label.clone(),
        terms_computed: entries.len(),
        skipped: stream.skipped,
        partial_sums: partials,
        ln_sum,
        fitted_exponent: f64::NAN,
        fitted_power: f64::NAN,
        fitted_log_power: f64::NAN,
        verdict: Verdict::Inconclusive,
        verdict_basis: String::new(),
        policy,
    };

    if entries.len() < policy.min_terms {
        d.verdict_basis = format!(
            "only {} usable terms (< {}); no verdict",
            entries.len(),
            policy.min_terms
        );
        return Ok(d);
    }

    // tail slope
    let tail_start = ((entries.len() as f64) * (1.0 - policy.tail_fraction)) as usize;
    let tail = &entries[tail_start..];
    let xs: Vec<f64> = tail.iter().map(|e| e.index.ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|e| e.ln_term).collect();
    let slope = ls_slope(&xs, &ys);
    d.fitted_exponent = slope;

    // two-regressor fit over the full usable range (index ≥ 3 so lnln > 0)
    let full: Vec<&crate::series::TermEntry> = entries.iter().filter(|e| e.index >= 3.0).collect();
    let x1: Vec<f64> = full.iter().map(|e| e.index.ln()).collect();
    let x2: Vec<f64> = full.iter().map(|e| e.index.ln().ln()).collect();
    let yy: Vec<f64> = full.iter().map(|e| e.ln_term).collect();
    let (b1, b2) = ls_two(&x1, &x2, &yy);
    let beta = -b1;
    let q = -b2;
    d.fitted_power = beta;
    d.fitted_log_power = q;

    // Decision: a term stream of the modelled shape k^{−β}·ln^{−q}k sums
    // exactly when β > 1, or β = 1 with q > 1. The tail slope alone conflates
    // β with q/ln k, so it only rules (terms visibly not summable); the fitted
    // pair (β̂, q̂) decides the rest, inconclusive inside the margins.
    let m = policy.margin;
    if slope > -1.0 + m {
        d.verdict = Verdict::Diverges;
        d.verdict_basis = format!("tail slope {slope:.4} > -1 + {m} (terms not summable)");
    } else if beta > 1.0 + m {
        d.verdict = Verdict::Converges;
        d.verdict_basis =
            format!("power fit β̂ = {beta:.4} > 1 + {m} (tail slope {slope:.4} concurs)");
    } else if beta < 1.0 - m {
        d.verdict = Verdict::Diverges;
        d.verdict_basis = format!("power fit β̂ = {beta:.4} < 1 - {m}");
    } else if q > 1.0 + policy.q_margin {
        d.verdict = Verdict::Converges;
        d.verdict_basis = format!("β̂ ≈ 1; log-power q̂ = {q:.4} > 1 + {}", policy.q_margin);
    } else if q < 1.0 - policy.q_margin {
        d.verdict = Verdict::Diverges;
        d.verdict_basis = format!("β̂ ≈ 1; log-power q̂ = {q:.4} < 1 - {}", policy.q_margin);
    } else {
        d.verdict = Verdict::Inconclusive;
        d.verdict_basis = format!("β̂ = {beta:.4} and q̂ = {q:.4} both inside the exclusion bands");
    }
    Ok(d)
}
