//! Term streams for the series criteria: the Hausdorff-measure series over
//! resolution scales, the two prime-indexed packing/Hausdorff series Σ″ and
//! Σ′, and the Borel–Cantelli series of the random-model heuristic.
//!
//! Terms are carried as (index, ln term): the packing terms reach e^1000 and
//! beyond for large α long before the series behavior is visible, so all
//! accumulation is log-space.

use crate::diagnostics::{SeriesDiagnostics, Verdict, VerdictPolicy};
use crate::error::{domain, Error, Result};
use crate::measure::MeasureModel;
use crate::primes::PrimeTable;
use crate::psi::DimensionFunction;
use crate::util::{ls_slope, LogSumExp};

#[derive(Debug, Clone, Copy)]
pub struct TermEntry {
    pub index: f64,
    pub ln_term: f64,
}

#[derive(Debug, Clone)]
pub struct TermStream {
    pub label: String,
    pub entries: Vec<TermEntry>,
    /// terms whose gauge argument fell outside Ψ's attained range (flagged and
    /// counted, never silently dropped)
    pub skipped: usize,
}

impl TermStream {
    pub fn ln_partial_sum(&self) -> f64 {
        let mut l = LogSumExp::new();
        for e in &self.entries {
            l.add_ln(e.ln_term);
        }
        l.ln_value()
    }
}

/// Terms of the Hausdorff criterion series: at y = Ψ(λ^{−k}),
/// term_k = y^{(1−2δ)/(1−δ)} / (ln y)^{δ/(1−δ)}, for k = 1..K.
pub fn hd_series_terms(
    spec: &DimensionFunction,
    lambda: f64,
    delta: f64,
    k_max: usize,
) -> Result<TermStream> {
    if !(lambda > 1.0) {
        return domain(format!("lambda must exceed 1, got {lambda}"));
    }
    let e1 = (1.0 - 2.0 * delta) / (1.0 - delta);
    let e2 = delta / (1.0 - delta);
    let ln_lambda = lambda.ln();
    let mut entries = Vec::with_capacity(k_max);
    let mut skipped = 0usize;
    for k in 1..=k_max {
        let w = k as f64 * ln_lambda;
        if w <= spec.w_min() {
            skipped += 1;
            continue;
        }
        let ln_y = spec.ln_big_psi_w(w)?;
        if ln_y <= 0.0 {
            // y ≤ 1: the logarithm in the denominator is not defined yet
            skipped += 1;
            continue;
        }
        entries.push(TermEntry {
            index: k as f64,
            ln_term: e1 * ln_y - e2 * ln_y.ln(),
        });
    }
    if entries.is_empty() {
        return domain(format!(
            "series criterion inapplicable: Ψ(λ^{{-k}}) never exceeds 1 up to k = {k_max}"
        ));
    }
    Ok(TermStream {
        label: format!("hd[{}, lambda={lambda}]", spec.label()),
        entries,
        skipped,
    })
}

/// Σ″ terms over letters: term(a) = μ(a)·ln(1/Ψ^{-1}(α^{-1} F(1/a))), with
/// F(1/a) = a^{-δ} f(a) from the alphabet's density law.
pub fn sigma_doubleprime_terms(
    spec: &DimensionFunction,
    alpha: f64,
    model: &MeasureModel,
) -> Result<TermStream> {
    if !(alpha > 0.0) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    let delta = model.delta();
    let alphabet = model.alphabet();
    if alphabet.density(10.0).is_none() {
        return domain("Σ″ needs an alphabet with a density law (primes or all)");
    }
    let mut entries = Vec::with_capacity(alphabet.len());
    let mut skipped = 0usize;
    for &a in alphabet.letters() {
        let f_val = alphabet.big_f(1.0 / a as f64, delta).unwrap();
        let ln_v = f_val.ln() - alpha.ln();
        match spec.ln_inv_big_psi_from_ln(ln_v) {
            Ok(w_star) => {
                let mu = model.letter_weight(a)?;
                entries.push(TermEntry {
                    index: a as f64,
                    ln_term: mu.ln() + w_star.ln(),
                });
            }
            Err(Error::OutOfRange(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(TermStream {
        label: format!("sigma2[{}, alpha={alpha}]", spec.label()),
        entries,
        skipped,
    })
}

/// The inner maximization of the packing series at one letter.
#[derive(Debug, Clone, Copy)]
pub struct InnerMax {
    pub x_star: f64,
    pub count_at_star: u64,
    /// ln(1/Ψ^{-1}(α^{-1} x*^{-δ}·count))
    pub value: f64,
}

/// Exact inner max over x ∈ [1, a/3] of ln(1/Ψ^{-1}(α^{-1} x^{-δ} #(B(a,x)∩P))).
///
/// #(B(a,x)∩P) is a right-continuous step function jumping at x = |p−a|, and
/// x^{-δ}·count is monotone between jumps, so on each continuity interval the
/// composed term is monotone whichever way Ψ leans. The sup over the closure
/// is therefore attained among: both endpoints {1, a/3} and, at every jump
/// point d, both one-sided values (count with |p−a| ≤ d and with |p−a| < d).
/// Candidates whose gauge argument leaves Ψ's range are skipped and counted.
pub fn packing_inner_max(
    spec: &DimensionFunction,
    alpha: f64,
    delta: f64,
    table: &PrimeTable,
    a: u64,
) -> Result<Option<InnerMax>> {
    let x_end = a as f64 / 3.0;
    if x_end < 1.0 {
        return Ok(None); // the constraint set 1 ≤ x ≤ a/3 is empty
    }
    let mut candidates: Vec<(f64, u64)> = Vec::new();
    let push = |cands: &mut Vec<(f64, u64)>, x: f64, count: u64| {
        if count >= 1 {
            cands.push((x, count));
        }
    };
    push(&mut candidates, 1.0, table.window_count(a, 1.0)?);
    push(&mut candidates, x_end, table.window_count(a, x_end)?);
    // jump points: distances to primes in [a − a/3, a + a/3], both sides
    let lo = a - (a / 3);
    let hi = a + (a / 3);
    let slice = table.as_slice();
    let i0 = slice.partition_point(|&p| p < lo);
    let i1 = slice.partition_point(|&p| p <= hi);
    for &p in &slice[i0..i1] {
        if p == a {
            continue;
        }
        let d = if p > a { p - a } else { a - p };
        if d == 0 || (d as f64) < 1.0 || (d as f64) > x_end {
            continue;
        }
        let at = table.window_count(a, d as f64)?;
        push(&mut candidates, d as f64, at);
        // left limit: strict inequality |p − a| < d
        let mut strict = at;
        if table.is_prime(a + d) {
            strict -= 1;
        }
        if a > d && table.is_prime(a - d) {
            strict -= 1;
        }
        push(&mut candidates, d as f64, strict);
    }

    // ln(1/Ψ^{-1}(v)) is monotone in v (direction fixed by ε), so the max
    // over candidates is the inversion of the extreme v: one bisection per
    // letter. Candidates outside Ψ's attained range are skipped in order.
    let mut scored: Vec<(f64, f64, u64)> = candidates
        .into_iter()
        .map(|(x, count)| {
            let ln_v = -alpha.ln() - delta * x.ln() + (count as f64).ln();
            (ln_v, x, count)
        })
        .collect();
    // ε = −1: Ψ increasing, term decreasing in v → smallest v wins
    // ε = +1: Ψ decreasing, term increasing in v → largest v wins
    if spec.epsilon() == -1 {
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    } else {
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    }
    for (ln_v, x, count) in scored {
        match spec.ln_inv_big_psi_from_ln(ln_v) {
            Ok(w_star) => {
                return Ok(Some(InnerMax {
                    x_star: x,
                    count_at_star: count,
                    value: w_star,
                }))
            }
            Err(Error::OutOfRange(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Σ′ packing terms over letters: term(a) = μ(a)·(inner max at a).
pub fn sigma_prime_packing_terms(
    spec: &DimensionFunction,
    alpha: f64,
    model: &MeasureModel,
    table: &PrimeTable,
) -> Result<TermStream> {
    if !(alpha > 0.0) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    let alphabet = model.alphabet();
    let needed = alphabet.max_letter() + alphabet.max_letter() / 3 + 1;
    if table.limit() < needed {
        return domain(format!(
            "prime table limit {} does not cover alphabet·4/3 = {needed}",
            table.limit()
        ));
    }
    let delta = model.delta();
    use rayon::prelude::*;
    let per_letter: Vec<Result<Option<(f64, f64)>>> = alphabet
        .letters()
        .par_iter()
        .map(|&a| {
            Ok(match packing_inner_max(spec, alpha, delta, table, a)? {
                Some(inner) => {
                    let mu = model.letter_weight(a)?;
                    Some((a as f64, mu.ln() + inner.value.ln()))
                }
                None => None,
            })
        })
        .collect();
    let mut entries = Vec::with_capacity(alphabet.len());
    let mut skipped = 0usize;
    for r in per_letter {
        match r? {
            Some((index, ln_term)) => entries.push(TermEntry { index, ln_term }),
            None => skipped += 1,
        }
    }
    Ok(TermStream {
        label: format!("sigma1[{}, alpha={alpha}]", spec.label()),
        entries,
        skipped,
    })
}

/// Composed Hausdorff-side series: Σ′_{α,1} = Σ′_{α,−1} + Σ″_α, added
/// termwise over the shared letter index. No separate logic.
pub fn sigma_prime_hausdorff_terms(
    spec: &DimensionFunction,
    alpha: f64,
    model: &MeasureModel,
    table: &PrimeTable,
) -> Result<TermStream> {
    let packing = sigma_prime_packing_terms(spec, alpha, model, table)?;
    let dp = sigma_doubleprime_terms(spec, alpha, model)?;
    let mut by_index: std::collections::BTreeMap<u64, f64> = std::collections::BTreeMap::new();
    for e in packing.entries.iter().chain(dp.entries.iter()) {
        let k = e.index as u64;
        by_index
            .entry(k)
            .and_modify(|ln| {
                let mut l = LogSumExp::new();
                l.add_ln(*ln);
                l.add_ln(e.ln_term);
                *ln = l.ln_value();
            })
            .or_insert(e.ln_term);
    }
    Ok(TermStream {
        label: format!("sigma_h[{}, alpha={alpha}]", spec.label()),
        entries: by_index
            .into_iter()
            .map(|(k, ln_term)| TermEntry {
                index: k as f64,
                ln_term,
            })
            .collect(),
        skipped: packing.skipped + dp.skipped,
    })
}

/// Terms of Σ_n p_n^{−kC}.
pub fn borel_cantelli_terms(
    table: &PrimeTable,
    k: u32,
    c: f64,
    terms: usize,
) -> Result<TermStream> {
    if k < 1 {
        return domain("k must be >= 1");
    }
    if !(c > 0.0) {
        return domain(format!("C must be positive, got {c}"));
    }
    if table.len() < terms {
        return domain(format!(
            "table holds {} primes, fewer than the requested {terms} terms",
            table.len()
        ));
    }
    let kc = k as f64 * c;
    let entries: Vec<TermEntry> = table.as_slice()[..terms]
        .iter()
        .enumerate()
        .map(|(i, &p)| TermEntry {
            index: (i + 1) as f64,
            ln_term: -kc * (p as f64).ln(),
        })
        .collect();
    Ok(TermStream {
        label: format!("borel_cantelli[k={k}, C={c}]"),
        entries,
        skipped: 0,
    })
}

/// Verdict boundary for the fitted exponent of Σ p_n^{−kC} against ln(n·ln n):
/// the fit estimates kC, and the series diverges exactly when kC ≤ 1, equality
/// included. A small inclusive tolerance absorbs the o(1) drift of the fit.
pub const BC_BOUNDARY_TOL: f64 = 0.02;

/// Σ_n p_n^{−kC} with the model-aware verdict: since p_n ~ n·ln n, the fitted
/// exponent against ln(n ln n) estimates kC directly, and the divergence rule
/// is the clean boundary kC ≤ 1 (inclusive).
pub fn borel_cantelli_series(
    table: &PrimeTable,
    k: u32,
    c: f64,
    terms: usize,
) -> Result<SeriesDiagnostics> {
    let stream = borel_cantelli_terms(table, k, c, terms)?;
    let policy = VerdictPolicy::default();
    let mut d = crate::diagnostics::verdict(&stream, policy)?;
    // model-aware fit over the tail
    let tail_start = stream.entries.len() / 2;
    let xs: Vec<f64> = stream.entries[tail_start..]
        .iter()
        .map(|e| (e.index * e.index.ln().max(1.0)).ln())
        .collect();
    let ys: Vec<f64> = stream.entries[tail_start..]
        .iter()
        .map(|e| e.ln_term)
        .collect();
    let kc_hat = -ls_slope(&xs, &ys);
    if stream.entries.len() >= policy.min_terms {
        if kc_hat <= 1.0 + BC_BOUNDARY_TOL {
            d.verdict = Verdict::Diverges;
            d.verdict_basis = format!(
                "fitted kC = {kc_hat:.4} ≤ 1 + {BC_BOUNDARY_TOL} against ln(n·ln n): \
                 Σ p_n^{{-kC}} diverges iff kC ≤ 1"
            );
        } else {
            d.verdict = Verdict::Converges;
            d.verdict_basis =
                format!("fitted kC = {kc_hat:.4} > 1 + {BC_BOUNDARY_TOL} against ln(n·ln n)");
        }
    }
    Ok(d)
}
