//! Conformal-measure approximation and the measure-side formulas: cylinder
//! and ball measures, the global measure formula sandwich, tail and annulus
//! asymptotics, local density scans, and the quasi-independence check.
//!
//! μ is approximated by normalized ‖φ′_ω‖^δ weights with explicit 4^δ
//! distortion bands rather than by eigenmeasure iteration; the bands are
//! rigorous relative to the truncated system, and every downstream statement
//! is an ≍-statement anyway. Words of length m are normalized by the level
//! partition sum Z_m(δ) (tabulated once through the transfer operator), so
//! every level carries total mass exactly 1 and the quasi-multiplicativity
//! ratio lands in the symmetric band [4^{−δ}, 4^{δ}].

use crate::alphabet::TruncatedAlphabet;
use crate::dimension::TransferOperator;
use crate::error::{domain, out_of_range, Error, Result};
use crate::gauss::{coding_point, enumerate_wk, Lambda, Word};
use crate::util::{rational_to_f64, CompensatedSum};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

/// Cylinder covers refine to this depth; deeper needs are flagged, not
/// silently truncated.
pub const DEFAULT_DEPTH_CAP: usize = 40;
const LEVEL_TABLE_DEPTH: usize = 64;

/// A value with a two-sided multiplicative distortion band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Banded {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Banded {
    fn zero() -> Self {
        Banded {
            value: 0.0,
            lower: 0.0,
            upper: 0.0,
        }
    }

    fn add(&mut self, other: Banded) {
        self.value += other.value;
        self.lower += other.lower;
        self.upper += other.upper;
    }
}

/// Normalized ‖φ′‖^δ weight model over a truncated alphabet.
pub struct MeasureModel {
    alphabet: TruncatedAlphabet,
    delta: f64,
    /// normalized single-letter weights aligned with alphabet.letters()
    letter_weights: Vec<f64>,
    z1: f64,
    /// ln Z_m(δ) for m = 0..=LEVEL_TABLE_DEPTH
    ln_level_mass: Vec<f64>,
    band: f64, // 4^δ
}

/// Adaptive ball-measure result.
#[derive(Debug, Clone, Copy)]
pub struct BallMeasure {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// mass of boundary cylinders still unresolved when refinement stopped
    pub uncertain: f64,
    pub depth: usize,
    /// true when the depth cap stopped refinement before the tolerance
    pub flagged: bool,
}

/// Which branch of the global-measure-formula recipe applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum GmfCase {
    /// the (m+1)-cylinder sits inside B(x,r): n = m
    ChildInside,
    /// the ball cuts the (m+1)-cylinder at an endpoint: n = m+1
    EndpointSplit,
}

#[derive(Debug, Clone)]
pub struct GmfResult {
    pub prefix: Vec<u64>,
    pub r: f64,
    /// maximal m with B(x,r) ∩ Λ certified inside [ω|m]
    pub m: usize,
    pub n: usize,
    pub case: GmfCase,
    /// M(x,n,r) = Σ_{[ω|n·a] ⊆ B(x,r)} μ(ω|n·a)
    pub m_sum: Banded,
    pub ball: BallMeasure,
    /// minimal C with [ω|n+1] ⊆ B(x, C·r)
    pub containment_c: f64,
    /// first grid C with M(x,n,C·r) ≥ ball.lower (upper-sandwich witness)
    pub upper_c: Option<f64>,
    pub sandwich_lower_ok: bool,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TailReport {
    pub r: f64,
    pub value: f64,
    /// value / (r^{2δ} f(1/r)); None when the alphabet has no density law
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct AnnulusReport {
    pub r: f64,
    pub lambda: f64,
    pub ratio: f64,
    /// annulus measure / (r^δ / ln(1/r))
    pub annulus_normalized: f64,
    /// full-tail measure / (r^δ / ln(1/r))
    pub tail_normalized: f64,
    pub empty: bool,
}

#[derive(Debug, Clone)]
pub struct QiReport {
    pub k: u32,
    pub l: u32,
    pub mu_k: Banded,
    pub mu_l: Banded,
    pub mu_intersection: Banded,
    /// μ(A_k ∩ A_l) / (μ(A_k)·μ(A_l))
    pub ratio: f64,
    pub complete: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct DensityScanPoint {
    pub r: f64,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

impl MeasureModel {
    pub fn new(alphabet: TruncatedAlphabet, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.5) {
            return domain(format!("delta must lie in (0, 1.5], got {delta}"));
        }
        let mut weights = Vec::with_capacity(alphabet.len());
        let mut z1 = CompensatedSum::new();
        for &a in alphabet.letters() {
            let w = (a as f64).powf(-2.0 * delta);
            weights.push(w);
            z1.add(w);
        }
        let z1 = z1.value();
        for w in weights.iter_mut() {
            *w /= z1;
        }
        let op = TransferOperator::build(&alphabet, delta)?;
        let mut ln_level = vec![0.0f64];
        ln_level.extend(op.ln_zn_prefix(LEVEL_TABLE_DEPTH)?);
        Ok(MeasureModel {
            alphabet,
            delta,
            letter_weights: weights,
            z1,
            ln_level_mass: ln_level,
            band: 4f64.powf(delta),
        })
    }

    pub fn alphabet(&self) -> &TruncatedAlphabet {
        &self.alphabet
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn z1(&self) -> f64 {
        self.z1
    }

    pub fn distortion_band(&self) -> f64 {
        self.band
    }

    /// μ([a]) for a single letter (normalized; letters sum to 1 exactly).
    pub fn letter_weight(&self, a: u64) -> Result<f64> {
        match self.alphabet.letters().binary_search(&a) {
            Ok(i) => Ok(self.letter_weights[i]),
            Err(_) => domain(format!("letter {a} outside the truncated alphabet")),
        }
    }

    fn ln_level(&self, m: usize) -> Result<f64> {
        self.ln_level_mass.get(m).copied().ok_or_else(|| {
            Error::ResourceCap(format!(
                "cylinder depth {m} beyond the level-mass table ({LEVEL_TABLE_DEPTH})"
            ))
        })
    }

    /// μ([ω]) ≈ ‖φ′_ω‖^δ / Z_{|ω|}(δ) with the distortion band.
    pub fn cylinder_measure(&self, word: &Word) -> Result<Banded> {
        for &a in word.letters() {
            if !self.alphabet.contains(a) {
                return domain(format!("letter {a} outside the truncated alphabet"));
            }
        }
        let v = (self.delta * word.ln_norm() - self.ln_level(word.len())?).exp();
        Ok(Banded {
            value: v,
            lower: v / self.band,
            upper: v * self.band,
        })
    }

    fn child_measure(&self, parent_ln_q: f64, t: f64, a: u64, depth: usize) -> Result<f64> {
        // ln q(ωa) = ln q(ω) + ln(a + q_prev/q)
        let ln_q = parent_ln_q + (a as f64 + t).ln();
        Ok((-2.0 * self.delta * ln_q - self.ln_level(depth)?).exp())
    }

    /// Measure of a closed interval [lo, hi] ∩ Λ_E by adaptive cylinder cover.
    pub fn interval_measure(
        &self,
        lo: &BigRational,
        hi: &BigRational,
        tol: f64,
        depth_cap: usize,
    ) -> Result<BallMeasure> {
        let zero = BigRational::zero();
        let one = BigRational::one();
        let lo = if lo < &zero { zero.clone() } else { lo.clone() };
        let hi = if hi > &one { one.clone() } else { hi.clone() };

        let mut inside = CompensatedSum::new();
        let mut uncertain = 0.0f64;
        let mut flagged = false;
        let mut max_depth = 0usize;

        // chains of straddling cylinders, one per interval endpoint
        let mut work: Vec<Word> = vec![Word::empty()];
        let mut depth = 0usize;
        while !work.is_empty() {
            if depth >= depth_cap {
                for w in &work {
                    uncertain += self.cylinder_measure(w)?.value;
                }
                flagged = uncertain > tol;
                break;
            }
            let mut next = Vec::new();
            for w in &work {
                let (sum, straddlers, unresolved) = self.split_children(w, &lo, &hi, depth + 1)?;
                inside.add(sum);
                uncertain += unresolved;
                for s in straddlers {
                    next.push(s);
                }
            }
            depth += 1;
            max_depth = depth;
            // stop early once the remaining straddle mass is below tolerance
            let mut straddle_mass = 0.0;
            for w in &next {
                straddle_mass += self.cylinder_measure(w)?.value;
            }
            if straddle_mass <= tol {
                uncertain += straddle_mass;
                next.clear();
            }
            work = next;
        }

        let value = inside.value() + 0.5 * uncertain;
        Ok(BallMeasure {
            value,
            lower: inside.value() / self.band,
            upper: (inside.value() + uncertain) * self.band,
            uncertain,
            depth: max_depth,
            flagged,
        })
    }

    /// Classify the children of `parent` against [lo, hi]: returns the summed
    /// measure of children fully inside, the straddling children (at most one
    /// per endpoint), and mass of children that cannot be classified because
    /// letters are missing from the alphabet (always 0 in practice).
    fn split_children(
        &self,
        parent: &Word,
        lo: &BigRational,
        hi: &BigRational,
        child_depth: usize,
    ) -> Result<(f64, Vec<Word>, f64)> {
        // local coordinates: u = φ_parent^{-1}(y), clamped to [0,1]
        let (u_lo, u_hi) = match self.local_interval(parent, lo, hi) {
            Some(iv) => iv,
            None => return Ok((0.0, vec![], 0.0)), // interval misses the cylinder
        };
        let letters = self.alphabet.letters();

        // child a occupies [1/(a+1), 1/a]; inside ⟺ a ≥ 1/u_hi and a ≤ 1/u_lo − 1
        let a_min: u64 = if u_hi.is_zero() {
            return Ok((0.0, vec![], 0.0));
        } else {
            let inv = u_hi.recip();
            let c = inv.ceil().to_integer();
            c.to_u64().unwrap_or(u64::MAX)
        };
        let a_max: u64 = if u_lo.is_zero() {
            self.alphabet.max_letter()
        } else {
            let bound = u_lo.recip() - BigRational::one();
            if bound < BigRational::zero() {
                0
            } else {
                bound.floor().to_integer().to_u64().unwrap_or(u64::MAX)
            }
        };

        let t = if parent.is_empty() {
            0.0
        } else {
            rational_to_f64(&BigRational::new(
                parent.q_prev().clone(),
                parent.q().clone(),
            ))
        };
        let parent_ln_q = if parent.is_empty() {
            0.0
        } else {
            crate::util::ln_bigint(parent.q())
        };

        let mut sum = CompensatedSum::new();
        if a_min <= a_max {
            let i0 = letters.partition_point(|&a| a < a_min);
            let i1 = letters.partition_point(|&a| a <= a_max);
            for &a in &letters[i0..i1] {
                sum.add(self.child_measure(parent_ln_q, t, a, child_depth)?);
            }
        }

        // straddlers: children containing an endpoint strictly inside them
        let mut straddlers = Vec::new();
        let mut seen = [0u64; 2];
        for (idx, u) in [&u_lo, &u_hi].into_iter().enumerate() {
            if u.is_zero() || *u >= BigRational::one() {
                continue;
            }
            let c = u.recip().floor().to_integer().to_u64().unwrap_or(0);
            if c == 0 || !self.alphabet.contains(c) {
                continue; // endpoint falls in a gap between children
            }
            // skip children already counted as fully inside
            if c >= a_min && c <= a_max {
                continue;
            }
            if idx == 1 && seen[0] == c {
                continue;
            }
            seen[idx] = c;
            straddlers.push(parent.extend(c)?);
        }
        Ok((sum.value(), straddlers, 0.0))
    }

    /// Map [lo, hi] into the local coordinates of `parent`'s cylinder,
    /// clamped to [0,1]; None when the intersection is empty.
    fn local_interval(
        &self,
        parent: &Word,
        lo: &BigRational,
        hi: &BigRational,
    ) -> Option<(BigRational, BigRational)> {
        if parent.is_empty() {
            let zero = BigRational::zero();
            let one = BigRational::one();
            let a = if lo < &zero { zero.clone() } else { lo.clone() };
            let b = if hi > &one { one } else { hi.clone() };
            if a > b {
                return None;
            }
            return Some((a, b));
        }
        let cyl = parent.cylinder().ok()?;
        if hi < &cyl.lo || lo > &cyl.hi {
            return None;
        }
        let u1 = invert_moebius(parent, &cyl.lo.clone().max(lo.clone()));
        let u2 = invert_moebius(parent, &cyl.hi.clone().min(hi.clone()));
        let (mut a, mut b) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
        let zero = BigRational::zero();
        let one = BigRational::one();
        if a < zero {
            a = zero.clone();
        }
        if b > one {
            b = one;
        }
        if a > b {
            None
        } else {
            Some((a, b))
        }
    }

    /// μ(B(x, r)) with adaptive refinement.
    pub fn ball_measure(&self, x: &BigRational, r: f64, tol: f64) -> Result<BallMeasure> {
        self.ball_measure_opts(x, r, tol, DEFAULT_DEPTH_CAP)
    }

    pub fn ball_measure_opts(
        &self,
        x: &BigRational,
        r: f64,
        tol: f64,
        depth_cap: usize,
    ) -> Result<BallMeasure> {
        if !(r > 0.0) {
            return domain(format!("ball radius must be positive, got {r}"));
        }
        let rr = BigRational::from_float(r)
            .ok_or_else(|| Error::Domain(format!("radius {r} not finite")))?;
        self.interval_measure(&(x - &rr), &(x + &rr), tol, depth_cap)
    }

    /// μ of the closed r-neighborhood of the cylinder [a].
    pub fn cylinder_ball_measure(&self, a: u64, r: f64, tol: f64) -> Result<BallMeasure> {
        let cyl = Word::from_letters(&[a])?.cylinder()?;
        let rr = BigRational::from_float(r)
            .ok_or_else(|| Error::Domain(format!("radius {r} not finite")))?;
        self.interval_measure(&(&cyl.lo - &rr), &(&cyl.hi + &rr), tol, DEFAULT_DEPTH_CAP)
    }

    /// Σ_{a∈E, a ≥ 1/r} μ(a), and its ratio against r^{2δ} f(1/r).
    pub fn tail_measure(&self, r: f64) -> Result<TailReport> {
        if !(r > 0.0 && r < 0.5) {
            return domain(format!("tail radius must lie in (0, 1/2), got {r}"));
        }
        let cutoff = self.alphabet.cutoff() as f64;
        if 1.0 / r > cutoff {
            return out_of_range(format!(
                "tail at r={r} is dominated by letters beyond the truncation {cutoff}"
            ));
        }
        let threshold = (1.0 / r).ceil() as u64;
        let letters = self.alphabet.letters();
        let i0 = letters.partition_point(|&a| a < threshold);
        let mut sum = CompensatedSum::new();
        for w in &self.letter_weights[i0..] {
            sum.add(*w);
        }
        let value = sum.value();
        let ratio = self
            .alphabet
            .density(1.0 / r)
            .map(|f| value / (r.powf(2.0 * self.delta) * f));
        Ok(TailReport { r, value, ratio })
    }

    /// μ({a : λ^{−1} r < ‖φ′_a‖ ≤ r}) / μ({a : ‖φ′_a‖ ≤ r}), plus both sides
    /// normalized by r^δ/ln(1/r).
    pub fn annulus_ratio(&self, r: f64, lambda: f64) -> Result<AnnulusReport> {
        if !(r > 0.0 && r <= 1.0) {
            return domain(format!("annulus radius must lie in (0, 1], got {r}"));
        }
        if !(lambda > 1.0) {
            return domain(format!("lambda must exceed 1, got {lambda}"));
        }
        // ‖φ′_a‖ = a^{−2} ≤ r ⟺ a ≥ r^{−1/2};  > λ^{−1}r ⟺ a < (λ/r)^{1/2}
        let letters = self.alphabet.letters();
        let lo = (1.0 / r).sqrt();
        let hi = (lambda / r).sqrt();
        let i0 = letters.partition_point(|&a| (a as f64) < lo);
        let i1 = letters.partition_point(|&a| (a as f64) < hi);
        let mut annulus = CompensatedSum::new();
        for w in &self.letter_weights[i0..i1] {
            annulus.add(*w);
        }
        let mut tail = CompensatedSum::new();
        for w in &self.letter_weights[i0..] {
            tail.add(*w);
        }
        let scale = r.powf(self.delta) / (1.0 / r).ln().max(1e-300);
        let empty = i0 == i1;
        let ratio = if tail.value() > 0.0 {
            annulus.value() / tail.value()
        } else {
            0.0
        };
        Ok(AnnulusReport {
            r,
            lambda,
            ratio,
            annulus_normalized: annulus.value() / scale,
            tail_normalized: tail.value() / scale,
            empty,
        })
    }

    /// Coding point of the periodic extension of `prefix`, bracketed to an
    /// error far below `r`.
    fn periodic_point(&self, prefix: &[u64], r: f64) -> Result<BigRational> {
        if prefix.is_empty() {
            return domain("word prefix must not be empty");
        }
        let target = (r * 1e-10).max(1e-300);
        let mut depth = prefix.len();
        loop {
            let conv = coding_point(prefix.iter().copied().cycle(), depth)?;
            if rational_to_f64(&conv.error_bound) < target || depth > 400 {
                return Ok(conv.value);
            }
            depth += prefix.len();
        }
    }

    /// The global-measure-formula recipe at x = π(periodic extension of
    /// `prefix`): select n, compute M(x,n,r), verify the sandwich against the
    /// adaptive ball measure, and report the containment constant.
    pub fn global_measure_formula(&self, prefix: &[u64], r: f64) -> Result<GmfResult> {
        if !(r > 0.0) {
            return domain(format!("radius must be positive, got {r}"));
        }
        for &a in prefix {
            if !self.alphabet.contains(a) {
                return domain(format!("prefix letter {a} outside the truncated alphabet"));
            }
        }
        let x = self.periodic_point(prefix, r)?;
        let rr = BigRational::from_float(r).unwrap();
        let ball_lo = &x - &rr;
        let ball_hi = &x + &rr;

        // maximal m with B(x,r) ∩ Λ certified inside [ω|m]: walk levels while
        // the local ball interval avoids every sibling cylinder
        let letters: Vec<u64> = prefix
            .iter()
            .copied()
            .cycle()
            .take(DEFAULT_DEPTH_CAP.saturating_sub(2))
            .collect();
        let mut m = 0usize;
        let mut parent = Word::empty();
        for (j, &letter) in letters.iter().enumerate() {
            let (u_lo, u_hi) = match self.local_interval(&parent, &ball_lo, &ball_hi) {
                Some(iv) => iv,
                None => break,
            };
            // siblings: nearest alphabet letters on both sides of `letter`
            let idx = self
                .alphabet
                .letters()
                .binary_search(&letter)
                .map_err(|_| Error::Domain(format!("letter {letter} outside alphabet")))?;
            // letters larger than `letter` live to the left (smaller u)
            let left_ok = match self.alphabet.letters().get(idx + 1) {
                Some(&bp) => u_lo > BigRational::new(BigInt::one(), BigInt::from(bp)),
                None => u_lo >= BigRational::zero(),
            };
            let right_ok = if idx == 0 {
                u_hi <= BigRational::one()
            } else {
                let bm = self.alphabet.letters()[idx - 1];
                u_hi < BigRational::new(BigInt::one(), BigInt::from(bm + 1))
            };
            if left_ok && right_ok {
                m = j + 1;
                parent = parent.extend(letter)?;
            } else {
                break;
            }
        }
        // `parent` is ω|m. Case split on [ω|m+1] ⊆ B(x,r).
        let next_letter = letters[m];
        let child = parent.extend(next_letter)?;
        let child_cyl = child.cylinder()?;
        let child_inside = child_cyl.lo >= ball_lo && child_cyl.hi <= ball_hi;
        let (n, case, n_word) = if child_inside {
            (m, GmfCase::ChildInside, parent.clone())
        } else {
            (m + 1, GmfCase::EndpointSplit, child.clone())
        };

        let m_sum = self.one_level_sum(&n_word, &ball_lo, &ball_hi)?;
        let ball = self.ball_measure(&x, r, 1e-12)?;

        // containment constant for [ω|n+1]
        let n1_word = n_word.extend(letters[n])?;
        let n1_cyl = n1_word.cylinder()?;
        let d1 = (&n1_cyl.lo - &x).abs();
        let d2 = (&n1_cyl.hi - &x).abs();
        let dmax = if d1 > d2 { d1 } else { d2 };
        let containment_c = rational_to_f64(&dmax) / r;

        // minimal grid C with M(x,n,C·r) ≥ ball.lower
        let mut upper_c = None;
        let mut c = 1.0f64;
        while c <= 64.0 {
            let cr = BigRational::from_float(c * r).unwrap();
            let ms = self.one_level_sum(&n_word, &(&x - &cr), &(&x + &cr))?;
            if ms.value >= ball.lower {
                upper_c = Some(c);
                break;
            }
            c *= 1.25;
        }

        let sandwich_lower_ok = m_sum.value <= ball.upper * (1.0 + 1e-9);
        Ok(GmfResult {
            prefix: prefix.to_vec(),
            r,
            m,
            n,
            case,
            m_sum,
            ball,
            containment_c,
            upper_c,
            sandwich_lower_ok,
        })
    }

    /// Σ μ(parent·a) over children fully inside [lo, hi].
    fn one_level_sum(&self, parent: &Word, lo: &BigRational, hi: &BigRational) -> Result<Banded> {
        let (sum, _straddle, _un) = self.split_children(parent, lo, hi, parent.len() + 1)?;
        Ok(Banded {
            value: sum,
            lower: sum / self.band,
            upper: sum * self.band,
        })
    }

    /// μ(B(x,r))/ψ(r) over a decreasing radius grid; finite-r proxies for the
    /// upper/lower ψ-densities, labeled as proxies by construction.
    pub fn local_density_scan(
        &self,
        prefix: &[u64],
        psi: &crate::psi::DimensionFunction,
        radii: &[f64],
    ) -> Result<(Vec<DensityScanPoint>, f64, f64)> {
        if radii.windows(2).any(|w| w[1] >= w[0]) {
            return domain("radii must be strictly decreasing");
        }
        if radii.is_empty() {
            return domain("radius grid must not be empty");
        }
        let x = self.periodic_point(prefix, radii[radii.len() - 1])?;
        let mut points = Vec::with_capacity(radii.len());
        let mut run_max = f64::NEG_INFINITY;
        let mut run_min = f64::INFINITY;
        for &r in radii {
            let psi_r = psi.psi(r)?;
            let b = self.ball_measure(&x, r, 1e-12)?;
            let ratio = b.value / psi_r;
            run_max = run_max.max(ratio);
            run_min = run_min.min(ratio);
            points.push(DensityScanPoint {
                r,
                ratio,
                lower: b.lower / psi_r,
                upper: b.upper / psi_r,
            });
        }
        Ok((points, run_min, run_max))
    }

    /// Quasi-independence ratio μ(A_k ∩ A_l)/(μ(A_k)·μ(A_l)) where
    /// A_k = ⋃{[ωa] : ω ∈ W_k, a ∈ J_k} at the current truncation.
    pub fn quasi_independence_check(
        &self,
        lambda: &Lambda,
        k: u32,
        j_k: &[u64],
        l: u32,
        j_l: &[u64],
        cap: usize,
    ) -> Result<QiReport> {
        if k == l {
            return domain("quasi-independence needs k != l (k = l is degenerate)");
        }
        let (words_k, complete_k) = self.a_k_words(lambda, k, j_k, cap)?;
        let (words_l, complete_l) = self.a_k_words(lambda, l, j_l, cap)?;
        let mu_k = self.union_measure(&words_k)?;
        let mu_l = self.union_measure(&words_l)?;
        let inter = intersect_prefix_free(&words_k, &words_l);
        let mu_i = self.union_measure(&inter)?;
        let denom = mu_k.value * mu_l.value;
        Ok(QiReport {
            k,
            l,
            mu_k,
            mu_l,
            mu_intersection: mu_i,
            ratio: if denom > 0.0 { mu_i.value / denom } else { 0.0 },
            complete: complete_k && complete_l,
        })
    }

    fn a_k_words(
        &self,
        lambda: &Lambda,
        k: u32,
        j: &[u64],
        cap: usize,
    ) -> Result<(Vec<Vec<u64>>, bool)> {
        for &a in j {
            if !self.alphabet.contains(a) {
                return domain(format!("J letter {a} outside the truncated alphabet"));
            }
        }
        let bucket = enumerate_wk(&self.alphabet, lambda, k, cap)?;
        let mut words = Vec::new();
        for w in &bucket.members {
            for &a in j {
                let mut ls = w.letters().to_vec();
                ls.push(a);
                words.push(ls);
            }
        }
        Ok((prefix_free_maximal(words), bucket.complete))
    }

    fn union_measure(&self, prefix_free: &[Vec<u64>]) -> Result<Banded> {
        let mut total = Banded::zero();
        for ls in prefix_free {
            let w = Word::from_letters(ls)?;
            total.add(self.cylinder_measure(&w)?);
        }
        Ok(total)
    }
}

/// φ_ω^{-1}(y) = (p − q·y)/(q_prev·y − p_prev), exact.
fn invert_moebius(word: &Word, y: &BigRational) -> BigRational {
    let p = BigRational::from(word.p().clone());
    let q = BigRational::from(word.q().clone());
    let p_prev = BigRational::from(word.p_prev().clone());
    let q_prev = BigRational::from(word.q_prev().clone());
    (&p - &q * y) / (&q_prev * y - &p_prev)
}

/// Keep only words with no kept prefix (sorted lexicographic sweep).
fn prefix_free_maximal(mut words: Vec<Vec<u64>>) -> Vec<Vec<u64>> {
    words.sort();
    words.dedup();
    let mut out: Vec<Vec<u64>> = Vec::with_capacity(words.len());
    for w in words {
        if let Some(last) = out.last() {
            if w.len() >= last.len() && &w[..last.len()] == last.as_slice() {
                continue;
            }
        }
        out.push(w);
    }
    out
}

/// Cylinders [u], [v] intersect iff one word prefixes the other; the
/// intersection is the longer cylinder. Both inputs are prefix-free.
fn intersect_prefix_free(a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for u in a {
        // v's extending u: lexicographic range scan
        let lo = b.partition_point(|v| v.as_slice() < u.as_slice());
        for v in &b[lo..] {
            if v.len() >= u.len() && &v[..u.len()] == u.as_slice() {
                out.push(v.clone());
            } else {
                break;
            }
        }
        // v's that are strict prefixes of u
        for plen in 1..u.len() {
            if b.binary_search_by(|v| v.as_slice().cmp(&u[..plen])).is_ok() {
                out.push(u.clone());
                break;
            }
        }
    }
    prefix_free_maximal(out)
}
