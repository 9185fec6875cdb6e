//! Exact arithmetic for the Gauss iterated function system x ↦ 1/(a+x).
//!
//! A `Word` carries its continuant state (p_{n−1}, p_n, q_{n−1}, q_n) as
//! arbitrary-precision integers, so contraction norms 1/q_n², cylinder
//! endpoints and diameters are exact rationals at any depth. Continuants grow
//! exponentially (overflow near depth 45 for 64-bit even with small letters),
//! hence BigInt throughout.

use crate::alphabet::TruncatedAlphabet;
use crate::error::{domain, out_of_range, Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

/// Finite word ω ∈ E* with cached continuants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    letters: Vec<u64>,
    p_prev: BigInt,
    p: BigInt,
    q_prev: BigInt,
    q: BigInt,
}

/// Exact cylinder interval [ω] = φ_ω([0,1]).
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderInterval {
    pub lo: BigRational,
    pub hi: BigRational,
    pub diameter: BigRational,
}

impl Default for Word {
    fn default() -> Self {
        Self::empty()
    }
}

impl Word {
    /// Empty word = identity map, norm 1. Continuant seed (p_{−1}, p_0, q_{−1}, q_0) = (1, 0, 0, 1).
    pub fn empty() -> Self {
        Word {
            letters: Vec::new(),
            p_prev: BigInt::one(),
            p: BigInt::zero(),
            q_prev: BigInt::zero(),
            q: BigInt::one(),
        }
    }

    pub fn from_letters(letters: &[u64]) -> Result<Self> {
        let mut w = Word::empty();
        for &a in letters {
            w = w.extend(a)?;
        }
        Ok(w)
    }

    /// Parse the CLI literal syntax: comma-separated letters, e.g. "2,3,5".
    pub fn parse(s: &str) -> Result<Self> {
        let letters: Vec<u64> = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|e| Error::Parse(format!("bad word literal {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        Word::from_letters(&letters)
    }

    pub fn letters(&self) -> &[u64] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn q_prev(&self) -> &BigInt {
        &self.q_prev
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn p_prev(&self) -> &BigInt {
        &self.p_prev
    }

    /// Append a letter: (p, q) ← (a·p + p_prev, a·q + q_prev).
    pub fn extend(&self, letter: u64) -> Result<Word> {
        if letter < 1 {
            return domain(format!("letters must be >= 1, got {letter}"));
        }
        let a = BigInt::from(letter);
        let mut w = self.clone();
        let p_new = &a * &w.p + &w.p_prev;
        let q_new = &a * &w.q + &w.q_prev;
        w.p_prev = std::mem::replace(&mut w.p, p_new);
        w.q_prev = std::mem::replace(&mut w.q, q_new);
        w.letters.push(letter);
        debug_assert_eq!(w.determinant(), if w.len() % 2 == 0 { 1 } else { -1 });
        Ok(w)
    }

    /// p_{n−1}·q_n − p_n·q_{n−1}; equals (−1)^n exactly.
    pub fn determinant(&self) -> i8 {
        let d = &self.p_prev * &self.q - &self.p * &self.q_prev;
        if d.is_one() {
            1
        } else if (-&d).is_one() {
            -1
        } else {
            panic!("determinant identity violated: {d}");
        }
    }

    /// ‖φ′_ω‖ = 1/q_n² exactly; 1 for the empty word.
    pub fn contraction_norm(&self) -> BigRational {
        BigRational::new(BigInt::one(), &self.q * &self.q)
    }

    /// ln ‖φ′_ω‖ = −2 ln q_n.
    pub fn ln_norm(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            -2.0 * crate::util::ln_bigint(&self.q)
        }
    }

    /// Cylinder [ω]: endpoints φ_ω(0) = p/q and φ_ω(1) = (p_prev+p)/(q_prev+q),
    /// ordered; diameter verified against 1/(q(q+q_prev)) exactly.
    pub fn cylinder(&self) -> Result<CylinderInterval> {
        if self.is_empty() {
            return domain("cylinder of the empty word is [0,1]; ask a letter first");
        }
        let e0 = BigRational::new(self.p.clone(), self.q.clone());
        let e1 = BigRational::new(&self.p_prev + &self.p, &self.q_prev + &self.q);
        let (lo, hi) = if e0 <= e1 { (e0, e1) } else { (e1, e0) };
        let diameter = &hi - &lo;
        debug_assert_eq!(
            diameter,
            BigRational::new(BigInt::one(), &self.q * (&self.q + &self.q_prev))
        );
        Ok(CylinderInterval { lo, hi, diameter })
    }

    /// Drop the first letter; continuants recomputed from scratch.
    pub fn shift(&self) -> Result<Word> {
        if self.is_empty() {
            return domain("cannot shift the empty word");
        }
        Word::from_letters(&self.letters[1..])
    }

    /// φ_ω(x) as an exact rational: (p + p_prev·x)/(q + q_prev·x).
    pub fn apply(&self, x: &BigRational) -> BigRational {
        let num = BigRational::from(self.p.clone()) + BigRational::from(self.p_prev.clone()) * x;
        let den = BigRational::from(self.q.clone()) + BigRational::from(self.q_prev.clone()) * x;
        num / den
    }
}

/// Convergent p_n/q_n of a (possibly periodic) letter stream, with the
/// guaranteed error bound |π(ω) − p_n/q_n| ≤ 1/q_n².
#[derive(Debug, Clone)]
pub struct Convergent {
    pub value: BigRational,
    pub error_bound: BigRational,
    pub depth: usize,
}

/// Truncate the coding map at `depth` letters of the stream.
pub fn coding_point<I: IntoIterator<Item = u64>>(letters: I, depth: usize) -> Result<Convergent> {
    let mut w = Word::empty();
    let mut taken = 0usize;
    for a in letters.into_iter().take(depth) {
        w = w.extend(a)?;
        taken += 1;
    }
    if taken < depth {
        return out_of_range(format!(
            "requested depth {depth} but the word has only {taken} letters"
        ));
    }
    if taken == 0 {
        return domain("coding point needs at least one letter");
    }
    Ok(Convergent {
        value: BigRational::new(w.p.clone(), w.q.clone()),
        error_bound: w.contraction_norm(),
        depth,
    })
}

/// λ for W_k bucket membership: rational λ gives exact two-sided tests;
/// irrational λ uses directed rounding with a guard band and an ambiguity flag.
#[derive(Debug, Clone)]
pub enum Lambda {
    Rational(BigRational),
    Real(f64),
}

impl Lambda {
    pub fn from_f64(x: f64) -> Lambda {
        if x == x.trunc() && x.abs() < 1e15 {
            Lambda::Rational(BigRational::from(BigInt::from(x as i64)))
        } else {
            Lambda::Real(x)
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Lambda::Rational(r) => crate::util::rational_to_f64(r),
            Lambda::Real(x) => *x,
        }
    }
}

/// Membership of a norm 1/q² in (λ^{−(k+1)}, λ^{−k}].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BucketTest {
    In,
    Out,
    /// Irrational λ only: within the rounding guard band of a boundary.
    Ambiguous,
}

/// The W_k partition bucket: words with ‖φ′_ω‖ ∈ (λ^{−(k+1)}, λ^{−k}].
#[derive(Debug, Clone)]
pub struct WkBucket {
    pub k: u32,
    pub lambda: f64,
    pub members: Vec<Word>,
    pub complete: bool,
    pub ambiguous: Vec<Word>,
}

fn bucket_test_real(q_ln: f64, lam: f64, k: u32) -> BucketTest {
    // compare 2 ln q against k ln λ with a guard band
    let guard = 1e-12 * (k as f64 + 1.0).max(1.0) * lam.ln().abs().max(1.0);
    let two_ln_q = 2.0 * q_ln;
    let lo = k as f64 * lam.ln();
    let hi = (k as f64 + 1.0) * lam.ln();
    if (two_ln_q - lo).abs() < guard || (two_ln_q - hi).abs() < guard {
        return BucketTest::Ambiguous;
    }
    if two_ln_q >= lo && two_ln_q < hi {
        BucketTest::In
    } else {
        BucketTest::Out
    }
}

/// Depth-first enumeration of W_k over a truncated alphabet with pruning:
/// a prefix with ‖φ′‖ ≤ λ^{−(k+1)} is never extended (norms only shrink).
/// Emits at most `cap` members; sets `complete = false` if the cap was hit.
pub fn enumerate_wk(
    alphabet: &TruncatedAlphabet,
    lambda: &Lambda,
    k: u32,
    cap: usize,
) -> Result<WkBucket> {
    if lambda.as_f64() <= 1.0 {
        return domain(format!("lambda must exceed 1, got {}", lambda.as_f64()));
    }
    let mut bucket = WkBucket {
        k,
        lambda: lambda.as_f64(),
        members: Vec::new(),
        complete: true,
        ambiguous: Vec::new(),
    };
    // precompute rational powers once
    let rat = match lambda {
        Lambda::Rational(r) => Some((r.pow(k as i32), r.pow(k as i32 + 1))),
        Lambda::Real(_) => None,
    };
    let test = |w: &Word| -> BucketTest {
        match (&rat, lambda) {
            (Some((lk, lk1)), _) => {
                let q2 = BigRational::from(w.q() * w.q());
                if q2 < *lk || q2 >= *lk1 {
                    BucketTest::Out
                } else {
                    BucketTest::In
                }
            }
            (None, Lambda::Real(l)) => bucket_test_real(crate::util::ln_bigint(w.q()), *l, k),
            _ => unreachable!(),
        }
    };
    // prune when q² ≥ λ^{k+1} (norm ≤ λ^{−(k+1)})
    let prune = |w: &Word| -> bool {
        match (&rat, lambda) {
            (Some((_, lk1)), _) => BigRational::from(w.q() * w.q()) >= *lk1,
            (None, Lambda::Real(l)) => {
                2.0 * crate::util::ln_bigint(w.q()) >= (k as f64 + 1.0) * l.ln() - 1e-12
            }
            _ => unreachable!(),
        }
    };

    let mut stack = vec![Word::empty()];
    while let Some(w) = stack.pop() {
        match test(&w) {
            BucketTest::In => {
                if bucket.members.len() >= cap {
                    bucket.complete = false;
                    break;
                }
                bucket.members.push(w.clone());
            }
            BucketTest::Ambiguous => bucket.ambiguous.push(w.clone()),
            BucketTest::Out => {}
        }
        if !prune(&w) {
            // descend; push in reverse so small letters come out first
            for &a in alphabet.letters().iter().rev() {
                stack.push(w.extend(a)?);
            }
        }
    }
    Ok(bucket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::TruncatedAlphabet;
    use num::{FromPrimitive, Signed};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn extend_examples() {
        let w = Word::empty().extend(2).unwrap();
        assert_eq!(w.q(), &BigInt::from(2));
        assert_eq!(w.contraction_norm(), rat(1, 4));

        let w23 = w.extend(3).unwrap();
        assert_eq!(w23.q(), &BigInt::from(7));
        assert_eq!(w23.contraction_norm(), rat(1, 49));

        let w232 = w23.extend(2).unwrap();
        assert_eq!(w232.q(), &BigInt::from(16)); // 2*7 + 2

        assert!(matches!(Word::empty().extend(0), Err(Error::Domain(_))));
    }

    #[test]
    fn norm_single_letter_is_inverse_square() {
        for a in [2u64, 3, 5, 97, 1009] {
            let w = Word::from_letters(&[a]).unwrap();
            assert_eq!(w.contraction_norm(), rat(1, (a * a) as i64));
        }
        assert_eq!(Word::empty().contraction_norm(), rat(1, 1));
    }

    #[test]
    fn cylinder_examples() {
        let c2 = Word::from_letters(&[2]).unwrap().cylinder().unwrap();
        assert_eq!(c2.lo, rat(1, 3));
        assert_eq!(c2.hi, rat(1, 2));
        assert_eq!(c2.diameter, rat(1, 6));

        // direct composition oracle: φ₂(φ₃([0,1])) = [3/7, 4/9], diam 1/63
        let c23 = Word::from_letters(&[2, 3]).unwrap().cylinder().unwrap();
        assert_eq!(c23.lo, rat(3, 7));
        assert_eq!(c23.hi, rat(4, 9));
        assert_eq!(c23.diameter, rat(1, 63));

        // nesting
        let c2 = Word::from_letters(&[2]).unwrap().cylinder().unwrap();
        assert!(c2.lo <= c23.lo && c23.hi <= c2.hi);
    }

    #[test]
    fn cylinder_endpoints_match_direct_composition() {
        // continuant formula vs composing exact rationals, 1000 random words
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let letters_pool = [1u64, 2, 3, 5, 7, 11, 13, 97];
        for _ in 0..1000 {
            let len = rng.gen_range(1..=12);
            let letters: Vec<u64> = (0..len)
                .map(|_| letters_pool[rng.gen_range(0..letters_pool.len())])
                .collect();
            let w = Word::from_letters(&letters).unwrap();
            // oracle: apply maps right-to-left to 0 and 1
            let mut e0 = BigRational::zero();
            let mut e1 = BigRational::one();
            for &a in letters.iter().rev() {
                let af = BigRational::from_u64(a).unwrap();
                e0 = BigRational::one() / (&af + e0);
                e1 = BigRational::one() / (&af + e1);
            }
            let (lo, hi) = if e0 <= e1 { (e0, e1) } else { (e1, e0) };
            let c = w.cylinder().unwrap();
            assert_eq!(c.lo, lo);
            assert_eq!(c.hi, hi);
        }
    }

    #[test]
    fn coding_point_examples() {
        // fixed point of x = 1/(2+x) is √2 − 1
        let conv = coding_point(std::iter::repeat(2), 40).unwrap();
        let x = crate::util::rational_to_f64(&conv.value);
        assert!((x - (2f64.sqrt() - 1.0)).abs() < 1e-15);

        let c1 = coding_point([2u64], 1).unwrap();
        assert_eq!(c1.value, rat(1, 2));
        assert_eq!(c1.error_bound, rat(1, 4));

        assert!(matches!(
            coding_point([2u64, 3], 5),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn coding_point_periodic_quadratic() {
        // period (2,3): exact fixed-point equation q₁x² + (q₂−p₁)x − p₂ = 0,
        // i.e. 2x² + 6x − 3 = 0, root (−3+√15)/2
        let w = Word::from_letters(&[2, 3]).unwrap();
        let (q1, q2, p1, p2) = (2.0f64, 7.0f64, 1.0f64, 3.0f64);
        assert_eq!(w.q(), &BigInt::from(q2 as i64));
        let root = (-(q2 - p1) + ((q2 - p1) * (q2 - p1) + 4.0 * q1 * p2).sqrt()) / (2.0 * q1);
        assert!((root - (-3.0 + 15f64.sqrt()) / 2.0).abs() < 1e-15);
        let conv = coding_point([2u64, 3, 2, 3, 2, 3, 2, 3].iter().copied(), 8).unwrap();
        let err = (crate::util::rational_to_f64(&conv.value) - root).abs();
        let bound = crate::util::rational_to_f64(&conv.error_bound);
        assert!(err <= bound, "err {err} bound {bound}");
    }

    #[test]
    fn coding_error_bound_against_deep_convergent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let letters: Vec<u64> = (0..40).map(|_| rng.gen_range(1..=50)).collect();
            let shallow = coding_point(letters.iter().copied(), 12).unwrap();
            let deep = coding_point(letters.iter().copied(), 40).unwrap();
            let diff = (&deep.value - &shallow.value).abs();
            assert!(diff <= shallow.error_bound);
        }
    }

    #[test]
    fn shift_examples() {
        let w = Word::from_letters(&[2, 3]).unwrap();
        assert_eq!(w.shift().unwrap().letters(), &[3]);
        let s = Word::from_letters(&[5]).unwrap().shift().unwrap();
        assert!(s.is_empty());
        assert!(Word::empty().shift().is_err());
    }

    #[test]
    fn quasi_multiplicativity_exact() {
        // ‖φ′_{ωτ}‖ / (‖φ′_ω‖·‖φ′_τ‖) ∈ [1/4, 1] ⟺ q(ω)q(τ) ≤ q(ωτ) ≤ 2 q(ω)q(τ)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let len = rng.gen_range(2..=16);
            let cut = rng.gen_range(1..len);
            let letters: Vec<u64> = (0..len).map(|_| rng.gen_range(1..=100)).collect();
            let whole = Word::from_letters(&letters).unwrap();
            let head = Word::from_letters(&letters[..cut]).unwrap();
            let tail = Word::from_letters(&letters[cut..]).unwrap();
            let prod = head.q() * tail.q();
            assert!(*whole.q() >= prod);
            assert!(*whole.q() <= BigInt::from(2) * &prod);
        }
    }

    #[test]
    fn distortion_ratio_band() {
        // diam/norm = q/(q+q_prev) ∈ (1/2, 1]; the bound is attained only by
        // the singleton word (1), where q = q_prev = 1
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let len = rng.gen_range(1..=20);
            let letters: Vec<u64> = (0..len).map(|_| rng.gen_range(1..=1000)).collect();
            let w = Word::from_letters(&letters).unwrap();
            let ratio = BigRational::new(w.q().clone(), w.q() + w.q_prev());
            if letters == [1] {
                assert_eq!(ratio, rat(1, 2));
            } else {
                assert!(ratio > rat(1, 2));
            }
            assert!(ratio <= rat(1, 1));
        }
        let unit = Word::from_letters(&[1]).unwrap();
        assert_eq!(
            BigRational::new(unit.q().clone(), unit.q() + unit.q_prev()),
            rat(1, 2)
        );
    }

    #[test]
    fn wk_enumeration_small() {
        let ab = TruncatedAlphabet::explicit(&[2, 3]).unwrap();
        let lam = Lambda::from_f64(4.0);
        let b1 = enumerate_wk(&ab, &lam, 1, 10_000).unwrap();
        let mut words: Vec<Vec<u64>> = b1.members.iter().map(|w| w.letters().to_vec()).collect();
        words.sort();
        assert_eq!(words, vec![vec![2], vec![3]]);
        assert!(b1.complete);

        // k=0 on alphabet with min letter 2: only the empty word (norm 1)
        let b0 = enumerate_wk(&ab, &lam, 0, 10_000).unwrap();
        assert_eq!(b0.members.len(), 1);
        assert!(b0.members[0].is_empty());
    }

    #[test]
    fn wk_buckets_partition() {
        // every word lands in exactly one bucket
        let ab = TruncatedAlphabet::explicit(&[2, 3, 5]).unwrap();
        let lam = Lambda::from_f64(2.0);
        let mut seen = std::collections::HashMap::new();
        for k in 0..=15u32 {
            let b = enumerate_wk(&ab, &lam, k, 100_000).unwrap();
            assert!(b.complete);
            for w in &b.members {
                let prev = seen.insert(w.letters().to_vec(), k);
                assert!(prev.is_none(), "word in two buckets");
            }
        }
        // spot-check: all words of length <= 3 were classified
        for a in [2u64, 3, 5] {
            for b in [2u64, 3, 5] {
                for c in [2u64, 3, 5] {
                    assert!(seen.contains_key(&vec![a, b, c]));
                }
            }
        }
    }

    #[test]
    fn wk_irrational_lambda_guarded() {
        // irrational λ uses directed rounding with a guard band; membership
        // still partitions up to the ambiguous list (empty here)
        let ab = TruncatedAlphabet::explicit(&[2, 3, 5]).unwrap();
        let lam = Lambda::Real(std::f64::consts::E);
        let mut seen = std::collections::HashSet::new();
        for k in 0..=20u32 {
            let b = enumerate_wk(&ab, &lam, k, 100_000).unwrap();
            for w in &b.members {
                assert!(
                    seen.insert(w.letters().to_vec()),
                    "duplicate across buckets"
                );
                let norm = w.ln_norm();
                assert!(norm <= -(k as f64) + 1e-9 && norm > -(k as f64 + 1.0) - 1e-9);
            }
        }
        assert!(seen.len() > 50);
    }

    #[test]
    fn wk_cap_flags_incomplete() {
        let ab = TruncatedAlphabet::explicit(&[2, 3]).unwrap();
        let b = enumerate_wk(&ab, &Lambda::from_f64(2.0), 12, 3).unwrap();
        assert!(!b.complete);
        assert_eq!(b.members.len(), 3);
    }

    #[test]
    fn distortion_vs_split_norm_sampling() {
        // contraction_norm(ω) / (norm(head)·norm(shifted tail)) ∈ [1/4, 1]
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let len = rng.gen_range(2..=12);
            let letters: Vec<u64> = (0..len).map(|_| rng.gen_range(2..=50)).collect();
            let w = Word::from_letters(&letters).unwrap();
            let head = Word::from_letters(&letters[..1]).unwrap();
            let rest = w.shift().unwrap();
            let ratio = w.contraction_norm() / (head.contraction_norm() * rest.contraction_norm());
            assert!(ratio >= rat(1, 4) && ratio <= rat(1, 1));
        }
    }
}
