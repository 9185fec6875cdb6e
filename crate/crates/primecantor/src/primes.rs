//! Segmented prime sieve and the prime-gap statistics built on it.
//!
//! The sieve is a segmented, odd-only sieve of Eratosthenes: root primes up
//! to √limit are found by a plain sieve, then segments of the odd numbers are
//! struck in parallel. Memory is O(√limit + segment) during the run; the
//! resulting table stores the primes themselves for O(log) rank/select.
//!
//! Gap records follow the running-maximum convention: a record is emitted at
//! every index where the normalized windowed gap min(d_n, …, d_{n+k−1})/ln²(p_n)
//! exceeds everything seen before. Any finite-limit final record is a
//! lower-bound witness for the limsup, never a converged value.

use crate::error::{domain, out_of_range, Error, Result};
use crate::util::median;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::{Read, Write};
use std::path::Path;

/// Default segment size: number of odd entries per segment.
pub const DEFAULT_SEGMENT: usize = 1 << 20;

/// Records below this index are skipped by default: for p_n < 11 the
/// normalizer ln²(p_n) is still O(1) and the ratios (2.08 at p=2) would pin
/// the running maximum forever, drowning the regime the statistic is about.
pub const DEFAULT_RECORD_START: usize = 5;

/// Sieve output over [2, limit] with O(log) rank/select.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

/// One running-maximum record of the windowed normalized gap statistic.
///
/// `window_min = min(d_n, …, d_{n+k−1})` where `d_n = p_{n+1} − p_n`, and
/// `normalized = window_min / ln²(p_n)` with p_n at the window's left index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapRecord {
    /// 1-based prime index.
    pub n: usize,
    pub p_n: u64,
    /// Gap immediately after p_n.
    pub d_n: u64,
    pub k: usize,
    pub window_min: u64,
    pub normalized: f64,
}

impl GapRecord {
    // gap parity (d_n even past p=2) holds for true primes only; the record
    // scan is shared with the random model, whose gaps may be odd
    fn invariants_ok(&self) -> bool {
        self.d_n >= 1 && self.normalized > 0.0
    }
}

/// Simple full-array odd sieve, used for root primes and as a small-limit path.
fn simple_odd_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return vec![];
    }
    let mut primes = vec![2u64];
    if limit < 3 {
        return primes;
    }
    // bit i represents the odd number 2i + 3
    let n_bits = ((limit - 3) / 2 + 1) as usize;
    let mut composite = vec![0u64; n_bits.div_ceil(64)];
    let mut i = 0usize;
    while {
        let p = 2 * i as u64 + 3;
        p * p <= limit
    } {
        if composite[i / 64] & (1 << (i % 64)) == 0 {
            let p = 2 * i as u64 + 3;
            let mut j = ((p * p) - 3) / 2;
            while (j as usize) < n_bits {
                composite[j as usize / 64] |= 1 << (j as usize % 64);
                j += p;
            }
        }
        i += 1;
    }
    for b in 0..n_bits {
        if composite[b / 64] & (1 << (b % 64)) == 0 {
            primes.push(2 * b as u64 + 3);
        }
    }
    primes
}

/// Strike one segment of odds [lo, hi] (inclusive, both odd) and collect primes.
fn sieve_segment(root: &[u64], lo: u64, hi: u64) -> Vec<u64> {
    let n_bits = ((hi - lo) / 2 + 1) as usize;
    let mut composite = vec![0u64; n_bits.div_ceil(64)];
    for &p in root.iter().skip(1) {
        // odd root primes only
        if p * p > hi {
            break;
        }
        let mut start = p * p;
        if start < lo {
            let mut m = lo.div_ceil(p) * p;
            if m % 2 == 0 {
                m += p;
            }
            start = m;
        }
        let mut j = ((start - lo) / 2) as usize;
        while j < n_bits {
            composite[j / 64] |= 1 << (j % 64);
            j += p as usize;
        }
    }
    let mut out = Vec::new();
    for b in 0..n_bits {
        if composite[b / 64] & (1 << (b % 64)) == 0 {
            out.push(lo + 2 * b as u64);
        }
    }
    out
}

/// Segmented sieve over [2, limit].
pub fn sieve(limit: u64) -> Result<PrimeTable> {
    sieve_with_segment(limit, DEFAULT_SEGMENT)
}

/// As [`sieve`], with a configurable segment size (odd entries per segment).
pub fn sieve_with_segment(limit: u64, segment: usize) -> Result<PrimeTable> {
    if limit < 2 {
        return domain(format!("sieve limit must be >= 2, got {limit}"));
    }
    let segment = segment.max(1 << 10);
    let root_limit = (limit as f64).sqrt() as u64 + 1;
    let root = simple_odd_sieve(root_limit.min(limit));
    if root_limit >= limit {
        let primes = simple_odd_sieve(limit);
        return Ok(PrimeTable { limit, primes });
    }

    let span = 2 * segment as u64;
    let mut first = root_limit + 1;
    if first % 2 == 0 {
        first += 1;
    }
    let mut ranges = Vec::new();
    let mut lo = first;
    while lo <= limit {
        let hi_raw = (lo + span - 2).min(limit);
        let hi = if hi_raw % 2 == 0 { hi_raw - 1 } else { hi_raw };
        if hi >= lo {
            ranges.push((lo, hi));
        }
        lo += span;
    }

    let chunks: Vec<Vec<u64>> = ranges
        .par_iter()
        .map(|&(lo, hi)| sieve_segment(&root, lo, hi))
        .collect();

    let mut primes: Vec<u64> = root.into_iter().filter(|&p| p <= limit).collect();
    for c in chunks {
        primes.extend(c);
    }
    Ok(PrimeTable { limit, primes })
}

impl PrimeTable {
    /// Build directly from a list of primes (used by the cache loader and tests).
    pub fn from_primes(limit: u64, primes: Vec<u64>) -> Self {
        PrimeTable { limit, primes }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.primes
    }

    /// Count of primes ≤ x.
    pub fn rank(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }

    /// i-th prime, 1-based (select(1) = 2). Inverse of `rank` on primes.
    pub fn select(&self, i: usize) -> Option<u64> {
        if i == 0 {
            return None;
        }
        self.primes.get(i - 1).copied()
    }

    pub fn is_prime(&self, x: u64) -> bool {
        self.primes.binary_search(&x).is_ok()
    }

    /// #{p prime : |p − a| ≤ x}, closed ball, via two rank queries.
    ///
    /// Errors if the window pokes past the sieved limit — counts are never
    /// silently truncated.
    pub fn window_count(&self, a: u64, x: f64) -> Result<u64> {
        if !(x >= 0.0) {
            return domain(format!("window radius must be >= 0, got {x}"));
        }
        if a as f64 + x > self.limit as f64 {
            return out_of_range(format!(
                "window [{} - {x}, {} + {x}] exceeds table limit {}",
                a, a, self.limit
            ));
        }
        // distances |p − a| are integers, so |p − a| ≤ x ⟺ |p − a| ≤ ⌊x⌋;
        // integer bounds avoid the rounding of a + x near representability
        let d = x.floor() as u64;
        let lo_rank = if a <= d + 2 { 0 } else { self.rank(a - d - 1) };
        Ok((self.rank(a + d) - lo_rank) as u64)
    }
}

/// Consecutive prime gaps (n, p_n, d_n), 1-based n; empty when < 2 primes.
pub fn gaps(table: &PrimeTable) -> Vec<(usize, u64, u64)> {
    gaps_of(table.as_slice())
}

fn gaps_of(seq: &[u64]) -> Vec<(usize, u64, u64)> {
    if seq.len() < 2 {
        return vec![];
    }
    seq.windows(2)
        .enumerate()
        .map(|(i, w)| (i + 1, w[0], w[1] - w[0]))
        .collect()
}

/// Running-maximum records of min(d_n,…,d_{n+k−1})/ln²(p_n) over any sorted
/// "prime-like" sequence. This single code path serves both the true primes
/// and the random model.
pub fn gap_records(seq: &[u64], k: usize, start_n: usize) -> Result<Vec<GapRecord>> {
    if k < 1 {
        return domain(format!("window size k must be >= 1, got {k}"));
    }
    let n_gaps = seq.len().saturating_sub(1);
    if n_gaps < k {
        return Ok(vec![]);
    }
    let d: Vec<u64> = seq.windows(2).map(|w| w[1] - w[0]).collect();

    let mut records = Vec::new();
    let mut best = f64::NEG_INFINITY;
    // sliding window minimum over d[n-1 .. n-1+k] (0-based), monotonic deque
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for i in 0..d.len() {
        while let Some(&b) = deque.back() {
            if d[b] >= d[i] {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back(i);
        if i + 1 < k {
            continue;
        }
        let w_start = i + 1 - k; // 0-based gap index of the window start
        while let Some(&f) = deque.front() {
            if f < w_start {
                deque.pop_front();
            } else {
                break;
            }
        }
        let n = w_start + 1; // 1-based prime index
        if n < start_n {
            continue;
        }
        let wmin = d[*deque.front().unwrap()];
        let p = seq[w_start];
        let ln = (p as f64).ln();
        let normalized = wmin as f64 / (ln * ln);
        if normalized > best {
            best = normalized;
            let rec = GapRecord {
                n,
                p_n: p,
                d_n: d[w_start],
                k,
                window_min: wmin,
                normalized,
            };
            debug_assert!(rec.invariants_ok());
            records.push(rec);
        }
    }
    Ok(records)
}

/// Records over the sieved primes; see [`gap_records`].
pub fn rk_records(table: &PrimeTable, k: usize) -> Result<Vec<GapRecord>> {
    gap_records(table.as_slice(), k, DEFAULT_RECORD_START)
}

pub fn rk_records_from(table: &PrimeTable, k: usize, start_n: usize) -> Result<Vec<GapRecord>> {
    gap_records(table.as_slice(), k, start_n)
}

/// Summary of normalized short-interval prime counts.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HoheiselSummary {
    pub theta: f64,
    pub samples: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

/// One sampled window: ratio = #(P∩[a,b]) · ln(a) / (b − a).
#[derive(Debug, Clone, Copy)]
pub struct HoheiselSample {
    pub a: u64,
    pub h: u64,
    pub count: u64,
    pub ratio: f64,
}

/// Sample `samples` windows [a, a+h] with h log-uniform in [a^θ, a] and a
/// log-uniform in [a_min, limit/2]; report the normalized count statistics.
pub fn hoheisel_ratios(
    table: &PrimeTable,
    theta: f64,
    samples: usize,
    seed: u64,
) -> Result<(Vec<HoheiselSample>, HoheiselSummary)> {
    if !(theta > 0.0 && theta < 1.0) {
        return domain(format!("theta must lie in (0,1), got {theta}"));
    }
    if samples < 1 {
        return domain("samples must be >= 1".to_string());
    }
    if table.limit < 1000 {
        return domain("hoheisel sampling needs a table limit >= 1000".to_string());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a_min = 1000f64;
    let a_max = (table.limit / 2) as f64;
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let a = (a_min.ln() + rng.gen::<f64>() * (a_max.ln() - a_min.ln())).exp();
        let a = a as u64;
        let h_lo = (a as f64).powf(theta);
        let h_hi = a as f64;
        let h = (h_lo.ln() + rng.gen::<f64>() * (h_hi.ln() - h_lo.ln())).exp() as u64;
        let h = h.max(2).min(table.limit - a);
        let count = table.rank(a + h) - table.rank(a.saturating_sub(1));
        let ratio = count as f64 * (a as f64).ln() / h as f64;
        out.push(HoheiselSample {
            a,
            h,
            count: count as u64,
            ratio,
        });
    }
    let ratios: Vec<f64> = out.iter().map(|s| s.ratio).collect();
    let summary = HoheiselSummary {
        theta,
        samples,
        min: ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        median: median(&ratios),
        max: ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    };
    Ok((out, summary))
}

/// Fixed-window ratio (no sampling): #(P∩[a,b]) · ln(a)/(b−a).
pub fn window_ratio(table: &PrimeTable, a: u64, b: u64) -> Result<f64> {
    if b <= a || b > table.limit {
        return out_of_range(format!(
            "window [{a},{b}] invalid for limit {}",
            table.limit
        ));
    }
    let count = table.rank(b) - table.rank(a.saturating_sub(1));
    Ok(count as f64 * (a as f64).ln() / (b - a) as f64)
}

const CACHE_MAGIC: &[u8; 4] = b"PCPT";
const CACHE_VERSION: u32 = 1;

/// Write table as a binary cache: magic, version, limit, then the odd-only
/// composite bitset over [3, limit].
pub fn save_cache(table: &PrimeTable, path: &Path) -> Result<()> {
    let limit = table.limit;
    let n_bits = if limit < 3 {
        0
    } else {
        ((limit - 3) / 2 + 1) as usize
    };
    let mut bits = vec![0u64; n_bits.div_ceil(64)];
    // mark composites: start from all-composite, clear primes
    for w in bits.iter_mut() {
        *w = !0u64;
    }
    for &p in table.as_slice() {
        if p >= 3 {
            let i = ((p - 3) / 2) as usize;
            bits[i / 64] &= !(1 << (i % 64));
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(CACHE_MAGIC)?;
    f.write_all(&CACHE_VERSION.to_le_bytes())?;
    f.write_all(&limit.to_le_bytes())?;
    f.write_all(&(n_bits as u64).to_le_bytes())?;
    for w in &bits {
        f.write_all(&w.to_le_bytes())?;
    }
    Ok(())
}

/// Load a table from the binary cache, validating header fields.
pub fn load_cache(path: &Path) -> Result<PrimeTable> {
    let mut f = std::fs::File::open(path)?;
    let mut magic = [0u8; 4];
    f.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::Parse(format!(
            "bad cache magic in {}",
            path.display()
        )));
    }
    let mut b4 = [0u8; 4];
    f.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != CACHE_VERSION {
        return Err(Error::Parse(format!(
            "cache version {version} unsupported (want {CACHE_VERSION})"
        )));
    }
    let mut b8 = [0u8; 8];
    f.read_exact(&mut b8)?;
    let limit = u64::from_le_bytes(b8);
    f.read_exact(&mut b8)?;
    let n_bits = u64::from_le_bytes(b8) as usize;
    let mut bits = vec![0u64; n_bits.div_ceil(64)];
    for w in bits.iter_mut() {
        f.read_exact(&mut b8)?;
        *w = u64::from_le_bytes(b8);
    }
    let mut primes = Vec::new();
    if limit >= 2 {
        primes.push(2);
    }
    for i in 0..n_bits {
        if bits[i / 64] & (1 << (i % 64)) == 0 {
            primes.push(2 * i as u64 + 3);
        }
    }
    Ok(PrimeTable { limit, primes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_tiny() {
        assert_eq!(sieve(10).unwrap().as_slice(), &[2, 3, 5, 7]);
        assert_eq!(sieve(2).unwrap().as_slice(), &[2]);
        assert!(matches!(sieve(1), Err(Error::Domain(_))));
    }

    #[test]
    fn sieve_matches_simple_reference() {
        // independent reference: trial division
        fn is_prime_td(n: u64) -> bool {
            if n < 2 {
                return false;
            }
            let mut d = 2;
            while d * d <= n {
                if n % d == 0 {
                    return false;
                }
                d += 1;
            }
            true
        }
        let t = sieve_with_segment(10_000, 1 << 10).unwrap();
        let reference: Vec<u64> = (2..=10_000).filter(|&n| is_prime_td(n)).collect();
        assert_eq!(t.as_slice(), reference.as_slice());
    }

    #[test]
    fn segment_boundaries_are_seamless() {
        // segment small enough to force many segments
        let a = sieve_with_segment(100_000, 1 << 10).unwrap();
        let b = sieve_with_segment(100_000, 1 << 14).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn rank_select_roundtrip() {
        let t = sieve(10_000).unwrap();
        for i in 1..=t.len() {
            let p = t.select(i).unwrap();
            assert_eq!(t.rank(p), i);
        }
        assert_eq!(t.rank(1), 0);
        assert_eq!(t.rank(10_000), t.len());
    }

    #[test]
    fn gaps_basic() {
        let t = sieve(40).unwrap();
        let g = gaps(&t);
        assert_eq!(g.len(), t.len() - 1);
        assert_eq!(g[0], (1, 2, 1));
        // p_n = 23 -> d_n = 6
        let at23 = g.iter().find(|&&(_, p, _)| p == 23).unwrap();
        assert_eq!(at23.2, 6);
        // reconstruction p_{n+1} = p_n + d_n
        for (i, &(_, p, d)) in g.iter().enumerate() {
            assert_eq!(p + d, t.as_slice()[i + 1]);
        }
        let tiny = PrimeTable::from_primes(2, vec![2]);
        assert!(gaps(&tiny).is_empty());
    }

    #[test]
    fn records_tiny_table() {
        let t = PrimeTable::from_primes(7, vec![2, 3, 5, 7]);
        let r = gap_records(t.as_slice(), 1, 1).unwrap();
        // gaps: (2,1),(3,2),(5,2): records over n=1..3
        assert_eq!(r[0].p_n, 2);
        assert!(gap_records(t.as_slice(), 5, 1).unwrap().is_empty());
        assert!(matches!(
            gap_records(t.as_slice(), 0, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn records_known_values_at_1e6() {
        let t = sieve(1_000_000).unwrap();
        let r1 = rk_records(&t, 1).unwrap();
        let final1 = r1.last().unwrap();
        // oracle-frozen: final k=1 record at limit 1e6 sits at p=370261, d=112
        assert_eq!(final1.p_n, 370_261);
        assert_eq!(final1.window_min, 112);
        assert!((final1.normalized - 0.6812538256835908).abs() < 1e-12);
        // 1327 appears as an intermediate record with the frozen value
        let at1327 = r1.iter().find(|r| r.p_n == 1327).unwrap();
        assert!((at1327.normalized - 0.6575661849320004).abs() < 1e-12);
        assert!((at1327.normalized - 34.0 / (1327f64).ln().powi(2)).abs() < 1e-14);

        // k=2 final <= k=1 final (window min over more gaps can only shrink)
        let r2 = rk_records(&t, 2).unwrap();
        assert!(r2.last().unwrap().normalized <= final1.normalized);

        // prime-specific parity: every recorded gap past p=2 is even
        for r in r1.iter().chain(r2.iter()) {
            assert!(r.p_n == 2 || r.d_n % 2 == 0);
        }
    }

    #[test]
    fn records_monotone_in_limit() {
        let t1 = sieve(100_000).unwrap();
        let t2 = sieve(1_000_000).unwrap();
        let f1 = rk_records(&t1, 1).unwrap().last().unwrap().normalized;
        let f2 = rk_records(&t2, 1).unwrap().last().unwrap().normalized;
        assert!(f2 >= f1);
    }

    #[test]
    fn first_gap_at_least_100() {
        let t = sieve(400_000).unwrap();
        let g = gaps(&t);
        let first = g.iter().find(|&&(_, _, d)| d >= 100).unwrap();
        assert_eq!(first.1, 370_261);
    }

    #[test]
    fn window_count_examples() {
        let t = sieve(2000).unwrap();
        // closed ball |p-100| <= 3 holds {97, 101, 103}
        assert_eq!(t.window_count(100, 3.0).unwrap(), 3);
        assert_eq!(t.window_count(5, 0.0).unwrap(), 1);
        // oracle-frozen: 1319, 1321, 1327 all lie within 16 of 1327
        assert_eq!(t.window_count(1327, 16.0).unwrap(), 3);
        assert!(matches!(
            t.window_count(1999, 5.0),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn window_count_monotone_and_bruteforce() {
        let t = sieve(100_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = rng.gen_range(100u64..50_000);
            let x = rng.gen_range(0.0..1000.0);
            let fast = t.window_count(a, x).unwrap();
            let brute = ((a as f64 - x).ceil().max(2.0) as u64..=(a as f64 + x).floor() as u64)
                .filter(|&m| t.is_prime(m))
                .count() as u64;
            assert_eq!(fast, brute, "a={a} x={x}");
            // monotone in x
            let bigger = t.window_count(a, x + 10.0).unwrap();
            assert!(bigger >= fast);
        }
    }

    #[test]
    fn hoheisel_fixed_window() {
        let t = sieve(10_000).unwrap();
        let r = window_ratio(&t, 100, 200).unwrap();
        assert!((r - 21.0 * (100f64).ln() / 100.0).abs() < 1e-12);
        // [a, 2a] near PNT ratio 1
        let t2 = sieve(300_000).unwrap();
        let r2 = window_ratio(&t2, 100_000, 200_000).unwrap();
        assert!((r2 - 1.0).abs() < 0.1, "PNT ratio {r2}");
    }

    #[test]
    fn hoheisel_sampling_band() {
        let t = sieve(1_000_000).unwrap();
        let (samples, summary) = hoheisel_ratios(&t, 21.0 / 40.0, 200, 7).unwrap();
        assert_eq!(samples.len(), 200);
        assert!(summary.min > 0.3, "min {}", summary.min);
        assert!(summary.max < 3.0, "max {}", summary.max);
        assert!(matches!(
            hoheisel_ratios(&t, 1.5, 10, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("primes.bin");
        let t = sieve(50_000).unwrap();
        save_cache(&t, &path).unwrap();
        let loaded = load_cache(&path).unwrap();
        assert_eq!(loaded.limit(), t.limit());
        assert_eq!(loaded.as_slice(), t.as_slice());
    }
}
