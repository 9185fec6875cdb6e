//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `--nocapture` to see the values). Expected values tagged as
//! oracle-derived were computed with independent reference implementations
//! before the build and frozen here.

use num::rational::BigRational;
use num::{BigInt, One, Zero};
use primecantor::alphabet::TruncatedAlphabet;
use primecantor::cramer;
use primecantor::diagnostics::{verdict, Verdict, VerdictPolicy};
use primecantor::dimension::{conformal_dimension, partition_sum, DeltaReport};
use primecantor::gauss::Word;
use primecantor::measure::{GmfCase, MeasureModel};
use primecantor::primes::{self, PrimeTable};
use primecantor::psi::{DimensionFunction, Family};
use primecantor::series;
use primecantor::util::{median, LogSumExp};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::OnceLock;

fn table_1e8() -> &'static PrimeTable {
    static T: OnceLock<PrimeTable> = OnceLock::new();
    T.get_or_init(|| primes::sieve(100_000_000).expect("sieve to 1e8"))
}

fn table_bc() -> &'static PrimeTable {
    static T: OnceLock<PrimeTable> = OnceLock::new();
    // p_1e6 = 15485863; headroom for the window queries
    T.get_or_init(|| primes::sieve(16_200_000).expect("sieve for the BC series"))
}

fn delta_1e5() -> &'static DeltaReport {
    static D: OnceLock<DeltaReport> = OnceLock::new();
    D.get_or_init(|| {
        let alphabet = TruncatedAlphabet::primes(100_000).expect("prime alphabet");
        conformal_dimension(&alphabet, 1e-4).expect("delta at trunc 1e5")
    })
}

fn model_1e5() -> &'static MeasureModel {
    static M: OnceLock<MeasureModel> = OnceLock::new();
    M.get_or_init(|| {
        let alphabet = TruncatedAlphabet::primes(100_000).expect("prime alphabet");
        MeasureModel::new(alphabet, delta_1e5().delta).expect("measure model")
    })
}

/// Criterion 1: δ reproduction at trunc 1e5, tol 1e-4, asserted against the
/// stated band [0.654, 0.660].
///
/// This criterion is expected to FAIL: the implementation is validated to
/// nine digits on the classic two-letter benchmark (0.531280506) and against
/// exact enumeration, and already the 168-letter truncation at N = 1e3 has
/// δ = 0.667 — monotonically below the N = 1e5 value 0.6741. The stated band
/// encodes a transposed-digit citation (≈ 0.657 for ≈ 0.675); see the
/// decisions ledger for the full blocking analysis.
#[test]
fn criterion_01_delta_reproduction() {
    let t = std::time::Instant::now();
    let rep = delta_1e5();
    assert!(
        t.elapsed().as_secs_f64() < 300.0,
        "runtime exceeded the 5-minute budget"
    );
    println!(
        "criterion 01: delta(primes, 1e5, tol 1e-4) = {:.6} bracket [{:.6}, {:.6}] — band [0.654, 0.660] {}",
        rep.delta,
        rep.bracket.0,
        rep.bracket.1,
        if (0.654..=0.660).contains(&rep.delta) { "PASS" } else { "FAIL (expected; see ledger)" }
    );
    assert!(
        (0.654..=0.660).contains(&rep.delta),
        "computed delta = {:.6} (bracket [{:.6}, {:.6}]) lies outside the stated band [0.654, 0.660]. \
         The solver reproduces dim(continued fractions over {{1,2}}) = 0.531280506 to 9 digits and \
         matches exact enumeration to 1e-12, and δ(N) increases in N with δ(1e3) = 0.667 already \
         above the band: the band's source constant ≈ 0.657 is a digit transposition of ≈ 0.675. \
         Honest red; blocking analysis recorded in the decisions ledger.",
        rep.delta,
        rep.bracket.0,
        rep.bracket.1
    );
}

/// Criterion 2: exact-arithmetic suite on 1e4 random words up to length 30 —
/// determinant identity, distortion ratio in (1/2, 1], quasi-multiplicativity
/// factor in [1/4, 1]; zero tolerance.
#[test]
fn criterion_02_exact_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let one = BigRational::one();
    // letters ≥ 2, the Gauss-alphabet domain here; the lone boundary word (1)
    // has distortion ratio exactly 1/2 and is pinned separately below
    for _ in 0..10_000 {
        let len = rng.gen_range(1..=30);
        let letters: Vec<u64> = (0..len).map(|_| rng.gen_range(2..=1000)).collect();
        let w = Word::from_letters(&letters).unwrap();
        // determinant identity, exact
        let sign = w.determinant();
        assert_eq!(sign, if len % 2 == 0 { 1 } else { -1 });
        // distortion ratio q/(q+q_prev) ∈ (1/2, 1]
        let ratio = BigRational::new(w.q().clone(), w.q() + w.q_prev());
        assert!(ratio > half && ratio <= one);
        // quasi-multiplicativity at a random split
        if len >= 2 {
            let cut = rng.gen_range(1..len);
            let head = Word::from_letters(&letters[..cut]).unwrap();
            let tail = Word::from_letters(&letters[cut..]).unwrap();
            let prod = head.q() * tail.q();
            assert!(*w.q() >= prod && *w.q() <= BigInt::from(2) * &prod);
        }
    }
    let unit = Word::from_letters(&[1]).unwrap();
    assert_eq!(
        BigRational::new(unit.q().clone(), unit.q() + unit.q_prev()),
        half
    );
    println!("criterion 02: 10000 words, zero violations PASS");
}

/// Independent oracle: Z_n by exhaustive word enumeration with exact
/// continuants.
fn brute_ln_zn(letters: &[u64], n: usize, s: f64) -> f64 {
    fn rec(letters: &[u64], depth: usize, q_prev: u128, q: u128, s: f64, acc: &mut LogSumExp) {
        if depth == 0 {
            acc.add_ln(-2.0 * s * (q as f64).ln());
            return;
        }
        for &a in letters {
            rec(letters, depth - 1, q, a as u128 * q + q_prev, s, acc);
        }
    }
    let mut acc = LogSumExp::new();
    rec(letters, n, 0, 1, s, &mut acc);
    acc.ln_value()
}

/// Criterion 3: transfer-operator Z_n vs brute force (≤ 4 letters, n ≤ 8,
/// rel. 1e-12) and cylinder endpoints vs direct rational composition on 1e3
/// random words, exactly.
#[test]
fn criterion_03_oracle_equivalence() {
    let mut worst: f64 = 0.0;
    for letters in [vec![2u64, 3], vec![2, 3, 5, 7], vec![1, 2, 3, 4]] {
        let ab = TruncatedAlphabet::explicit(&letters).unwrap();
        for s in [0.6, 0.674, 1.0] {
            for n in [1usize, 2, 4, 8] {
                let fast = partition_sum(&ab, n, s).unwrap();
                let brute = brute_ln_zn(&letters, n, s);
                let rel = (fast - brute).abs() / brute.abs().max(1e-30);
                worst = worst.max(rel);
                assert!(
                    rel < 1e-12,
                    "letters {letters:?} s {s} n {n}: rel {rel:.2e}"
                );
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    let pool = [1u64, 2, 3, 5, 7, 11, 13, 97, 997];
    for _ in 0..1000 {
        let len = rng.gen_range(1..=12);
        let letters: Vec<u64> = (0..len)
            .map(|_| pool[rng.gen_range(0..pool.len())])
            .collect();
        let w = Word::from_letters(&letters).unwrap();
        // oracle: compose x ↦ 1/(a+x) right-to-left on exact rationals
        let mut e0 = BigRational::zero();
        let mut e1 = BigRational::one();
        for &a in letters.iter().rev() {
            let af = BigRational::from(BigInt::from(a));
            e0 = BigRational::one() / (&af + e0);
            e1 = BigRational::one() / (&af + e1);
        }
        let (lo, hi) = if e0 <= e1 { (e0, e1) } else { (e1, e0) };
        let cyl = w.cylinder().unwrap();
        assert_eq!(cyl.lo, lo);
        assert_eq!(cyl.hi, hi);
        assert_eq!(cyl.diameter, hi - lo);
    }
    println!(
        "criterion 03: worst Z_n relative error {worst:.2e}; 1000 exact cylinder matches PASS"
    );
}

/// Criterion 4: HD-series verdicts flip across s* = (1−δ)/(2δ−1) at the
/// computed δ, identically for λ = 2 and λ = 10.
#[test]
fn criterion_04_hd_threshold() {
    let delta = delta_1e5().delta;
    let s_star = (1.0 - delta) / (2.0 * delta - 1.0);
    let policy = VerdictPolicy::default();
    for lambda in [2.0, 10.0] {
        for (factor, expect) in [(0.9, Verdict::Diverges), (1.1, Verdict::Converges)] {
            let spec =
                DimensionFunction::new(Family::LogPower { s: factor * s_star }, delta).unwrap();
            let stream = series::hd_series_terms(&spec, lambda, delta, 100_000).unwrap();
            let d = verdict(&stream, policy).unwrap();
            assert_eq!(
                d.verdict, expect,
                "lambda={lambda} s={}·s*: {}",
                factor, d.verdict_basis
            );
        }
    }
    println!(
        "criterion 04: verdicts flip at s* = {s_star:.4} (computed δ = {delta:.4}), λ-invariant PASS"
    );
}

/// Criterion 5: k = 1 gap records at limit 1e8. The criterion's stated final
/// value sits at p = 1327 (≈ 0.6576); the sieve oracle (run before the build)
/// shows that is the 5th record, with the true final at p = 20831323
/// (0.7394656868654549). Both oracle facts are asserted; the criterion's
/// arithmetic 34/ln²(1327) is verified exactly as stated.
#[test]
fn criterion_05_gap_records() {
    let t = std::time::Instant::now();
    let table = table_1e8();
    let records = primes::rk_records(table, 1).unwrap();
    let at_1327 = records
        .iter()
        .find(|r| r.p_n == 1327)
        .expect("1327 must appear as a running-max record");
    assert_eq!(at_1327.window_min, 34);
    assert!((at_1327.normalized - 0.6575661849320004).abs() < 1e-12);
    assert!((at_1327.normalized - 34.0 / (1327f64).ln().powi(2)).abs() < 1e-14);

    let last = records.last().unwrap();
    assert_eq!(last.p_n, 20_831_323, "oracle-frozen final record location");
    assert_eq!(last.window_min, 210);
    assert!((last.normalized - 0.7394656868654549).abs() < 1e-12);
    let secs = t.elapsed().as_secs_f64();
    assert!(
        secs < 120.0,
        "runtime {secs:.1}s exceeds the 2-minute budget"
    );
    println!(
        "criterion 05: record at 1327 = {:.6}; final = {:.6} at 20831323; {:.1}s PASS",
        at_1327.normalized, last.normalized, secs
    );
}

/// Criterion 6: Borel–Cantelli verdicts flip between C = 0.8/k and 1.25/k
/// for k ∈ {1, 2} at 1e6 terms.
#[test]
fn criterion_06_borel_cantelli_flip() {
    let table = table_bc();
    for k in [1u32, 2] {
        let below = series::borel_cantelli_series(table, k, 0.8 / k as f64, 1_000_000).unwrap();
        let above = series::borel_cantelli_series(table, k, 1.25 / k as f64, 1_000_000).unwrap();
        assert_eq!(
            below.verdict,
            Verdict::Diverges,
            "k={k}: {}",
            below.verdict_basis
        );
        assert_eq!(
            above.verdict,
            Verdict::Converges,
            "k={k}: {}",
            above.verdict_basis
        );
    }
    println!("criterion 06: verdicts flip across C = 1/k for k in {{1,2}} PASS");
}

/// Criterion 7: random model at limit 1e7 over 20 seeds — median final R₁
/// record in [0.5, 1.5] and median R₂ strictly below median R₁.
#[test]
fn criterion_07_random_model() {
    let finals = |k: usize| -> Vec<f64> {
        (0..20u64)
            .into_par_iter()
            .map(|seed| {
                let set = cramer::simulate(10_000_000, seed).unwrap();
                cramer::rk_on_model(&set, k)
                    .unwrap()
                    .last()
                    .expect("records exist at 1e7")
                    .normalized
            })
            .collect()
    };
    let r1 = median(&finals(1));
    let r2 = median(&finals(2));
    assert!((0.5..=1.5).contains(&r1), "median R1 record {r1}");
    assert!(r2 < r1, "median R2 {r2} !< median R1 {r1}");
    println!("criterion 07: median R1 = {r1:.4}, median R2 = {r2:.4} PASS");
}

/// Frozen empirical containment constant for the measure-formula sandwich:
/// measured max over the sample below was 0.97 (the child-inside branch
/// approaches 1 from below by construction); frozen with margin.
const GMF_FROZEN_C: f64 = 1.25;

/// Criterion 8: measure-formula sandwich on 100 sampled (x, r): the one-level
/// sum never exceeds the ball's upper band, and the (n+1)-cylinder sits inside
/// B(x, C·r) for the frozen C. Zero violations. Both recipe branches are also
/// pinned by targeted instances.
#[test]
fn criterion_08_gmf_sandwich() {
    let model = model_1e5();
    let small = [2u64, 3, 5, 7, 11, 13];
    let mut rng = ChaCha8Rng::seed_from_u64(20250811);
    let mut max_c = 0.0f64;
    let mut cases = (0usize, 0usize);
    for i in 0..100 {
        let len = rng.gen_range(1..=4);
        let prefix: Vec<u64> = (0..len)
            .map(|_| small[rng.gen_range(0..small.len())])
            .collect();
        let r = if i % 2 == 0 {
            (1e-7f64.ln() + rng.gen::<f64>() * (1e-2f64.ln() - 1e-7f64.ln())).exp()
        } else {
            let w = Word::from_letters(&prefix).unwrap();
            let d = primecantor::util::rational_to_f64(&w.cylinder().unwrap().diameter);
            d * rng.gen_range(0.02..2.0)
        };
        let g = model.global_measure_formula(&prefix, r).unwrap();
        assert!(
            g.m_sum.value <= g.ball.upper * (1.0 + 1e-9),
            "sandwich violated at {prefix:?}, r = {r:.3e}: M = {} vs ball upper {}",
            g.m_sum.value,
            g.ball.upper
        );
        assert!(
            g.containment_c <= GMF_FROZEN_C,
            "containment C = {} exceeds the frozen {GMF_FROZEN_C} at {prefix:?}, r = {r:.3e}",
            g.containment_c
        );
        max_c = max_c.max(g.containment_c);
        match g.case {
            GmfCase::ChildInside => cases.0 += 1,
            GmfCase::EndpointSplit => cases.1 += 1,
        }
    }
    // targeted instances exercising both recipe branches (radii bracket the
    // sibling-exit window of the prefix-3 cylinder)
    let split = model.global_measure_formula(&[3], 0.04).unwrap();
    assert_eq!(split.case, GmfCase::EndpointSplit);
    assert!(split.m_sum.value <= split.ball.upper * (1.0 + 1e-9));
    assert!(split.containment_c <= GMF_FROZEN_C);
    let inside = model.global_measure_formula(&[3], 0.02).unwrap();
    assert_eq!(inside.case, GmfCase::ChildInside);
    println!(
        "criterion 08: 100 samples + branch probes, zero violations, max C = {max_c:.4} (frozen {GMF_FROZEN_C}), cases {cases:?} PASS"
    );
}

/// Criterion 9: tail and annulus asymptotic ratios stay within a factor 10
/// across r ∈ [1e-4, 1e-1].
#[test]
fn criterion_09_asymptotic_bands() {
    let model = model_1e5();
    let radii: Vec<f64> = (0..13)
        .map(|i| 10f64.powf(-1.0 - 3.0 * i as f64 / 12.0))
        .collect();
    let mut tail_band: (f64, f64) = (f64::INFINITY, 0.0);
    let mut ann_band: (f64, f64) = (f64::INFINITY, 0.0);
    for &r in &radii {
        let t = model.tail_measure(r).unwrap();
        let ratio = t.ratio.unwrap();
        tail_band = (tail_band.0.min(ratio), tail_band.1.max(ratio));
        // λ = 4: the letter annulus [√(1/r), √(λ/r)) spans a factor 2, so it
        // always holds a prime (the assumption only asks for SOME λ > 1; at
        // λ = 2 the grid's r = 0.1 annulus contains just {4})
        let a = model.annulus_ratio(r, 4.0).unwrap();
        assert!(!a.empty, "annulus empty at r = {r}");
        ann_band = (ann_band.0.min(a.ratio), ann_band.1.max(a.ratio));
    }
    assert!(
        tail_band.1 / tail_band.0 < 10.0,
        "tail ratio band {tail_band:?}"
    );
    assert!(ann_band.1 / ann_band.0 < 10.0, "annulus band {ann_band:?}");
    println!(
        "criterion 09: tail ratio in [{:.4}, {:.4}], annulus ratio in [{:.4}, {:.4}] PASS",
        tail_band.0, tail_band.1, ann_band.0, ann_band.1
    );
}

/// Dense-grid oracle for the packing inner maximization: a log grid plus
/// points hugging every count jump.
fn dense_grid_inner_max(
    spec: &DimensionFunction,
    alpha: f64,
    delta: f64,
    table: &PrimeTable,
    a: u64,
) -> f64 {
    let x_end = a as f64 / 3.0;
    let mut grid: Vec<f64> = (0..=2000)
        .map(|i| (x_end.ln() * i as f64 / 2000.0).exp())
        .collect();
    let lo = a - (a / 3);
    let hi = a + (a / 3);
    let slice = table.as_slice();
    let i0 = slice.partition_point(|&p| p < lo);
    let i1 = slice.partition_point(|&p| p <= hi);
    for &p in &slice[i0..i1] {
        if p == a {
            continue;
        }
        let d = (if p > a { p - a } else { a - p }) as f64;
        for x in [d * (1.0 - 1e-13), d, d * (1.0 + 1e-13)] {
            if (1.0..=x_end).contains(&x) {
                grid.push(x);
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    for x in grid {
        if !(1.0..=x_end).contains(&x) {
            continue;
        }
        let count = table.window_count(a, x).unwrap();
        if count == 0 {
            continue;
        }
        let ln_v = -alpha.ln() - delta * x.ln() + (count as f64).ln();
        if let Ok(w) = spec.ln_inv_big_psi_from_ln(ln_v) {
            best = best.max(w);
        }
    }
    best
}

/// Criterion 10: candidate-set inner maximization equals the dense-grid brute
/// force on 1e3 instances to 1e-10 relative.
#[test]
fn criterion_10_inner_max() {
    let table = table_bc();
    let delta = 0.6741;
    let specs = [
        DimensionFunction::new(Family::LogLogPower { s: -2.0 * delta }, delta).unwrap(),
        DimensionFunction::new(Family::LogPower { s: -1.5 }, delta).unwrap(),
        DimensionFunction::new(Family::LogPower { s: -2.5 }, delta).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1_000_003);
    let primes_pool: Vec<u64> = table
        .as_slice()
        .iter()
        .copied()
        .filter(|&p| (1_000..=100_000).contains(&p))
        .collect();
    let instances: Vec<(u64, f64, usize)> = (0..1000)
        .map(|i| {
            (
                primes_pool[rng.gen_range(0..primes_pool.len())],
                [0.1, 1.0, 10.0][i % 3],
                i % specs.len(),
            )
        })
        .collect();
    let worst = instances
        .par_iter()
        .map(|&(a, alpha, si)| {
            let spec = &specs[si];
            let fast = series::packing_inner_max(spec, alpha, delta, table, a)
                .unwrap()
                .expect("constraint set nonempty for a >= 1000");
            let brute = dense_grid_inner_max(spec, alpha, delta, table, a);
            let rel = (fast.value - brute).abs() / brute.abs().max(1e-300);
            assert!(
                rel < 1e-10,
                "a={a} alpha={alpha} spec {}: {} vs {brute} (rel {rel:.2e})",
                spec.label(),
                fast.value
            );
            rel
        })
        .reduce(|| 0.0, f64::max);
    println!("criterion 10: 1000 instances, worst relative deviation {worst:.2e} PASS");
}
