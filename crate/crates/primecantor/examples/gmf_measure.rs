//! Samples the measure-formula sandwich over random points and radii and
//! reports the empirical containment constant — the measurement behind the
//! frozen constant in the acceptance suite.
use primecantor::alphabet::TruncatedAlphabet;
use primecantor::dimension::conformal_dimension;
use primecantor::measure::{GmfCase, MeasureModel};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let alphabet = TruncatedAlphabet::primes(100_000).unwrap();
    let delta = conformal_dimension(&alphabet, 1e-4).unwrap().delta;
    let model = MeasureModel::new(alphabet, delta).unwrap();
    let small = [2u64, 3, 5, 7, 11, 13];
    let mut rng = ChaCha8Rng::seed_from_u64(20250811);
    let mut max_c = 0.0f64;
    let mut max_ratio = 0.0f64;
    let (mut n_inside, mut n_split) = (0, 0);
    let mut violations = 0;
    for i in 0..100 {
        let len = rng.gen_range(1..=4);
        let prefix: Vec<u64> = (0..len)
            .map(|_| small[rng.gen_range(0..small.len())])
            .collect();
        // half the samples: radius comparable to the prefix cylinder's diameter
        let r = if i % 2 == 0 {
            (1e-7f64.ln() + rng.gen::<f64>() * (1e-2f64.ln() - 1e-7f64.ln())).exp()
        } else {
            let w = primecantor::gauss::Word::from_letters(&prefix).unwrap();
            let d = primecantor::util::rational_to_f64(&w.cylinder().unwrap().diameter);
            d * rng.gen_range(0.02..2.0)
        };
        let g = model.global_measure_formula(&prefix, r).unwrap();
        match g.case {
            GmfCase::ChildInside => n_inside += 1,
            GmfCase::EndpointSplit => n_split += 1,
        }
        if !g.sandwich_lower_ok {
            violations += 1;
            println!("VIOLATION at {i} {prefix:?} r={r:.3e}");
        }
        if g.containment_c > max_c {
            max_c = g.containment_c;
        }
        max_ratio = max_ratio.max(g.m_sum.value / g.ball.upper);
    }
    println!("cases: child-inside {n_inside}, endpoint-split {n_split}");
    println!("max containment C = {max_c:.6}");
    println!("max M/ball_upper  = {max_ratio:.6}");
    println!("sandwich violations = {violations}");
}
