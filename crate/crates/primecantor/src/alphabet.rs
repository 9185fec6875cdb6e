//! Truncated alphabets E ∩ [1, N] with their density laws.

use crate::error::{domain, Result};
use crate::primes::{sieve, PrimeTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum AlphabetKind {
    Primes,
    AllIntegers,
    Explicit,
}

/// E ∩ [1, N] together with the counting law f from the asymptotic
/// #(E∩[N,2N]) ≍ f(N) and its regular-variation exponent.
#[derive(Debug, Clone)]
pub struct TruncatedAlphabet {
    kind: AlphabetKind,
    cutoff: u64,
    letters: Vec<u64>,
}

impl TruncatedAlphabet {
    /// Prime letters up to `cutoff`, sieved internally.
    pub fn primes(cutoff: u64) -> Result<Self> {
        let table = sieve(cutoff)?;
        Ok(Self::primes_from_table(cutoff, &table))
    }

    /// Prime letters up to `cutoff` from an existing table (must cover it).
    pub fn primes_from_table(cutoff: u64, table: &PrimeTable) -> Self {
        let letters: Vec<u64> = table
            .as_slice()
            .iter()
            .copied()
            .take_while(|&p| p <= cutoff)
            .collect();
        TruncatedAlphabet {
            kind: AlphabetKind::Primes,
            cutoff,
            letters,
        }
    }

    pub fn all_integers(cutoff: u64) -> Result<Self> {
        if cutoff < 1 {
            return domain("cutoff must be >= 1");
        }
        Ok(TruncatedAlphabet {
            kind: AlphabetKind::AllIntegers,
            cutoff,
            letters: (1..=cutoff).collect(),
        })
    }

    pub fn explicit(letters: &[u64]) -> Result<Self> {
        if letters.is_empty() {
            return domain("explicit alphabet must not be empty");
        }
        let mut v = letters.to_vec();
        v.sort_unstable();
        v.dedup();
        if v[0] < 1 {
            return domain("letters must be >= 1");
        }
        Ok(TruncatedAlphabet {
            kind: AlphabetKind::Explicit,
            cutoff: *v.last().unwrap(),
            letters: v,
        })
    }

    /// Parse a CLI spec: "primes" | "all" | "set:2,3,5" (cutoff applies to the
    /// first two).
    pub fn parse(spec: &str, cutoff: u64) -> Result<Self> {
        match spec {
            "primes" => Self::primes(cutoff),
            "all" => Self::all_integers(cutoff),
            s if s.starts_with("set:") => {
                let letters: Vec<u64> = s[4..]
                    .split(',')
                    .map(|t| {
                        t.trim().parse::<u64>().map_err(|e| {
                            crate::error::Error::Parse(format!("bad letter {t:?}: {e}"))
                        })
                    })
                    .collect::<Result<_>>()?;
                Self::explicit(&letters)
            }
            other => domain(format!(
                "unknown alphabet {other:?} (expected primes | all | set:a,b,...)"
            )),
        }
    }

    pub fn kind(&self) -> AlphabetKind {
        self.kind
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
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

    pub fn min_letter(&self) -> u64 {
        self.letters[0]
    }

    pub fn max_letter(&self) -> u64 {
        *self.letters.last().unwrap()
    }

    pub fn contains(&self, a: u64) -> bool {
        self.letters.binary_search(&a).is_ok()
    }

    /// #(E ∩ [lo, hi]) by binary search.
    pub fn count_in(&self, lo: u64, hi: u64) -> usize {
        if hi < lo {
            return 0;
        }
        self.letters.partition_point(|&a| a <= hi) - self.letters.partition_point(|&a| a < lo)
    }

    /// The density law f(N): N/ln N for primes, N for all integers.
    /// Explicit sets carry no asymptotic law.
    pub fn density(&self, n: f64) -> Option<f64> {
        match self.kind {
            AlphabetKind::Primes => Some(n / n.ln()),
            AlphabetKind::AllIntegers => Some(n),
            AlphabetKind::Explicit => None,
        }
    }

    /// Regular-variation exponent of f.
    pub fn rv_exponent(&self) -> Option<f64> {
        match self.kind {
            AlphabetKind::Primes | AlphabetKind::AllIntegers => Some(1.0),
            AlphabetKind::Explicit => None,
        }
    }

    /// F(r) = r^δ f(r^{-1}); for primes F(1/a) = a^{1−δ}/ln a.
    pub fn big_f(&self, r: f64, delta: f64) -> Option<f64> {
        self.density(1.0 / r).map(|f| r.powf(delta) * f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_alphabet_agrees_with_table() {
        let ab = TruncatedAlphabet::primes(100).unwrap();
        assert_eq!(ab.letters().len(), 25);
        assert!(ab.contains(97));
        assert!(!ab.contains(91));
        assert_eq!(ab.min_letter(), 2);
    }

    #[test]
    fn parse_specs() {
        assert_eq!(
            TruncatedAlphabet::parse("set:5,3,2,3", 0)
                .unwrap()
                .letters(),
            &[2, 3, 5]
        );
        assert_eq!(TruncatedAlphabet::parse("all", 10).unwrap().len(), 10);
        assert!(TruncatedAlphabet::parse("junk", 10).is_err());
    }

    #[test]
    fn density_laws() {
        let p = TruncatedAlphabet::primes(1000).unwrap();
        let f = p.density(1000.0).unwrap();
        assert!((f - 1000.0 / 1000f64.ln()).abs() < 1e-12);
        assert_eq!(p.rv_exponent(), Some(1.0));
        let e = TruncatedAlphabet::explicit(&[2, 3]).unwrap();
        assert!(e.density(10.0).is_none());
    }

    #[test]
    fn count_in_window() {
        let p = TruncatedAlphabet::primes(100).unwrap();
        assert_eq!(p.count_in(10, 20), 4); // 11 13 17 19
        assert_eq!(p.count_in(21, 21), 0);
    }
}
