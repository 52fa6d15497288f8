//! Classical number theory: the strong witness predicate that defines every
//! quantum oracle in this crate, and brute-force counters used as ground truth.
//!
//! Integers are machine words; everything here is sized for arguments up to
//! about `2^20`, far beyond anything a dense state vector can hold.

use serde::Serialize;

use crate::error::{QntError, Result};

/// `n = 2^h * l` with `l` odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OddDecomposition {
    pub h: u32,
    pub l: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WitnessVerdict {
    /// `a` certifies that `k` is composite.
    Witness,
    NonWitness,
}

impl WitnessVerdict {
    pub fn is_witness(self) -> bool {
        self == WitnessVerdict::Witness
    }
}

pub fn decompose_odd(n: u64) -> Result<OddDecomposition> {
    if n == 0 {
        return Err(QntError::invalid("cannot factor powers of two out of 0"));
    }
    let h = n.trailing_zeros();
    Ok(OddDecomposition { h, l: n >> h })
}

/// `a^e mod m` by square-and-multiply.
pub fn mod_pow(a: u64, mut e: u64, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(QntError::invalid(format!(
            "modulus must be at least 2, got {m}"
        )));
    }
    let m128 = m as u128;
    let mut base = (a % m) as u128;
    let mut acc: u128 = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m128;
        }
        base = base * base % m128;
        e >>= 1;
    }
    Ok(acc as u64)
}

/// Strong (Miller-Rabin) witness test of base `a` against `k`.
///
/// With `k - 1 = 2^h l`, `a` is a non-witness iff `a^l = 1 (mod k)` or
/// `a^(l 2^i) = -1 (mod k)` for some `0 <= i < h`.
pub fn witness(k: u64, a: u64) -> Result<WitnessVerdict> {
    if k < 2 {
        return Err(QntError::invalid(format!("k must be at least 2, got {k}")));
    }
    if a == 0 || a >= k {
        return Err(QntError::invalid(format!(
            "base must satisfy 1 <= a < k, got a={a}, k={k}"
        )));
    }
    Ok(if strong_witness(k, a) {
        WitnessVerdict::Witness
    } else {
        WitnessVerdict::NonWitness
    })
}

/// Unchecked core of [`witness`]; callers guarantee `k >= 2`, `1 <= a < k`.
fn strong_witness(k: u64, a: u64) -> bool {
    let OddDecomposition { h, l } = decompose_odd(k - 1).expect("k >= 2");
    let mut x = mod_pow(a, l, k).expect("k >= 2");
    if x == 1 {
        return false;
    }
    for _ in 0..h {
        if x == k - 1 {
            return false;
        }
        x = (x as u128 * x as u128 % k as u128) as u64;
    }
    true
}

/// Witness predicate extended to the whole register domain `0 <= a < k`
/// used by the quantum oracles: `a = 0`, and any `k < 2`, have no witnesses.
pub fn is_witness_extended(k: u64, a: u64) -> bool {
    k >= 2 && a >= 1 && a < k && strong_witness(k, a)
}

/// Number of witnesses `1 <= a < k`.
pub fn count_witnesses(k: u64) -> Result<u64> {
    if k < 2 {
        return Err(QntError::invalid(format!("k must be at least 2, got {k}")));
    }
    Ok((1..k).filter(|&a| strong_witness(k, a)).count() as u64)
}

/// Strong liars: the non-witness bases `1 <= a < k`.
pub fn liars(k: u64) -> Result<Vec<u64>> {
    if k < 2 {
        return Err(QntError::invalid(format!("k must be at least 2, got {k}")));
    }
    Ok((1..k).filter(|&a| !strong_witness(k, a)).collect())
}

/// Sieve of Eratosthenes over `[0, n)`.
#[derive(Debug, Clone)]
pub struct Sieve {
    composite: Vec<bool>,
}

impl Sieve {
    pub fn new(n: usize) -> Self {
        let mut composite = vec![false; n];
        for slot in composite.iter_mut().take(2) {
            *slot = true;
        }
        let mut p = 2;
        while p * p < n {
            if !composite[p] {
                for m in (p * p..n).step_by(p) {
                    composite[m] = true;
                }
            }
            p += 1;
        }
        Sieve { composite }
    }

    pub fn limit(&self) -> usize {
        self.composite.len()
    }

    /// Panics if `k` is outside the sieved range.
    pub fn is_prime(&self, k: usize) -> bool {
        !self.composite[k]
    }

    pub fn primes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.limit()).filter(|&k| self.is_prime(k))
    }
}

/// Number of primes below `n`, together with the primes themselves.
pub fn sieve_pi(n: u64) -> Result<(u64, Vec<u64>)> {
    if n < 2 {
        return Err(QntError::invalid(format!("N must be at least 2, got {n}")));
    }
    let primes: Vec<u64> = Sieve::new(n as usize).primes().map(|p| p as u64).collect();
    Ok((primes.len() as u64, primes))
}

/// Ordered count of `0 <= k < 2N` with `k` and `2N - k` both prime.
pub fn r2_pairs(two_n: u64) -> Result<u64> {
    Ok(good_pairs(two_n)?.len() as u64)
}

/// The `k` counted by [`r2_pairs`].
pub fn good_pairs(two_n: u64) -> Result<Vec<u64>> {
    if two_n < 4 || !two_n.is_multiple_of(2) {
        return Err(QntError::invalid(format!(
            "2N must be even and at least 4, got {two_n}"
        )));
    }
    let sieve = Sieve::new(two_n as usize + 1);
    Ok((0..two_n)
        .filter(|&k| sieve.is_prime(k as usize) && sieve.is_prime((two_n - k) as usize))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division(n: u64) -> bool {
        n >= 2
            && (2..n)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(decompose_odd(12).unwrap(), OddDecomposition { h: 2, l: 3 });
        assert_eq!(decompose_odd(7).unwrap(), OddDecomposition { h: 0, l: 7 });
        assert_eq!(decompose_odd(1).unwrap(), OddDecomposition { h: 0, l: 1 });
        assert!(decompose_odd(0).is_err());
    }

    #[test]
    fn decompose_round_trips() {
        for n in 1..=1_000_000u64 {
            let d = decompose_odd(n).unwrap();
            assert_eq!(d.l % 2, 1);
            assert_eq!(d.l << d.h, n);
            assert_eq!(d.h == 0, n % 2 == 1);
        }
    }

    #[test]
    fn mod_pow_examples() {
        assert_eq!(mod_pow(5, 0, 7).unwrap(), 1);
        assert_eq!(mod_pow(0, 5, 7).unwrap(), 0);
        assert_eq!(mod_pow(2, 14, 15).unwrap(), 4);
        assert!(mod_pow(1, 1, 1).is_err());
        assert!(mod_pow(1, 1, 0).is_err());
    }

    #[test]
    fn mod_pow_matches_repeated_multiplication() {
        for m in 2..=64u64 {
            for a in 0..m {
                let mut naive = 1 % m;
                for e in 0..=64u64 {
                    assert_eq!(mod_pow(a, e, m).unwrap(), naive, "a={a} e={e} m={m}");
                    naive = naive * a % m;
                }
            }
        }
    }

    #[test]
    fn witness_examples() {
        assert_eq!(witness(15, 4).unwrap(), WitnessVerdict::Witness);
        assert_eq!(witness(15, 14).unwrap(), WitnessVerdict::NonWitness);
        for a in 1..7 {
            assert_eq!(witness(7, a).unwrap(), WitnessVerdict::NonWitness);
        }
        assert_eq!(witness(561, 2).unwrap(), WitnessVerdict::Witness);
        assert!(witness(15, 0).is_err());
        assert!(witness(15, 15).is_err());
        assert!(witness(1, 0).is_err());
    }

    #[test]
    fn witness_counts() {
        assert_eq!(count_witnesses(7).unwrap(), 0);
        assert_eq!(count_witnesses(9).unwrap(), 6);
        assert_eq!(liars(9).unwrap(), vec![1, 8]);
        assert_eq!(count_witnesses(15).unwrap(), 12);
        assert_eq!(liars(15).unwrap(), vec![1, 14]);
        // k = 2 goes through the generic path: 1 = 2^0 * 1, base 1 is a liar.
        assert_eq!(count_witnesses(2).unwrap(), 0);
    }

    #[test]
    fn witness_gap_and_soundness() {
        for k in 2..=2001u64 {
            let t = count_witnesses(k).unwrap();
            if trial_division(k) {
                assert_eq!(t, 0, "prime {k}");
            } else if k % 2 == 1 {
                assert!(4 * t >= 3 * (k - 1), "k={k} t={t}");
            }
        }
    }

    #[test]
    fn extended_predicate_domain() {
        assert!(!is_witness_extended(15, 0));
        assert!(!is_witness_extended(1, 0));
        assert!(!is_witness_extended(0, 0));
        assert!(!is_witness_extended(15, 15));
        assert!(is_witness_extended(15, 4));
    }

    #[test]
    fn sieve_examples() {
        assert_eq!(sieve_pi(16).unwrap(), (6, vec![2, 3, 5, 7, 11, 13]));
        assert_eq!(sieve_pi(32).unwrap().0, 11);
        assert_eq!(sieve_pi(2).unwrap().0, 0);
        assert!(sieve_pi(1).is_err());
    }

    #[test]
    fn r2_examples() {
        assert_eq!(good_pairs(20).unwrap(), vec![3, 7, 13, 17]);
        assert_eq!(good_pairs(10).unwrap(), vec![3, 5, 7]);
        assert_eq!(good_pairs(4).unwrap(), vec![2]);
        assert_eq!(r2_pairs(16).unwrap(), 4);
        assert!(r2_pairs(15).is_err());
        assert!(r2_pairs(2).is_err());
    }

    proptest! {
        #[test]
        fn sieve_agrees_with_trial_division(n in 2u64..3000) {
            let sieve = Sieve::new(n as usize);
            for k in 0..n {
                prop_assert_eq!(sieve.is_prime(k as usize), trial_division(k));
            }
        }

        #[test]
        fn prime_iff_no_witnesses(k in 2u64..5000) {
            prop_assert_eq!(count_witnesses(k).unwrap() == 0, trial_division(k));
        }
    }
}
