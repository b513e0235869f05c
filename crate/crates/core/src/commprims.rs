//! Randomized communication primitives under shared randomness: equality
//! fingerprints and the SumZero residue check.

use crate::bits::{ceil_log2, Bits};
use crate::engine::RandomDomain;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CommError {
    #[error("input of {len} bits exceeds the fingerprint length bound {bound}")]
    InputTooLong { len: usize, bound: usize },
    #[error("need {needed} random bits for the masks, got {got}")]
    ShortRandomness { needed: usize, got: usize },
}

/// Inner-product parities of `x` (zero-padded) with each mask. Every mask
/// must be at least as long as `x`.
pub fn eq_fingerprint(x: &Bits, masks: &[Bits]) -> Result<Bits, CommError> {
    let mut out = Bits::new();
    for mask in masks {
        if x.len() > mask.len() {
            return Err(CommError::InputTooLong { len: x.len(), bound: mask.len() });
        }
        let parity = x.iter().zip(mask.iter()).filter(|&(a, b)| a && b).count() % 2 == 1;
        out.push(parity);
    }
    Ok(out)
}

/// Equality of strings of at most `input_bits` bits, compared through
/// `repetitions` shared random masks. Unequal inputs collide with
/// probability exactly `2^-repetitions`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EqualityTest {
    pub repetitions: usize,
    pub input_bits: usize,
}

impl EqualityTest {
    pub const DEFAULT_REPETITIONS: usize = 7;

    pub fn new(input_bits: usize) -> Self {
        EqualityTest { repetitions: Self::DEFAULT_REPETITIONS, input_bits }
    }

    pub fn with_repetitions(mut self, repetitions: usize) -> Self {
        self.repetitions = repetitions;
        self
    }

    /// Shared coins for the masks: `repetitions * input_bits` fair bits.
    pub fn domain(&self) -> RandomDomain {
        RandomDomain::bits(self.repetitions * self.input_bits)
    }

    pub fn random_bits(&self) -> usize {
        self.repetitions * self.input_bits
    }

    /// Splits a run of coins (each 0 or 1) into the masks.
    pub fn masks(&self, coins: &[u64]) -> Result<Vec<Bits>, CommError> {
        let needed = self.random_bits();
        if coins.len() < needed {
            return Err(CommError::ShortRandomness { needed, got: coins.len() });
        }
        let l = self.input_bits;
        Ok((0..self.repetitions)
            .map(|j| Bits::from_bools(coins[j * l..(j + 1) * l].iter().map(|&c| c & 1 == 1).collect()))
            .collect())
    }

    pub fn fingerprint(&self, x: &Bits, coins: &[u64]) -> Result<Bits, CommError> {
        eq_fingerprint(x, &self.masks(coins)?)
    }

    pub fn false_accept_bound(&self) -> f64 {
        0.5f64.powi(self.repetitions as i32)
    }
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    let mut c = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Largest number of distinct prime factors of any integer in `1..=n`.
pub fn max_distinct_prime_factors(n: u64) -> usize {
    let mut primorial = 1u64;
    let mut count = 0;
    for p in first_primes(16) {
        match primorial.checked_mul(p) {
            Some(next) if next <= n => {
                primorial = next;
                count += 1;
            }
            _ => break,
        }
    }
    count
}

/// Checks that integers held by up to `arity` parties sum to zero, each
/// party sending its value modulo a prime drawn from a shared pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumZeroTest {
    pub value_bound: u64,
    pub arity: u64,
    pool: Vec<u64>,
}

impl SumZeroTest {
    /// Pool of the first `12·⌈log2(k·M)⌉` primes.
    pub fn new(value_bound: u64, arity: u64) -> Self {
        let t = 12 * ceil_log2(Self::span(value_bound, arity)).max(1);
        Self::with_pool_size(value_bound, arity, t)
    }

    /// Pool of the first `6·ω` primes, where `ω` is the largest number of
    /// distinct prime factors a nonzero sum can have. Keeps the per-test
    /// error at most 1/6 with a much smaller modulus range, which makes
    /// exhaustive prover enumeration feasible.
    pub fn reduced(value_bound: u64, arity: u64) -> Self {
        let w = max_distinct_prime_factors(Self::span(value_bound, arity)).max(1);
        Self::with_pool_size(value_bound, arity, 6 * w)
    }

    pub fn with_pool_size(value_bound: u64, arity: u64, size: usize) -> Self {
        SumZeroTest { value_bound, arity, pool: first_primes(size.max(1)) }
    }

    fn span(value_bound: u64, arity: u64) -> u64 {
        value_bound.saturating_mul(arity).max(2)
    }

    pub fn pool(&self) -> &[u64] {
        &self.pool
    }

    pub fn pool_size(&self) -> usize {
        self.pool.len()
    }

    /// Shared coin: one uniform index into the pool.
    pub fn domain(&self) -> RandomDomain {
        RandomDomain::new(vec![self.pool.len() as u64]).expect("pool is non-empty")
    }

    pub fn modulus(&self, index: u64) -> u64 {
        self.pool[index as usize]
    }

    /// Width of every residue message: enough for the largest pool prime.
    pub fn residue_bits(&self) -> usize {
        ceil_log2(*self.pool.last().expect("pool is non-empty"))
    }

    pub fn residue(value: i64, m: u64) -> u64 {
        value.rem_euclid(m as i64) as u64
    }

    pub fn encode_residue(&self, value: i64, m: u64) -> Bits {
        Bits::from_uint(Self::residue(value, m), self.residue_bits())
    }

    /// Number of pool primes dividing `s`; a nonzero sum `s` passes with
    /// probability exactly this count over the pool size.
    pub fn false_accept_count(&self, s: i64) -> usize {
        if s == 0 {
            return self.pool.len();
        }
        self.pool.iter().filter(|&&p| s.unsigned_abs().is_multiple_of(p)).count()
    }

    /// Worst case over nonzero sums `|s| <= arity·value_bound`.
    pub fn false_accept_bound(&self) -> f64 {
        let w = max_distinct_prime_factors(Self::span(self.value_bound, self.arity));
        (w.min(self.pool.len())) as f64 / self.pool.len() as f64
    }
}

/// Accepts iff the residues of `values` modulo `m` sum to zero modulo `m`.
pub fn sumzero_check(values: &[i64], m: u64) -> bool {
    values
        .iter()
        .fold(0u64, |acc, &v| (acc + SumZeroTest::residue(v, m)) % m)
        == 0
}

/// Residue-level check: the residues (already reduced modulo `m`) sum to
/// zero modulo `m`.
pub fn residues_sum_to_zero(residues: &[u64], m: u64) -> bool {
    residues.iter().fold(0u64, |acc, &r| (acc + r % m) % m) == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equal_inputs_always_match() {
        let x: Bits = "1011".parse().unwrap();
        let masks: Vec<Bits> = vec!["1100".parse().unwrap(), "0111".parse().unwrap()];
        assert_eq!(eq_fingerprint(&x, &masks).unwrap(), eq_fingerprint(&x, &masks).unwrap());
        assert_eq!(eq_fingerprint(&x, &masks).unwrap().to_string(), "10");
        assert_eq!(eq_fingerprint(&Bits::new(), &masks).unwrap().to_string(), "00");
        assert!(eq_fingerprint(&"11111".parse().unwrap(), &masks).is_err());
    }

    #[test]
    fn exhaustive_mask_soundness() {
        // t = 2 masks of 4 bits: 256 mask pairs. For every unequal pair the
        // fingerprints collide on exactly a quarter of them.
        let t = EqualityTest::new(4).with_repetitions(2);
        for x in 0..16u64 {
            for y in 0..16u64 {
                let collide = (0..256u64)
                    .filter(|&r| {
                        let coins: Vec<u64> = (0..8).map(|i| r >> i & 1).collect();
                        t.fingerprint(&Bits::from_uint(x, 4), &coins).unwrap()
                            == t.fingerprint(&Bits::from_uint(y, 4), &coins).unwrap()
                    })
                    .count();
                assert_eq!(collide, if x == y { 256 } else { 64 });
            }
        }
    }

    #[test]
    fn pools() {
        assert_eq!(first_primes(10), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        let s = SumZeroTest::new(100, 3);
        assert_eq!(s.pool_size(), 108);
        assert_eq!(*s.pool().last().unwrap(), 593);
        assert_eq!(s.residue_bits(), 10);
        assert!(s.residue_bits() <= 2 * ceil_log2(s.pool_size() as u64));
        assert_eq!(max_distinct_prime_factors(300), 4);
        assert_eq!(max_distinct_prime_factors(29), 2);
        assert_eq!(max_distinct_prime_factors(30), 3);
        assert_eq!(SumZeroTest::reduced(100, 3).pool_size(), 24);
    }

    #[test]
    fn divisor_count_oracle() {
        let s = SumZeroTest::with_pool_size(10, 3, 10);
        let accepted = s.pool().iter().filter(|&&m| sumzero_check(&[4, 5, -3], m)).count();
        assert_eq!(accepted, 2);
        assert_eq!(s.false_accept_count(6), 2);
        assert!(s.pool().iter().all(|&m| sumzero_check(&[7, -3, -4], m)));
    }

    proptest! {
        #[test]
        fn exact_false_accept(a in -1000i64..1000, b in -1000i64..1000) {
            let s = SumZeroTest::new(1000, 3);
            let c = -(a + b) + 1;
            let sum = a + b + c;
            let hits = s.pool().iter().filter(|&&m| sumzero_check(&[a, b, c], m)).count();
            prop_assert_eq!(hits, s.false_accept_count(sum));
            let residues: Vec<u64> = s.pool().iter().map(|&m| SumZeroTest::residue(a, m)).collect();
            prop_assert!(residues.iter().zip(s.pool()).all(|(&r, &m)| r < m));
        }
    }
}
