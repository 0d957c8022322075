//! Prime tables and prime-density baselines for pools `{2..M}`.

use crate::error::{Error, Result};

/// Primality flags for every integer in `[0, limit]`, built once by a sieve.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u32,
    flags: Vec<bool>,
    // cumulative[k] = number of primes <= k
    cumulative: Vec<u32>,
}

impl PrimeTable {
    /// Sieve of Eratosthenes over `[0, limit]`.
    pub fn new(limit: u32) -> Result<Self> {
        if limit < 2 {
            return Err(Error::domain(format!("prime table limit must be >= 2, got {limit}")));
        }
        let len = limit as usize + 1;
        let mut flags = vec![true; len];
        flags[0] = false;
        flags[1] = false;
        let mut p = 2usize;
        while p * p < len {
            if flags[p] {
                let mut k = p * p;
                while k < len {
                    flags[k] = false;
                    k += p;
                }
            }
            p += 1;
        }
        let mut cumulative = Vec::with_capacity(len);
        let mut count = 0u32;
        for &f in &flags {
            count += f as u32;
            cumulative.push(count);
        }
        Ok(Self { limit, flags, cumulative })
    }

    pub fn limit(&self) -> u32 {
        self.limit
    }

    /// Constant-time primality lookup. Values above the limit report `false`.
    #[inline]
    pub fn is_prime(&self, n: u32) -> bool {
        self.flags.get(n as usize).copied().unwrap_or(false)
    }

    /// Exact prime count `pi(upto)` for `2 <= upto <= limit`.
    pub fn prime_count(&self, upto: u32) -> Result<u32> {
        if upto < 2 || upto > self.limit {
            return Err(Error::domain(format!(
                "prime_count argument {upto} outside [2, {}]",
                self.limit
            )));
        }
        Ok(self.cumulative[upto as usize])
    }

    pub fn primes(&self) -> impl Iterator<Item = u32> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| i as u32)
    }
}

/// Probability that a uniform draw from `{2..M}` is prime, `pi(M) / (M - 1)`.
pub fn expected_residual_ratio(pool: u32) -> Result<f64> {
    if pool < 3 {
        return Err(Error::domain(format!("pool size must be >= 3, got {pool}")));
    }
    let table = PrimeTable::new(pool)?;
    Ok(table.prime_count(pool)? as f64 / (pool - 1) as f64)
}

/// Prime-number-theorem form of the residual ratio, `1 / ln M`.
pub fn asymptotic_residual_ratio(pool: u32) -> f64 {
    1.0 / (pool as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u32) -> bool {
        n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn small_table() {
        let t = PrimeTable::new(10).unwrap();
        for p in [2, 3, 5, 7] {
            assert!(t.is_prime(p));
        }
        for c in [4, 6, 8, 9, 10] {
            assert!(!t.is_prime(c));
        }
        assert_eq!(t.prime_count(10).unwrap(), 4);
        assert_eq!(t.prime_count(2).unwrap(), 1);
    }

    #[test]
    fn smallest_pool() {
        let t = PrimeTable::new(2).unwrap();
        assert!(t.is_prime(2));
        assert_eq!(t.primes().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn rejects_bad_limits() {
        assert!(matches!(PrimeTable::new(1), Err(Error::Domain(_))));
        let t = PrimeTable::new(10).unwrap();
        assert!(t.prime_count(11).is_err());
        assert!(t.prime_count(1).is_err());
        assert!(expected_residual_ratio(2).is_err());
    }

    #[test]
    fn counts_agree_with_trial_division() {
        let t = PrimeTable::new(10_000).unwrap();
        let mut count = 0;
        for n in 2..=10_000u32 {
            if trial_division(n) {
                count += 1;
            }
            assert_eq!(t.is_prime(n), trial_division(n), "n = {n}");
            assert_eq!(t.prime_count(n).unwrap(), count, "n = {n}");
        }
        assert_eq!(t.prime_count(100).unwrap(), 25);
        assert_eq!(t.prime_count(10_000).unwrap(), 1229);
    }

    #[test]
    fn residual_ratios() {
        assert!((expected_residual_ratio(10).unwrap() - 4.0 / 9.0).abs() < 1e-15);
        let r = expected_residual_ratio(10_000).unwrap();
        assert!((r - 1229.0 / 9999.0).abs() < 1e-15);
        assert!((asymptotic_residual_ratio(10_000) - 0.1086).abs() < 1e-4);
        let m = 1 << 14;
        let exact = expected_residual_ratio(m).unwrap();
        let asym = asymptotic_residual_ratio(m);
        assert!((exact - asym).abs() / asym < 0.2);
    }

    #[test]
    fn residual_ratio_decreases_on_powers_of_two() {
        let mut prev = f64::INFINITY;
        for k in 4..=18 {
            let r = expected_residual_ratio(1 << k).unwrap();
            assert!(r > 0.0 && r < 1.0);
            assert!(r <= prev);
            prev = r;
        }
    }
}
