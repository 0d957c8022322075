//! The stochastic prime generator: a multiset of integers drawn from
//! `{2..M}` that reacts pairwise by exact division until no reactive pair
//! is left.
//!
//! Collision rules for two values `a`, `b`:
//! * equal values bounce elastically;
//! * if the smaller value divides the larger one, the larger is replaced
//!   by the quotient (the divisor survives);
//! * otherwise the collision is elastic.
//!
//! One time step (a *sweep*) is `N` collisions between uniformly chosen
//! pairs of distinct positions, applied sequentially.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number_theory::PrimeTable;

pub const DEFAULT_MAX_SWEEPS: u64 = 1_000_000;

/// The evolving reactor contents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemState {
    pool: u32,
    values: Vec<u32>,
}

impl SystemState {
    /// Draws `size` values i.i.d. uniformly from `{2..pool}`, with repetition.
    pub fn random<R: Rng + ?Sized>(pool: u32, size: u32, rng: &mut R) -> Result<Self> {
        check_dimensions(pool, size)?;
        let values = (0..size).map(|_| rng.random_range(2..=pool)).collect();
        Ok(Self { pool, values })
    }

    /// A state with prescribed contents. Every value must lie in `[2, pool]`.
    pub fn from_values(pool: u32, values: Vec<u32>) -> Result<Self> {
        check_dimensions(pool, values.len() as u32)?;
        if let Some(&bad) = values.iter().find(|&&v| v < 2 || v > pool) {
            return Err(Error::domain(format!("value {bad} outside pool [2, {pool}]")));
        }
        Ok(Self { pool, values })
    }

    pub fn pool(&self) -> u32 {
        self.pool
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn prime_count(&self, table: &PrimeTable) -> usize {
        self.values.iter().filter(|&&v| table.is_prime(v)).count()
    }

    /// Fraction of prime elements, `r`.
    pub fn prime_ratio(&self, table: &PrimeTable) -> f64 {
        self.prime_count(table) as f64 / self.size() as f64
    }

    pub fn is_frozen(&self) -> bool {
        is_frozen(&self.values)
    }
}

pub(crate) fn check_dimensions(pool: u32, size: u32) -> Result<()> {
    if pool < 3 {
        return Err(Error::domain(format!("pool size M must be >= 3, got {pool}")));
    }
    if size < 2 {
        return Err(Error::domain(format!("system size N must be >= 2, got {size}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionKind {
    ElasticEqual,
    ElasticNondivisible,
    Reaction,
}

/// Result of one encounter. For a reaction, `replaced_index` is the operand
/// (0 for `a`, 1 for `b`) that is replaced by `new_value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollisionOutcome {
    pub kind: CollisionKind,
    pub replaced_index: Option<usize>,
    pub new_value: Option<u32>,
}

impl CollisionOutcome {
    const fn elastic(kind: CollisionKind) -> Self {
        Self { kind, replaced_index: None, new_value: None }
    }
}

/// Applies the collision rules to a pair of values. Equality is tested
/// before divisibility, so `collide(k, k)` is always elastic.
#[inline]
pub fn collide(a: u32, b: u32) -> CollisionOutcome {
    if a == b {
        return CollisionOutcome::elastic(CollisionKind::ElasticEqual);
    }
    let (idx, big, small) = if a > b { (0, a, b) } else { (1, b, a) };
    if big % small == 0 {
        CollisionOutcome {
            kind: CollisionKind::Reaction,
            replaced_index: Some(idx),
            new_value: Some(big / small),
        }
    } else {
        CollisionOutcome::elastic(CollisionKind::ElasticNondivisible)
    }
}

/// True iff no pair of distinct values `a > b` with `b | a` exists.
pub fn is_frozen(values: &[u32]) -> bool {
    let mut scratch = Vec::with_capacity(values.len());
    is_frozen_with(values, &mut scratch)
}

fn is_frozen_with(values: &[u32], scratch: &mut Vec<u32>) -> bool {
    scratch.clear();
    scratch.extend_from_slice(values);
    scratch.sort_unstable();
    scratch.dedup();
    let Some(&max) = scratch.last() else {
        return true;
    };
    for (i, &b) in scratch.iter().enumerate() {
        // no multiple of b other than b itself fits below max
        if b > max / 2 {
            break;
        }
        if scratch[i + 1..].iter().any(|&a| a % b == 0) {
            return false;
        }
    }
    true
}

/// Performs one sweep in place and returns the number of reactions.
pub fn sweep<R: Rng + ?Sized>(state: &mut SystemState, rng: &mut R) -> u64 {
    let n = state.values.len();
    let mut reactions = 0;
    for _ in 0..n {
        if collision_step(&mut state.values, rng).is_some() {
            reactions += 1;
        }
    }
    reactions
}

/// One Monte Carlo step: picks two distinct positions and collides them.
/// Returns `(position, old_value)` when a reaction replaced a value.
#[inline]
fn collision_step<R: Rng + ?Sized>(values: &mut [u32], rng: &mut R) -> Option<(usize, u32)> {
    let n = values.len();
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    let (a, b) = (values[i], values[j]);
    if a == b {
        return None;
    }
    let (pos, big, small) = if a > b { (i, a, b) } else { (j, b, a) };
    if big % small == 0 {
        values[pos] = big / small;
        Some((pos, big))
    } else {
        None
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Frozen,
    /// The sweep cap was reached before stationarity.
    Truncated,
}

/// Outcome of one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub final_state: SystemState,
    pub status: RunStatus,
    /// Time steps performed, including the one after which the state was
    /// found frozen.
    pub sweeps: u64,
    pub reactions_total: u64,
    pub all_primes: bool,
    /// Cumulative reactions after each sweep.
    pub reactions_cumulative: Vec<u64>,
    /// Prime ratio r(t) after each sweep.
    pub prime_ratio_series: Vec<f64>,
}

impl RunRecord {
    pub fn final_prime_ratio(&self) -> f64 {
        self.prime_ratio_series.last().copied().unwrap_or(0.0)
    }
}

/// Upper bound on the number of reactions in any run: each reaction divides
/// the product of all elements by at least 2.
pub fn reaction_bound(pool: u32, size: usize) -> f64 {
    size as f64 * (pool as f64).log2()
}

/// Stepwise driver around a [`SystemState`] that keeps the prime count
/// up to date and avoids re-testing frozenness when nothing changed.
#[derive(Debug)]
pub struct Reactor<'t> {
    state: SystemState,
    table: &'t PrimeTable,
    primes: usize,
    sweeps: u64,
    reactions: u64,
    frozen: Option<bool>,
    scratch: Vec<u32>,
}

impl<'t> Reactor<'t> {
    pub fn new(state: SystemState, table: &'t PrimeTable) -> Result<Self> {
        if table.limit() < state.pool() {
            return Err(Error::domain(format!(
                "prime table limit {} below pool size {}",
                table.limit(),
                state.pool()
            )));
        }
        let primes = state.prime_count(table);
        Ok(Self {
            scratch: Vec::with_capacity(state.size()),
            state,
            table,
            primes,
            sweeps: 0,
            reactions: 0,
            frozen: None,
        })
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn into_state(self) -> SystemState {
        self.state
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn reactions(&self) -> u64 {
        self.reactions
    }

    pub fn prime_count(&self) -> usize {
        self.primes
    }

    pub fn prime_ratio(&self) -> f64 {
        self.primes as f64 / self.state.size() as f64
    }

    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u64 {
        let mut reactions = 0;
        for _ in 0..self.state.values.len() {
            if let Some((pos, _old)) = collision_step(&mut self.state.values, rng) {
                // the dividend is composite, so only the quotient can add a prime
                if self.table.is_prime(self.state.values[pos]) {
                    self.primes += 1;
                }
                reactions += 1;
            }
        }
        if reactions > 0 {
            self.frozen = None;
        }
        self.sweeps += 1;
        self.reactions += reactions;
        reactions
    }

    pub fn is_frozen(&mut self) -> bool {
        if let Some(f) = self.frozen {
            return f;
        }
        let f = is_frozen_with(&self.state.values, &mut self.scratch);
        self.frozen = Some(f);
        f
    }

    pub fn all_primes(&self) -> bool {
        self.primes == self.state.size()
    }

    /// Sweeps until frozen or until `max_sweeps` sweeps have been done in
    /// total. `observe` runs after every sweep.
    pub fn run<R, F>(&mut self, rng: &mut R, max_sweeps: u64, mut observe: F) -> RunStatus
    where
        R: Rng + ?Sized,
        F: FnMut(&Self, u64),
    {
        while self.sweeps < max_sweeps {
            let r = self.sweep(rng);
            observe(self, r);
            if self.is_frozen() {
                return RunStatus::Frozen;
            }
        }
        RunStatus::Truncated
    }
}

/// Runs a fresh random system of `size` values from `{2..pool}` until it
/// freezes, recording per-sweep time series.
pub fn run_to_stationarity<R: Rng + ?Sized>(
    pool: u32,
    size: u32,
    table: &PrimeTable,
    rng: &mut R,
    max_sweeps: u64,
) -> Result<RunRecord> {
    let state = SystemState::random(pool, size, rng)?;
    run_from_state(state, table, rng, max_sweeps)
}

/// As [`run_to_stationarity`], starting from a given state.
pub fn run_from_state<R: Rng + ?Sized>(
    state: SystemState,
    table: &PrimeTable,
    rng: &mut R,
    max_sweeps: u64,
) -> Result<RunRecord> {
    if max_sweeps < 1 {
        return Err(Error::domain("max_sweeps must be >= 1"));
    }
    let mut reactor = Reactor::new(state, table)?;
    let mut cumulative = Vec::new();
    let mut ratios = Vec::new();
    let status = reactor.run(rng, max_sweeps, |r, _| {
        cumulative.push(r.reactions());
        ratios.push(r.prime_ratio());
    });
    let all_primes = reactor.all_primes();
    let (sweeps, reactions_total) = (reactor.sweeps(), reactor.reactions());
    let final_state = reactor.into_state();
    assert!(
        reactions_total as f64 <= reaction_bound(final_state.pool(), final_state.size()),
        "reaction count {reactions_total} exceeds the product-decrease bound"
    );
    Ok(RunRecord {
        final_state,
        status,
        sweeps,
        reactions_total,
        all_primes,
        reactions_cumulative: cumulative,
        prime_ratio_series: ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::from_seed;
    use proptest::prelude::*;

    fn brute_force_frozen(values: &[u32]) -> bool {
        for &a in values {
            for &b in values {
                if a > b && a % b == 0 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn collision_rules() {
        assert_eq!(
            collide(6, 3),
            CollisionOutcome {
                kind: CollisionKind::Reaction,
                replaced_index: Some(0),
                new_value: Some(2)
            }
        );
        assert_eq!(collide(3, 6).replaced_index, Some(1));
        assert_eq!(collide(5, 5).kind, CollisionKind::ElasticEqual);
        assert_eq!(collide(7, 3).kind, CollisionKind::ElasticNondivisible);
        for k in 2..200 {
            assert_eq!(collide(k, k).kind, CollisionKind::ElasticEqual);
        }
    }

    #[test]
    fn init_state_range_and_determinism() {
        let s = SystemState::random(3, 4, &mut from_seed(1)).unwrap();
        assert!(s.values().iter().all(|&v| v == 2 || v == 3));
        let big = SystemState::random(10_000, 100_000, &mut from_seed(2)).unwrap();
        assert_eq!(big.size(), 100_000);
        assert_eq!(big, SystemState::random(10_000, 100_000, &mut from_seed(2)).unwrap());
        assert!(SystemState::random(2, 4, &mut from_seed(1)).is_err());
        assert!(SystemState::random(10, 1, &mut from_seed(1)).is_err());
        assert!(SystemState::from_values(10, vec![11, 2]).is_err());
    }

    #[test]
    fn frozen_examples() {
        assert!(is_frozen(&[2, 3, 5, 5]));
        assert!(is_frozen(&[6, 4]));
        assert!(!is_frozen(&[9, 3]));
        assert!(is_frozen(&[7, 7, 7]));
    }

    #[test]
    fn forced_chain_8_2() {
        let table = PrimeTable::new(10).unwrap();
        let state = SystemState::from_values(10, vec![8, 2]).unwrap();
        let rec = run_from_state(state, &table, &mut from_seed(3), 1000).unwrap();
        assert_eq!(rec.status, RunStatus::Frozen);
        assert_eq!(rec.final_state.values(), &[2, 2]);
        assert!(rec.all_primes);
        assert_eq!(rec.reactions_total, 2);
        // with N = 2 every draw is the pair, so each sweep fires both reactions
        assert_eq!(rec.sweeps, 1);
    }

    #[test]
    fn frozen_from_start() {
        let table = PrimeTable::new(10).unwrap();
        let state = SystemState::from_values(10, vec![6, 4]).unwrap();
        let rec = run_from_state(state, &table, &mut from_seed(3), 1000).unwrap();
        assert_eq!(rec.final_state.values(), &[6, 4]);
        assert!(!rec.all_primes);
        assert_eq!(rec.reactions_total, 0);
        assert_eq!(rec.sweeps, 1);
        assert_eq!(rec.final_prime_ratio(), 0.0);
    }

    #[test]
    fn identical_values_never_change() {
        let mut state = SystemState::from_values(100, vec![12; 9]).unwrap();
        let mut rng = from_seed(9);
        for _ in 0..20 {
            assert_eq!(sweep(&mut state, &mut rng), 0);
        }
        assert_eq!(state.values(), &[12; 9]);
    }

    #[test]
    fn truncation_is_reported() {
        let table = PrimeTable::new(1 << 12).unwrap();
        // a state that needs more than one sweep to freeze
        let mut rng = from_seed(11);
        let state = SystemState::random(1 << 12, 200, &mut rng).unwrap();
        let rec = run_from_state(state, &table, &mut rng, 1).unwrap();
        assert_eq!(rec.sweeps, 1);
        if !rec.final_state.is_frozen() {
            assert_eq!(rec.status, RunStatus::Truncated);
        }
        assert!(run_from_state(SystemState::from_values(10, vec![6, 4]).unwrap(), &table, &mut rng, 0).is_err());
    }

    #[test]
    fn ordered_phase_reaches_all_primes() {
        let table = PrimeTable::new(10_000).unwrap();
        let mut hits = 0;
        for seed in 0..100 {
            let rec = run_to_stationarity(10_000, 110, &table, &mut from_seed(seed), DEFAULT_MAX_SWEEPS).unwrap();
            assert_eq!(rec.status, RunStatus::Frozen);
            hits += rec.all_primes as u32;
        }
        assert!(hits > 70, "all-prime runs: {hits}/100");
    }

    #[test]
    fn reproducible_records() {
        let table = PrimeTable::new(4096).unwrap();
        let a = run_to_stationarity(4096, 64, &table, &mut from_seed(5), 10_000).unwrap();
        let b = run_to_stationarity(4096, 64, &table, &mut from_seed(5), 10_000).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn frozen_matches_brute_force(values in prop::collection::vec(2u32..=50, 1..=8)) {
            prop_assert_eq!(is_frozen(&values), brute_force_frozen(&values));
        }

        #[test]
        fn run_invariants(pool in 3u32..=2000, size in 2u32..=64, seed in any::<u64>()) {
            let table = PrimeTable::new(pool).unwrap();
            let rec = run_to_stationarity(pool, size, &table, &mut from_seed(seed), DEFAULT_MAX_SWEEPS).unwrap();
            prop_assert_eq!(rec.status, RunStatus::Frozen);
            prop_assert!(rec.final_state.values().iter().all(|&v| v >= 2 && v <= pool));
            prop_assert!(rec.reactions_cumulative.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(rec.prime_ratio_series.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(rec.reactions_cumulative.len() as u64, rec.sweeps);
            if rec.all_primes {
                prop_assert_eq!(rec.final_prime_ratio(), 1.0);
            }
            prop_assert!(rec.final_state.is_frozen());
        }
    }
}
