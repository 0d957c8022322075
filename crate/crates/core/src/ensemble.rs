//! Ensemble statistics over many independent realizations at fixed `(N, M)`.
//!
//! Realizations run in parallel on the current rayon pool. Each one draws
//! from its own substream (see [`crate::stream`]) and the reduction runs in
//! realization order, so the output is identical for any worker count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number_theory::PrimeTable;
use crate::reactor::{Reactor, RunStatus, SystemState};
use crate::stream::{self, Purpose, Stream};

/// Realizations per grid point used when nothing else is asked for.
pub const DEFAULT_REALIZATIONS: u32 = 2_000;

/// Fraction of truncated runs above which an ensemble is flagged unreliable.
pub const TRUNCATION_TOLERANCE: f64 = 1e-3;

/// Sparse value -> count histogram of final-state values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram(BTreeMap<u32, u64>);

impl Histogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: u32) {
        *self.0.entry(value).or_insert(0) += 1;
    }

    pub fn count(&self, value: u32) -> u64 {
        self.0.get(&value).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.0.iter().map(|(&v, &c)| (v, c))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Counts falling into `bins` equal-width bins covering `[lo, hi]`.
    pub fn binned(&self, lo: u32, hi: u32, bins: usize) -> Vec<u64> {
        let mut out = vec![0; bins];
        let width = (hi - lo + 1) as f64 / bins as f64;
        for (v, c) in self.iter().filter(|&(v, _)| v >= lo && v <= hi) {
            let k = (((v - lo) as f64) / width) as usize;
            out[k.min(bins - 1)] += c;
        }
        out
    }
}

/// Aggregates over the realizations of one `(N, M)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub pool: u32,
    pub size: u32,
    pub realizations: u32,
    pub truncated_runs: u32,
    /// Mean final prime ratio over completed runs.
    pub r_mean: f64,
    /// Fraction of completed runs that ended with every element prime.
    pub p: f64,
    /// Binomial standard error of `p`.
    pub p_stderr: f64,
    /// Mean sweeps to stationarity divided by `N`.
    pub tau: f64,
    /// Mean sweeps to stationarity.
    pub tau_raw: f64,
    pub histogram: Histogram,
    /// Set when more than 0.1% of the runs were truncated.
    pub unreliable: bool,
}

impl EnsembleStats {
    pub fn completed(&self) -> u32 {
        self.realizations - self.truncated_runs
    }
}

struct RunSummary {
    status: RunStatus,
    sweeps: u64,
    primes: usize,
    values: Vec<u32>,
}

fn check_realizations(realizations: u32) -> Result<()> {
    if realizations < 1 {
        return Err(Error::domain("number of realizations R must be >= 1"));
    }
    Ok(())
}

fn simulate<F>(
    pool: u32,
    size: u32,
    realizations: u32,
    master_seed: u64,
    max_sweeps: u64,
    initial: F,
) -> Result<EnsembleStats>
where
    F: Fn(&mut Stream) -> Result<SystemState> + Sync,
{
    check_realizations(realizations)?;
    if max_sweeps < 1 {
        return Err(Error::domain("max_sweeps must be >= 1"));
    }
    let table = PrimeTable::new(pool)?;
    let runs = (0..realizations as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream::substream(master_seed, Purpose::Reactor, pool, size, i);
            let state = initial(&mut rng)?;
            let mut reactor = Reactor::new(state, &table)?;
            let status = reactor.run(&mut rng, max_sweeps, |_, _| {});
            Ok(RunSummary {
                status,
                sweeps: reactor.sweeps(),
                primes: reactor.prime_count(),
                values: reactor.into_state().values().to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce(pool, size, realizations, &runs))
}

fn reduce(pool: u32, size: u32, realizations: u32, runs: &[RunSummary]) -> EnsembleStats {
    let mut histogram = Histogram::new();
    let mut truncated = 0u32;
    let mut all_prime = 0u64;
    let mut ratio_sum = 0.0;
    let mut sweep_sum = 0u64;
    for run in runs {
        if run.status == RunStatus::Truncated {
            truncated += 1;
            continue;
        }
        let n = run.values.len();
        if run.primes == n {
            all_prime += 1;
        }
        ratio_sum += run.primes as f64 / n as f64;
        sweep_sum += run.sweeps;
        for &v in &run.values {
            histogram.add(v);
        }
    }
    let completed = (realizations - truncated) as f64;
    let (r_mean, p, tau_raw) = if completed > 0.0 {
        (ratio_sum / completed, all_prime as f64 / completed, sweep_sum as f64 / completed)
    } else {
        (0.0, 0.0, 0.0)
    };
    let p_stderr = if completed > 0.0 { (p * (1.0 - p) / completed).sqrt() } else { 0.0 };
    EnsembleStats {
        pool,
        size,
        realizations,
        truncated_runs: truncated,
        r_mean,
        p,
        p_stderr,
        tau: tau_raw / size as f64,
        tau_raw,
        histogram,
        unreliable: completed == 0.0 || truncated as f64 > TRUNCATION_TOLERANCE * realizations as f64,
    }
}

/// Runs `realizations` independent systems of `size` values drawn from
/// `{2..pool}` to stationarity and aggregates them.
pub fn run_ensemble(
    pool: u32,
    size: u32,
    realizations: u32,
    master_seed: u64,
    max_sweeps: u64,
) -> Result<EnsembleStats> {
    crate::reactor::check_dimensions(pool, size)?;
    simulate(pool, size, realizations, master_seed, max_sweeps, |rng| {
        SystemState::random(pool, size, rng)
    })
}

/// Ensemble in which every realization starts from the same `initial` state;
/// only the collision sequence is random.
pub fn run_ensemble_from(
    initial: &SystemState,
    realizations: u32,
    master_seed: u64,
    max_sweeps: u64,
) -> Result<EnsembleStats> {
    let size = initial.size() as u32;
    simulate(initial.pool(), size, realizations, master_seed, max_sweeps, |_| Ok(initial.clone()))
}

/// Histogram of final-state values over the completed realizations.
pub fn steady_distribution(
    pool: u32,
    size: u32,
    realizations: u32,
    master_seed: u64,
    max_sweeps: u64,
) -> Result<Histogram> {
    Ok(run_ensemble(pool, size, realizations, master_seed, max_sweeps)?.histogram)
}

/// One row of a [`SweepTable`]; also the CSV record of the sweep files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "M")]
    pub pool: u32,
    #[serde(rename = "N")]
    pub size: u32,
    #[serde(rename = "R")]
    pub realizations: u32,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "P_stderr")]
    pub p_stderr: f64,
    pub r_mean: f64,
    pub tau: f64,
    pub truncated: u32,
}

impl From<&EnsembleStats> for SweepRow {
    fn from(s: &EnsembleStats) -> Self {
        Self {
            pool: s.pool,
            size: s.size,
            realizations: s.realizations,
            p: s.p,
            p_stderr: s.p_stderr,
            r_mean: s.r_mean,
            tau: s.tau,
            truncated: s.truncated_runs,
        }
    }
}

/// Ensemble summaries across a grid of system sizes at one pool size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub pool: u32,
    pub seed: Option<u64>,
    pub realizations: u32,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Builds a table from rows that share one pool size. Rows are sorted by
    /// `N`; duplicate sizes are rejected.
    pub fn from_rows(mut rows: Vec<SweepRow>) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::domain("sweep table needs at least one row"))?;
        let pool = first.pool;
        let realizations = first.realizations;
        if rows.iter().any(|r| r.pool != pool) {
            return Err(Error::domain("all rows of a sweep table must share one pool size M"));
        }
        rows.sort_by_key(|r| r.size);
        if rows.windows(2).any(|w| w[0].size == w[1].size) {
            return Err(Error::domain("duplicate N in sweep table"));
        }
        Ok(Self { pool, seed: None, realizations, rows })
    }

    pub fn sizes(&self) -> impl Iterator<Item = u32> + '_ {
        self.rows.iter().map(|r| r.size)
    }

    /// `(N, P)` pairs in increasing `N`.
    pub fn order_parameter(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.size as f64, r.p)).collect()
    }
}

/// One ensemble per grid point. The grid must be non-empty and strictly
/// increasing.
pub fn sweep_over_n(
    pool: u32,
    grid: &[u32],
    realizations: u32,
    master_seed: u64,
    max_sweeps: u64,
) -> Result<SweepTable> {
    Ok(sweep_over_n_full(pool, grid, realizations, master_seed, max_sweeps)?.0)
}

/// As [`sweep_over_n`], also returning the full per-point statistics.
pub fn sweep_over_n_full(
    pool: u32,
    grid: &[u32],
    realizations: u32,
    master_seed: u64,
    max_sweeps: u64,
) -> Result<(SweepTable, Vec<EnsembleStats>)> {
    if grid.is_empty() {
        return Err(Error::domain("N grid is empty"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("N grid must be strictly increasing"));
    }
    let stats = grid
        .iter()
        .map(|&n| run_ensemble(pool, n, realizations, master_seed, max_sweeps))
        .collect::<Result<Vec<_>>>()?;
    let table = SweepTable {
        pool,
        seed: Some(master_seed),
        realizations,
        rows: stats.iter().map(SweepRow::from).collect(),
    };
    Ok((table, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number_theory::expected_residual_ratio;
    use crate::reactor::DEFAULT_MAX_SWEEPS;

    #[test]
    fn estimator_invariants() {
        for &(m, n) in &[(1024u32, 5u32), (1024, 20), (1024, 60), (4096, 40)] {
            let s = run_ensemble(m, n, 300, 42, DEFAULT_MAX_SWEEPS).unwrap();
            assert!((0.0..=1.0).contains(&s.p));
            assert!((0.0..=1.0).contains(&s.r_mean));
            assert!(s.r_mean >= s.p);
            assert!(s.tau >= 1.0 / n as f64 && s.tau.is_finite());
            assert_eq!(s.histogram.total(), n as u64 * s.completed() as u64);
            assert_eq!(s.truncated_runs, 0);
            assert!(!s.unreliable);
        }
    }

    #[test]
    fn disordered_phase_sits_on_the_residual_ratio() {
        let s = run_ensemble(10_000, 10, 2000, 1, DEFAULT_MAX_SWEEPS).unwrap();
        let base = expected_residual_ratio(10_000).unwrap();
        assert!(s.r_mean > base - 0.01 && s.r_mean < base + 0.015, "r = {}", s.r_mean);
        assert!(s.p < 0.005);
    }

    #[test]
    fn two_element_floor() {
        let m = 1000;
        let s = run_ensemble(m, 2, 2000, 3, DEFAULT_MAX_SWEEPS).unwrap();
        let floor = expected_residual_ratio(m).unwrap().powi(2);
        // P counts at least the runs drawn as two primes
        assert!(s.p + 3.0 * (floor * (1.0 - floor) / 2000.0).sqrt() >= floor);
    }

    #[test]
    fn forced_state_histogram() {
        let init = SystemState::from_values(5, vec![2, 2]).unwrap();
        let s = run_ensemble_from(&init, 50, 0, 10).unwrap();
        assert_eq!(s.histogram.iter().collect::<Vec<_>>(), vec![(2, 100)]);
        assert_eq!(s.p, 1.0);
    }

    #[test]
    fn truncation_flags_unreliable() {
        let s = run_ensemble(1 << 12, 200, 20, 5, 1).unwrap();
        assert!(s.truncated_runs > 0);
        assert!(s.unreliable);
        assert_eq!(s.histogram.total(), 200 * s.completed() as u64);
    }

    #[test]
    fn sweep_table_shape() {
        let t = sweep_over_n(1024, &[10], 100, 9, DEFAULT_MAX_SWEEPS).unwrap();
        let single = run_ensemble(1024, 10, 100, 9, DEFAULT_MAX_SWEEPS).unwrap();
        assert_eq!(t.rows, vec![SweepRow::from(&single)]);
        assert!(sweep_over_n(1024, &[], 100, 9, 10).is_err());
        assert!(sweep_over_n(1024, &[20, 10], 100, 9, 10).is_err());
        let a = sweep_over_n(1024, &[10, 20, 30], 100, 9, DEFAULT_MAX_SWEEPS).unwrap();
        let b = sweep_over_n(1024, &[10, 20, 30], 100, 9, DEFAULT_MAX_SWEEPS).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_ensemble(2048, 30, 200, 77, DEFAULT_MAX_SWEEPS).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn binned_histogram() {
        let mut h = Histogram::new();
        for v in 2..=11 {
            h.add(v);
        }
        assert_eq!(h.binned(2, 11, 5), vec![2, 2, 2, 2, 2]);
    }
}
