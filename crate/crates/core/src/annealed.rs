//! Annealed approximation: correlations between time steps are dropped and
//! the `N` elements are redrawn independently at every step. The quantity
//! of interest is `q(N, M)`, the probability that a fresh multiset contains
//! no reactive (dividing) pair.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reactor::is_frozen;
use crate::stream::{self, Purpose};
use rand::Rng;

pub const DEFAULT_SAMPLES: u32 = 10_000;

/// Level at which the annealed threshold is read off the `q` curve.
pub const THRESHOLD_LEVEL: f64 = 0.5;

/// Number of unordered pairs `{a, b}` from `{2..M}` with `a != b` and the
/// smaller dividing the larger: `sum_{x=2}^{M/2} floor((M - x) / x)`.
pub fn divisible_pair_count(pool: u32) -> u64 {
    (2..=pool / 2).map(|x| ((pool - x) / x) as u64).sum()
}

/// Probability that two values drawn uniformly (with replacement) from
/// `{2..M}` form a reactive pair.
pub fn pair_divisibility_probability(pool: u32) -> Result<f64> {
    if pool < 4 {
        return Err(Error::domain(format!("pair divisibility needs M >= 4, got {pool}")));
    }
    let span = (pool - 1) as f64;
    Ok(2.0 * divisible_pair_count(pool) as f64 / (span * span))
}

/// Large-`M` form `2 ln M / M`.
pub fn pair_divisibility_asymptotic(pool: u32) -> f64 {
    let m = pool as f64;
    2.0 * m.ln() / m
}

/// Monte Carlo estimate of `q` and its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QEstimate {
    pub q: f64,
    pub stderr: f64,
}

/// Draws `samples` independent multisets of `size` values from `{2..pool}`
/// and returns the fraction that hold no reactive pair.
pub fn estimate_q(pool: u32, size: u32, samples: u32, master_seed: u64) -> Result<QEstimate> {
    if samples < 1 {
        return Err(Error::domain("number of samples S must be >= 1"));
    }
    if pool < 3 {
        return Err(Error::domain(format!("pool size M must be >= 3, got {pool}")));
    }
    if size < 1 {
        return Err(Error::domain("system size N must be >= 1"));
    }
    let inert = (0..samples as u64)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(size as usize),
            |values, i| {
                let mut rng = stream::substream(master_seed, Purpose::Annealed, pool, size, i);
                values.clear();
                values.extend((0..size).map(|_| rng.random_range(2..=pool)));
                is_frozen(values) as u64
            },
        )
        .sum::<u64>();
    let q = inert as f64 / samples as f64;
    Ok(QEstimate { q, stderr: (q * (1.0 - q) / samples as f64).sqrt() })
}

/// Closed-form ansatz `q ~ (1 - 2 ln M / M)^(N^(1/alpha))`.
pub fn ansatz_q(pool: u32, size: u32, alpha: f64) -> Result<f64> {
    if pool < 4 {
        return Err(Error::domain(format!("ansatz needs M >= 4, got {pool}")));
    }
    if size < 1 {
        return Err(Error::domain("ansatz needs N >= 1"));
    }
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    let base = 1.0 - pair_divisibility_asymptotic(pool);
    if base <= 0.0 {
        return Err(Error::domain("2 ln M / M >= 1"));
    }
    Ok(base.powf((size as f64).powf(1.0 / alpha)))
}

/// Size at which the ansatz crosses `q = 0.5` (real-valued).
pub fn ansatz_threshold(pool: u32, alpha: f64) -> Result<f64> {
    ansatz_q(pool, 1, alpha)?;
    let base = 1.0 - pair_divisibility_asymptotic(pool);
    Ok((THRESHOLD_LEVEL.ln() / base.ln()).powf(alpha))
}

/// One row of an annealed curve; also the CSV record `M,N,q,q_stderr,S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealedRow {
    #[serde(rename = "M")]
    pub pool: u32,
    #[serde(rename = "N")]
    pub size: u32,
    pub q: f64,
    pub q_stderr: f64,
    #[serde(rename = "S")]
    pub samples: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealedCurve {
    pub pool: u32,
    pub samples: u32,
    /// Rows in increasing `N`.
    pub rows: Vec<AnnealedRow>,
}

impl AnnealedCurve {
    pub fn from_rows(mut rows: Vec<AnnealedRow>) -> Result<Self> {
        let first = *rows.first().ok_or_else(|| Error::domain("annealed curve has no rows"))?;
        if rows.iter().any(|r| r.pool != first.pool) {
            return Err(Error::domain("annealed curve rows must share one M"));
        }
        rows.sort_by_key(|r| r.size);
        Ok(Self { pool: first.pool, samples: first.samples, rows })
    }
}

/// Evaluates [`estimate_q`] on every size of `grid`.
pub fn annealed_curve(pool: u32, grid: &[u32], samples: u32, master_seed: u64) -> Result<AnnealedCurve> {
    if grid.is_empty() {
        return Err(Error::domain("N grid is empty"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("N grid must be strictly increasing"));
    }
    let rows = grid
        .iter()
        .map(|&n| {
            let est = estimate_q(pool, n, samples, master_seed)?;
            Ok(AnnealedRow { pool, size: n, q: est.q, q_stderr: est.stderr, samples })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AnnealedCurve { pool, samples, rows })
}

/// `N_c` where `q` falls through 0.5, by linear interpolation between the
/// first pair of consecutive grid points that brackets it.
pub fn annealed_threshold(curve: &AnnealedCurve) -> Result<f64> {
    curve
        .rows
        .windows(2)
        .find(|w| w[0].q >= THRESHOLD_LEVEL && w[1].q < THRESHOLD_LEVEL)
        .map(|w| {
            let (n0, n1) = (w[0].size as f64, w[1].size as f64);
            n0 + (w[0].q - THRESHOLD_LEVEL) / (w[0].q - w[1].q) * (n1 - n0)
        })
        .ok_or_else(|| {
            Error::range(format!(
                "q never crosses {THRESHOLD_LEVEL} on the N grid for M = {}; widen the grid",
                curve.pool
            ))
        })
}

/// Finds the annealed threshold adaptively: doubles `N` until `q < 0.5`,
/// then bisects until the bracketing gap is at most `rel_gap * N` (and at
/// least one unit). Returns the threshold and every evaluated point.
pub fn locate_annealed_threshold(
    pool: u32,
    samples: u32,
    master_seed: u64,
    rel_gap: f64,
) -> Result<(f64, AnnealedCurve)> {
    let mut rows = Vec::new();
    let mut eval = |n: u32| -> Result<f64> {
        let est = estimate_q(pool, n, samples, master_seed)?;
        rows.push(AnnealedRow { pool, size: n, q: est.q, q_stderr: est.stderr, samples });
        Ok(est.q)
    };
    let mut lo = 1u32;
    eval(lo)?;
    let mut hi = 2u32;
    while eval(hi)? >= THRESHOLD_LEVEL {
        lo = hi;
        hi = hi
            .checked_mul(2)
            .filter(|&h| h <= 1 << 24)
            .ok_or_else(|| Error::range(format!("q stays above 0.5 up to N = {hi}")))?;
    }
    while hi - lo > ((rel_gap * lo as f64).floor() as u32).max(1) {
        let mid = lo + (hi - lo) / 2;
        if eval(mid)? >= THRESHOLD_LEVEL {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let curve = AnnealedCurve::from_rows(rows)?;
    Ok((annealed_threshold(&curve)?, curve))
}

/// Least-squares `alpha` for the ansatz against a measured curve, by
/// golden-section search over `alpha` in `[lo, hi]`. Rows with `q` equal
/// to 0 or 1 carry no shape information and are skipped.
pub fn fit_ansatz_alpha(curve: &AnnealedCurve, lo: f64, hi: f64) -> Result<f64> {
    let rows: Vec<_> = curve.rows.iter().filter(|r| r.q > 0.0 && r.q < 1.0).collect();
    if rows.len() < 2 {
        return Err(Error::range("need at least two rows with 0 < q < 1 to fit the ansatz"));
    }
    let loss = |alpha: f64| -> f64 {
        rows.iter()
            .map(|r| {
                let model = ansatz_q(curve.pool, r.size, alpha).unwrap_or(f64::NAN);
                (model - r.q).powi(2)
            })
            .sum()
    };
    Ok(golden_section(loss, lo, hi, 1e-6))
}

pub(crate) fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Ordered pairs (a, b) from {2..M}^2, a != b, one dividing the other.
    fn brute_force_probability(pool: u32) -> f64 {
        let mut count = 0u64;
        for a in 2..=pool {
            for b in 2..=pool {
                if a != b && (a % b == 0 || b % a == 0) {
                    count += 1;
                }
            }
        }
        let span = (pool - 1) as f64;
        count as f64 / (span * span)
    }

    #[test]
    fn exact_sum_matches_enumeration() {
        for m in 4..=300 {
            assert_eq!(pair_divisibility_probability(m).unwrap(), brute_force_probability(m), "M = {m}");
        }
        assert_eq!(pair_divisibility_probability(5).unwrap(), 0.125);
        assert_eq!(pair_divisibility_probability(10).unwrap(), 16.0 / 81.0);
        assert!(pair_divisibility_probability(3).is_err());
    }

    #[test]
    fn asymptotic_form_at_large_pool() {
        // the exact sum behaves as 2 (ln M - (3 - 2 gamma)) / M, so the ratio
        // to the asymptotic form approaches 1 only logarithmically
        let euler_gamma = 0.577_215_664_901_532_9;
        let mut prev = 0.0;
        for k in 10..=20 {
            let m = 1u32 << k;
            let ratio = pair_divisibility_probability(m).unwrap() / pair_divisibility_asymptotic(m);
            let expansion = 1.0 - (3.0 - 2.0 * euler_gamma) / (m as f64).ln();
            assert!((ratio - expansion).abs() < 3e-3, "M = 2^{k}: {ratio} vs {expansion}");
            assert!(ratio > prev);
            prev = ratio;
        }
        let at16 = pair_divisibility_probability(1 << 16).unwrap() / pair_divisibility_asymptotic(1 << 16);
        assert!((at16 - 0.8337).abs() < 1e-3);
        let at18 = pair_divisibility_probability(1 << 18).unwrap() / pair_divisibility_asymptotic(1 << 18);
        assert!((at18 - 1.0).abs() < 0.15);
    }

    #[test]
    fn q_edge_cases() {
        let one = estimate_q(1024, 1, 100, 0).unwrap();
        assert_eq!(one.q, 1.0);
        assert_eq!(one.stderr, 0.0);
        for k in [8, 10, 12] {
            let m = 1u32 << k;
            let est = estimate_q(m, 2, 100_000, 4).unwrap();
            let expect = 1.0 - pair_divisibility_probability(m).unwrap();
            assert!((est.q - expect).abs() <= 3.0 * est.stderr.max(1e-12), "M = {m}: {} vs {expect}", est.q);
        }
        assert!(estimate_q(1024, 10, 0, 0).is_err());
    }

    #[test]
    fn q_decreases_with_size() {
        let m = 1 << 12;
        let grid: Vec<u32> = (2..=120).step_by(6).collect();
        let curve = annealed_curve(m, &grid, 10_000, 8).unwrap();
        for w in curve.rows.windows(2) {
            let tol = 3.0 * (w[0].q_stderr.powi(2) + w[1].q_stderr.powi(2)).sqrt();
            assert!(w[1].q <= w[0].q + tol);
            assert!((0.0..=1.0).contains(&w[0].q));
        }
        assert!(curve.rows.first().unwrap().q > 0.95);
        assert!(curve.rows.last().unwrap().q < 0.05);
    }

    #[test]
    fn ansatz_properties() {
        let m = 1000;
        let q1 = ansatz_q(m, 1, 1.0).unwrap();
        assert!((q1 - (1.0 - 2.0 * (m as f64).ln() / m as f64)).abs() < 1e-15);
        let mut prev = 1.0;
        // stays above f64 underflow for this range
        for n in 1..60 {
            let q = ansatz_q(m, n, 0.48).unwrap();
            assert!(q > 0.0 && q <= 1.0);
            assert!(q < prev || n == 1);
            prev = q;
        }
        assert!(ansatz_q(3, 1, 1.0).is_err());
        assert!(ansatz_q(100, 1, 0.0).is_err());
        let nc = ansatz_threshold(m, 0.5).unwrap();
        assert!((ansatz_q(m, 1, 0.5).unwrap().powf(nc.powf(2.0)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ansatz_with_fitted_alpha_follows_estimates() {
        let m = 1 << 12;
        let grid: Vec<u32> = (4..=60).step_by(2).collect();
        let curve = annealed_curve(m, &grid, 10_000, 21).unwrap();
        let alpha = fit_ansatz_alpha(&curve, 0.2, 1.0).unwrap();
        // the shape exponent is not the threshold-scaling exponent
        assert!(alpha > 0.55 && alpha < 0.7, "alpha {alpha}");
        let worst = curve
            .rows
            .iter()
            .map(|r| (ansatz_q(m, r.size, alpha).unwrap() - r.q).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.05, "max deviation {worst}");
        let fixed = curve
            .rows
            .iter()
            .map(|r| (ansatz_q(m, r.size, 0.48).unwrap() - r.q).abs())
            .fold(0.0, f64::max);
        assert!(fixed > worst);
    }

    #[test]
    fn interpolated_threshold() {
        let row = |n, q| AnnealedRow { pool: 100, size: n, q, q_stderr: 0.0, samples: 1 };
        let curve = AnnealedCurve::from_rows(vec![row(10, 0.8), row(20, 0.2)]).unwrap();
        assert_eq!(annealed_threshold(&curve).unwrap(), 15.0);
        let high = AnnealedCurve::from_rows(vec![row(10, 0.9), row(20, 0.7)]).unwrap();
        assert!(matches!(annealed_threshold(&high), Err(Error::Range(_))));
    }

    #[test]
    fn adaptive_threshold_brackets_tightly() {
        let (nc, curve) = locate_annealed_threshold(1 << 10, 4000, 3, 0.05).unwrap();
        let below = curve.rows.iter().filter(|r| r.q >= 0.5).map(|r| r.size).max().unwrap();
        let above = curve.rows.iter().filter(|r| r.q < 0.5).map(|r| r.size).min().unwrap();
        assert!(below as f64 <= nc && nc <= above as f64);
        assert!((above - below) as f64 <= (0.05 * nc).max(1.0) + 1.0);
    }
}
