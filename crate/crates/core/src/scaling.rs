//! Finite-size scaling: threshold detection, log-log power-law fits for the
//! critical exponents, data collapse and the pairing search-space size.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::annealed::golden_section;
use crate::ensemble::SweepTable;
use crate::error::{Error, Result};

/// Default `theta` of the first-nonzero criterion, about 10 / R at R = 2000.
pub const DEFAULT_THETA: f64 = 0.005;

/// Characteristic size `M / ln M`.
pub fn characteristic_size(pool: u32) -> f64 {
    let m = pool as f64;
    m / m.ln()
}

/// Ordinary least squares of `ln y` on `ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Slope in log-log.
    pub exponent: f64,
    /// Intercept of the log-log line (`ln` of the prefactor).
    pub intercept: f64,
    pub stderr_exponent: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

impl FitResult {
    pub fn prefactor(&self) -> f64 {
        self.intercept.exp()
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.prefactor() * x.powf(self.exponent)
    }
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::domain(format!("power-law fit needs >= 3 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::domain(format!("power-law fit needs positive coordinates, got ({x}, {y})")));
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("power-law fit needs at least two distinct x values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let stderr_exponent = if points.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    Ok(FitResult { exponent: slope, intercept, stderr_exponent, r_squared, points_used: points.len() })
}

/// How the threshold is read off a `P(N)` curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Criterion {
    /// Smallest grid `N` whose estimated `P` exceeds `theta`.
    FirstNonzero { theta: f64 },
    /// Linear interpolation of the first crossing of `P = 0.5`.
    HalfCrossing,
}

impl Default for Criterion {
    fn default() -> Self {
        Criterion::FirstNonzero { theta: DEFAULT_THETA }
    }
}

/// Threshold of a curve given as `(N, P)` points in increasing `N`.
pub fn detect_threshold_points(points: &[(f64, f64)], criterion: Criterion) -> Result<f64> {
    match criterion {
        Criterion::FirstNonzero { theta } => points
            .iter()
            .find(|p| p.1 > theta)
            .map(|p| p.0)
            .ok_or_else(|| Error::range(format!("P never exceeds {theta} on the grid; extend it"))),
        Criterion::HalfCrossing => points
            .windows(2)
            .find(|w| w[0].1 < 0.5 && w[1].1 >= 0.5)
            .map(|w| w[0].0 + (0.5 - w[0].1) / (w[1].1 - w[0].1) * (w[1].0 - w[0].0))
            .ok_or_else(|| Error::range("P never crosses 0.5 on the grid; extend it")),
    }
}

pub fn detect_threshold(table: &SweepTable, criterion: Criterion) -> Result<f64> {
    detect_threshold_points(&table.order_parameter(), criterion)
        .map_err(|e| match e {
            Error::Range(msg) => Error::range(format!("M = {}: {msg}", table.pool)),
            other => other,
        })
}

/// Fits `N_c ~ (M / ln M)^alpha` from `(M, N_c)` pairs.
pub fn threshold_scaling(thresholds: &[(u32, f64)]) -> Result<FitResult> {
    let pts: Vec<_> = thresholds.iter().map(|&(m, nc)| (characteristic_size(m), nc)).collect();
    fit_power_law(&pts)
}

/// How `n_c(infinity)` enters the correlation-exponent fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalPoint {
    Fixed(f64),
    /// Chosen to minimize the log-log residual.
    Free,
}

impl Default for CriticalPoint {
    fn default() -> Self {
        CriticalPoint::Fixed(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationFit {
    pub nu: f64,
    pub n_c: f64,
    pub fit: FitResult,
}

/// Correlation exponent from `|n_c(M) - n_c| ~ (M / ln M)^(-1/nu)` with the
/// reduced threshold `n_c(M) = N_c(M) / (M / ln M)`.
pub fn correlation_exponent_from_thresholds(
    thresholds: &[(u32, f64)],
    critical_point: CriticalPoint,
) -> Result<CorrelationFit> {
    if thresholds.len() < 4 {
        return Err(Error::domain(format!(
            "correlation exponent needs >= 4 pool sizes, got {}",
            thresholds.len()
        )));
    }
    let reduced: Vec<(f64, f64)> = thresholds
        .iter()
        .map(|&(m, nc)| {
            let l = characteristic_size(m);
            (l, nc / l)
        })
        .collect();
    let fit_at = |n_c: f64| -> Result<FitResult> {
        let pts: Vec<_> = reduced.iter().map(|&(l, n)| (l, (n - n_c).abs())).collect();
        fit_power_law(&pts)
    };
    let n_c = match critical_point {
        CriticalPoint::Fixed(v) => v,
        CriticalPoint::Free => {
            let upper = reduced.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let sse = |c: f64| fit_at(c).map(|f| 1.0 - f.r_squared).unwrap_or(f64::INFINITY);
            golden_section(sse, 0.0, upper * (1.0 - 1e-9), 1e-12 * upper.max(1.0))
        }
    };
    let fit = fit_at(n_c)?;
    if fit.exponent == 0.0 {
        return Err(Error::range("reduced thresholds do not scale with size"));
    }
    Ok(CorrelationFit { nu: -1.0 / fit.exponent, n_c, fit })
}

/// Detects `N_c` on each table and fits the correlation exponent.
pub fn correlation_exponent(
    tables: &[SweepTable],
    criterion: Criterion,
    critical_point: CriticalPoint,
) -> Result<CorrelationFit> {
    let thresholds = thresholds(tables, criterion)?;
    correlation_exponent_from_thresholds(&thresholds, critical_point)
}

/// `(M, N_c)` for every table, sorted by `M`.
pub fn thresholds(tables: &[SweepTable], criterion: Criterion) -> Result<Vec<(u32, f64)>> {
    let mut out = tables
        .iter()
        .map(|t| Ok((t.pool, detect_threshold(t, criterion)?)))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|p| p.0);
    Ok(out)
}

/// Linear interpolation of `P` at real-valued `N`.
pub fn interpolate_p(table: &SweepTable, n: f64) -> Result<f64> {
    interpolate(&table.order_parameter(), n)
        .ok_or_else(|| Error::range(format!("N = {n} outside the grid of M = {}", table.pool)))
}

fn interpolate(points: &[(f64, f64)], x: f64) -> Option<f64> {
    let (first, last) = (points.first()?, points.last()?);
    if x < first.0 || x > last.0 {
        return None;
    }
    if points.len() == 1 {
        return Some(first.1);
    }
    let k = points.partition_point(|p| p.0 <= x).clamp(1, points.len() - 1);
    let (a, b) = (points[k - 1], points[k]);
    if b.0 == a.0 {
        return Some(a.1);
    }
    Some(a.1 + (x - a.0) / (b.0 - a.0) * (b.1 - a.1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderParameterFit {
    pub beta: f64,
    pub fit: FitResult,
}

/// Order-parameter exponent from `P(N_c(M)) ~ (M / ln M)^(-beta/nu)`, with
/// `P` interpolated at each table's detected threshold.
pub fn order_parameter_exponent(tables: &[SweepTable], criterion: Criterion, nu: f64) -> Result<OrderParameterFit> {
    let mut pts = Vec::with_capacity(tables.len());
    for t in tables {
        let nc = detect_threshold(t, criterion)?;
        pts.push((characteristic_size(t.pool), interpolate_p(t, nc)?));
    }
    let fit = fit_power_law(&pts)?;
    Ok(OrderParameterFit { beta: -fit.exponent * nu, fit })
}

/// Rescaling parameters of a collapse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseParams {
    pub n_c: f64,
    pub nu: f64,
    pub beta: f64,
}

impl CollapseParams {
    fn check(&self) -> Result<()> {
        if self.nu == 0.0 || !self.nu.is_finite() {
            return Err(Error::domain(format!("nu must be finite and non-zero, got {}", self.nu)));
        }
        Ok(())
    }

    /// `(N, y) -> (x~, y~)` for pool `M`.
    pub fn forward(&self, pool: u32, size: f64, y: f64) -> (f64, f64) {
        let l = characteristic_size(pool);
        let n = size / l;
        ((n - self.n_c) * l.powf(1.0 / self.nu), y * l.powf(self.beta / self.nu))
    }

    /// Inverse of [`forward`](Self::forward).
    pub fn inverse(&self, pool: u32, x: f64, y: f64) -> (f64, f64) {
        let l = characteristic_size(pool);
        let n = x * l.powf(-1.0 / self.nu) + self.n_c;
        (n * l, y * l.powf(-self.beta / self.nu))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    #[serde(rename = "M")]
    pub pool: u32,
    #[serde(rename = "N")]
    pub size: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseCurve {
    pub pool: u32,
    pub points: Vec<CollapsePoint>,
}

/// Rescaled curves, one per pool size, sorted by `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseTable {
    pub params: CollapseParams,
    pub curves: Vec<CollapseCurve>,
}

/// Rescales each `(N, P)` curve to `x~ = (n - n_c) L^(1/nu)`,
/// `y~ = P L^(beta/nu)` with `L = M / ln M` and `n = N / L`.
pub fn collapse(tables: &[SweepTable], params: CollapseParams) -> Result<CollapseTable> {
    collapse_with(tables, params, |row| row.p)
}

/// As [`collapse`] for an arbitrary column (e.g. `tau`).
pub fn collapse_with<F>(tables: &[SweepTable], params: CollapseParams, column: F) -> Result<CollapseTable>
where
    F: Fn(&crate::ensemble::SweepRow) -> f64,
{
    params.check()?;
    let mut pools: Vec<u32> = tables.iter().map(|t| t.pool).collect();
    pools.sort_unstable();
    pools.dedup();
    if pools.len() < 2 {
        return Err(Error::domain("collapse needs tables for at least two distinct M"));
    }
    let mut curves: Vec<CollapseCurve> = tables
        .iter()
        .map(|t| CollapseCurve {
            pool: t.pool,
            points: t
                .rows
                .iter()
                .map(|r| {
                    let (x, y) = params.forward(t.pool, r.size as f64, column(r));
                    CollapsePoint { pool: t.pool, size: r.size, x, y }
                })
                .collect(),
        })
        .collect();
    curves.sort_by(|a, b| a.pool.cmp(&b.pool).then_with(|| a.points.len().cmp(&b.points.len())));
    Ok(CollapseTable { params, curves })
}

/// Spread of collapsed curves around their pointwise median on the common
/// `x~` range; lower is better.
///
/// The grid is the union of all curves' `x~` inside the overlap. At each grid
/// point every curve is linearly interpolated; the reference is the lower
/// median of those values and the score is the mean squared distance of the
/// remaining `k - 1` curves to it, averaged over the grid.
pub fn collapse_quality(table: &CollapseTable) -> Result<f64> {
    let curves: Vec<Vec<(f64, f64)>> = table
        .curves
        .iter()
        .map(|c| {
            let mut pts: Vec<(f64, f64)> = c.points.iter().map(|p| (p.x, p.y)).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            pts
        })
        .filter(|pts| !pts.is_empty())
        .collect();
    if curves.len() < 2 {
        return Err(Error::range("collapse quality needs at least two non-empty curves"));
    }
    let lo = curves.iter().map(|c| c[0].0).fold(f64::NEG_INFINITY, f64::max);
    let hi = curves.iter().map(|c| c[c.len() - 1].0).fold(f64::INFINITY, f64::min);
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::range(format!("collapsed curves do not overlap (x~ in [{lo}, {hi}])")));
    }
    let mut grid: Vec<f64> = curves.iter().flatten().map(|p| p.0).filter(|&x| x >= lo && x <= hi).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let k = curves.len();
    let mut total = 0.0;
    let mut ys = Vec::with_capacity(k);
    for &x in &grid {
        ys.clear();
        ys.extend(curves.iter().map(|c| interpolate(c, x).expect("x inside overlap")));
        ys.sort_by(f64::total_cmp);
        let mid = (k - 1) / 2;
        let median = ys[mid];
        let spread: f64 = ys.iter().map(|y| (y - median).powi(2)).sum();
        total += spread / (k - 1) as f64;
    }
    Ok(total / grid.len() as f64)
}

/// Grid argmax of `tau`; ties go to the smaller `N`.
pub fn tau_peak(table: &SweepTable) -> Result<(u32, f64)> {
    let mut rows: Vec<_> = table.rows.iter().collect();
    rows.sort_by_key(|r| r.size);
    rows.into_iter()
        .fold(None, |best: Option<(u32, f64)>, r| match best {
            Some((_, t)) if t >= r.tau => best,
            _ => Some((r.size, r.tau)),
        })
        .ok_or_else(|| Error::domain("tau_peak on an empty table"))
}

/// Fits `tau_max ~ (M / ln M)^delta` across tables.
pub fn tau_peak_scaling(tables: &[SweepTable]) -> Result<FitResult> {
    let pts = tables
        .iter()
        .map(|t| Ok((characteristic_size(t.pool), tau_peak(t)?.1)))
        .collect::<Result<Vec<_>>>()?;
    fit_power_law(&pts)
}

/// Number of ways to split `N` elements into `N / 2` unordered pairs,
/// `N! / (2^(N/2) (N/2)!)`.
pub fn search_space_size(size: u32) -> Result<BigUint> {
    check_even(size)?;
    let half = size / 2;
    let fact = |k: u32| (1..=k).fold(BigUint::one(), |acc, i| acc * i);
    Ok(fact(size) / (BigUint::one() << half as usize) / fact(half))
}

/// `(N - 1)!!` as a product of odd numbers.
pub fn odd_double_factorial(size: u32) -> Result<BigUint> {
    check_even(size)?;
    Ok((1..size).step_by(2).fold(BigUint::one(), |acc, i| acc * i))
}

fn check_even(size: u32) -> Result<()> {
    if size < 2 || !size.is_multiple_of(2) {
        return Err(Error::domain(format!("search space needs an even N >= 2, got {size}")));
    }
    Ok(())
}
