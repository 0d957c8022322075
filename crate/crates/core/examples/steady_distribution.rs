//! Final-value histograms at `M = 10^4`. In the ordered phase (`N = 110`)
//! prime counts fall off like `1/x`; in the disordered phase (`N = 10`) the
//! values stay close to uniform, apart from the small quotients left by the
//! few runs that react.
//!
//! `cargo run --release --example steady_distribution`

use primegen::{fit_power_law, run_ensemble, PrimeTable, DEFAULT_MAX_SWEEPS};

fn main() -> primegen::Result<()> {
    let pool = 10_000;
    let table = PrimeTable::new(pool)?;

    let ordered = run_ensemble(pool, 110, 2_000, 5, DEFAULT_MAX_SWEEPS)?;
    let pts: Vec<(f64, f64)> = table
        .primes()
        .map(|p| (p as f64, ordered.histogram.count(p) as f64))
        .filter(|p| p.1 > 0.0)
        .collect();
    let fit = fit_power_law(&pts)?;
    println!("N = 110: P = {:.3}, r = {:.3}", ordered.p, ordered.r_mean);
    println!(
        "  prime histogram ~ x^{:.3} (+- {:.3}) over {} primes",
        fit.exponent, fit.stderr_exponent, fit.points_used
    );
    for p in [2, 3, 5, 7, 11, 101, 1009, 9973] {
        println!("  count({p}) = {}", ordered.histogram.count(p));
    }

    let disordered = run_ensemble(pool, 10, 20_000, 5, DEFAULT_MAX_SWEEPS)?;
    println!("N = 10: r = {:.4}, P = {:.4}", disordered.r_mean, disordered.p);
    let deciles = disordered.histogram.binned(2, pool, 10);
    let mean = deciles.iter().sum::<u64>() as f64 / 10.0;
    for (i, c) in deciles.iter().enumerate() {
        println!("  decile {i}: {c:>6} ({:+.2}%)", 100.0 * (*c as f64 / mean - 1.0));
    }
    Ok(())
}
