//! Time to stationarity `tau` against `N`: it peaks near the transition and
//! the peak height grows slowly with `M / ln M`.
//!
//! `cargo run --release --example easy_hard_easy [realizations]`

use primegen::scaling::{tau_peak, tau_peak_scaling};
use primegen::{detect_threshold, sweep_over_n, Criterion, DEFAULT_MAX_SWEEPS};

fn main() -> primegen::Result<()> {
    let realizations = std::env::args().nth(1).map_or(500, |s| s.parse().expect("realizations"));
    let mut tables = Vec::new();
    for (k, top) in [(10, 100), (11, 130), (12, 180), (13, 250)] {
        let grid: Vec<u32> = (4..=top).step_by(2).collect();
        let table = sweep_over_n(1 << k, &grid, realizations, 4, DEFAULT_MAX_SWEEPS)?;
        let (n, tau) = tau_peak(&table)?;
        let half = detect_threshold(&table, Criterion::HalfCrossing)?;
        println!("M = 2^{k}: tau peaks at N = {n} (tau = {tau:.3}); P crosses 0.5 at N = {half:.1}");
        tables.push(table);
    }
    let fit = tau_peak_scaling(&tables)?;
    println!("tau_max ~ (M / ln M)^{:.3} (+- {:.3})", fit.exponent, fit.stderr_exponent);
    Ok(())
}
