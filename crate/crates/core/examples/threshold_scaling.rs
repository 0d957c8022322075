//! Finite-size scaling of the simulated threshold: `N_c ~ (M / ln M)^alpha`,
//! the correlation exponent `nu` from the reduced thresholds and the order
//! parameter exponent `beta`, for both threshold criteria.
//!
//! `cargo run --release --example threshold_scaling [realizations]`

use primegen::scaling::{
    correlation_exponent_from_thresholds, order_parameter_exponent, threshold_scaling, thresholds, CriticalPoint,
};
use primegen::{sweep_over_n, Criterion, DEFAULT_MAX_SWEEPS};

fn main() -> primegen::Result<()> {
    let realizations = std::env::args().nth(1).map_or(1_000, |s| s.parse().expect("realizations"));
    let mut tables = Vec::new();
    for (k, top) in [(10, 60), (11, 80), (12, 110), (13, 150)] {
        let grid: Vec<u32> = (6..=top).collect();
        tables.push(sweep_over_n(1 << k, &grid, realizations, 2, DEFAULT_MAX_SWEEPS)?);
    }
    for criterion in [Criterion::FirstNonzero { theta: 0.005 }, Criterion::HalfCrossing] {
        let th = thresholds(&tables, criterion)?;
        let alpha = threshold_scaling(&th)?;
        let corr = correlation_exponent_from_thresholds(&th, CriticalPoint::Fixed(0.0))?;
        let order = order_parameter_exponent(&tables, criterion, corr.nu)?;
        println!("{criterion:?}");
        println!("  N_c = {th:?}");
        println!("  alpha = {:.3} (+- {:.3})", alpha.exponent, alpha.stderr_exponent);
        println!("  nu = {:.3}  (1 / (1 - alpha) = {:.3})", corr.nu, 1.0 / (1.0 - alpha.exponent));
        println!("  beta = {:.3}", order.beta);
    }
    Ok(())
}
