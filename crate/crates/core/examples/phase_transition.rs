//! Prime ratio `r` and all-prime fraction `P` against `N` for three pool
//! sizes. Small `N` freezes with `r` near `pi(M)/(M-1)`; large `N` ends all
//! prime.
//!
//! `cargo run --release --example phase_transition [realizations]`

use primegen::{expected_residual_ratio, sweep_over_n, DEFAULT_MAX_SWEEPS};

fn main() -> primegen::Result<()> {
    let realizations = std::env::args().nth(1).map_or(500, |s| s.parse().expect("realizations"));
    let grid = [2, 5, 10, 20, 30, 50, 75, 100, 150, 200, 300, 500];
    for k in [10, 12, 14] {
        let pool = 1u32 << k;
        let table = sweep_over_n(pool, &grid, realizations, 1, DEFAULT_MAX_SWEEPS)?;
        println!("M = 2^{k}  (pi(M)/(M-1) = {:.4})", expected_residual_ratio(pool)?);
        println!("{:>6} {:>8} {:>8} {:>8}", "N", "r", "P", "tau");
        for row in &table.rows {
            println!("{:>6} {:>8.4} {:>8.4} {:>8.3}", row.size, row.r_mean, row.p, row.tau);
        }
        println!();
    }
    Ok(())
}
