//! Annealed approximation: exact pair divisibility probability, the
//! no-reactive-pair probability `q(N, M)`, its thresholds and the closed-form
//! ansatz.
//!
//! `cargo run --release --example annealed`

use primegen::annealed::{
    self, ansatz_q, fit_ansatz_alpha, locate_annealed_threshold, pair_divisibility_asymptotic,
    pair_divisibility_probability,
};
use primegen::scaling::threshold_scaling;

fn main() -> primegen::Result<()> {
    println!("{:>8} {:>12} {:>12}", "M", "p(M)", "2 ln M / M");
    for k in [4, 6, 8, 10, 12, 14, 16] {
        let m = 1u32 << k;
        println!("{m:>8} {:>12.6} {:>12.6}", pair_divisibility_probability(m)?, pair_divisibility_asymptotic(m));
    }

    let mut thresholds = Vec::new();
    for k in 10..=16 {
        let m = 1u32 << k;
        let (nc, _) = locate_annealed_threshold(m, 10_000, 11, 0.05)?;
        thresholds.push((m, nc));
    }
    let fit = threshold_scaling(&thresholds)?;
    println!("\nq = 0.5 thresholds: {thresholds:?}");
    println!("N_c ~ (M / ln M)^{:.3} (+- {:.3})", fit.exponent, fit.stderr_exponent);

    let m = 1 << 12;
    let grid: Vec<u32> = (1..=80).step_by(4).collect();
    let curve = annealed::annealed_curve(m, &grid, 10_000, 11)?;
    let alpha = fit_ansatz_alpha(&curve, 0.3, 1.0)?;
    println!("\nM = 2^12, ansatz fitted with alpha = {alpha:.3}");
    println!("{:>4} {:>8} {:>8}", "N", "q", "ansatz");
    for row in &curve.rows {
        println!("{:>4} {:>8.4} {:>8.4}", row.size, row.q, ansatz_q(m, row.size, alpha)?);
    }
    Ok(())
}
