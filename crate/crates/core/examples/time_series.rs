//! Single trajectories at `M = 2^14`: cumulative reactions and prime ratio
//! per sweep, below, near and above the transition.
//!
//! `cargo run --release --example time_series [seed]`

use primegen::{run_to_stationarity, stream, PrimeTable, DEFAULT_MAX_SWEEPS};

fn main() -> primegen::Result<()> {
    let seed = std::env::args().nth(1).map_or(3, |s| s.parse().expect("seed"));
    let pool = 1 << 14;
    let table = PrimeTable::new(pool)?;
    for size in [10, 100, 1000] {
        let mut rng = stream::substream(seed, stream::Purpose::Reactor, pool, size, 0);
        let run = run_to_stationarity(pool, size, &table, &mut rng, DEFAULT_MAX_SWEEPS)?;
        println!(
            "N = {size}: {} sweeps, {} reactions, all primes: {}",
            run.sweeps, run.reactions_total, run.all_primes
        );
        println!("{:>6} {:>10} {:>8}", "t", "reactions", "r");
        for (t, (c, r)) in run.reactions_cumulative.iter().zip(&run.prime_ratio_series).enumerate() {
            println!("{:>6} {:>10} {:>8.4}", t + 1, c, r);
        }
        println!();
    }
    Ok(())
}
