//! Stochastic prime number generator.
//!
//! A multiset of `N` integers drawn from `{2..M}` evolves by random pairwise
//! collisions: when the smaller of two distinct values divides the larger,
//! the larger is replaced by the quotient. The dynamics stops once no such
//! pair remains. Depending on `N` the final state is either made entirely of
//! primes or frozen with a low prime density, and the crossover sharpens into
//! a continuous phase transition as `M` grows.
//!
//! Modules:
//!
//! * [`number_theory`]: prime tables and the `pi(M) / (M - 1)` baseline.
//! * [`reactor`]: collision rules, sweeps and the frozen-state test.
//! * [`ensemble`]: order parameters `r`, `P` and the time `tau` over many
//!   seeded realizations, plus final-value histograms.
//! * [`annealed`]: the no-reactive-pair probability `q(N, M)` for freshly
//!   drawn systems, its closed-form ansatz and the `q = 0.5` threshold.
//! * [`scaling`]: threshold detection, log-log exponent fits, data collapse
//!   and the pairing search-space size `(N - 1)!!`.
//! * [`cli`]: the `primegen` command line.
//!
//! Runnable walkthroughs live in `examples/`; start with
//! `cargo run --release --example phase_transition`.

pub mod annealed;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod number_theory;
pub mod reactor;
pub mod scaling;
pub mod stream;

pub use annealed::{
    annealed_curve, annealed_threshold, ansatz_q, estimate_q, locate_annealed_threshold,
    pair_divisibility_probability, AnnealedCurve, AnnealedRow, QEstimate,
};
pub use ensemble::{
    run_ensemble, run_ensemble_from, steady_distribution, sweep_over_n, EnsembleStats, Histogram,
    SweepRow, SweepTable,
};
pub use error::{Error, Result};
pub use number_theory::{expected_residual_ratio, PrimeTable};
pub use reactor::{
    collide, is_frozen, run_from_state, run_to_stationarity, sweep, CollisionKind,
    CollisionOutcome, Reactor, RunRecord, RunStatus, SystemState, DEFAULT_MAX_SWEEPS,
};
pub use scaling::{
    characteristic_size, collapse, collapse_quality, detect_threshold, fit_power_law,
    search_space_size, tau_peak, CollapseParams, CollapseTable, Criterion, FitResult,
};
