//! Number of ways to split `N` elements into disjoint pairs,
//! `N! / (2^(N/2) (N/2)!) = (N - 1)!!`, which grows faster than any
//! exponential.
//!
//! `cargo run --release --example search_space`

use primegen::scaling::{odd_double_factorial, search_space_size};

fn main() -> primegen::Result<()> {
    for n in [2, 4, 6, 10, 20, 50, 100, 200] {
        let g = search_space_size(n)?;
        assert_eq!(g, odd_double_factorial(n)?);
        let digits = g.to_string().len();
        println!("N = {n:>3}: G(N) has {digits:>3} digits{}", if digits <= 20 { format!(" = {g}") } else { String::new() });
    }
    Ok(())
}
