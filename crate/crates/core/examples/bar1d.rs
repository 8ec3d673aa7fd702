//! 1D bar under end displacement: standard vs fixed-stress staggering.
//!
//! cargo run --release --example bar1d [imperfection]

use pfrac::oned::{Bar1D, BarParams};
use pfrac::schemes::{Scheme, SolverConfig};

fn main() -> pfrac::Result<()> {
    let imperfection: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("imperfection must be a number"))
        .unwrap_or(1e-6);
    for scheme in [Scheme::ST, Scheme::S3] {
        let mut bar = Bar1D::new(100, 1.0, BarParams::reference(), SolverConfig::default())?
            .with_imperfection(imperfection);
        let mut worst = (0, 0);
        for step in 1..=220 {
            let stats = bar.evolve_1d(0.01 * step as f64, scheme)?;
            if stats.n_stag > worst.1 {
                worst = (step, stats.n_stag);
            }
        }
        let cracked = bar.state.d.iter().filter(|&&d| d > 0.5).count();
        println!(
            "{scheme}: hardest step {} with {} staggered iterations; {cracked} nodes with d > 0.5",
            worst.0, worst.1
        );
    }
    Ok(())
}
