//! All four schemes on one configuration file, with the comparison table.
//!
//! cargo run --release --example sweep -- configs/bar1d.toml

use std::path::PathBuf;

use pfrac::bench::{parse_config, sweep};

fn main() -> pfrac::Result<()> {
    let path = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "configs/bar1d.toml".into()));
    let cfg = parse_config(&path)?;
    let rows = sweep(&cfg)?;
    let st = rows[0].max_n_stag.max(1) as f64;
    for r in &rows {
        println!(
            "{:<3} max {:>4} ({:>5.1}% of ST) total {:>6} nr_u {:>6} nr_d {:>6} peak {:.4e}",
            r.scheme,
            r.max_n_stag,
            100.0 * r.max_n_stag as f64 / st,
            r.total_n_stag,
            r.total_nr_u,
            r.total_nr_d,
            r.peak_force
        );
    }
    println!("written to {}", cfg.output.dir.display());
    Ok(())
}
