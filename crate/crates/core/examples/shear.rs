//! Notched square sheared along the top edge.
//!
//! cargo run --release --example shear [scheme] [cells per side]

use pfrac::bench::{parse_config_str, Benchmark};

fn main() -> pfrac::Result<()> {
    let mut args = std::env::args().skip(1);
    let scheme = args.next().unwrap_or_else(|| "S3".into());
    let cells: usize = args.next().map_or(40, |s| s.parse().expect("cell count"));
    let cfg = parse_config_str(&format!(
        "[problem]\nkind = \"shear\"\nscheme = \"{scheme}\"\n[mesh]\nnx = {cells}\n"
    ))?;
    let mut bench = Benchmark::new(&cfg)?;
    while let Some(r) = bench.advance()?.cloned() {
        let d = bench.damage();
        let broken = d.iter().filter(|&&v| v > 0.95).count();
        println!("t = {:>5} F = {:>10.4e} n_stag = {:>3} nodes with d > 0.95: {broken}", r.time, r.reaction, r.n_stag);
    }
    Ok(())
}
