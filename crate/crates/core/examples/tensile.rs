//! Notched square pulled at the top edge.
//!
//! cargo run --release --example tensile [scheme] [cells per side]

use pfrac::bench::{parse_config_str, Benchmark};

fn main() -> pfrac::Result<()> {
    let mut args = std::env::args().skip(1);
    let scheme = args.next().unwrap_or_else(|| "S3".into());
    let cells: usize = args.next().map_or(40, |s| s.parse().expect("cell count"));
    let cfg = parse_config_str(&format!(
        "[problem]\nkind = \"tensile\"\nscheme = \"{scheme}\"\n[mesh]\nnx = {cells}\n"
    ))?;
    let mut bench = Benchmark::new(&cfg)?;
    println!("{:>8} {:>10} {:>12} {:>6}", "t", "u", "F", "n_stag");
    while let Some(r) = bench.advance()? {
        println!("{:>8} {:>10.3e} {:>12.4e} {:>6}", r.time, r.u, r.reaction, r.n_stag);
    }
    let s = bench.report.summary();
    println!("max n_stag {}, total {}, peak force {:.4e}", s.max_n_stag, s.total_n_stag, s.peak_force);
    Ok(())
}
