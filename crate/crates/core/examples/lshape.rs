//! L-shaped panel lifted at the arm tip; writes VTK snapshots of the crack.
//!
//! cargo run --release --example lshape [scheme] [element size] [out dir]

use std::path::PathBuf;

use pfrac::bench::{parse_config_str, Benchmark};

fn main() -> pfrac::Result<()> {
    let mut args = std::env::args().skip(1);
    let scheme = args.next().unwrap_or_else(|| "S3".into());
    let h: f64 = args.next().map_or(250.0 / 16.0, |s| s.parse().expect("element size"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/lshape-example".into()));
    std::fs::create_dir_all(&out).map_err(|e| pfrac::Error::Io { path: out.clone(), source: e })?;
    let cfg = parse_config_str(&format!("[problem]\nkind = \"lshape\"\nscheme = \"{scheme}\"\n[mesh]\nh = {h}\n"))?;
    let mut bench = Benchmark::new(&cfg)?;
    while let Some(r) = bench.advance()?.cloned() {
        let k = bench.steps_done();
        if k % 50 == 0 || r.n_stag > 10 {
            println!("step {k:>3} t = {:.3} F = {:.4e} n_stag = {}", r.time, r.reaction, r.n_stag);
        }
        if k % 50 == 0 {
            bench.write_snapshot(&out.join(format!("lshape_{k:04}.vtk")))?;
        }
    }
    println!("snapshots in {}", out.display());
    Ok(())
}
