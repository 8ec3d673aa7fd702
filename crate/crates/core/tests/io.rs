use std::fs;
use std::path::Path;

use pfrac::bench::{parse_config_str, report, run_benchmark, Benchmark};
use pfrac::vtk;

fn bar_config(dir: &Path, scheme: &str) -> String {
    format!(
        "[problem]\nkind = \"bar1d\"\nscheme = \"{scheme}\"\n[mesh]\nn = 40\n[loading]\nrate = 0.02\nsteps = [{{ dt = 1.0, until = 120.0 }}]\n[output]\ndir = {dir:?}\nvtk_every = 40\n"
    )
}

#[test]
fn repeated_runs_give_identical_csv_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        run_benchmark(&parse_config_str(&bar_config(dir, "S3")).unwrap()).unwrap();
    }
    let read = |d: &Path| fs::read(d.join("bar1d_S3.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn csv_round_trips_report_rows() {
    let dir = tempfile::tempdir().unwrap();
    let rep = run_benchmark(&parse_config_str(&bar_config(dir.path(), "ST")).unwrap()).unwrap();
    let path = dir.path().join("bar1d_ST.csv");
    let back = report::read_csv(&path).unwrap();
    assert_eq!(back.len(), rep.rows.len());
    for (x, y) in rep.rows.iter().zip(&back) {
        assert_eq!((x.time, x.u, x.reaction), (y.time, y.u, y.reaction));
        assert_eq!((x.n_stag, x.n_nr_u, x.n_nr_d), (y.n_stag, y.n_nr_u, y.n_nr_d));
    }
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("time,u,reaction,n_stag,n_nr_u,n_nr_d"));
    assert_eq!(text.lines().count(), rep.rows.len() + 1);
}

#[test]
fn snapshots_parse_and_damage_stays_in_band() {
    let dir = tempfile::tempdir().unwrap();
    run_benchmark(&parse_config_str(&bar_config(dir.path(), "S1")).unwrap()).unwrap();
    let mut seen = 0;
    for k in [40, 80, 120] {
        let g = vtk::read_vtk(&dir.path().join(format!("bar1d_S1_{k:04}.vtk"))).unwrap();
        assert_eq!(g.points.len(), 41);
        assert_eq!(g.vectors["u"].len(), g.points.len());
        for &d in &g.scalars["d"] {
            assert!((-0.01..=1.01).contains(&d), "d = {d}");
        }
        seen += 1;
    }
    assert_eq!(seen, 3);
}

#[test]
fn plane_snapshot_has_quads_and_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config_str(&format!(
        "[problem]\nkind = \"tensile\"\n[mesh]\nnx = 8\n[loading]\nsteps = [{{ dt = 100.0, until = 200.0 }}]\n[output]\ndir = {:?}\n",
        dir.path()
    ))
    .unwrap();
    let mut b = Benchmark::new(&cfg).unwrap();
    while b.advance().unwrap().is_some() {}
    let path = dir.path().join("snap.vtk");
    b.write_snapshot(&path).unwrap();
    let g = vtk::read_vtk(&path).unwrap();
    assert_eq!(g.cells.len(), 64);
    assert!(g.cell_types.iter().all(|&t| t == vtk::VTK_QUAD));
    assert_eq!(g.points.len(), b.mesh().n_nodes());
    let top = b.mesh().select_boundary("top").unwrap()[0];
    assert_eq!(g.vectors["u"][top][1], 3e-5 * 200.0);
}
