//! Builds the benchmark meshes and writes them as VTK for inspection.
//!
//! cargo run --example mesh_export [out dir]

use std::path::PathBuf;

use pfrac::mesh::{build_line_mesh, build_lshape_mesh, build_notched_square};
use pfrac::vtk::write_vtk_snapshot;

fn main() -> pfrac::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/meshes".into()));
    std::fs::create_dir_all(&out).map_err(|e| pfrac::Error::Io { path: out.clone(), source: e })?;
    let meshes = [
        ("bar", build_line_mesh(100, 1.0)?),
        ("notched_square", build_notched_square(20, 20, 1.0, true)?),
        ("lshape", build_lshape_mesh(250.0 / 8.0)?),
    ];
    for (name, m) in &meshes {
        let n = m.n_nodes();
        // open the notch a little so the duplicated nodes are visible
        let mut u = vec![0.0; 2 * n];
        if let Some(notch) = &m.notch {
            for (i, x) in m.coords.iter().enumerate() {
                if x[1] > notch.tip[1] {
                    u[2 * i + 1] = 0.01;
                }
            }
        }
        let path = out.join(format!("{name}.vtk"));
        write_vtk_snapshot(m, &u, &vec![0.0; n], &path)?;
        println!("{name}: {n} nodes, {} cells, measure {:.6} -> {}", m.n_cells(), m.measure(), path.display());
        for (tag, nodes) in &m.boundary_sets {
            println!("  {tag}: {} nodes", nodes.len());
        }
    }
    Ok(())
}
