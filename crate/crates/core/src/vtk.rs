//! Legacy-VTK ASCII unstructured grids: a writer for damage and displacement
//! snapshots and a strict reader used to check what was written.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{CellKind, Mesh};

pub const VTK_LINE: u8 = 3;
pub const VTK_QUAD: u8 = 9;

fn cell_type(kind: CellKind) -> u8 {
    match kind {
        CellKind::Line2 => VTK_LINE,
        CellKind::Quad4 => VTK_QUAD,
    }
}

/// Renders the mesh with point data `d` (scalar) and `u` (2 components per
/// node, written as 3-vectors with zero z).
pub fn render(mesh: &Mesh, u: &[f64], d: &[f64], title: &str) -> Result<String> {
    let n = mesh.n_nodes();
    if d.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: d.len(),
        });
    }
    if u.len() != 2 * n {
        return Err(Error::SizeMismatch {
            expected: 2 * n,
            got: u.len(),
        });
    }
    let title = title.lines().next().unwrap_or("");
    let npc = mesh.kind.nodes_per_cell();
    let mut s = String::with_capacity(64 * n);
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "{title}");
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {n} double");
    for x in &mesh.coords {
        let _ = writeln!(s, "{:e} {:e} 0", x[0], x[1]);
    }
    let nc = mesh.n_cells();
    let _ = writeln!(s, "CELLS {nc} {}", nc * (npc + 1));
    for c in mesh.cells() {
        let _ = write!(s, "{npc}");
        for v in c {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {nc}");
    let ct = cell_type(mesh.kind);
    for _ in 0..nc {
        let _ = writeln!(s, "{ct}");
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    s.push_str("SCALARS d double 1\nLOOKUP_TABLE default\n");
    for v in d {
        let _ = writeln!(s, "{v:e}");
    }
    s.push_str("VECTORS u double\n");
    for uv in u.chunks_exact(2) {
        let _ = writeln!(s, "{:e} {:e} 0", uv[0], uv[1]);
    }
    Ok(s)
}

pub fn write_vtk_snapshot(mesh: &Mesh, u: &[f64], d: &[f64], path: &Path) -> Result<()> {
    let text = render(mesh, u, d, "pfrac snapshot")?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Contents of a legacy unstructured grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VtkGrid {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    pub scalars: BTreeMap<String, Vec<f64>>,
    pub vectors: BTreeMap<String, Vec<[f64; 3]>>,
}

struct Tokens<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
    path: &'a Path,
}

impl<'a> Tokens<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        let line = self.lines.get(self.pos).map_or(self.lines.len() + 5, |l| l.0);
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> Result<Vec<&'a str>> {
        let l = self
            .lines
            .get(self.pos)
            .ok_or_else(|| self.err("unexpected end of file"))?
            .1
            .clone();
        self.pos += 1;
        Ok(l)
    }

    fn keyword(&mut self, key: &str, min_fields: usize) -> Result<Vec<&'a str>> {
        let l = self.next_line()?;
        if l.first().map(|k| k.eq_ignore_ascii_case(key)) != Some(true) || l.len() < min_fields {
            self.pos -= 1;
            return Err(self.err(format!("expected `{key}` section, found `{}`", l.join(" "))));
        }
        Ok(l)
    }

    fn count(&self, s: &str) -> Result<usize> {
        s.parse().map_err(|_| self.err(format!("bad count `{s}`")))
    }

    fn numbers(&mut self, n: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let l = self.next_line()?;
            for t in l {
                let v: f64 = t.parse().map_err(|_| {
                    self.pos -= 1;
                    self.err(format!("bad number `{t}`"))
                })?;
                out.push(v);
            }
        }
        if out.len() != n {
            return Err(self.err(format!("expected {n} values, found {}", out.len())));
        }
        Ok(out)
    }
}

/// Parses a legacy ASCII unstructured grid with point data.
pub fn parse_vtk(text: &str, path: &Path) -> Result<VtkGrid> {
    let raw: Vec<&str> = text.lines().collect();
    let perr = |line: usize, m: &str| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: m.to_string(),
    };
    if raw.len() < 4 || !raw[0].starts_with("# vtk DataFile Version") {
        return Err(perr(1, "missing legacy VTK header"));
    }
    if raw[2].trim() != "ASCII" {
        return Err(perr(3, "only ASCII files are supported"));
    }
    let mut grid = VtkGrid {
        title: raw[1].to_string(),
        ..Default::default()
    };
    let lines = raw
        .iter()
        .enumerate()
        .skip(3)
        .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, t)| !t.is_empty())
        .collect();
    let mut tk = Tokens { lines, pos: 0, path };

    let ds = tk.keyword("DATASET", 2)?;
    if ds[1] != "UNSTRUCTURED_GRID" {
        return Err(tk.err(format!("unsupported dataset `{}`", ds[1])));
    }
    let pts = tk.keyword("POINTS", 3)?;
    let np = tk.count(pts[1])?;
    let xyz = tk.numbers(3 * np)?;
    grid.points = xyz.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();

    let cl = tk.keyword("CELLS", 3)?;
    let nc = tk.count(cl[1])?;
    let size = tk.count(cl[2])?;
    let flat = tk.numbers(size)?;
    let mut i = 0;
    for _ in 0..nc {
        let k = *flat.get(i).ok_or_else(|| tk.err("CELLS list shorter than declared"))? as usize;
        let ids = flat
            .get(i + 1..i + 1 + k)
            .ok_or_else(|| tk.err("CELLS list shorter than declared"))?;
        let ids: Vec<usize> = ids.iter().map(|&v| v as usize).collect();
        if let Some(&bad) = ids.iter().find(|&&v| v >= np) {
            return Err(tk.err(format!("cell references point {bad} of {np}")));
        }
        grid.cells.push(ids);
        i += k + 1;
    }
    if i != size {
        return Err(tk.err(format!("CELLS size {size} does not match contents {i}")));
    }
    let ct = tk.keyword("CELL_TYPES", 2)?;
    if tk.count(ct[1])? != nc {
        return Err(tk.err("CELL_TYPES count differs from CELLS"));
    }
    grid.cell_types = tk.numbers(nc)?.into_iter().map(|v| v as u8).collect();
    for (c, &t) in grid.cells.iter().zip(&grid.cell_types) {
        let expect = match t {
            VTK_LINE => 2,
            VTK_QUAD => 4,
            _ => c.len(),
        };
        if c.len() != expect {
            return Err(tk.err(format!("cell type {t} with {} points", c.len())));
        }
    }

    if tk.pos == tk.lines.len() {
        return Ok(grid);
    }
    let pd = tk.keyword("POINT_DATA", 2)?;
    if tk.count(pd[1])? != np {
        return Err(tk.err("POINT_DATA count differs from POINTS"));
    }
    while tk.pos < tk.lines.len() {
        let head = tk.next_line()?;
        match head[0] {
            "SCALARS" if head.len() >= 3 => {
                let ncomp = head.get(3).map_or(Ok(1), |s| tk.count(s))?;
                let lt = tk.next_line()?;
                if lt[0] != "LOOKUP_TABLE" {
                    tk.pos -= 1;
                    return Err(tk.err("SCALARS without LOOKUP_TABLE"));
                }
                let v = tk.numbers(np * ncomp)?;
                grid.scalars.insert(head[1].to_string(), v);
            }
            "VECTORS" if head.len() >= 3 => {
                let v = tk.numbers(3 * np)?;
                grid.vectors
                    .insert(head[1].to_string(), v.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect());
            }
            other => {
                tk.pos -= 1;
                return Err(tk.err(format!("unsupported point-data section `{other}`")));
            }
        }
    }
    Ok(grid)
}

pub fn read_vtk(path: &Path) -> Result<VtkGrid> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vtk(&text, path)
}
