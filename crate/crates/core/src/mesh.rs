//! Structured meshes: line bars, notched squares and L-shaped panels.

use std::collections::BTreeMap;

use crate::element;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Line2,
    Quad4,
}

impl CellKind {
    pub fn nodes_per_cell(self) -> usize {
        match self {
            CellKind::Line2 => 2,
            CellKind::Quad4 => 4,
        }
    }
}

/// Straight crack segment realized by node duplication.
#[derive(Debug, Clone, PartialEq)]
pub struct Notch {
    pub start: [f64; 2],
    pub tip: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub kind: CellKind,
    pub coords: Vec<[f64; 2]>,
    conn: Vec<usize>,
    pub boundary_sets: BTreeMap<String, Vec<usize>>,
    pub notch: Option<Notch>,
}

impl Mesh {
    pub fn new(
        kind: CellKind,
        coords: Vec<[f64; 2]>,
        conn: Vec<usize>,
        boundary_sets: BTreeMap<String, Vec<usize>>,
    ) -> Result<Self> {
        let npc = kind.nodes_per_cell();
        if conn.len() % npc != 0 {
            return Err(Error::InvalidMesh(format!(
                "connectivity length {} is not a multiple of {npc}",
                conn.len()
            )));
        }
        let n = coords.len();
        for &node in conn.iter().chain(boundary_sets.values().flatten()) {
            if node >= n {
                return Err(Error::UnknownNode { node, n_nodes: n });
            }
        }
        let mesh = Mesh {
            kind,
            coords,
            conn,
            boundary_sets,
            notch: None,
        };
        if kind == CellKind::Quad4 {
            for e in 0..mesh.n_cells() {
                let x = mesh.cell_coords(e);
                for gp in element::GAUSS_2X2 {
                    let det_j = element::quad_jacobian(&x, gp).0;
                    if !(det_j > 0.0) {
                        return Err(Error::SingularElement { element: e, det_j });
                    }
                }
            }
        }
        Ok(mesh)
    }

    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn n_cells(&self) -> usize {
        self.conn.len() / self.kind.nodes_per_cell()
    }

    pub fn cell(&self, e: usize) -> &[usize] {
        let npc = self.kind.nodes_per_cell();
        &self.conn[e * npc..(e + 1) * npc]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.conn.chunks_exact(self.kind.nodes_per_cell())
    }

    pub fn quad(&self, e: usize) -> [usize; 4] {
        let c = self.cell(e);
        [c[0], c[1], c[2], c[3]]
    }

    pub fn cell_coords(&self, e: usize) -> [[f64; 2]; 4] {
        let mut x = [[0.0; 2]; 4];
        for (xi, &n) in x.iter_mut().zip(self.cell(e)) {
            *xi = self.coords[n];
        }
        x
    }

    pub fn select_boundary(&self, tag: &str) -> Result<&[usize]> {
        self.boundary_sets
            .get(tag)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownBoundary(tag.to_string()))
    }

    /// Length of a line mesh or area of a quad mesh.
    pub fn measure(&self) -> f64 {
        match self.kind {
            CellKind::Line2 => self
                .cells()
                .map(|c| (self.coords[c[1]][0] - self.coords[c[0]][0]).abs())
                .sum(),
            CellKind::Quad4 => (0..self.n_cells())
                .map(|e| {
                    let x = self.cell_coords(e);
                    element::GAUSS_2X2
                        .iter()
                        .map(|&gp| element::quad_jacobian(&x, gp).0)
                        .sum::<f64>()
                })
                .sum(),
        }
    }

    /// Node ids whose coordinates satisfy `pred`, ascending.
    pub fn nodes_where(&self, pred: impl Fn([f64; 2]) -> bool) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&i| pred(self.coords[i])).collect()
    }
}

pub fn build_line_mesh(n_elems: usize, length: f64) -> Result<Mesh> {
    if n_elems < 2 {
        return Err(Error::InvalidMesh(format!(
            "line mesh needs at least 2 elements, got {n_elems}"
        )));
    }
    if !(length > 0.0) {
        return Err(Error::InvalidMesh(format!("length must be positive, got {length}")));
    }
    let coords = (0..=n_elems)
        .map(|i| [length * i as f64 / n_elems as f64, 0.0])
        .collect();
    let conn = (0..n_elems).flat_map(|e| [e, e + 1]).collect();
    let mut sets = BTreeMap::new();
    sets.insert("left".to_string(), vec![0]);
    sets.insert("right".to_string(), vec![n_elems]);
    Mesh::new(CellKind::Line2, coords, conn, sets)
}

/// Square `[0, side]^2` meshed with `nx * ny` quads. With `notch` set, a crack runs
/// from the middle of the left edge to the centre.
pub fn build_notched_square(nx: usize, ny: usize, side: f64, notch: bool) -> Result<Mesh> {
    if nx == 0 || ny == 0 || nx % 2 != 0 || ny % 2 != 0 {
        return Err(Error::InvalidMesh(format!(
            "nx and ny must be positive and even, got {nx} x {ny}"
        )));
    }
    if !(side > 0.0) {
        return Err(Error::InvalidMesh(format!("side must be positive, got {side}")));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut coords = Vec::with_capacity((nx + 1) * (ny + 1) + nx / 2);
    for j in 0..=ny {
        for i in 0..=nx {
            coords.push([side * i as f64 / nx as f64, side * j as f64 / ny as f64]);
        }
    }
    let jm = ny / 2;
    // duplicates[i] is the upper copy of notch node (i, jm)
    let mut duplicate = vec![usize::MAX; nx / 2];
    if notch {
        for (i, dup) in duplicate.iter_mut().enumerate() {
            *dup = coords.len();
            coords.push(coords[id(i, jm)]);
        }
    }
    let node = |i: usize, j: usize| {
        if notch && j == jm && i < nx / 2 {
            duplicate[i]
        } else {
            id(i, j)
        }
    };

    let mut conn = Vec::with_capacity(4 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            if j == jm {
                // row just above the notch line takes the upper copies
                conn.extend([node(i, j), node(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            } else {
                conn.extend([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
    }

    let mut mesh = Mesh::new(CellKind::Quad4, coords, conn, BTreeMap::new())?;
    let eps = 1e-9 * side;
    let sets = [
        ("bottom", mesh.nodes_where(|x| x[1] < eps)),
        ("top", mesh.nodes_where(|x| x[1] > side - eps)),
        ("left", mesh.nodes_where(|x| x[0] < eps)),
        ("right", mesh.nodes_where(|x| x[0] > side - eps)),
    ];
    mesh.boundary_sets = sets.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    if notch {
        mesh.notch = Some(Notch {
            start: [0.0, 0.5 * side],
            tip: [0.5 * side, 0.5 * side],
        });
    }
    Ok(mesh)
}

/// Dimensions of the L-shaped panel. The cut-out occupies the lower right
/// corner, so the loaded arm sticks out to the right above it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LShape {
    pub side: f64,
    pub cut: f64,
    /// Length of the loaded segment at the arm tip, measured from the right edge.
    pub load_length: f64,
}

impl Default for LShape {
    fn default() -> Self {
        LShape {
            side: 500.0,
            cut: 250.0,
            load_length: 30.0,
        }
    }
}

pub fn build_lshape_mesh(h: f64) -> Result<Mesh> {
    build_lshape_mesh_with(LShape::default(), h)
}

pub fn build_lshape_mesh_with(geo: LShape, h: f64) -> Result<Mesh> {
    let LShape {
        side,
        cut,
        load_length,
    } = geo;
    if !(h > 0.0) || !(cut > 0.0) || !(side > cut) {
        return Err(Error::InvalidMesh(format!(
            "bad L-panel: side {side}, cut {cut}, h {h}"
        )));
    }
    let divides = |len: f64| {
        let n = (len / h).round();
        n >= 1.0 && (n * h - len).abs() <= 1e-9 * len
    };
    if !divides(cut) || !divides(side - cut) {
        return Err(Error::InvalidMesh(format!(
            "element size {h} does not divide the panel arms ({cut}, {})",
            side - cut
        )));
    }
    let n = (side / h).round() as usize;
    let nc = (cut / h).round() as usize;
    let leg = n - nc;
    // cells with i >= leg and j < nc form the cut-out
    let inside = |i: usize, j: usize| !(i >= leg && j < nc);
    let mut used = vec![false; (n + 1) * (n + 1)];
    for j in 0..n {
        for i in 0..n {
            if inside(i, j) {
                for (a, b) in [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)] {
                    used[b * (n + 1) + a] = true;
                }
            }
        }
    }
    let mut new_id = vec![usize::MAX; used.len()];
    let mut coords = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            if used[j * (n + 1) + i] {
                new_id[j * (n + 1) + i] = coords.len();
                coords.push([side * i as f64 / n as f64, side * j as f64 / n as f64]);
            }
        }
    }
    let id = |i: usize, j: usize| new_id[j * (n + 1) + i];
    let mut conn = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if inside(i, j) {
                conn.extend([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
    }
    let mut mesh = Mesh::new(CellKind::Quad4, coords, conn, BTreeMap::new())?;
    let tol = 1e-9 * side;
    let leg_w = side - cut;
    let bottom_clamp = mesh.nodes_where(|x| x[1] < tol && x[0] < leg_w + tol);
    let mut load_zone =
        mesh.nodes_where(|x| (x[1] - cut).abs() < tol && x[0] > side - load_length - tol);
    if load_zone.is_empty() {
        load_zone = mesh.nodes_where(|x| (x[1] - cut).abs() < tol && x[0] > side - tol);
    }
    mesh.boundary_sets.insert("bottom_clamp".into(), bottom_clamp);
    mesh.boundary_sets.insert("load_zone".into(), load_zone);
    Ok(mesh)
}
