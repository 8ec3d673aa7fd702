#![allow(dead_code)]

use std::collections::BTreeMap;

use pfrac::mesh::{CellKind, Mesh};
use rand::rngs::StdRng;
use rand::Rng;

/// 3x3 quads on a unit square with interior nodes jiggled by up to `jiggle`.
pub fn distorted_patch(rng: &mut StdRng, jiggle: f64) -> Mesh {
    let n = 3;
    let mut coords = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            let mut x = [i as f64 / n as f64, j as f64 / n as f64];
            if i > 0 && i < n && j > 0 && j < n {
                x[0] += rng.gen_range(-jiggle..jiggle);
                x[1] += rng.gen_range(-jiggle..jiggle);
            }
            coords.push(x);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut conn = Vec::new();
    for j in 0..n {
        for i in 0..n {
            conn.extend([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::new(CellKind::Quad4, coords, conn, BTreeMap::new()).expect("valid patch")
}

/// Relative error of `a` against `b` in the max norm.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}
