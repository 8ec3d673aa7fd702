//! Bilinear quadrilateral shape functions and 2x2 Gauss quadrature.

const G: f64 = 0.577_350_269_189_625_8;

/// Gauss points in the reference square, all with unit weight.
pub const GAUSS_2X2: [[f64; 2]; 4] = [[-G, -G], [G, -G], [G, G], [-G, G]];

const XI: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

pub fn shape(p: [f64; 2]) -> [f64; 4] {
    let mut n = [0.0; 4];
    for (a, xi) in XI.iter().enumerate() {
        n[a] = 0.25 * (1.0 + xi[0] * p[0]) * (1.0 + xi[1] * p[1]);
    }
    n
}

pub fn shape_ref_grad(p: [f64; 2]) -> [[f64; 2]; 4] {
    let mut g = [[0.0; 2]; 4];
    for (a, xi) in XI.iter().enumerate() {
        g[a] = [
            0.25 * xi[0] * (1.0 + xi[1] * p[1]),
            0.25 * xi[1] * (1.0 + xi[0] * p[0]),
        ];
    }
    g
}

/// `(det J, J)` of the isoparametric map at `p`, with `J[i][j] = dx_i / dxi_j`.
pub fn quad_jacobian(x: &[[f64; 2]; 4], p: [f64; 2]) -> (f64, [[f64; 2]; 2]) {
    let g = shape_ref_grad(p);
    let mut j = [[0.0; 2]; 2];
    for a in 0..4 {
        for r in 0..2 {
            for c in 0..2 {
                j[r][c] += x[a][r] * g[a][c];
            }
        }
    }
    (j[0][0] * j[1][1] - j[0][1] * j[1][0], j)
}

/// Geometry of one Gauss point: shape values, physical gradients and `det J * w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussPoint {
    pub n: [f64; 4],
    pub dn: [[f64; 2]; 4],
    pub weight: f64,
}

impl GaussPoint {
    pub fn new(x: &[[f64; 2]; 4], p: [f64; 2]) -> Self {
        let (det, j) = quad_jacobian(x, p);
        let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
        let g = shape_ref_grad(p);
        let mut dn = [[0.0; 2]; 4];
        for a in 0..4 {
            // dN/dx_k = dN/dxi_m * dxi_m/dx_k
            for k in 0..2 {
                dn[a][k] = g[a][0] * inv[0][k] + g[a][1] * inv[1][k];
            }
        }
        GaussPoint {
            n: shape(p),
            dn,
            weight: det,
        }
    }

    pub fn interp(&self, v: &[f64; 4]) -> f64 {
        self.n.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn grad(&self, v: &[f64; 4]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for a in 0..4 {
            g[0] += self.dn[a][0] * v[a];
            g[1] += self.dn[a][1] * v[a];
        }
        g
    }

    /// Voigt strain `[exx, eyy, 0, gxy]` from nodal displacements `[ux0, uy0, ux1, ...]`.
    pub fn strain(&self, ue: &[f64; 8]) -> [f64; 4] {
        let mut e = [0.0; 4];
        for a in 0..4 {
            let (ux, uy) = (ue[2 * a], ue[2 * a + 1]);
            e[0] += self.dn[a][0] * ux;
            e[1] += self.dn[a][1] * uy;
            e[3] += self.dn[a][1] * ux + self.dn[a][0] * uy;
        }
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SKEW: [[f64; 2]; 4] = [[0.0, 0.0], [2.0, 0.3], [2.4, 1.9], [-0.2, 1.5]];

    #[test]
    fn partition_of_unity() {
        for p in GAUSS_2X2 {
            let gp = GaussPoint::new(&SKEW, p);
            assert!((gp.n.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let s: [f64; 2] = [0, 1].map(|k| gp.dn.iter().map(|g| g[k]).sum());
            assert!(s[0].abs() < 1e-14 && s[1].abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_reproduces_linear_field() {
        let f = |x: [f64; 2]| 3.0 * x[0] - 2.0 * x[1] + 0.5;
        let v = SKEW.map(f);
        for p in GAUSS_2X2 {
            let g = GaussPoint::new(&SKEW, p).grad(&v);
            assert!((g[0] - 3.0).abs() < 1e-13 && (g[1] + 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn rigid_motion_is_strain_free() {
        // translation plus infinitesimal rotation
        let mut ue = [0.0; 8];
        for a in 0..4 {
            ue[2 * a] = 0.1 - 0.3 * SKEW[a][1];
            ue[2 * a + 1] = -0.2 + 0.3 * SKEW[a][0];
        }
        for p in GAUSS_2X2 {
            let e = GaussPoint::new(&SKEW, p).strain(&ue);
            assert!(e.iter().all(|v| v.abs() < 1e-14), "{e:?}");
        }
    }

    #[test]
    fn weights_sum_to_area() {
        let area: f64 = GAUSS_2X2.iter().map(|&p| GaussPoint::new(&SKEW, p).weight).sum();
        // shoelace
        let mut a = 0.0;
        for i in 0..4 {
            let (p, q) = (SKEW[i], SKEW[(i + 1) % 4]);
            a += p[0] * q[1] - q[0] * p[1];
        }
        assert!((area - 0.5 * a).abs() < 1e-13);
    }
}
