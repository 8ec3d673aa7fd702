//! Pointwise material kernels for the volumetric-deviatoric split in plane strain.
//!
//! Strain vectors are Voigt ordered `[exx, eyy, ezz, gxy]` with engineering shear
//! and `ezz = 0`. Stress vectors are `[sxx, syy, szz, sxy]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Voigt = [f64; 4];
pub type Tangent = [[f64; 4]; 4];

/// Dissipation variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum AtModel {
    #[default]
    #[serde(alias = "at1")]
    AT1,
    #[serde(alias = "at2")]
    AT2,
}

impl AtModel {
    /// Normalization constant of the dissipation.
    pub fn c_w(self) -> f64 {
        match self {
            AtModel::AT1 => 8.0 / 3.0,
            AtModel::AT2 => 2.0,
        }
    }

    pub fn w(self, d: f64) -> f64 {
        match self {
            AtModel::AT1 => d,
            AtModel::AT2 => d * d,
        }
    }

    pub fn dw(self, d: f64) -> f64 {
        match self {
            AtModel::AT1 => 1.0,
            AtModel::AT2 => 2.0 * d,
        }
    }

    pub fn ddw(self) -> f64 {
        match self {
            AtModel::AT1 => 0.0,
            AtModel::AT2 => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub mu: f64,
    pub lambda: f64,
    pub bulk_k: f64,
    pub g_c: f64,
    pub length_l: f64,
    pub eta: f64,
    pub at_model: AtModel,
    pub c_w: f64,
    pub tol_ir: f64,
    pub gamma: f64,
}

impl MaterialParams {
    pub const DEFAULT_TOL_IR: f64 = 0.01;

    pub fn new(
        mu: f64,
        lambda: f64,
        g_c: f64,
        length_l: f64,
        eta: f64,
        at_model: AtModel,
    ) -> Result<Self> {
        Self::with_tol_ir(mu, lambda, g_c, length_l, eta, at_model, Self::DEFAULT_TOL_IR)
    }

    pub fn with_tol_ir(
        mu: f64,
        lambda: f64,
        g_c: f64,
        length_l: f64,
        eta: f64,
        at_model: AtModel,
        tol_ir: f64,
    ) -> Result<Self> {
        let bulk_k = lambda + 2.0 * mu / 3.0;
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} = {v}")));
        if !(mu > 0.0) {
            return bad("mu", mu);
        }
        if !(bulk_k > 0.0) {
            return bad("bulk modulus", bulk_k);
        }
        if !(g_c > 0.0) {
            return bad("g_c", g_c);
        }
        if !(length_l > 0.0) {
            return bad("length_l", length_l);
        }
        if !(eta >= 0.0 && eta < 1.0) {
            return bad("eta", eta);
        }
        if !(tol_ir > 0.0) {
            return bad("tol_ir", tol_ir);
        }
        let gamma = 27.0 * g_c / (64.0 * length_l * tol_ir * tol_ir);
        Ok(MaterialParams {
            mu,
            lambda,
            bulk_k,
            g_c,
            length_l,
            eta,
            at_model,
            c_w: at_model.c_w(),
            tol_ir,
            gamma,
        })
    }

    /// Parameters of the notched-square tests.
    pub fn notched_square_defaults() -> Self {
        Self::new(8.077e4, 2.019e5, 2.7, 0.01, 1e-6, AtModel::AT1).expect("valid defaults")
    }

    /// Parameters of the L-shaped panel.
    pub fn lshape_defaults() -> Self {
        Self::new(1.095e4, 6.161e3, 0.095, 10.0, 1e-6, AtModel::AT1).expect("valid defaults")
    }

    /// AT1 elastic threshold on the active energy.
    pub fn psi_crit(&self) -> f64 {
        self.g_c / (self.c_w * self.length_l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sign {
    Plus,
    Minus,
}

pub fn macaulay(x: f64, sign: Sign) -> f64 {
    match sign {
        Sign::Plus => x.max(0.0),
        Sign::Minus => x.min(0.0),
    }
}

/// `(g, dg/dd)` for `g = (1-d)^2 + eta`.
pub fn degradation(d: f64, eta: f64) -> (f64, f64) {
    let r = 1.0 - d;
    (r * r + eta, -2.0 * r)
}

/// Strain with its split scalars.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StrainState {
    pub eps: Voigt,
    pub tr_eps: f64,
    pub dev_dot_dev: f64,
}

impl StrainState {
    pub fn from_voigt(eps: Voigt) -> Self {
        let tr = eps[0] + eps[1] + eps[2];
        let m = tr / 3.0;
        let (a, b, c) = (eps[0] - m, eps[1] - m, eps[2] - m);
        let dev_dot_dev = a * a + b * b + c * c + 0.5 * eps[3] * eps[3];
        StrainState {
            eps,
            tr_eps: tr,
            dev_dot_dev,
        }
    }

    pub fn plane(exx: f64, eyy: f64, gxy: f64) -> Self {
        Self::from_voigt([exx, eyy, 0.0, gxy])
    }

    pub fn tr_plus(&self) -> f64 {
        macaulay(self.tr_eps, Sign::Plus)
    }

    /// Deviatoric strain as a tensor, shear stored as the tensor component.
    fn dev(&self) -> Voigt {
        let m = self.tr_eps / 3.0;
        [
            self.eps[0] - m,
            self.eps[1] - m,
            self.eps[2] - m,
            0.5 * self.eps[3],
        ]
    }
}

/// Active energy from the two split scalars.
pub fn psi_plus_from(t_plus: f64, dev_dot_dev: f64, p: &MaterialParams) -> f64 {
    p.mu * dev_dot_dev + 0.5 * p.bulk_k * t_plus * t_plus
}

/// `(psi_plus, psi_minus)`.
pub fn split_energies(s: &StrainState, p: &MaterialParams) -> (f64, f64) {
    let tm = macaulay(s.tr_eps, Sign::Minus);
    (
        psi_plus_from(s.tr_plus(), s.dev_dot_dev, p),
        0.5 * p.bulk_k * tm * tm,
    )
}

/// Total stored energy `g(d) psi_plus + psi_minus`.
pub fn energy(s: &StrainState, d: f64, p: &MaterialParams) -> f64 {
    let (pp, pm) = split_energies(s, p);
    degradation(d, p.eta).0 * pp + pm
}

pub fn stress(s: &StrainState, d: f64, p: &MaterialParams) -> Voigt {
    let g = degradation(d, p.eta).0;
    let dev = s.dev();
    let vp = p.bulk_k * s.tr_plus();
    let vm = p.bulk_k * macaulay(s.tr_eps, Sign::Minus);
    let mut out = [0.0; 4];
    for i in 0..3 {
        out[i] = g * (2.0 * p.mu * dev[i] + vp) + vm;
    }
    out[3] = g * 2.0 * p.mu * dev[3];
    out
}

/// Consistent tangent with respect to the Voigt strain at fixed `d`.
pub fn tangent_uu(s: &StrainState, d: f64, p: &MaterialParams) -> Tangent {
    let g = degradation(d, p.eta).0;
    let positive = s.tr_eps >= 0.0;
    let vol = if positive { g * p.bulk_k } else { p.bulk_k };
    let mut c = [[0.0; 4]; 4];
    for (i, row) in c.iter_mut().enumerate().take(3) {
        for (j, cij) in row.iter_mut().enumerate().take(3) {
            let delta = if i == j { 1.0 } else { 0.0 };
            *cij = g * 2.0 * p.mu * (delta - 1.0 / 3.0) + vol;
        }
    }
    c[3][3] = g * p.mu;
    c
}

/// Partial derivative of the stress with respect to `d`.
pub fn coupling_dstress_dd(s: &StrainState, d: f64, p: &MaterialParams) -> Voigt {
    let dg = degradation(d, p.eta).1;
    let dev = s.dev();
    let vp = p.bulk_k * s.tr_plus();
    [
        dg * (2.0 * p.mu * dev[0] + vp),
        dg * (2.0 * p.mu * dev[1] + vp),
        dg * (2.0 * p.mu * dev[2] + vp),
        dg * 2.0 * p.mu * dev[3],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(eta: f64) -> MaterialParams {
        // mu = 1, k = 1
        MaterialParams::new(1.0, 1.0 - 2.0 / 3.0, 1.0, 1.0, eta, AtModel::AT1).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn macaulay_examples() {
        assert_eq!(macaulay(-3.0, Sign::Plus), 0.0);
        assert_eq!(macaulay(2.0, Sign::Plus), 2.0);
        assert_eq!(macaulay(-3.0, Sign::Minus), -3.0);
    }

    #[test]
    fn degradation_examples() {
        let (g, _) = degradation(0.0, 1e-6);
        assert_eq!(g, 1.0 + 1e-6);
        assert_eq!(degradation(1.0, 1e-6).0, 1e-6);
        assert_eq!(degradation(0.5, 0.0), (0.25, -1.0));
    }

    #[test]
    fn penalty_and_threshold() {
        let p = MaterialParams::notched_square_defaults();
        assert!(close(p.gamma, 27.0 * 2.7 / (64.0 * 0.01 * 1e-4), 1e-14));
        assert!(close(p.bulk_k, 2.019e5 + 2.0 * 8.077e4 / 3.0, 1e-14));
        assert!(close(p.psi_crit(), 2.7 / (8.0 / 3.0 * 0.01), 1e-14));
        assert_eq!(AtModel::AT2.c_w(), 2.0);
        assert!(MaterialParams::new(-1.0, 1.0, 1.0, 1.0, 0.0, AtModel::AT1).is_err());
        assert!(MaterialParams::new(1.0, 1.0, 1.0, 0.0, 0.0, AtModel::AT1).is_err());
    }

    #[test]
    fn split_hand_values() {
        let p = unit(0.0);
        assert_eq!(split_energies(&StrainState::default(), &p), (0.0, 0.0));

        let s = StrainState::plane(1.0, 1.0, 0.0);
        let (pp, pm) = split_energies(&s, &p);
        assert!(close(pp, 8.0 / 3.0, 1e-14));
        assert_eq!(pm, 0.0);

        let s = StrainState::plane(-1.0, -1.0, 0.0);
        let (pp, pm) = split_energies(&s, &p);
        assert!(close(pp, 2.0 / 3.0, 1e-14));
        assert!(close(pm, 2.0, 1e-14));
    }

    #[test]
    fn stress_hand_values() {
        let p = unit(0.0);
        assert_eq!(stress(&StrainState::default(), 0.3, &p), [0.0; 4]);

        let s = stress(&StrainState::plane(-1.0, -1.0, 0.0), 1.0, &p);
        for (a, b) in s.iter().zip([-2.0, -2.0, -2.0, 0.0]) {
            assert!(close(*a, b, 1e-14), "{s:?}");
        }

        let s = stress(&StrainState::plane(1.0, 0.0, 0.0), 0.0, &p);
        for (a, b) in s.iter().zip([7.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]) {
            assert!(close(*a, b, 1e-14), "{s:?}");
        }
    }

    #[test]
    fn tangent_limits() {
        let p = unit(0.0);
        let c = tangent_uu(&StrainState::plane(0.1, 0.0, 0.0), 0.0, &p);
        // lambda + 2 mu and lambda with lambda = k - 2mu/3
        let lam = 1.0 / 3.0;
        assert!(close(c[0][0], lam + 2.0, 1e-14));
        assert!(close(c[0][1], lam, 1e-14));
        assert!(close(c[3][3], 1.0, 1e-14));

        let c = tangent_uu(&StrainState::plane(-0.1, 0.0, 0.0), 1.0, &p);
        for i in 0..3 {
            for j in 0..3 {
                assert!(close(c[i][j], 1.0, 1e-14));
            }
        }
        assert_eq!(c[3][3], 0.0);
    }

    #[test]
    fn coupling_zero_cases() {
        let p = unit(1e-6);
        let s = StrainState::plane(0.2, -0.1, 0.05);
        assert_eq!(coupling_dstress_dd(&s, 1.0, &p), [0.0; 4]);
        let hydro = StrainState::from_voigt([-0.1, -0.1, -0.1, 0.0]);
        for v in coupling_dstress_dd(&hydro, 0.3, &p) {
            assert!(v.abs() < 1e-15);
        }
    }

    fn strain() -> impl Strategy<Value = StrainState> {
        (-1e-2..1e-2f64, -1e-2..1e-2f64, -1e-2..1e-2f64)
            .prop_map(|(a, b, c)| StrainState::plane(a, b, c))
    }

    proptest! {
        #[test]
        fn split_is_complete(s in strain()) {
            let p = MaterialParams::notched_square_defaults();
            let (pp, pm) = split_energies(&s, &p);
            prop_assert!(pp >= 0.0 && pm >= 0.0);
            let full = p.mu * s.dev_dot_dev + 0.5 * p.bulk_k * s.tr_eps * s.tr_eps;
            prop_assert!(close(pp + pm, full, 1e-13));
        }

        #[test]
        fn stress_is_energy_gradient(s in strain(), d in 0.0..1.0f64) {
            let p = MaterialParams::notched_square_defaults();
            let sig = stress(&s, d, &p);
            let h = 1e-7;
            for k in 0..4 {
                if k == 2 { continue; }
                let mut ep = s.eps; ep[k] += h;
                let mut em = s.eps; em[k] -= h;
                let fd = (energy(&StrainState::from_voigt(ep), d, &p)
                    - energy(&StrainState::from_voigt(em), d, &p)) / (2.0 * h);
                let scale = sig.iter().fold(1e-3f64, |m, v| m.max(v.abs()));
                prop_assert!((fd - sig[k]).abs() < 1e-6 * scale, "k={k} fd={fd} sig={}", sig[k]);
            }
        }

        #[test]
        fn tangent_matches_fd(s in strain(), d in 0.0..1.0f64) {
            prop_assume!(s.tr_eps.abs() > 1e-5);
            let p = MaterialParams::notched_square_defaults();
            let c = tangent_uu(&s, d, &p);
            let h = 1e-9;
            let scale = c.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            for j in 0..4 {
                let mut ep = s.eps; ep[j] += h;
                let mut em = s.eps; em[j] -= h;
                let sp = stress(&StrainState::from_voigt(ep), d, &p);
                let sm = stress(&StrainState::from_voigt(em), d, &p);
                for i in 0..4 {
                    let fd = (sp[i] - sm[i]) / (2.0 * h);
                    prop_assert!((fd - c[i][j]).abs() < 1e-6 * scale);
                }
            }
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert_eq!(c[i][j], c[j][i]);
                }
            }
        }

        #[test]
        fn coupling_matches_fd(s in strain(), d in 0.0..1.0f64) {
            let p = MaterialParams::notched_square_defaults();
            let c = coupling_dstress_dd(&s, d, &p);
            let h = 1e-6;
            let sp = stress(&s, d + h, &p);
            let sm = stress(&s, d - h, &p);
            let scale = c.iter().fold(1e-3f64, |m, v| m.max(v.abs()));
            for i in 0..4 {
                prop_assert!(((sp[i] - sm[i]) / (2.0 * h) - c[i]).abs() < 1e-6 * scale);
            }
        }

        #[test]
        fn continuous_across_zero_trace(dev in -1e-3..1e-3f64, d in 0.0..1.0f64) {
            let p = MaterialParams::notched_square_defaults();
            let a = StrainState::plane(dev + 1e-14, -dev, 0.0);
            let b = StrainState::plane(dev - 1e-14, -dev, 0.0);
            let (sa, sb) = (stress(&a, d, &p), stress(&b, d, &p));
            for i in 0..4 {
                prop_assert!((sa[i] - sb[i]).abs() < 1e-6);
            }
        }

        #[test]
        fn degradation_decreasing(a in 0.0..1.0f64, b in 0.0..1.0f64) {
            prop_assume!(a < b);
            let eta = 1e-6;
            prop_assert!(degradation(a, eta).0 > degradation(b, eta).0);
            prop_assert!(degradation(b, eta).0 >= eta);
        }
    }
}
