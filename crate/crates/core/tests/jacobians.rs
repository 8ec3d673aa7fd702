mod common;

use common::{distorted_patch, rel_err};
use pfrac::assembly::{Assembler, GaussPointState};
use pfrac::constitutive::{psi_plus_from, AtModel, MaterialParams};
use pfrac::schemes::{extra_stiffness, Scheme};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn params(at: AtModel) -> MaterialParams {
    MaterialParams::new(80.0, 120.0, 2.7e-3, 0.1, 1e-6, at).unwrap()
}

struct Patch {
    asm: Assembler,
    u: Vec<f64>,
    d: Vec<f64>,
}

fn random_patch(seed: u64) -> Patch {
    let mut rng = StdRng::seed_from_u64(seed);
    let mesh = distorted_patch(&mut rng, 0.08);
    let n = mesh.n_nodes();
    let u = (0..2 * n).map(|_| rng.gen_range(-1e-3..1e-3)).collect();
    let d = (0..n).map(|_| rng.gen_range(0.05..0.9)).collect();
    Patch {
        asm: Assembler::new(mesh).unwrap(),
        u,
        d,
    }
}

/// Dense central-difference Jacobian of `f` around `x`.
fn fd_jacobian(x: &[f64], h: f64, f: impl Fn(&[f64]) -> Vec<f64>) -> Vec<Vec<f64>> {
    let mut cols = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (f(&xp), f(&xm));
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect());
    }
    cols
}

fn check_against(stiffness: &pfrac::linsolve::CsrMatrix, cols: &[Vec<f64>]) -> f64 {
    let n = cols.len();
    let mut exact = Vec::with_capacity(n * n);
    let mut approx = Vec::with_capacity(n * n);
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            exact.push(stiffness.get(i, j));
            approx.push(*v);
        }
    }
    rel_err(&exact, &approx)
}

#[test]
fn momentum_tangent_matches_finite_differences() {
    for seed in 0..5 {
        let Patch { asm, u, d } = random_patch(seed);
        let p = params(AtModel::AT1);
        let k = asm.assemble_momentum(&u, &d, &p).unwrap().stiffness;
        assert!(k.asymmetry() < 1e-12 * k.values.iter().map(|v| v.abs()).fold(0.0, f64::max));
        let cols = fd_jacobian(&u, 1e-8, |x| asm.momentum_residual(x, &d, &p).unwrap());
        let err = check_against(&k, &cols);
        assert!(err < 1e-5, "seed {seed}: K_uu relative error {err:e}");
    }
}

fn frozen_states(asm: &Assembler, u: &[f64], d: &[f64], p: &MaterialParams) -> Vec<GaussPointState> {
    let mut states = asm.fresh_states();
    asm.update_states(u, d, &mut states, p).unwrap();
    states
}

#[test]
fn evolution_tangent_matches_finite_differences() {
    for at in [AtModel::AT1, AtModel::AT2] {
        for (seed, penalty) in [(10, false), (11, true), (12, false), (13, true)] {
            let Patch { asm, u, d } = random_patch(seed);
            let p = params(at);
            let states = frozen_states(&asm, &u, &d, &p);
            // the penalty is smooth when every point sits strictly on one side of d_prev
            let d_prev: Vec<f64> = d.iter().map(|v| if penalty { v + 0.05 } else { 0.0 }).collect();
            let k = asm
                .assemble_evolution(&d, &d_prev, &states, None, &p)
                .unwrap()
                .stiffness;
            let cols = fd_jacobian(&d, 1e-6, |x| asm.evolution_residual(x, &d_prev, &states, &p).unwrap());
            let err = check_against(&k, &cols);
            assert!(err < 1e-5, "{at:?} penalty={penalty}: K_dd relative error {err:e}");
        }
    }
}

#[test]
fn extra_stiffness_enters_as_mass_matrix() {
    let Patch { asm, u, d } = random_patch(20);
    let p = params(AtModel::AT1);
    let states = frozen_states(&asm, &u, &d, &p);
    let d_prev = vec![0.0; d.len()];
    let extra = vec![-0.7; asm.n_gauss()];
    let plain = asm.assemble_evolution(&d, &d_prev, &states, None, &p).unwrap();
    let with = asm.assemble_evolution(&d, &d_prev, &states, Some(&extra), &p).unwrap();
    assert_eq!(plain.residual, with.residual);
    // ones^T (K + c M) ones - ones^T K ones = c * area
    let ones = vec![1.0; d.len()];
    let q = |k: &pfrac::linsolve::CsrMatrix| k.mul_vec(&ones).iter().sum::<f64>();
    let area = asm.mesh.measure();
    assert!((q(&with.stiffness) - q(&plain.stiffness) + 0.7 * area).abs() < 1e-12);
}

fn gp(t_plus: f64, dev: f64, d: f64, p: &MaterialParams) -> GaussPointState {
    GaussPointState {
        tr_eps_plus: t_plus,
        dev_dot_dev: dev,
        psi_plus: psi_plus_from(t_plus, dev, p),
        d_gp: d,
        ..Default::default()
    }
}

proptest! {
    #[test]
    fn s3_extra_is_sum_of_s1_and_s2(t in 0.0f64..0.05, s in 0.0f64..1e-2, d in 0.0f64..0.94) {
        let p = params(AtModel::AT1);
        let g = gp(t, s, d, &p);
        let k1 = extra_stiffness(Scheme::S1, &g, &p, 0.95);
        let k2 = extra_stiffness(Scheme::S2, &g, &p, 0.95);
        let k3 = extra_stiffness(Scheme::S3, &g, &p, 0.95);
        prop_assert!((k3 - (k1 + k2)).abs() <= 1e-14 * k3.abs().max(1e-300));
        prop_assert!(k3 <= 0.0);
    }

    #[test]
    fn evolution_tangent_fd_on_random_states(seed in 100u64..10_000) {
        let Patch { asm, u, d } = random_patch(seed);
        let p = params(AtModel::AT1);
        let states = frozen_states(&asm, &u, &d, &p);
        let d_prev = vec![0.0; d.len()];
        let k = asm.assemble_evolution(&d, &d_prev, &states, None, &p).unwrap().stiffness;
        let cols = fd_jacobian(&d, 1e-6, |x| asm.evolution_residual(x, &d_prev, &states, &p).unwrap());
        prop_assert!(check_against(&k, &cols) < 1e-5);
    }
}
