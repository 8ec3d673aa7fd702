//! The fixed-stress half step at one Gauss point: the stress invariants are
//! held to first order in the damage increment while the active energy grows.
//!
//! cargo run --example fixed_stress

use pfrac::assembly::GaussPointState;
use pfrac::constitutive::{degradation, psi_plus_from, MaterialParams};
use pfrac::schemes::{extra_stiffness, update_active_energy, Scheme};

fn main() {
    let p = MaterialParams::notched_square_defaults();
    let (t_plus, dev, d) = (3e-2, 1e-4, 0.3);
    let gp = GaussPointState {
        tr_eps_plus: t_plus,
        dev_dot_dev: dev,
        psi_plus: psi_plus_from(t_plus, dev, &p),
        d_gp: d,
        ..Default::default()
    };
    let g0 = degradation(d, p.eta).0;
    let i1 = g0 * p.bulk_k * t_plus;
    let j = g0 * 2.0 * p.mu * dev.sqrt();
    println!("psi+ = {:.4e}, threshold {:.4e}", gp.psi_plus, p.psi_crit());
    for scheme in Scheme::ALL {
        println!("{scheme}: extra stiffness {:+.4e}", extra_stiffness(scheme, &gp, &p, 0.95));
    }
    println!("{:>8} {:>12} {:>12} {:>12}", "dd", "psi+ ratio", "I1 error", "J error");
    for dd in [1e-2, 1e-3, 1e-4] {
        let up = update_active_energy(Scheme::S3, &gp, dd, &p);
        let g1 = degradation(d + dd, p.eta).0;
        let e1 = (g1 * p.bulk_k * up.tr_eps_plus - i1).abs() / i1;
        let ej = (g1 * 2.0 * p.mu * up.dev_dot_dev.sqrt() - j).abs() / j;
        println!("{dd:>8.0e} {:>12.6} {e1:>12.3e} {ej:>12.3e}", up.psi_plus / gp.psi_plus);
    }
}
