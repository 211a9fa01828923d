//! Quasi-solvable moments: at even integer ell the transfer operator
//! preserves a finite space of homogeneous polynomials, so its relevant
//! eigenvalue is a root of an exact characteristic polynomial.
//!
//! The example prints these polynomials for small (d, ell), confirms the
//! Casimir identity on the underlying sl(d) representation, and compares
//! the exact leading roots with the truncated spectral solver.

use lyapflow::exact::{ratio, rational_to_string};
use lyapflow::polyrep::{quasi_solvable_mu, verify_casimir_identity};
use lyapflow::spectral2d::leading_mu_2d;
use lyapflow::spectral3d::leading_mu_3d;

fn main() {
    let k2 = ratio(1, 4);
    println!("characteristic polynomials at k^2 = 1/4 (ascending, monic):");
    for (d, ell) in [(2usize, 2u32), (2, 4), (2, 6), (3, 2), (3, 4)] {
        let q = quasi_solvable_mu(d, ell, &k2).unwrap();
        let poly: Vec<String> = q.char_poly.iter().map(rational_to_string).collect();
        println!(
            "  (d={d}, ell={ell}): [{}], krylov dim {}, leading root {:.12}",
            poly.join(", "),
            q.krylov_dim,
            q.leading_root_f64()
        );
    }

    println!("\nCasimir identity on the polynomial modules:");
    for d in [2usize, 3, 4] {
        for ell in [2u32, 4] {
            let rep = verify_casimir_identity(d, ell).unwrap();
            println!(
                "  (d={d}, ell={ell}): dim {:3}, holds = {}, defect = {}",
                rep.dim,
                rep.holds,
                rational_to_string(&rep.max_abs_defect)
            );
        }
    }

    println!("\nexact root vs truncated eigensolver at k^2 = 0.25:");
    for (d, ell) in [(2usize, 2.0f64), (2, 4.0), (2, 6.0), (3, 2.0), (3, 4.0)] {
        let exact = quasi_solvable_mu(d, ell as u32, &k2).unwrap().leading_root_f64();
        let num = if d == 2 {
            leading_mu_2d(0.25, ell, 1e-11).unwrap().mu
        } else {
            leading_mu_3d(0.25, ell, 1e-11).unwrap().mu
        };
        println!(
            "  (d={d}, ell={ell}): exact {exact:>16.12}, spectral {num:>16.12}, diff {:.1e}",
            (exact - num).abs()
        );
    }
}
