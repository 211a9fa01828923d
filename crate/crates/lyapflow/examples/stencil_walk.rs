//! Walk of the strain operators over the spherical-harmonic lattice in
//! d = 3.
//!
//! Each squared strain generator maps the site (l, m) to a finite stencil
//! of neighbours with coefficients polynomial in ell. Their sum, acting on
//! the symmetrized even basis, never leaks onto odd-m sites; that closure
//! is what reduces the eigenproblem to the even sublattice.

use lyapflow::exact::rational_to_string;
use lyapflow::stencil3d::{apply_a, script_a_on_epsilon, StrainPair};

fn main() {
    println!("A12^2 + A13^2 + A23^2 pieces on e_(2,1):");
    for which in [StrainPair::A12, StrainPair::A13, StrainPair::A23] {
        println!("  {which:?}:");
        for (l, m, poly) in apply_a(which, 2, 1).unwrap() {
            let c: Vec<String> = poly.coeffs().iter().map(rational_to_string).collect();
            println!("    -> ({l}, {m}) with [{}]", c.join(", "));
        }
    }

    println!("\nstrain sum on the even-basis site eps_(3,1):");
    for (i, j, poly) in script_a_on_epsilon(3, 1).unwrap() {
        let c: Vec<String> = poly.coeffs().iter().map(rational_to_string).collect();
        println!("  -> eps_({i}, {j}) with [{}]", c.join(", "));
    }

    // Closure scan: every reachable site from the even sublattice is even.
    let mut terms = 0;
    for i in 0..=12u32 {
        for j in 0..=i / 2 {
            terms += script_a_on_epsilon(i, j).unwrap().len();
        }
    }
    println!("\nall sites with i <= 12 stay on the even sublattice ({terms} stencil terms)");
}
