//! Exact rational tables: cumulants of the finite-time Lyapunov exponent
//! as perturbation series in the strain fraction k^2.
//!
//! Every entry is computed in arbitrary-precision rational arithmetic from
//! the eigenvalue recurrence, so the output below is exact, not rounded.

use lyapflow::exact::rational_to_string;
use lyapflow::series::cumulant_series;

fn main() {
    for d in [2usize, 3] {
        println!("d = {d}, coefficients of gamma_j/j! per power of k^2:");
        for j in 1..=4 {
            let table = cumulant_series(d, j, 5).unwrap().ell_coefficient(0);
            let rendered: Vec<String> = table.iter().map(rational_to_string).collect();
            println!("  gamma_{j}/{j}!: {}", rendered.join(", "));
        }
        println!();
    }

    // The two low cumulants pair up at small strain: gamma_1 - gamma_2 and
    // gamma_3 - gamma_4 vanish to the first two orders in d = 2.
    let g1 = cumulant_series(2, 1, 5).unwrap().ell_coefficient(0);
    let g2 = cumulant_series(2, 2, 5).unwrap().ell_coefficient(0);
    println!("d = 2 pairing, gamma_1 - 2 (gamma_2/2) per order:");
    for (n, (a, b)) in g1.iter().zip(&g2).enumerate() {
        let diff = a - &(b + b);
        println!("  k^{:2}: {}", 2 * n, rational_to_string(&diff));
    }
}
