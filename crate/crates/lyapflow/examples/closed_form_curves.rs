//! The d = 2 isotropic closed forms against the exact series.
//!
//! At vanishing rotation the first two cumulants of the finite-time
//! Lyapunov exponent reduce to complete elliptic integrals:
//!
//! ```text
//! gamma_1 / tau^2     = 2 E(k) / K(k) - 1
//! gamma_2 / (2 tau^2) = closed form in K, E and the nome q
//! ```
//!
//! The perturbation series in k^2 converges on the whole physical range,
//! so partial sums must approach the closed forms from within the bound
//! set by their last retained term.

use lyapflow::elliptic::{elliptic_complete, gamma1_closed, gamma2_closed};
use lyapflow::series::cumulant_series;

fn main() {
    let g1 = cumulant_series(2, 1, 5).unwrap();
    let g2 = cumulant_series(2, 2, 5).unwrap();

    println!("{:>6} {:>14} {:>14} {:>10} {:>14} {:>14} {:>10}",
        "k^2", "g1 closed", "g1 series", "defect", "g2 closed", "g2 series", "defect");
    for i in 0..=10 {
        let k2 = 0.05 * i as f64;
        let k = k2.sqrt();
        let c1 = gamma1_closed(k).unwrap();
        let c2 = gamma2_closed(k).unwrap();
        let s1 = g1.eval_f64(k2, 0.0);
        let s2 = g2.eval_f64(k2, 0.0);
        println!("{k2:>6.2} {c1:>14.10} {s1:>14.10} {:>10.1e} {c2:>14.10} {s2:>14.10} {:>10.1e}",
            (c1 - s1).abs(), (c2 - s2).abs());
    }

    let data = elliptic_complete(std::f64::consts::FRAC_1_SQRT_2).unwrap();
    println!("\nphysical point k = 1/sqrt(2):");
    println!("  K = {:.15}", data.big_k);
    println!("  E = {:.15}", data.big_e);
    println!("  q = {:.15}  (exactly exp(-pi) at this modulus)", data.q);
    println!("  gamma_1/tau^2 = {:.15}", gamma1_closed(data.k).unwrap());
}
