//! Monte Carlo cumulants of ln |x Pi_n| against the weak-disorder
//! predictions, for the plain shear flow and for a flow with an explicit
//! strain phase.
//!
//! Runs a few hundred thousand matrix products; takes roughly half a
//! minute on a desktop.

use lyapflow::elliptic::{gamma1_closed, gamma2_closed};
use lyapflow::flowsim::{estimate_cumulants, FlowConfig};
use lyapflow::series::cumulant_series;

fn main() {
    let tau = 0.05;
    let t2 = tau * tau;

    let cfg = FlowConfig::plain(2, tau, 20240517);
    let est = estimate_cumulants(&cfg, 20_000, 2000, 2).unwrap();
    let zeta = gamma1_closed(std::f64::consts::FRAC_1_SQRT_2).unwrap();
    let g2 = gamma2_closed(std::f64::consts::FRAC_1_SQRT_2).unwrap();
    println!("d = 2 plain shear, tau = {tau}:");
    report("gamma_1", est[0].value, est[0].stderr, t2 * zeta);
    report("gamma_2", est[1].value, est[1].stderr, 2.0 * t2 * g2);

    println!("\nd = 2 with strain, k^2 = 0.25:");
    let cfg = FlowConfig::with_strain(2, tau, 0.25, 987);
    let est = estimate_cumulants(&cfg, 10_000, 1500, 1).unwrap();
    report("gamma_1", est[0].value, est[0].stderr, t2 * gamma1_closed(0.5).unwrap());

    println!("\nd = 3 plain shear:");
    let cfg = FlowConfig::plain(3, tau, 55);
    let est = estimate_cumulants(&cfg, 10_000, 2000, 1).unwrap();
    let want = t2 * cumulant_series(3, 1, 5).unwrap().eval_f64(1.0 / 3.0, 0.0);
    report("gamma_1", est[0].value, est[0].stderr, want);
}

fn report(name: &str, got: f64, se: f64, want: f64) {
    println!(
        "  {name}: {got:>12.6e} +- {se:.1e}, predicted {want:>12.6e}, z = {:+.2}",
        (got - want) / se
    );
}
