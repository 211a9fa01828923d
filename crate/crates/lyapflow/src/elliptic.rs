//! Complete elliptic integrals via the arithmetic-geometric mean, the nome,
//! and the closed-form small-l branch data of the two-dimensional companion
//! problem: gamma1 = 2E/K - 1, the q-series for gamma2, and the pairs
//! (mu_0n, mu_1n) indexed by the Fourier branch n.

use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EllipticError {
    #[error("modulus must lie in [0,1), got {0}")]
    ModulusOutOfRange(f64),
}

/// Complete elliptic integrals of both kinds at modulus `k`, with the
/// complementary modulus and the nome q = exp(-pi K(k')/K(k)).
#[derive(Debug, Clone, Copy)]
pub struct EllipticData {
    pub k: f64,
    pub kprime: f64,
    /// Complete elliptic integral of the first kind, K(k).
    pub big_k: f64,
    /// Complete elliptic integral of the second kind, E(k).
    pub big_e: f64,
    pub q: f64,
}

const AGM_REL_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 64;
const Q_SERIES_CUTOFF: f64 = 1e-18;

/// K and E at modulus `k` by the AGM iteration started from (1, sqrt(1-k^2)).
fn agm_ke(k: f64) -> (f64, f64) {
    let mut a = 1.0_f64;
    let mut b = (1.0 - k * k).sqrt();
    let mut c = k;
    let mut c_sum = 0.5 * c * c;
    let mut pow = 0.5;
    for _ in 0..AGM_MAX_ITER {
        if c.abs() <= AGM_REL_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow *= 2.0;
        c_sum += pow * c * c;
    }
    let big_k = PI / (2.0 * a);
    let big_e = big_k * (1.0 - c_sum);
    (big_k, big_e)
}

fn check_modulus(k: f64) -> Result<(), EllipticError> {
    if !(0.0..1.0).contains(&k) || !k.is_finite() {
        return Err(EllipticError::ModulusOutOfRange(k));
    }
    Ok(())
}

pub fn elliptic_complete(k: f64) -> Result<EllipticData, EllipticError> {
    check_modulus(k)?;
    let kprime = (1.0 - k * k).sqrt();
    let (big_k, big_e) = agm_ke(k);
    let q = if k == 0.0 {
        0.0
    } else {
        let (kc, _) = agm_ke(kprime);
        (-PI * kc / big_k).exp()
    };
    Ok(EllipticData { k, kprime, big_k, big_e, q })
}

/// gamma1 / tau^2 = 2E/K - 1.
pub fn gamma1_closed(k: f64) -> Result<f64, EllipticError> {
    let d = elliptic_complete(k)?;
    Ok(2.0 * d.big_e / d.big_k - 1.0)
}

/// gamma2 / (2 tau^2) = 3/2 - k^2 - E/K
/// + (2 pi^2/K^2) sum_j (q^{2j}/(1-q^{4j}))^2
/// - (6 pi^2/K^2) sum_j (q^{2j-1}/(1-q^{4j-2}))^2.
pub fn gamma2_closed(k: f64) -> Result<f64, EllipticError> {
    let d = elliptic_complete(k)?;
    let q = d.q;
    let base = 1.5 - k * k - d.big_e / d.big_k;
    let pref = PI * PI / (d.big_k * d.big_k);
    let mut even_sum = 0.0;
    let mut odd_sum = 0.0;
    for j in 1..10_000u32 {
        let te = q.powi(2 * j as i32) / (1.0 - q.powi(4 * j as i32));
        let to = q.powi(2 * j as i32 - 1) / (1.0 - q.powi(4 * j as i32 - 2));
        even_sum += te * te;
        odd_sum += to * to;
        if te * te < Q_SERIES_CUTOFF && to * to < Q_SERIES_CUTOFF {
            break;
        }
    }
    Ok(base + 2.0 * pref * even_sum - 6.0 * pref * odd_sum)
}

/// Leading and first-order eigenvalue data of the branch with Fourier index
/// `n` at small l: (mu_0n, mu_1n) with mu_0n = -(2 pi n / K)^2 and
/// mu_1n = 2(E/K - 1) + (2 pi / K)^2 n q^{2n}/(1 - q^{4n}); the second
/// summand is 0 by convention at n = 0.
pub fn small_ell_branch(k: f64, n: u32) -> Result<(f64, f64), EllipticError> {
    let d = elliptic_complete(k)?;
    let w = 2.0 * PI / d.big_k;
    let mu0 = -(w * n as f64).powi(2);
    let correction = if n == 0 {
        0.0
    } else {
        w * w * n as f64 * d.q.powi(2 * n as i32) / (1.0 - d.q.powi(4 * n as i32))
    };
    let mu1 = 2.0 * (d.big_e / d.big_k - 1.0) + correction;
    Ok((mu0, mu1))
}
