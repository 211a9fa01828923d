//! Exact perturbation series in k^2 for the companion eigenvalue branches,
//! the generalized Lyapunov exponent L(k, l)/tau^2, cumulants, and the rate
//! function, all with polynomial-in-l coefficients in exact rational
//! arithmetic; plus a numeric Legendre transform and a symmetry checker.
//!
//! Conventions: series coefficients multiply ascending powers of k^2; the
//! rate-function series is written in the rescaled argument l' = l / tau^2,
//! so that the physical value is tau^2 times the series evaluated at l'.

use crate::exact::{rat, ratio, K2Series, PolyL};
use crate::spectral3d::epsilon_basis;
use crate::stencil3d::script_a_on_epsilon;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("degenerate branch out of scope: branch {0} (only 0 and 1 supported in d=3)")]
    DegenerateBranch(u32),
    #[error("dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("cumulant index must be at least 1")]
    BadCumulant,
    #[error("no stationary point inside bracket [{lo}, {hi}]")]
    NoStationaryPoint { lo: f64, hi: f64 },
    #[error("invalid bracket [{lo}, {hi}]")]
    BadBracket { lo: f64, hi: f64 },
}

/// Eigenvalue branch of a companion operator as an exact series in k^2
/// with polynomial-in-l coefficients.
#[derive(Debug, Clone)]
pub struct MuSeries {
    pub d: u8,
    pub branch: u32,
    pub series: K2Series,
    pub order: usize,
}

fn half_ell_plus(c: i64) -> PolyL {
    PolyL::new(vec![rat(c), ratio(1, 2)])
}

fn poly_a_2d(j: usize) -> PolyL {
    match j {
        0 => PolyL::zero(),
        1 => &half_ell_plus(-1) * &PolyL::ell(),
        _ => {
            let jj = j as i64;
            &half_ell_plus(1 - 2 * jj) * &half_ell_plus(2 - 2 * jj)
        }
    }
}

fn poly_b_2d(j: usize) -> PolyL {
    let jj = j as i64;
    PolyL::new(vec![rat(-8 * jj * jj), rat(1), ratio(1, 2)])
}

fn poly_c_2d(j: usize) -> PolyL {
    let jj = j as i64;
    &half_ell_plus(1 + 2 * jj) * &half_ell_plus(2 + 2 * jj)
}

/// The d = 2 recurrence run with symbolic-l coefficients: branch l starts
/// from mu = -(4l)^2 and the unit coefficient vector, and each order divides
/// only by the integers 16(l^2 - j^2). The branch coefficient of each
/// correction is fixed so that the coefficients keep summing to one.
pub fn mu_series_2d(branch: u32, order: usize) -> MuSeries {
    let l = branch as usize;
    let jmax = l + order + 2;
    let mut mu: Vec<PolyL> = vec![PolyL::constant(rat(-16 * (l as i64) * (l as i64)))];
    let mut v0 = vec![PolyL::zero(); jmax + 1];
    v0[l] = PolyL::one();
    let mut vs: Vec<Vec<PolyL>> = vec![v0];
    for n in 0..order {
        let mut rhs: Vec<PolyL> = Vec::with_capacity(jmax + 1);
        for j in 0..=jmax {
            let mut acc = &poly_b_2d(j) * &vs[n][j];
            if j >= 1 {
                acc = &acc + &(&poly_a_2d(j) * &vs[n][j - 1]);
            }
            if j + 1 <= jmax {
                acc = &acc + &(&poly_c_2d(j) * &vs[n][j + 1]);
            }
            for r in 1..=n {
                acc = &acc + &(&mu[r] * &vs[n + 1 - r][j]);
            }
            rhs.push(acc);
        }
        let mut v_next = vec![PolyL::zero(); jmax + 1];
        let mut sum = PolyL::zero();
        for (j, rhs_j) in rhs.iter().enumerate() {
            if j == l || rhs_j.is_zero() {
                continue;
            }
            let denom = 16 * ((l * l) as i64 - (j * j) as i64);
            v_next[j] = rhs_j.scale(&ratio(1, denom));
            sum = &sum + &v_next[j];
        }
        v_next[l] = -&sum;
        mu.push(-&rhs[l]);
        vs.push(v_next);
    }
    MuSeries { d: 2, branch, series: K2Series::new(mu), order }
}

/// The d = 3 recurrence on the even-m lattice, driven entirely by the exact
/// strain stencils; only the non-degenerate branches l = 0, 1 are supported.
pub fn mu_series_3d(branch: u32, order: usize) -> Result<MuSeries, SeriesError> {
    if branch > 1 {
        return Err(SeriesError::DegenerateBranch(branch));
    }
    let l = branch;
    let imax = l as usize + 2 * order + 2;
    let basis = epsilon_basis(imax);
    let columns: Vec<Vec<(u32, u32, PolyL)>> = basis
        .sites()
        .iter()
        .map(|&(i, j)| script_a_on_epsilon(i, j).expect("valid lattice site"))
        .collect();
    let anchor = basis.index_of(l, 0).expect("anchor site");
    let lc = l as i64;
    let mut mu: Vec<PolyL> = vec![PolyL::constant(rat(-2 * lc * (2 * lc + 1)))];
    let mut v0 = vec![PolyL::zero(); basis.len()];
    v0[anchor] = PolyL::one();
    let mut vs: Vec<Vec<PolyL>> = vec![v0];
    for n in 0..order {
        let mut av = vec![PolyL::zero(); basis.len()];
        for (src, col) in columns.iter().enumerate() {
            if vs[n][src].is_zero() {
                continue;
            }
            for (ti, tj, c) in col {
                if let Some(t) = basis.index_of(*ti, *tj) {
                    av[t] = &av[t] + &(c * &vs[n][src]);
                }
            }
        }
        let mut v_next = vec![PolyL::zero(); basis.len()];
        for (idx, &(i, _)) in basis.sites().iter().enumerate() {
            if idx == anchor {
                continue;
            }
            let mut rhs = av[idx].clone();
            for r in 1..=n {
                rhs = &rhs + &(&mu[r] * &vs[n + 1 - r][idx]);
            }
            if rhs.is_zero() {
                continue;
            }
            let ic = i as i64;
            let denom = 2 * lc * (2 * lc + 1) - 2 * ic * (2 * ic + 1);
            v_next[idx] = rhs.scale(&ratio(1, denom));
        }
        mu.push(-&av[anchor]);
        vs.push(v_next);
    }
    Ok(MuSeries { d: 3, branch, series: K2Series::new(mu), order })
}

/// L(k, l) / tau^2 as an exact series: the branch-0 eigenvalue series plus
/// the affine shift (d-1) l + ((d-1)/d) l^2 on the constant order.
pub fn l_series(d: usize, order: usize) -> Result<K2Series, SeriesError> {
    let mu = match d {
        2 => mu_series_2d(0, order).series,
        3 => mu_series_3d(0, order)?.series,
        _ => return Err(SeriesError::BadDimension(d)),
    };
    let dm1 = (d - 1) as i64;
    let shift = PolyL::new(vec![rat(0), rat(dm1), ratio(dm1, d as i64)]);
    Ok(mu
        .add(&K2Series::from_poly(shift, order))
        .expect("orders match"))
}

/// Series for gamma_j / j!: the coefficient of l^j in the L series, per
/// k^2 order; returned with constant polynomial coefficients.
pub fn cumulant_series(d: usize, j: usize, order: usize) -> Result<K2Series, SeriesError> {
    if j == 0 {
        return Err(SeriesError::BadCumulant);
    }
    let table = l_series(d, order)?.ell_coefficient(j);
    Ok(K2Series::new(table.into_iter().map(PolyL::constant).collect()))
}

/// Rate function as an exact series in k^2 with coefficients polynomial in
/// the rescaled argument l' = l / tau^2.
#[derive(Debug, Clone)]
pub struct RateFunctionSeries {
    pub series: K2Series,
    pub order: usize,
}

impl RateFunctionSeries {
    /// Value of the dimensionless series at (k^2, l').
    pub fn eval_scaled(&self, k2: f64, ell_prime: f64) -> f64 {
        self.series.eval_f64(k2, ell_prime)
    }

    /// Physical rate function: tau^2 times the series at l' = l / tau^2.
    pub fn eval_physical(&self, k2: f64, ell: f64, tau: f64) -> f64 {
        tau * tau * self.eval_scaled(k2, ell / (tau * tau))
    }
}

/// Substitute the series `s` for the variable of `p`, truncating at the
/// order of `s`.
fn poly_at_series(p: &PolyL, s: &K2Series) -> K2Series {
    let order = s.order();
    let mut acc = K2Series::zero(order);
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(s).expect("orders match");
        acc = acc
            .add(&K2Series::from_poly(PolyL::constant(c.clone()), order))
            .expect("orders match");
    }
    acc
}

/// Substitute the series `s` for the polynomial variable of every
/// coefficient of `f`, then recombine with the k^2 prefactors of `f`.
fn series_at_series(f: &K2Series, s: &K2Series) -> K2Series {
    let order = s.order();
    let mut out = vec![PolyL::zero(); order + 1];
    for (n, fpoly) in f.coeffs().iter().enumerate() {
        if n > order {
            break;
        }
        let comp = poly_at_series(fpoly, s);
        for m in n..=order {
            out[m] = &out[m] + comp.coeff(m - n);
        }
    }
    K2Series::new(out)
}

/// Legendre transform of the branch-0 L series, computed order by order by
/// perturbing the stationary point p*(l', k^2). The zeroth-order stationary
/// point is affine in l' and the correction at each order divides only by
/// the constant second derivative of the k^0 term, so every coefficient
/// stays polynomial.
pub fn rate_series(d: usize, order: usize) -> Result<RateFunctionSeries, SeriesError> {
    let lser = l_series(d, order)?;
    let lprime = K2Series::new(lser.coeffs().iter().map(|c| c.derivative()).collect());
    let (p0, curvature) = match d {
        2 => (PolyL::from_ints(&[-1, 1]), rat(1)),
        3 => (PolyL::new(vec![ratio(-3, 2), ratio(3, 4)]), ratio(4, 3)),
        _ => return Err(SeriesError::BadDimension(d)),
    };
    let neg_inv_c = -(rat(1) / curvature);
    let mut pcoeffs: Vec<PolyL> = vec![p0];
    for m in 1..=order {
        let mut padded = pcoeffs.clone();
        padded.resize(order + 1, PolyL::zero());
        let pser = K2Series::new(padded);
        let g = series_at_series(&lprime, &pser)
            .sub(&K2Series::from_poly(PolyL::ell(), order))
            .expect("orders match");
        pcoeffs.push(g.coeff(m).scale(&neg_inv_c));
    }
    pcoeffs.resize(order + 1, PolyL::zero());
    let pser = K2Series::new(pcoeffs);
    let ell_times_p =
        K2Series::new(pser.coeffs().iter().map(|c| &PolyL::ell() * c).collect());
    let series = ell_times_p
        .sub(&series_at_series(&lser, &pser))
        .expect("orders match");
    Ok(RateFunctionSeries { series, order })
}

/// Stationary-point Legendre transform of a sampled exponent function.
#[derive(Debug, Clone, Copy)]
pub struct LegendreResult {
    pub value: f64,
    pub p_star: f64,
    /// False when the sampled second differences show non-convexity inside
    /// the bracket; the stationary value is still reported.
    pub convex: bool,
}

/// Finds the stationary point of p -> p l - L(p) inside the bracket by
/// bisection on the centered-difference derivative, to width 1e-10.
pub fn legendre_numeric<F: Fn(f64) -> f64>(
    l_fn: F,
    ell: f64,
    bracket: (f64, f64),
) -> Result<LegendreResult, SeriesError> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(SeriesError::BadBracket { lo, hi });
    }
    let span = hi - lo;
    let scan = 24usize;
    let step = span / scan as f64;
    let samples: Vec<f64> = (0..=scan).map(|i| l_fn(lo + step * i as f64)).collect();
    let scale = samples.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let convex = samples
        .windows(3)
        .all(|w| w[2] - 2.0 * w[1] + w[0] >= -1e-8 * scale);
    let h = 1e-6 * span.max(1.0);
    let slope_gap = |p: f64| ell - (l_fn(p + h) - l_fn(p - h)) / (2.0 * h);
    let mut g_lo = slope_gap(lo);
    let g_hi = slope_gap(hi);
    if g_lo == 0.0 {
        return Ok(LegendreResult { value: lo * ell - l_fn(lo), p_star: lo, convex });
    }
    if g_hi == 0.0 {
        return Ok(LegendreResult { value: hi * ell - l_fn(hi), p_star: hi, convex });
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(SeriesError::NoStationaryPoint { lo, hi });
    }
    for _ in 0..200 {
        if hi - lo <= 1e-10 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let g_mid = slope_gap(mid);
        if g_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    let p_star = 0.5 * (lo + hi);
    Ok(LegendreResult { value: p_star * ell - l_fn(p_star), p_star, convex })
}

/// Largest deviation from L(l) = L(-l-d) over a grid.
#[derive(Debug, Clone, Copy)]
pub struct SymmetryReport {
    pub max_defect: f64,
    pub worst_ell: f64,
}

pub fn symmetry_check<F: Fn(f64) -> f64>(d: usize, l_fn: F, grid: &[f64]) -> SymmetryReport {
    let mut report = SymmetryReport { max_defect: 0.0, worst_ell: f64::NAN };
    for &ell in grid {
        let defect = (l_fn(ell) - l_fn(-ell - d as f64)).abs();
        if defect > report.max_defect || report.worst_ell.is_nan() {
            report.max_defect = defect;
            report.worst_ell = ell;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Rational;
    use crate::spectral2d::l_2d;
    use crate::spectral3d::{l_3d, leading_mu_3d};

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol,
            "got {got:.16e}, want {want:.16e}, diff {:.3e}",
            (got - want).abs()
        );
    }

    fn quartic_2d() -> PolyL {
        PolyL::one().mul_chain(&[
            PolyL::from_ints(&[-2, 1]),
            PolyL::ell(),
            PolyL::from_ints(&[2, 1]),
            PolyL::from_ints(&[4, 1]),
        ])
    }

    fn quartic_3d() -> PolyL {
        PolyL::one().mul_chain(&[
            PolyL::from_ints(&[-2, 1]),
            PolyL::ell(),
            PolyL::from_ints(&[3, 1]),
            PolyL::from_ints(&[5, 1]),
        ])
    }

    #[test]
    fn branch0_2d_table() {
        let m = mu_series_2d(0, 5);
        let s = &m.series;
        assert_eq!(s.coeff(0), &PolyL::zero());
        let lp2 = &PolyL::ell() * &PolyL::from_ints(&[2, 1]);
        assert_eq!(s.coeff(1), &lp2.scale(&ratio(-1, 2)));
        assert_eq!(s.coeff(2), &quartic_2d().scale(&ratio(1, 128)));
        assert_eq!(s.coeff(3), &quartic_2d().scale(&ratio(1, 256)));
        let oct4 = &quartic_2d() * &PolyL::from_ints(&[-5248, 16, 36, 28, 7]);
        assert_eq!(s.coeff(4), &oct4.scale(&ratio(-1, 2097152)));
        let oct5 = &quartic_2d() * &PolyL::from_ints(&[-7552, 48, 108, 84, 21]);
        assert_eq!(s.coeff(5), &oct5.scale(&ratio(-1, 4194304)));
    }

    #[test]
    fn branch1_2d_table() {
        let m = mu_series_2d(1, 3);
        let s = &m.series;
        assert_eq!(s.coeff(0), &PolyL::constant(rat(-16)));
        assert_eq!(s.coeff(1), &PolyL::from_ints(&[-16, 2, 1]).scale(&ratio(-1, 2)));
        let quart = PolyL::from_ints(&[-1152, 48, 44, 20, 5]);
        assert_eq!(s.coeff(2), &quart.scale(&ratio(-1, 768)));
        assert_eq!(s.coeff(3), &quart.scale(&ratio(-1, 1536)));
    }

    #[test]
    fn branch0_3d_table() {
        let m = mu_series_3d(0, 3).unwrap();
        let s = &m.series;
        assert_eq!(s.coeff(0), &PolyL::zero());
        let lp3 = &PolyL::ell() * &PolyL::from_ints(&[3, 1]);
        assert_eq!(s.coeff(1), &lp3.scale(&ratio(-4, 5)));
        assert_eq!(s.coeff(2), &quartic_3d().scale(&ratio(12, 875)));
        let six = &quartic_3d() * &PolyL::from_ints(&[-395, 27, 9]);
        assert_eq!(s.coeff(3), &six.scale(&ratio(-72, 3128125)));
    }

    #[test]
    fn branch1_3d_low_orders_match_display() {
        let m = mu_series_3d(1, 3).unwrap();
        let s = &m.series;
        assert_eq!(s.coeff(0), &PolyL::constant(rat(-6)));
        assert_eq!(s.coeff(1), &PolyL::from_ints(&[-3, 3, 1]).scale(&ratio(-8, 7)));
    }

    #[test]
    fn branch1_3d_higher_orders() {
        // the k^4 and k^6 coefficients, fixed against the exact
        // characteristic polynomials of the decoupled blocks at l = 4, 6
        let m = mu_series_3d(1, 3).unwrap();
        let s = &m.series;
        let pre = &PolyL::from_ints(&[-2, 1]) * &PolyL::from_ints(&[5, 1]);
        let c2 = (&pre * &PolyL::from_ints(&[-496, 237, 79])).scale(&ratio(8, 49049));
        assert_eq!(s.coeff(2), &c2);
        let c3 = (&pre * &PolyL::from_ints(&[-130208, 81594, 29997, 1866, 311]))
            .scale(&ratio(16, 40857817));
        assert_eq!(s.coeff(3), &c3);

        // spot values from the block characteristic polynomials
        assert_eq!(s.coeff(2).eval(&rat(4)), ratio(1728, 343));
        assert_eq!(s.coeff(3).eval(&rat(4)), ratio(103680, 16807));
        assert_eq!(s.coeff(2).eval(&rat(6)), ratio(9280, 343));
        assert_eq!(s.coeff(3).eval(&rat(6)), ratio(650240, 16807));
        // at l = 2 the second branch is -6 - 8k^2 exactly
        assert_eq!(s.coeff(1).eval(&rat(2)), rat(-8));
        assert!(s.coeff(2).eval(&rat(2)) == rat(0));
        assert!(s.coeff(3).eval(&rat(2)) == rat(0));
    }

    #[test]
    fn degenerate_branch_rejected() {
        assert_eq!(mu_series_3d(2, 2).unwrap_err(), SeriesError::DegenerateBranch(2));
    }

    #[test]
    fn lowest_order_constants() {
        for l in 0..4u32 {
            let m = mu_series_2d(l, 0);
            assert_eq!(m.series.coeff(0), &PolyL::constant(rat(-16 * l as i64 * l as i64)));
        }
        for l in 0..2u32 {
            let m = mu_series_3d(l, 0).unwrap();
            let lc = l as i64;
            assert_eq!(m.series.coeff(0), &PolyL::constant(rat(-2 * lc * (2 * lc + 1))));
        }
    }

    #[test]
    fn branch0_divisible_by_ell() {
        let m2 = mu_series_2d(0, 5);
        for n in 0..=5 {
            assert!(
                m2.series.coeff(n).div_exact(&PolyL::ell()).is_some(),
                "d=2 order {n} not divisible by l"
            );
        }
        let m3 = mu_series_3d(0, 3).unwrap();
        for n in 0..=3 {
            assert!(m3.series.coeff(n).div_exact(&PolyL::ell()).is_some());
        }
    }

    #[test]
    fn quartic_divisibility_2d() {
        let m = mu_series_2d(0, 3);
        for n in 2..=3 {
            assert!(
                m.series.coeff(n).div_exact(&quartic_2d()).is_some(),
                "order {n} lacks the quartic factor"
            );
        }
    }

    #[test]
    fn l_series_leading_terms() {
        let l2 = l_series(2, 1).unwrap();
        assert_eq!(
            l2.coeff(0),
            &(&PolyL::ell() * &PolyL::from_ints(&[2, 1])).scale(&ratio(1, 2))
        );
        assert_eq!(
            l2.coeff(1),
            &(&PolyL::ell() * &PolyL::from_ints(&[2, 1])).scale(&ratio(-1, 2))
        );
        let l3 = l_series(3, 0).unwrap();
        assert_eq!(
            l3.coeff(0),
            &(&PolyL::ell() * &PolyL::from_ints(&[3, 1])).scale(&ratio(2, 3))
        );
    }

    #[test]
    fn checkpoint_series_at_minimum() {
        let l = l_series(2, 7).unwrap();
        let want = [
            ratio(-1, 2),
            ratio(1, 2),
            ratio(9, 128),
            ratio(9, 256),
            ratio(47241, 2097152),
            ratio(67995, 4194304),
            ratio(13407669, 1073741824),
            ratio(21598857, 2147483648),
        ];
        for (n, w) in want.iter().enumerate() {
            assert_eq!(&l.coeff(n).eval(&rat(-1)), w, "order {n}");
        }
        let want_dd = [
            ratio(1, 1),
            ratio(-1, 1),
            ratio(-5, 32),
            ratio(-5, 64),
            ratio(-13109, 262144),
            ratio(-18847, 524288),
            ratio(-7424679, 268435456),
            ratio(-11948355, 536870912),
        ];
        for (n, w) in want_dd.iter().enumerate() {
            let dd = l.coeff(n).derivative().derivative();
            assert_eq!(&dd.eval(&rat(-1)), w, "second derivative order {n}");
        }
    }

    #[test]
    fn cumulant_tables_2d() {
        let g1: Vec<Rational> = cumulant_series(2, 1, 5).unwrap().ell_coefficient(0);
        let want1 = [
            rat(1),
            rat(-1),
            ratio(-1, 8),
            ratio(-1, 16),
            ratio(-41, 1024),
            ratio(-59, 2048),
        ];
        assert_eq!(g1, want1);
        let g2 = cumulant_series(2, 2, 5).unwrap().ell_coefficient(0);
        let want2 = [
            ratio(1, 2),
            ratio(-1, 2),
            ratio(-1, 32),
            ratio(-1, 64),
            ratio(-81, 8192),
            ratio(-115, 16384),
        ];
        assert_eq!(g2, want2);
        let g3 = cumulant_series(2, 3, 5).unwrap().ell_coefficient(0);
        let want3 = [
            rat(0),
            rat(0),
            ratio(1, 32),
            ratio(1, 64),
            ratio(169, 16384),
            ratio(251, 32768),
        ];
        assert_eq!(g3, want3);
        let g4 = cumulant_series(2, 4, 5).unwrap().ell_coefficient(0);
        let want4 = [
            rat(0),
            rat(0),
            ratio(1, 128),
            ratio(1, 256),
            ratio(361, 131072),
            ratio(571, 262144),
        ];
        assert_eq!(g4, want4);
    }

    #[test]
    fn cumulant_tables_3d() {
        let g1 = cumulant_series(3, 1, 5).unwrap().ell_coefficient(0);
        let want1 = [
            rat(2),
            ratio(-12, 5),
            ratio(-72, 175),
            ratio(-34128, 125125),
            ratio(-17244576, 74449375),
            ratio(-223736256, 1010384375),
        ];
        assert_eq!(g1, want1);
        let g2 = cumulant_series(3, 2, 5).unwrap().ell_coefficient(0);
        let want2 = [
            ratio(2, 3),
            ratio(-4, 5),
            ratio(-12, 875),
            ratio(5976, 625625),
            ratio(59358528, 2605728125),
            ratio(22326336, 642971875),
        ];
        assert_eq!(g2, want2);
        let g3 = cumulant_series(3, 3, 5).unwrap().ell_coefficient(0);
        let want3 = [
            rat(0),
            rat(0),
            ratio(72, 875),
            ratio(27432, 446875),
            ratio(30362256, 521145625),
            ratio(15082522656, 247544171875),
        ];
        assert_eq!(g3, want3);
        let g4 = cumulant_series(3, 4, 5).unwrap().ell_coefficient(0);
        let want4 = [
            rat(0),
            rat(0),
            ratio(12, 875),
            ratio(1584, 284375),
            ratio(32383188, 13028640625),
            ratio(60775592, 1237720859375),
        ];
        assert_eq!(g4, want4);
    }

    /// Coefficients of sqrt(s) for a series s with known rational square
    /// root y0 of its constant term; an independent check on the closed
    /// forms with square roots.
    fn sqrt_series(s: &[Rational], y0: Rational, order: usize) -> Vec<Rational> {
        let mut y = vec![rat(0); order + 1];
        y[0] = y0;
        for n in 1..=order {
            let mut acc = if n < s.len() { s[n].clone() } else { rat(0) };
            for i in 1..n {
                acc -= &y[i] * &y[n - i];
            }
            y[n] = acc / (rat(2) * &y[0]);
        }
        y
    }

    #[test]
    fn quasi_solvable_taylor_2d() {
        let m = mu_series_2d(0, 5);
        // l = 2: mu = -4 k^2 exactly
        assert_eq!(m.series.coeff(1).eval(&rat(2)), rat(-4));
        for n in 2..=5 {
            assert_eq!(m.series.coeff(n).eval(&rat(2)), rat(0));
        }
        // l = 4: mu = -8k^2 - 8 + 8 sqrt(k^4 - k^2 + 1)
        let y = sqrt_series(&[rat(1), rat(-1), rat(1)], rat(1), 5);
        for n in 0..=5 {
            let mut want = y[n].clone() * rat(8);
            if n == 0 {
                want -= rat(8);
            }
            if n == 1 {
                want -= rat(8);
            }
            assert_eq!(m.series.coeff(n).eval(&rat(4)), want, "l=4 order {n}");
        }
        // l = 6: mu = -20k^2 - 8 + 8 sqrt(4k^4 - k^2 + 1)
        let y = sqrt_series(&[rat(1), rat(-1), rat(4)], rat(1), 5);
        for n in 0..=5 {
            let mut want = y[n].clone() * rat(8);
            if n == 0 {
                want -= rat(8);
            }
            if n == 1 {
                want -= rat(20);
            }
            assert_eq!(m.series.coeff(n).eval(&rat(6)), want, "l=6 order {n}");
        }
    }

    #[test]
    fn quasi_solvable_taylor_3d() {
        // l = 4: mu = -20k^2 - 10 + 2 sqrt(36k^4 - 12k^2 + 25)
        let m = mu_series_3d(0, 3).unwrap();
        let y = sqrt_series(&[rat(25), rat(-12), rat(36)], rat(5), 3);
        for n in 0..=3 {
            let mut want = y[n].clone() * rat(2);
            if n == 0 {
                want -= rat(10);
            }
            if n == 1 {
                want -= rat(20);
            }
            assert_eq!(m.series.coeff(n).eval(&rat(4)), want, "order {n}");
        }
        // second branch at l = 4: -20k^2 - 13 + sqrt(144k^4 - 120k^2 + 49)
        let m1 = mu_series_3d(1, 3).unwrap();
        let y = sqrt_series(&[rat(49), rat(-120), rat(144)], rat(7), 3);
        for n in 0..=3 {
            let mut want = y[n].clone();
            if n == 0 {
                want -= rat(13);
            }
            if n == 1 {
                want -= rat(20);
            }
            assert_eq!(m1.series.coeff(n).eval(&rat(4)), want, "branch 1 order {n}");
        }
    }

    #[test]
    fn rate_table_2d() {
        let r = rate_series(2, 5).unwrap();
        let s = &r.series;
        let lm1 = PolyL::from_ints(&[-1, 1]);
        assert_eq!(s.coeff(0), &(&lm1 * &lm1).scale(&ratio(1, 2)));
        assert_eq!(
            s.coeff(1),
            &(&lm1 * &PolyL::from_ints(&[1, 1])).scale(&ratio(1, 2))
        );
        assert_eq!(
            s.coeff(2),
            &PolyL::from_ints(&[9, 0, -74, 0, 1]).scale(&ratio(-1, 128))
        );
        let f1 = PolyL::from_ints(&[3, -14, 3]);
        let f2 = PolyL::from_ints(&[3, 14, 3]);
        assert_eq!(s.coeff(3), &(&f1 * &f2).scale(&ratio(-1, 256)));
        assert_eq!(
            s.coeff(4),
            &PolyL::new(vec![
                rat(-47241),
                rat(0),
                rat(1781972),
                rat(0),
                rat(-211974),
                rat(0),
                rat(948),
                rat(0),
                rat(7),
            ])
            .scale(&ratio(1, 2097152))
        );
        assert_eq!(
            s.coeff(5),
            &PolyL::new(vec![
                rat(-67995),
                rat(0),
                rat(4389324),
                rat(0),
                rat(-990274),
                rat(0),
                rat(15244),
                rat(0),
                rat(133),
            ])
            .scale(&ratio(1, 4194304))
        );
    }

    #[test]
    fn rate_table_3d() {
        let r = rate_series(3, 3).unwrap();
        let s = &r.series;
        let lm2 = PolyL::from_ints(&[-2, 1]);
        assert_eq!(s.coeff(0), &(&lm2 * &lm2).scale(&ratio(3, 8)));
        assert_eq!(
            s.coeff(1),
            &(&lm2 * &PolyL::from_ints(&[2, 1])).scale(&ratio(9, 20))
        );
        assert_eq!(
            s.coeff(2),
            &PolyL::from_ints(&[21168, 0, -36504, 0, 243]).scale(&ratio(-1, 56000))
        );
        assert_eq!(
            s.coeff(3),
            &PolyL::new(vec![
                rat(-421920576),
                rat(0),
                rat(1597795632),
                rat(0),
                rat(-39724668),
                rat(0),
                rat(59049),
            ])
            .scale(&ratio(1, 1601600000))
        );
    }

    #[test]
    fn exact_symmetry_of_l_series() {
        for (d, order) in [(2usize, 5usize), (3, 3)] {
            let l = l_series(d, order).unwrap();
            let reflected = l.compose_affine(&rat(-1), &rat(-(d as i64)));
            for n in 0..=order {
                assert_eq!(l.coeff(n), reflected.coeff(n), "d={d} order {n}");
            }
        }
    }

    #[test]
    fn rate_series_symmetry() {
        for (d, order) in [(2usize, 4usize), (3, 3)] {
            let r = rate_series(d, order).unwrap();
            for n in 0..=order {
                let c = r.series.coeff(n);
                let mut reflected = c.compose_affine(&rat(-1), &rat(0));
                if n == 0 {
                    reflected = &reflected - &PolyL::from_ints(&[0, d as i64]);
                }
                assert_eq!(c, &reflected, "d={d} order {n}");
            }
        }
    }

    #[test]
    fn numeric_refinement_2d() {
        let l = l_series(2, 3).unwrap();
        let ell = 1.3;
        let errs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&k2| (l.eval_f64(k2, ell) - l_2d(k2, ell).unwrap()).abs())
            .collect();
        assert!(errs[1] <= errs[0] / 8.0, "errs {errs:?}");
        assert!(errs[2] <= errs[1] / 8.0, "errs {errs:?}");
    }

    #[test]
    fn numeric_refinement_3d() {
        let l = l_series(3, 2).unwrap();
        let ell = 1.0;
        let errs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&k2| (l.eval_f64(k2, ell) - l_3d(k2, ell).unwrap()).abs())
            .collect();
        assert!(errs[1] <= errs[0] / 4.0, "errs {errs:?}");
        assert!(errs[2] <= errs[1] / 4.0, "errs {errs:?}");
    }

    #[test]
    fn small_k2_branch_consistency_3d() {
        let m = mu_series_3d(0, 2).unwrap();
        for ell in [1.0, 2.5] {
            let ratios: Vec<f64> = [0.1, 0.05]
                .iter()
                .map(|&k2| {
                    let numeric = leading_mu_3d(k2, ell, 1e-11).unwrap().mu;
                    (numeric - m.series.eval_f64(k2, ell)).abs() / (k2 * k2 * k2)
                })
                .collect();
            assert!(
                ratios.iter().all(|r| r.is_finite() && *r < 100.0),
                "unbounded third-order ratio {ratios:?} at ell={ell}"
            );
        }
    }

    #[test]
    fn legendre_quadratic_closed_form() {
        let (g1, g2) = (0.3, 0.7);
        let l_fn = |p: f64| g1 * p + 0.5 * g2 * p * p;
        let ell = 1.1;
        let r = legendre_numeric(l_fn, ell, (-4.0, 4.0)).unwrap();
        assert!(r.convex);
        assert_close(r.value, (ell - g1) * (ell - g1) / (2.0 * g2), 1e-9);
        let r = legendre_numeric(l_fn, g1, (-4.0, 4.0)).unwrap();
        assert_close(r.value, 0.0, 1e-9);
        assert_close(r.p_star, 0.0, 1e-8);
    }

    #[test]
    fn legendre_numeric_checkpoint() {
        let r = legendre_numeric(|p| l_2d(0.5, p).unwrap(), 0.0, (-2.2, 0.4)).unwrap();
        assert!(r.convex);
        assert_close(r.value, 0.2257817708, 1e-6);
        assert_close(r.p_star, -1.0, 1e-4);
    }

    #[test]
    fn legendre_failure_modes() {
        assert!(matches!(
            legendre_numeric(|p| 0.5 * p * p, 10.0, (0.0, 1.0)),
            Err(SeriesError::NoStationaryPoint { .. })
        ));
        assert!(legendre_numeric(|p| p, 0.0, (1.0, -1.0)).is_err());
        let r = legendre_numeric(|p| p.powi(4) - p * p, 0.0, (-0.3, 0.3)).unwrap();
        assert!(!r.convex);
        assert_close(r.value, 0.0, 1e-8);
    }

    #[test]
    fn symmetry_check_numeric() {
        let rep = symmetry_check(2, |p| l_2d(0.5, p).unwrap(), &[-3.0, -1.0, 0.5, 2.0]);
        assert!(rep.max_defect < 1e-8, "defect {}", rep.max_defect);
    }

    #[test]
    fn dimension_validation() {
        assert!(l_series(4, 2).is_err());
        assert!(cumulant_series(2, 0, 2).is_err());
        assert!(rate_series(5, 2).is_err());
    }
}
