//! Truncated eigenproblem for the two-dimensional companion operator in the
//! even cosine basis: tridiagonal assembly, adaptive leading-branch solves,
//! and the map from the eigenvalue mu(k, l) to the generalized Lyapunov
//! exponent L(k, l) / tau^2 = l + l^2/2 + mu.

use crate::eigen::{self, EigenError, Mat};
use thiserror::Error;

/// Error type shared by the two spectral truncation modules.
#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("strain parameter k2 must lie in {range}, got {k2}")]
    BadStrain { k2: f64, range: &'static str },
    #[error("exponent parameter must be finite, got {0}")]
    BadExponent(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("truncation must be at least 4, got {0}")]
    BadTruncation(usize),
    #[error("branch collision: leading eigenvalue {mu} has imaginary part {im}")]
    BranchCollision { mu: f64, im: f64 },
    #[error("eigenvalue not converged at truncation {n_max} (last change {last_delta:.3e})")]
    NoConvergence { n_max: usize, last_delta: f64 },
    #[error("eigenvector normalization degenerate: anchor coefficient {0:.3e}")]
    DegenerateNormalization(f64),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Stencil(#[from] crate::stencil3d::Stencil3dError),
}

/// Tridiagonal truncation of the companion operator on cosine coefficients
/// v_0..v_N: row j reads mu v_j = -16 j^2 v_j - k2 (a_j v_{j-1} + b_j v_j +
/// c_j v_{j+1}).
#[derive(Debug, Clone)]
pub struct CosineOperator {
    pub k2: f64,
    pub ell: f64,
    pub n: usize,
    /// diag[j] = -16 j^2 - k2 b_j
    pub diag: Vec<f64>,
    /// sub[j] = -k2 a_j (coupling of row j to v_{j-1}; sub[0] = 0)
    pub sub: Vec<f64>,
    /// sup[j] = -k2 c_j (coupling of row j to v_{j+1}; sup[N] = 0)
    pub sup: Vec<f64>,
}

/// a_j: downward coupling. a_0 = 0; the j = 1 entry is doubled by the
/// constant-mode convention; for even natural l the entry a_{[l/4]+1}
/// vanishes, decoupling a finite block.
pub fn coeff_a(ell: f64, j: usize) -> f64 {
    match j {
        0 => 0.0,
        1 => (ell / 2.0 - 1.0) * ell,
        _ => {
            let jf = j as f64;
            (ell / 2.0 + 1.0 - 2.0 * jf) * (ell / 2.0 + 2.0 - 2.0 * jf)
        }
    }
}

/// b_j: diagonal coupling l^2/2 + l - 8 j^2.
pub fn coeff_b(ell: f64, j: usize) -> f64 {
    let jf = j as f64;
    ell * ell / 2.0 + ell - 8.0 * jf * jf
}

/// c_j: upward coupling (l/2 + 1 + 2j)(l/2 + 2 + 2j).
pub fn coeff_c(ell: f64, j: usize) -> f64 {
    let jf = j as f64;
    (ell / 2.0 + 1.0 + 2.0 * jf) * (ell / 2.0 + 2.0 + 2.0 * jf)
}

pub fn build_operator_2d(k2: f64, ell: f64, n: usize) -> Result<CosineOperator, SpectralError> {
    if !(0.0..1.0).contains(&k2) || !k2.is_finite() {
        return Err(SpectralError::BadStrain { k2, range: "[0,1)" });
    }
    if !ell.is_finite() {
        return Err(SpectralError::BadExponent(ell));
    }
    if n < 4 {
        return Err(SpectralError::BadTruncation(n));
    }
    let mut diag = Vec::with_capacity(n + 1);
    let mut sub = Vec::with_capacity(n + 1);
    let mut sup = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let jf = j as f64;
        diag.push(-16.0 * jf * jf - k2 * coeff_b(ell, j));
        sub.push(-k2 * coeff_a(ell, j));
        sup.push(if j < n { -k2 * coeff_c(ell, j) } else { 0.0 });
    }
    Ok(CosineOperator { k2, ell, n, diag, sub, sup })
}

impl CosineOperator {
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn to_dense(&self) -> Mat {
        let dim = self.dim();
        let mut m = Mat::zero(dim);
        for j in 0..dim {
            m.set(j, j, self.diag[j]);
            if j > 0 {
                m.set(j, j - 1, self.sub[j]);
            }
            if j + 1 < dim {
                m.set(j, j + 1, self.sup[j]);
            }
        }
        m
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        assert_eq!(v.len(), dim);
        (0..dim)
            .map(|j| {
                let mut s = self.diag[j] * v[j];
                if j > 0 {
                    s += self.sub[j] * v[j - 1];
                }
                if j + 1 < dim {
                    s += self.sup[j] * v[j + 1];
                }
                s
            })
            .collect()
    }

    /// Max recurrence defect of the pair (mu, v) under the truncated rows.
    pub fn residual(&self, mu: f64, v: &[f64]) -> f64 {
        self.apply(v)
            .iter()
            .zip(v)
            .map(|(av, x)| (av - mu * x).abs())
            .fold(0.0, f64::max)
    }
}

/// Converged eigenpair of a truncated companion operator.
#[derive(Debug, Clone)]
pub struct BranchResult {
    pub mu: f64,
    /// Coefficient vector, normalized per dimension convention (sum of
    /// coefficients = 1 in d=2; first coefficient = 1 in d=3).
    pub eigvec: Vec<f64>,
    pub n_used: usize,
    pub residual: f64,
}

pub const DEFAULT_TOL: f64 = 1e-10;
const START_N: usize = 16;
const MAX_N: usize = 4096;
const IM_GUARD: f64 = 1e-10;

fn check_tol(tol: f64) -> Result<(), SpectralError> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(SpectralError::BadTolerance(tol));
    }
    Ok(())
}

/// Eigenvalue of the given branch (0 = leading by real part) with the
/// complex-pair guard applied.
fn branch_value(vals: &[(f64, f64)], branch: usize) -> Result<f64, SpectralError> {
    let (re, im) = vals[branch];
    if im.abs() > IM_GUARD * (1.0 + re.abs()) {
        return Err(SpectralError::BranchCollision { mu: re, im });
    }
    Ok(re)
}

fn solve_branch_2d(
    k2: f64,
    ell: f64,
    tol: f64,
    branch: usize,
) -> Result<BranchResult, SpectralError> {
    check_tol(tol)?;
    let mut prev: Option<f64> = None;
    let mut n = START_N;
    loop {
        let op = build_operator_2d(k2, ell, n)?;
        let dense = op.to_dense();
        let vals = eigen::eigenvalues(&dense)?;
        let mu = branch_value(&vals, branch)?;
        if let Some(p) = prev {
            if (mu - p).abs() < tol {
                let raw = eigen::inverse_iteration(&dense, mu, 4);
                let sum: f64 = raw.iter().sum();
                let l1: f64 = raw.iter().map(|x| x.abs()).sum();
                if sum.abs() < 1e-12 * l1 {
                    return Err(SpectralError::DegenerateNormalization(sum));
                }
                let eigvec: Vec<f64> = raw.iter().map(|x| x / sum).collect();
                let residual = op.residual(mu, &eigvec);
                return Ok(BranchResult { mu, eigvec, n_used: n, residual });
            }
            if n >= MAX_N {
                return Err(SpectralError::NoConvergence {
                    n_max: MAX_N,
                    last_delta: (mu - p).abs(),
                });
            }
        }
        prev = Some(mu);
        n *= 2;
        if n > MAX_N {
            n = MAX_N;
        }
    }
}

/// Leading eigenvalue mu(k, l) of the companion operator, with the
/// truncation doubled from 16 until successive values agree within `tol`.
pub fn leading_mu_2d(k2: f64, ell: f64, tol: f64) -> Result<BranchResult, SpectralError> {
    solve_branch_2d(k2, ell, tol, 0)
}

/// Second eigenvalue branch (the first excited Fourier branch at small l).
pub fn second_mu_2d(k2: f64, ell: f64, tol: f64) -> Result<BranchResult, SpectralError> {
    solve_branch_2d(k2, ell, tol, 1)
}

/// Generalized Lyapunov exponent over tau^2 for d = 2: l + l^2/2 + mu(k, l).
pub fn l_2d(k2: f64, ell: f64) -> Result<f64, SpectralError> {
    let branch = leading_mu_2d(k2, ell, DEFAULT_TOL)?;
    Ok(ell + ell * ell / 2.0 + branch.mu)
}
