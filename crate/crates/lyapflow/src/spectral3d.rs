//! Truncated eigenproblem for the three-dimensional companion operator on
//! the even-m surface-harmonic lattice: the basis eps_ij = e_{i,2j}, matrix
//! assembly from the exact strain stencils, adaptive leading-branch solves,
//! and L(k, l) / tau^2 = 2l + (2/3) l^2 + mu for d = 3.

use crate::eigen::{self, Mat};
use crate::spectral2d::{BranchResult, SpectralError};
use crate::stencil3d::script_a_on_epsilon;
use std::collections::HashMap;

/// Row-major index set {(i, j): 0 <= i <= N, 0 <= j <= floor(i/2)} mapping
/// the even-m basis elements eps_ij = e_{i,2j} to matrix coordinates.
#[derive(Debug, Clone)]
pub struct EpsilonBasis {
    n: usize,
    sites: Vec<(u32, u32)>,
    index: HashMap<(u32, u32), usize>,
}

pub fn epsilon_basis(n: usize) -> EpsilonBasis {
    let mut sites = Vec::new();
    for i in 0..=n as u32 {
        for j in 0..=(i / 2) {
            sites.push((i, j));
        }
    }
    let index = sites.iter().copied().zip(0..).collect();
    EpsilonBasis { n, sites, index }
}

impl EpsilonBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[(u32, u32)] {
        &self.sites
    }

    pub fn index_of(&self, i: u32, j: u32) -> Option<usize> {
        self.index.get(&(i, j)).copied()
    }
}

/// Upper bound accepted for k2 in d = 3; the physical domain ends at 1/3
/// and a small margin is allowed for sensitivity studies.
pub const MAX_K2_3D: f64 = 0.4;

fn check_inputs_3d(k2: f64, ell: f64, n: usize) -> Result<(), SpectralError> {
    if !(0.0..=MAX_K2_3D).contains(&k2) || !k2.is_finite() {
        return Err(SpectralError::BadStrain { k2, range: "[0, 0.4]" });
    }
    if !ell.is_finite() {
        return Err(SpectralError::BadExponent(ell));
    }
    if n < 4 {
        return Err(SpectralError::BadTruncation(n));
    }
    Ok(())
}

/// Dense truncation of -k2 * (A12^2 + A13^2 + A23^2) shifted by the
/// rotation-Casimir diagonal -2i(2i+1), restricted to the even-m lattice
/// with sites beyond row N dropped. Stencil coefficients are specialized at
/// the exact rational image of `ell` and rounded once.
pub fn build_operator_3d(k2: f64, ell: f64, n: usize) -> Result<(EpsilonBasis, Mat), SpectralError> {
    check_inputs_3d(k2, ell, n)?;
    let basis = epsilon_basis(n);
    let mut m = Mat::zero(basis.len());
    for (col, &(i, j)) in basis.sites().iter().enumerate() {
        let ii = i as f64;
        m.set(col, col, -2.0 * ii * (2.0 * ii + 1.0));
        if k2 == 0.0 {
            continue;
        }
        for (l2, j2, poly) in script_a_on_epsilon(i, j)? {
            if let Some(row) = basis.index_of(l2, j2) {
                let v = m.get(row, col) - k2 * poly.eval_f64(ell);
                m.set(row, col, v);
            }
        }
    }
    Ok((basis, m))
}

const START_N_3D: usize = 8;
const MAX_N_3D: usize = 128;
const IM_GUARD: f64 = 1e-10;

fn solve_branch_3d(
    k2: f64,
    ell: f64,
    tol: f64,
    branch: usize,
) -> Result<BranchResult, SpectralError> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(SpectralError::BadTolerance(tol));
    }
    let mut prev: Option<f64> = None;
    let mut n = START_N_3D;
    loop {
        let (basis, dense) = build_operator_3d(k2, ell, n)?;
        let vals = eigen::eigenvalues(&dense)?;
        let (re, im) = vals[branch];
        if im.abs() > IM_GUARD * (1.0 + re.abs()) {
            return Err(SpectralError::BranchCollision { mu: re, im });
        }
        if let Some(p) = prev {
            if (re - p).abs() < tol {
                let raw = eigen::inverse_iteration(&dense, re, 4);
                let anchor_site = basis
                    .index_of(branch as u32, 0)
                    .expect("anchor site inside basis");
                let anchor = raw[anchor_site];
                let linf = raw.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                if anchor.abs() < 1e-12 * linf {
                    return Err(SpectralError::DegenerateNormalization(anchor));
                }
                let eigvec: Vec<f64> = raw.iter().map(|x| x / anchor).collect();
                let av = dense.matvec(&eigvec);
                let residual = av
                    .iter()
                    .zip(&eigvec)
                    .map(|(a, x)| (a - re * x).abs())
                    .fold(0.0, f64::max);
                return Ok(BranchResult { mu: re, eigvec, n_used: n, residual });
            }
            if n >= MAX_N_3D {
                return Err(SpectralError::NoConvergence {
                    n_max: MAX_N_3D,
                    last_delta: (re - p).abs(),
                });
            }
        }
        prev = Some(re);
        n = (n * 2).min(MAX_N_3D);
    }
}

/// Leading eigenvalue mu(k, l) for d = 3, truncation doubled from 8 until
/// successive values agree within `tol`; eigenvector anchored by the
/// eps_00 coefficient set to 1.
pub fn leading_mu_3d(k2: f64, ell: f64, tol: f64) -> Result<BranchResult, SpectralError> {
    solve_branch_3d(k2, ell, tol, 0)
}

/// Second eigenvalue branch, anchored by the eps_10 coefficient.
pub fn second_mu_3d(k2: f64, ell: f64, tol: f64) -> Result<BranchResult, SpectralError> {
    solve_branch_3d(k2, ell, tol, 1)
}

/// Generalized Lyapunov exponent over tau^2 for d = 3.
pub fn l_3d(k2: f64, ell: f64) -> Result<f64, SpectralError> {
    let branch = leading_mu_3d(k2, ell, crate::spectral2d::DEFAULT_TOL)?;
    Ok(2.0 * ell + 2.0 * ell * ell / 3.0 + branch.mu)
}
