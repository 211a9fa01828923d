//! Exact sl(d) generator matrices on homogeneous polynomials of even degree,
//! the Casimir identity relating shears to rotations and strains, and the
//! quasi-solvable eigenvalue oracles obtained from the cyclic subspace of
//! (x_1^2 + ... + x_d^2)^{l/2}.
//!
//! All arithmetic in this module is exact rational; the only float produced
//! is the optional bridge value attached to a root bracket.

use crate::exact::{rat, rational_to_f64, rational_to_string, Rational};
use num::bigint::BigInt;
use num::{One, Signed, Zero};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyrepError {
    #[error("degree must be even, got {0}")]
    OddDegree(u32),
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("invalid generator indices ({i},{j}) for dimension {d}")]
    BadIndices { i: usize, j: usize, d: usize },
    #[error("k2 must lie in [0,1], got {0}")]
    BadStrain(String),
    #[error("root isolation failed for the characteristic polynomial")]
    RootIsolation,
}

/// Ordered monomial basis of the homogeneous polynomials of degree `ell` in
/// `d` variables, graded-lexicographic (x_1 powers descending first).
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    d: usize,
    ell: u32,
    exponents: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

pub fn monomial_basis(d: usize, ell: u32) -> Result<MonomialBasis, PolyrepError> {
    if d < 2 {
        return Err(PolyrepError::BadDimension(d));
    }
    if ell % 2 != 0 {
        return Err(PolyrepError::OddDegree(ell));
    }
    let mut exponents = Vec::new();
    let mut current = vec![0u32; d];
    enumerate(&mut exponents, &mut current, 0, ell);
    let index = exponents.iter().cloned().zip(0..).collect();
    Ok(MonomialBasis { d, ell, exponents, index })
}

fn enumerate(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        enumerate(out, current, pos + 1, remaining - e);
        current[pos] = 0;
    }
}

impl MonomialBasis {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn index_of(&self, alpha: &[u32]) -> Option<usize> {
        self.index.get(alpha).copied()
    }
}

/// Dense square matrix of exact rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    n: usize,
    a: Vec<Rational>,
}

impl RatMatrix {
    pub fn zero(n: usize) -> Self {
        RatMatrix { n, a: vec![Rational::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zero(n);
        for i in 0..n {
            m.a[i * n + i] = Rational::one();
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.a[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.a[r * self.n + c] = v;
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: &Rational) {
        self.a[r * self.n + c] += v;
    }

    pub fn matmul(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = RatMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        let t = aik * b;
                        out.a[i * n + j] += t;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.n, rhs.n);
        RatMatrix {
            n: self.n,
            a: self.a.iter().zip(&rhs.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.n, rhs.n);
        RatMatrix {
            n: self.n,
            a: self.a.iter().zip(&rhs.a).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> RatMatrix {
        RatMatrix { n: self.n, a: self.a.iter().map(|x| x * c).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|x| x.is_zero())
    }

    pub fn max_abs(&self) -> Rational {
        self.a.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)
    }

    pub fn trace(&self) -> Rational {
        (0..self.n).map(|i| self.get(i, i).clone()).sum()
    }

    /// Matrix-vector product with a column vector.
    pub fn matvec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| {
                let mut acc = Rational::zero();
                for (j, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        acc += self.get(i, j) * x;
                    }
                }
                acc
            })
            .collect()
    }

    /// Rows as "num/den" strings, for JSON export.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| rational_to_string(self.get(i, j))).collect())
            .collect()
    }
}

/// Which first-order operator to realize: shear N_ij = x_i d_j, diagonal
/// strain A_ij = x_i d_i - x_j d_j, or rotation K_ij = N_ij - N_ji.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Shear { i: usize, j: usize },
    Strain { i: usize, j: usize },
    Rotation { i: usize, j: usize },
}

/// A generator realized as an exact matrix on a monomial basis.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    pub kind: GeneratorKind,
    pub matrix: RatMatrix,
}

pub fn generator_matrix(
    kind: GeneratorKind,
    basis: &MonomialBasis,
) -> Result<GeneratorMatrix, PolyrepError> {
    let (i, j, ordered) = match kind {
        GeneratorKind::Shear { i, j } => (i, j, false),
        GeneratorKind::Strain { i, j } | GeneratorKind::Rotation { i, j } => (i, j, true),
    };
    let d = basis.d;
    if i == 0 || j == 0 || i > d || j > d || i == j || (ordered && i >= j) {
        return Err(PolyrepError::BadIndices { i, j, d });
    }
    let matrix = match kind {
        GeneratorKind::Shear { i, j } => shear_matrix(basis, i - 1, j - 1),
        GeneratorKind::Strain { i, j } => strain_matrix(basis, i - 1, j - 1),
        GeneratorKind::Rotation { i, j } => {
            shear_matrix(basis, i - 1, j - 1).sub(&shear_matrix(basis, j - 1, i - 1))
        }
    };
    Ok(GeneratorMatrix { kind, matrix })
}

fn shear_matrix(basis: &MonomialBasis, i: usize, j: usize) -> RatMatrix {
    let mut m = RatMatrix::zero(basis.len());
    for (col, alpha) in basis.exponents.iter().enumerate() {
        if alpha[j] == 0 {
            continue;
        }
        let mut target = alpha.clone();
        target[j] -= 1;
        target[i] += 1;
        let row = basis.index_of(&target).expect("image stays in the basis");
        m.set(row, col, rat(alpha[j] as i64));
    }
    m
}

fn strain_matrix(basis: &MonomialBasis, i: usize, j: usize) -> RatMatrix {
    let mut m = RatMatrix::zero(basis.len());
    for (col, alpha) in basis.exponents.iter().enumerate() {
        m.set(col, col, rat(alpha[i] as i64 - alpha[j] as i64));
    }
    m
}

/// Sum of squared rotation generators over i < j (the angular Laplacian).
pub fn casimir_matrix(basis: &MonomialBasis) -> RatMatrix {
    let mut acc = RatMatrix::zero(basis.len());
    for i in 1..=basis.d {
        for j in (i + 1)..=basis.d {
            let k = generator_matrix(GeneratorKind::Rotation { i, j }, basis)
                .expect("valid indices")
                .matrix;
            acc = acc.add(&k.matmul(&k));
        }
    }
    acc
}

/// Sum of squared strain generators over i < j.
pub fn strain_sum_matrix(basis: &MonomialBasis) -> RatMatrix {
    let mut acc = RatMatrix::zero(basis.len());
    for i in 1..=basis.d {
        for j in (i + 1)..=basis.d {
            let a = generator_matrix(GeneratorKind::Strain { i, j }, basis)
                .expect("valid indices")
                .matrix;
            acc = acc.add(&a.matmul(&a));
        }
    }
    acc
}

/// Outcome of checking the exact matrix identity
/// sum_{i != j} N_ij^2 = Delta_K + (d-1)l + ((d-1)/d) l^2 - (1/d) sum_{i<j} A_ij^2.
#[derive(Debug, Clone)]
pub struct CasimirReport {
    pub d: usize,
    pub ell: u32,
    pub dim: usize,
    pub holds: bool,
    pub max_abs_defect: Rational,
}

pub fn verify_casimir_identity(d: usize, ell: u32) -> Result<CasimirReport, PolyrepError> {
    let basis = monomial_basis(d, ell)?;
    let n = basis.len();
    let mut shear_sq = RatMatrix::zero(n);
    for i in 1..=d {
        for j in 1..=d {
            if i == j {
                continue;
            }
            let nm = generator_matrix(GeneratorKind::Shear { i, j }, &basis)?.matrix;
            shear_sq = shear_sq.add(&nm.matmul(&nm));
        }
    }
    let dm1 = rat(d as i64 - 1);
    let scalar = &dm1 * rat(ell as i64) + &dm1 / rat(d as i64) * rat(ell as i64) * rat(ell as i64);
    let rhs = casimir_matrix(&basis)
        .add(&RatMatrix::identity(n).scale(&scalar))
        .sub(&strain_sum_matrix(&basis).scale(&(Rational::one() / rat(d as i64))));
    let defect = shear_sq.sub(&rhs);
    Ok(CasimirReport {
        d,
        ell,
        dim: n,
        holds: defect.is_zero(),
        max_abs_defect: defect.max_abs(),
    })
}

/// Exact spectral data for the quasi-solvable block: the characteristic
/// polynomial of the restriction of Delta_K - k2 * sum A_ij^2 to the cyclic
/// subspace of 1_l, and a rational bracket around its largest real root.
#[derive(Debug, Clone)]
pub struct QuasiSolvable {
    /// Monic characteristic polynomial, ascending coefficients (constant first).
    pub char_poly: Vec<Rational>,
    pub krylov_dim: usize,
    pub root_lo: Rational,
    pub root_hi: Rational,
}

impl QuasiSolvable {
    /// Float bridge to the bracketed largest real root.
    pub fn leading_root_f64(&self) -> f64 {
        rational_to_f64(&((&self.root_lo + &self.root_hi) / rat(2)))
    }
}

const BRACKET_WIDTH_EXP: u32 = 30;

pub fn quasi_solvable_mu(d: usize, ell: u32, k2: &Rational) -> Result<QuasiSolvable, PolyrepError> {
    if k2.is_negative() || k2 > &Rational::one() {
        return Err(PolyrepError::BadStrain(rational_to_string(k2)));
    }
    let basis = monomial_basis(d, ell)?;
    let m = casimir_matrix(&basis).sub(&strain_sum_matrix(&basis).scale(k2));
    let v0 = unit_sphere_power(&basis);
    let (char_poly, krylov_dim) = krylov_minimal_polynomial(&m, v0);
    let (root_lo, root_hi) = largest_real_root(&char_poly)?;
    Ok(QuasiSolvable { char_poly, krylov_dim, root_lo, root_hi })
}

/// Coordinates of (x_1^2 + ... + x_d^2)^{l/2} in the monomial basis:
/// multinomial coefficients on even multi-indices.
fn unit_sphere_power(basis: &MonomialBasis) -> Vec<Rational> {
    let half = basis.ell / 2;
    let mut v = vec![Rational::zero(); basis.len()];
    for (idx, alpha) in basis.exponents.iter().enumerate() {
        if alpha.iter().any(|&a| a % 2 != 0) {
            continue;
        }
        let mut coeff = factorial(half);
        for &a in alpha {
            coeff /= factorial(a / 2);
        }
        v[idx] = Rational::from_integer(coeff);
    }
    v
}

fn factorial(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n as u64 {
        acc *= BigInt::from(k);
    }
    acc
}

/// Minimal polynomial of v0 under m via exact Krylov iteration with
/// Gauss-reduced coordinates; breakdown (dependence) is the stopping rule.
fn krylov_minimal_polynomial(m: &RatMatrix, v0: Vec<Rational>) -> (Vec<Rational>, usize) {
    let n = m.n();
    let mut krylov: Vec<Vec<Rational>> = Vec::new();
    let mut reduced: Vec<(usize, Vec<Rational>, Vec<Rational>)> = Vec::new();
    let mut v = v0;
    loop {
        let mut w = v.clone();
        let mut combo = vec![Rational::zero(); krylov.len() + 1];
        for (pivot, basis_vec, coords) in &reduced {
            if w[*pivot].is_zero() {
                continue;
            }
            let factor = w[*pivot].clone();
            for t in 0..n {
                let tmp = &factor * &basis_vec[t];
                w[t] -= tmp;
            }
            for (t, c) in coords.iter().enumerate() {
                let tmp = &factor * c;
                combo[t] += tmp;
            }
        }
        match w.iter().position(|x| !x.is_zero()) {
            Some(pivot) => {
                let inv = Rational::one() / w[pivot].clone();
                let basis_vec: Vec<Rational> = w.iter().map(|x| x * &inv).collect();
                let mut coords = vec![Rational::zero(); krylov.len() + 1];
                for (t, c) in combo.iter().enumerate() {
                    coords[t] = -(c * &inv);
                }
                coords[krylov.len()] = inv;
                reduced.push((pivot, basis_vec, coords));
                krylov.push(v.clone());
                v = m.matvec(&v);
            }
            None => {
                // v = sum combo[t] * krylov[t]: minimal polynomial found
                let deg = krylov.len();
                let mut poly = vec![Rational::zero(); deg + 1];
                for (t, c) in combo.iter().take(deg).enumerate() {
                    poly[t] = -c.clone();
                }
                poly[deg] = Rational::one();
                return (poly, deg);
            }
        }
    }
}

fn eval_poly(p: &[Rational], x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Rational bracket of width <= 10^-30 around the largest real root of a
/// monic polynomial with at least one real root.
fn largest_real_root(p: &[Rational]) -> Result<(Rational, Rational), PolyrepError> {
    let deg = p.len() - 1;
    if deg == 0 {
        return Err(PolyrepError::RootIsolation);
    }
    if deg == 1 {
        let r = -p[0].clone();
        return Ok((r.clone(), r));
    }
    let bound = Rational::one()
        + p[..deg].iter().map(|c| c.abs()).max().unwrap_or_else(Rational::zero);
    let mut steps: i64 = 64;
    for _ in 0..6 {
        let step = &bound * rat(2) / rat(steps);
        let mut hi = bound.clone();
        let mut sign_hi = eval_poly(p, &hi);
        debug_assert!(sign_hi.is_positive());
        for s in 1..=steps {
            let lo = &bound - &step * rat(s);
            let f_lo = eval_poly(p, &lo);
            if f_lo.is_zero() {
                return Ok((lo.clone(), lo));
            }
            if f_lo.is_positive() != sign_hi.is_positive() {
                return Ok(bisect(p, lo, hi));
            }
            hi = lo;
            sign_hi = f_lo;
        }
        steps *= 4;
    }
    Err(PolyrepError::RootIsolation)
}

fn bisect(p: &[Rational], mut lo: Rational, mut hi: Rational) -> (Rational, Rational) {
    let width = Rational::new(BigInt::one(), BigInt::from(10u8).pow(BRACKET_WIDTH_EXP));
    let f_hi_positive = eval_poly(p, &hi).is_positive();
    while (&hi - &lo) > width {
        let mid = (&lo + &hi) / rat(2);
        let f = eval_poly(p, &mid);
        if f.is_zero() {
            return (mid.clone(), mid);
        }
        if f.is_positive() == f_hi_positive {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}
