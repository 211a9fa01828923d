//! Exact ladder stencils for the three strain generators acting on the
//! surface-harmonic basis e_lm = P_{2l}^{2m}(cos t) cos(2m p), with
//! coefficients kept as exact polynomials in the exponent parameter l
//! (written `ell` below to distinguish it from the lattice index l).
//!
//! Each single application maps e_lm to a combination of e_{l'm'} with
//! |l'-l| <= 1 and |m'-m| <= 1; the three operators share one coefficient
//! family and differ only in which of the m-preserving and m-changing parts
//! they keep and with what signs. Their summed squares leave the even-m
//! sublattice invariant, which is checked exactly.

use crate::exact::{ratio, PolyL, Rational};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Stencil3dError {
    #[error("invalid lattice site (l={l}, m={m}): require 0 <= m <= l")]
    BadIndex { l: i64, m: i64 },
    #[error("odd-m leakage from epsilon_({si},{sj}) to e_({l},{m})")]
    OddLeakage { si: u32, sj: u32, l: u32, m: u32 },
}

/// Index pair naming one of the three strain generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrainPair {
    A12,
    A13,
    A23,
}

fn linear(c0: i64, c1: i64) -> PolyL {
    PolyL::from_ints(&[c0, c1])
}

/// a_l = (ell + 2l + 1) / (4 (4l-1)(4l+1))
fn seq_a(l: i64) -> PolyL {
    linear(2 * l + 1, 1).scale(&ratio(1, 4 * (4 * l - 1) * (4 * l + 1)))
}

/// b_l = -(2 ell + 3) / (4 (4l-1)(4l+3))
fn seq_b(l: i64) -> PolyL {
    linear(-3, -2).scale(&ratio(1, 4 * (4 * l - 1) * (4 * l + 3)))
}

/// c_l = (ell - 2l) / (4 (4l+1)(4l+3))
fn seq_c(l: i64) -> PolyL {
    linear(-2 * l, 1).scale(&ratio(1, 4 * (4 * l + 1) * (4 * l + 3)))
}

fn int_scale(p: PolyL, f: i64) -> PolyL {
    p.scale(&Rational::from_integer(f.into()))
}

/// m-preserving coefficients.
fn frak_a(l: i64, m: i64) -> PolyL {
    int_scale(seq_a(l), -6 * (2 * l + 2 * m - 1) * (2 * l + 2 * m))
}

fn frak_b(l: i64, m: i64) -> PolyL {
    int_scale(seq_b(l), 4 * (2 * l * l + l - 6 * m * m))
}

fn frak_c(l: i64, m: i64) -> PolyL {
    int_scale(seq_c(l), -6 * (2 * l - 2 * m + 1) * (2 * l - 2 * m + 2))
}

/// m-lowering coefficients: products of four consecutive integers written
/// out directly so the factorial ratios never overflow.
fn low_alpha(l: i64, m: i64) -> PolyL {
    let t = 2 * l + 2 * m;
    int_scale(seq_a(l), t * (t - 1) * (t - 2) * (t - 3))
}

fn low_beta(l: i64, m: i64) -> PolyL {
    let t = 2 * l + 2 * m;
    let u = 2 * l - 2 * m;
    int_scale(seq_b(l), t * (t - 1) * (u + 2) * (u + 1))
}

fn low_gamma(l: i64, m: i64) -> PolyL {
    let u = 2 * l - 2 * m;
    int_scale(seq_c(l), (u + 4) * (u + 3) * (u + 2) * (u + 1))
}

fn valid(l: i64, m: i64) -> bool {
    l >= 0 && (0..=l).contains(&m)
}

fn push(out: &mut Vec<(u32, u32, PolyL)>, l: i64, m: i64, coeff: PolyL) {
    if valid(l, m) && !coeff.is_zero() {
        out.push((l as u32, m as u32, coeff));
    }
}

/// Terms of A e_lm in the e-basis, as (l', m', coefficient) with exact
/// polynomial coefficients in ell.
pub fn apply_a(which: StrainPair, l: u32, m: u32) -> Result<Vec<(u32, u32, PolyL)>, Stencil3dError> {
    let (l, m) = (l as i64, m as i64);
    if !valid(l, m) {
        return Err(Stencil3dError::BadIndex { l, m });
    }
    // A13 splits into an m-preserving part and an m-changing part; A23 is
    // A13 with the m-changing part negated, and A12 keeps only the
    // m-changing part doubled.
    let (keep_pres, change_factor) = match which {
        StrainPair::A13 => (true, 1),
        StrainPair::A23 => (true, -1),
        StrainPair::A12 => (false, 2),
    };
    let mut out = Vec::new();
    if m == 0 {
        if keep_pres {
            if l == 0 {
                push(&mut out, 1, 0, frak_c(0, 0));
            } else {
                push(&mut out, l - 1, 0, frak_a(l, 0));
                push(&mut out, l, 0, frak_b(l, 0));
                push(&mut out, l + 1, 0, frak_c(l, 0));
            }
        }
        // the reflected m = -1 channel folds onto m = +1, doubling it
        let f = 2 * change_factor;
        push(&mut out, l - 1, 1, int_scale(seq_a(l), f));
        push(&mut out, l, 1, int_scale(seq_b(l), f));
        push(&mut out, l + 1, 1, int_scale(seq_c(l), f));
    } else {
        push(&mut out, l - 1, m - 1, int_scale(low_alpha(l, m), change_factor));
        push(&mut out, l, m - 1, int_scale(low_beta(l, m), change_factor));
        push(&mut out, l + 1, m - 1, int_scale(low_gamma(l, m), change_factor));
        if keep_pres {
            push(&mut out, l - 1, m, frak_a(l, m));
            push(&mut out, l, m, frak_b(l, m));
            push(&mut out, l + 1, m, frak_c(l, m));
        }
        push(&mut out, l - 1, m + 1, int_scale(seq_a(l), change_factor));
        push(&mut out, l, m + 1, int_scale(seq_b(l), change_factor));
        push(&mut out, l + 1, m + 1, int_scale(seq_c(l), change_factor));
    }
    Ok(out)
}

fn accumulate_square(
    which: StrainPair,
    l: u32,
    m: u32,
    acc: &mut BTreeMap<(u32, u32), PolyL>,
) -> Result<(), Stencil3dError> {
    for (l1, m1, c1) in apply_a(which, l, m)? {
        for (l2, m2, c2) in apply_a(which, l1, m1)? {
            let prod = &c1 * &c2;
            acc.entry((l2, m2))
                .and_modify(|p| *p = &*p + &prod)
                .or_insert(prod);
        }
    }
    Ok(())
}

/// The full operator sum A12^2 + A13^2 + A23^2 applied to e_lm, with zero
/// polynomials pruned.
pub fn script_a_on_e(l: u32, m: u32) -> Result<Vec<(u32, u32, PolyL)>, Stencil3dError> {
    let mut acc = BTreeMap::new();
    for which in [StrainPair::A12, StrainPair::A13, StrainPair::A23] {
        accumulate_square(which, l, m, &mut acc)?;
    }
    Ok(acc
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|((l2, m2), p)| (l2, m2, p))
        .collect())
}

/// The operator sum applied to the even-m basis element eps_ij = e_{i,2j},
/// returned in eps indices. Any surviving odd-m coefficient is an error.
pub fn script_a_on_epsilon(
    i: u32,
    j: u32,
) -> Result<Vec<(u32, u32, PolyL)>, Stencil3dError> {
    let terms = script_a_on_e(i, 2 * j)?;
    let mut out = Vec::with_capacity(terms.len());
    for (l, m, p) in terms {
        if m % 2 != 0 {
            return Err(Stencil3dError::OddLeakage { si: i, sj: j, l, m });
        }
        out.push((l, m / 2, p));
    }
    Ok(out)
}
