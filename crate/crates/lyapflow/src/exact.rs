//! Exact arithmetic substrate: arbitrary-precision rationals, univariate
//! polynomials in the moment order l, and truncated power series in k^2.
//!
//! Everything here is immutable after construction and exact; floating-point
//! values enter only through the explicit `*_f64` bridges, which evaluate in
//! rational arithmetic and round once at the end.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("series order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

/// Builds a rational in lowest terms with positive denominator.
pub fn rational_make<N, D>(num: N, den: D) -> Result<Rational, ExactError>
where
    N: Into<BigInt>,
    D: Into<BigInt>,
{
    let den: BigInt = den.into();
    if den.is_zero() {
        return Err(ExactError::ZeroDenominator);
    }
    Ok(Rational::new(num.into(), den))
}

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for n/d; panics on zero denominator, so only for literals.
pub fn ratio(n: i64, d: i64) -> Rational {
    rational_make(n, d).expect("nonzero literal denominator")
}

/// Formats a rational as "num/den", or plain "num" when the denominator is 1.
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses "num/den" or a bare integer.
pub fn rational_from_str(s: &str) -> Result<Rational, ExactError> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt, ExactError> {
        t.trim().parse::<BigInt>().map_err(|_| ExactError::Parse(s.to_string()))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(ExactError::ZeroDenominator);
            }
            Ok(Rational::new(parse_int(n)?, den))
        }
        None => Ok(Rational::from_integer(parse_int(s)?)),
    }
}

/// Exact rational image of a finite f64 (every finite f64 is a dyadic rational).
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

/// Rounds a rational to the nearest f64; the single rounding site of the bridges.
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Polynomial in l with exact rational coefficients, ascending powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyL {
    coeffs: Vec<Rational>,
}

impl PolyL {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolyL { coeffs }
    }

    pub fn zero() -> Self {
        PolyL { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        PolyL::new(vec![c])
    }

    pub fn one() -> Self {
        PolyL::constant(Rational::one())
    }

    /// The polynomial l itself.
    pub fn ell() -> Self {
        PolyL::new(vec![Rational::zero(), Rational::one()])
    }

    /// Builds from integer coefficients, ascending powers.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        PolyL::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the convention that the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Coefficient of l^i (zero beyond the stored length).
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn scale(&self, c: &Rational) -> PolyL {
        if c.is_zero() {
            return PolyL::zero();
        }
        PolyL::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Exact Horner evaluation.
    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Evaluates at an f64 abscissa exactly, rounding once at the end.
    pub fn eval_f64(&self, x: f64) -> f64 {
        rational_to_f64(&self.eval(&rational_from_f64(x)))
    }

    pub fn derivative(&self) -> PolyL {
        if self.coeffs.len() <= 1 {
            return PolyL::zero();
        }
        PolyL::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * Rational::from_integer(BigInt::from(i + 1)))
                .collect(),
        )
    }

    /// Substitutes l -> a*l + b, e.g. (a, b) = (-1, -d) for the spectral symmetry.
    pub fn compose_affine(&self, a: &Rational, b: &Rational) -> PolyL {
        let inner = PolyL::new(vec![b.clone(), a.clone()]);
        let mut acc = PolyL::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &inner) + &PolyL::constant(c.clone());
        }
        acc
    }

    /// Product of self with each factor in turn.
    pub fn mul_chain(&self, factors: &[PolyL]) -> PolyL {
        factors.iter().fold(self.clone(), |acc, f| &acc * f)
    }

    /// Exact quotient if `div` divides self with zero remainder.
    pub fn div_exact(&self, div: &PolyL) -> Option<PolyL> {
        if div.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(PolyL::zero());
        }
        if self.degree() < div.degree() {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let dd = div.degree();
        let lead = &div.coeffs[dd];
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let q = &rem[i] / lead;
            if !q.is_zero() {
                for (j, c) in div.coeffs.iter().enumerate() {
                    let t = &q * c;
                    rem[i - dd + j] -= t;
                }
            }
            quot[i - dd] = q;
        }
        if rem.iter().all(|c| c.is_zero()) {
            Some(PolyL::new(quot))
        } else {
            None
        }
    }
}

impl Add for &PolyL {
    type Output = PolyL;
    fn add(self, rhs: &PolyL) -> PolyL {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyL::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &PolyL {
    type Output = PolyL;
    fn sub(self, rhs: &PolyL) -> PolyL {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyL::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &PolyL {
    type Output = PolyL;
    fn mul(self, rhs: &PolyL) -> PolyL {
        if self.is_zero() || rhs.is_zero() {
            return PolyL::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolyL::new(out)
    }
}

impl Neg for &PolyL {
    type Output = PolyL;
    fn neg(self) -> PolyL {
        PolyL::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for PolyL {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = rational_to_string(&c.abs());
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if c.abs().is_one() {
                        write!(f, "l")?;
                    } else {
                        write!(f, "{mag}*l")?;
                    }
                    if i > 1 {
                        write!(f, "^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Truncated power series in k^2 with PolyL coefficients; fixed inclusive order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct K2Series {
    coeffs: Vec<PolyL>,
}

impl K2Series {
    /// Builds from coefficients for k^0 .. k^{2*order}; the length fixes the order.
    pub fn new(coeffs: Vec<PolyL>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least the k^0 term");
        K2Series { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        K2Series { coeffs: vec![PolyL::zero(); order + 1] }
    }

    /// Constant-in-k^2 series with the given k^0 coefficient.
    pub fn from_poly(p: PolyL, order: usize) -> Self {
        let mut coeffs = vec![PolyL::zero(); order + 1];
        coeffs[0] = p;
        K2Series { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of k^{2n}.
    pub fn coeff(&self, n: usize) -> &PolyL {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[PolyL] {
        &self.coeffs
    }

    fn check_order(&self, rhs: &K2Series) -> Result<(), ExactError> {
        if self.order() != rhs.order() {
            return Err(ExactError::OrderMismatch { left: self.order(), right: rhs.order() });
        }
        Ok(())
    }

    pub fn add(&self, rhs: &K2Series) -> Result<K2Series, ExactError> {
        self.check_order(rhs)?;
        Ok(K2Series {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, rhs: &K2Series) -> Result<K2Series, ExactError> {
        self.check_order(rhs)?;
        Ok(K2Series {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    /// Product truncated at the common order.
    pub fn mul(&self, rhs: &K2Series) -> Result<K2Series, ExactError> {
        self.check_order(rhs)?;
        let mut out = vec![PolyL::zero(); self.order() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j > self.order() {
                    break;
                }
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Ok(K2Series { coeffs: out })
    }

    pub fn scale(&self, c: &Rational) -> K2Series {
        K2Series { coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect() }
    }

    /// Exact evaluation at rational (k^2, l).
    pub fn eval(&self, k2: &Rational, ell: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for p in self.coeffs.iter().rev() {
            acc = acc * k2 + p.eval(ell);
        }
        acc
    }

    /// Float bridge: exact evaluation at the rational images, one final rounding.
    pub fn eval_f64(&self, k2: f64, ell: f64) -> f64 {
        rational_to_f64(&self.eval(&rational_from_f64(k2), &rational_from_f64(ell)))
    }

    /// Extracts the scalar series of l^j coefficients across orders.
    pub fn ell_coefficient(&self, j: usize) -> Vec<Rational> {
        self.coeffs.iter().map(|p| p.coeff(j)).collect()
    }

    /// Applies l -> a*l + b to every coefficient.
    pub fn compose_affine(&self, a: &Rational, b: &Rational) -> K2Series {
        K2Series { coeffs: self.coeffs.iter().map(|p| p.compose_affine(a, b)).collect() }
    }
}

impl fmt::Display for K2Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, p) in self.coeffs.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({p})")?;
            if n > 0 {
                write!(f, "*k^{}", 2 * n)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rational_make_reduces_and_normalizes_sign() {
        let r = rational_make(6, -4).unwrap();
        assert_eq!(r, ratio(-3, 2));
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!(rational_make(0, 7).unwrap(), rat(0));
        assert_eq!(rational_to_string(&rational_make(0, 7).unwrap()), "0");
        assert_eq!(rational_make(41, 1024).unwrap(), ratio(41, 1024));
        assert_eq!(rational_make(5, 0), Err(ExactError::ZeroDenominator));
    }

    #[test]
    fn rational_string_round_trip() {
        for s in ["-3/2", "41/1024", "7", "0", "-1237720859375"] {
            let r = rational_from_str(s).unwrap();
            assert_eq!(rational_to_string(&r), s);
        }
        assert_eq!(rational_from_str("6/-4").unwrap(), ratio(-3, 2));
        assert!(rational_from_str("1/0").is_err());
        assert!(rational_from_str("abc").is_err());
    }

    fn half_l_lplus2() -> PolyL {
        PolyL::new(vec![rat(0), rat(1), ratio(1, 2)])
    }

    #[test]
    fn poly_eval_examples() {
        assert_eq!(half_l_lplus2().eval(&rat(2)), rat(4));
        let p = PolyL::from_ints(&[-2, 1])
            .mul_chain(&[PolyL::ell(), PolyL::from_ints(&[2, 1]), PolyL::from_ints(&[4, 1])])
            .scale(&ratio(1, 128));
        assert_eq!(p.eval(&rat(2)), rat(0));
        assert_eq!(p.eval(&rat(-4)), rat(0));
        assert_eq!(p.eval(&rat(4)), rat(3));
        assert_eq!(PolyL::ell().eval(&ratio(-3, 2)), ratio(-3, 2));
    }

    #[test]
    fn poly_division_and_composition() {
        let prod = &half_l_lplus2() * &PolyL::from_ints(&[-2, 1]);
        assert_eq!(prod.div_exact(&PolyL::from_ints(&[-2, 1])).unwrap(), half_l_lplus2());
        assert!(prod.div_exact(&PolyL::from_ints(&[1, 1])).is_none());
        let sym = half_l_lplus2().compose_affine(&rat(-1), &rat(-2));
        assert_eq!(sym, half_l_lplus2());
        assert_eq!(PolyL::ell().derivative(), PolyL::one());
    }

    #[test]
    fn poly_eval_f64_bridge_is_exact_for_dyadics() {
        let p = PolyL::new(vec![ratio(1, 4), ratio(-3, 2), rat(1)]);
        assert_eq!(p.eval_f64(0.5), 0.25 - 0.75 + 0.25);
    }

    #[test]
    fn series_difference_of_squares_keeps_order() {
        let a = K2Series::new(vec![PolyL::one(), PolyL::one(), PolyL::zero()]);
        let b = K2Series::new(vec![PolyL::one(), -&PolyL::one(), PolyL::zero()]);
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.order(), 2);
        assert_eq!(prod.coeff(0), &PolyL::one());
        assert!(prod.coeff(1).is_zero());
        assert_eq!(prod.coeff(2), &-&PolyL::one());
    }

    #[test]
    fn series_additive_identity_and_order_mismatch() {
        let a = K2Series::new(vec![PolyL::ell(), PolyL::one()]);
        assert_eq!(a.add(&K2Series::zero(1)).unwrap(), a);
        let b = K2Series::zero(3);
        assert_eq!(
            a.add(&b).unwrap_err(),
            ExactError::OrderMismatch { left: 1, right: 3 }
        );
    }

    #[test]
    fn series_square_of_cumulant_head() {
        let s = K2Series::new(vec![
            PolyL::one(),
            PolyL::constant(rat(-1)),
            PolyL::constant(ratio(-1, 8)),
        ]);
        let sq = s.mul(&s).unwrap();
        assert_eq!(sq.coeff(0), &PolyL::one());
        assert_eq!(sq.coeff(1), &PolyL::constant(rat(-2)));
        assert_eq!(sq.coeff(2), &PolyL::constant(ratio(3, 4)));
    }

    #[test]
    fn series_eval_matches_horner() {
        let s = K2Series::new(vec![half_l_lplus2(), PolyL::from_ints(&[0, -1]), PolyL::one()]);
        let v = s.eval(&ratio(1, 2), &rat(3));
        assert_eq!(v, ratio(15, 2) + ratio(-3, 2) + ratio(1, 4));
        assert!((s.eval_f64(0.5, 3.0) - 6.25).abs() < 1e-15);
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-40i64..40, 1i64..20).prop_map(|(n, d)| ratio(n, d))
    }

    fn arb_poly() -> impl Strategy<Value = PolyL> {
        proptest::collection::vec(arb_rational(), 0..5).prop_map(PolyL::new)
    }

    proptest! {
        #[test]
        fn rational_make_invariant_under_common_factor(n in -100i64..100, d in 1i64..100, c in 1i64..50) {
            let r = rational_make(n, d).unwrap();
            prop_assert_eq!(rational_make(n * c, d * c).unwrap(), r.clone());
            prop_assert_eq!(rational_make(-n * c, -d * c).unwrap(), r);
        }

        #[test]
        fn poly_eval_distributes_over_addition(p in arb_poly(), q in arb_poly(), x in arb_rational()) {
            prop_assert_eq!((&p + &q).eval(&x), p.eval(&x) + q.eval(&x));
        }

        #[test]
        fn poly_mul_eval_multiplicative(p in arb_poly(), q in arb_poly(), x in arb_rational()) {
            prop_assert_eq!((&p * &q).eval(&x), p.eval(&x) * q.eval(&x));
        }

        #[test]
        fn series_ring_laws_at_fixed_order(
            a in proptest::collection::vec(arb_poly(), 3),
            b in proptest::collection::vec(arb_poly(), 3),
            c in proptest::collection::vec(arb_poly(), 3),
        ) {
            let (a, b, c) = (K2Series::new(a), K2Series::new(b), K2Series::new(c));
            prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
            prop_assert_eq!(
                a.add(&b).unwrap().add(&c).unwrap(),
                a.add(&b.add(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(
                a.mul(&b).unwrap().mul(&c).unwrap(),
                a.mul(&b.mul(&c).unwrap()).unwrap()
            );
        }
    }
}
