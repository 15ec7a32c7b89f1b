//! Exact univariate polynomial arithmetic over arbitrary-precision rationals.
//!
//! Everything downstream (determinants, Cramer numerators, invariancy-interval
//! boundaries) is a `Poly`, so this module keeps all operations exact: no
//! floating point anywhere. Decimal output happens at the I/O boundary only.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

/// Exact rational scalar. `num_rational` keeps values in lowest terms with a
/// positive denominator, which is exactly the representation we need.
pub type Rational = BigRational;

/// Convenience constructor for small rationals.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Convenience constructor for small integers.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("gcd of two zero polynomials is undefined")]
    BothZero,
    #[error("square-free decomposition requires a nonconstant polynomial")]
    NotDecomposable,
}

/// Dense univariate polynomial. `coeffs[i]` is the coefficient of θ^i; the
/// zero polynomial is the empty list and leading coefficients are never zero.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::new(vec![c])
    }

    /// sigma + mu·θ
    pub fn linear(sigma: Rational, mu: Rational) -> Self {
        Poly::new(vec![sigma, mu])
    }

    pub fn monomial(c: Rational, degree: usize) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![Rational::zero(); degree + 1];
        coeffs[degree] = c;
        Poly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    /// Exact evaluation by Horner's rule.
    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Sign of the value at `x`: -1, 0, or +1.
    pub fn sign_at(&self, x: &Rational) -> i8 {
        let v = self.eval(x);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Formal derivative; constants map to the zero polynomial.
    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
            .collect();
        Poly::new(coeffs)
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Division with remainder; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let dd = divisor.coeffs.len();
        if self.coeffs.len() < dd {
            return (Poly::zero(), self.clone());
        }
        let lead = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); self.coeffs.len() - dd + 1];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd - 1] / &lead;
            if !c.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    let t = dc * &c;
                    rem[k + j] = &rem[k + j] - t;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd - 1);
        (Poly::new(quot), Poly::new(rem))
    }

    /// Exact quotient; panics if the division leaves a remainder. Used where
    /// exactness is an algebraic invariant (Bareiss pivots, Yun steps).
    pub fn exact_div(&self, divisor: &Poly) -> Poly {
        let (q, r) = self.div_rem(divisor);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Scale by a positive rational so the coefficients become coprime
    /// integers; signs are preserved. The zero polynomial is unchanged.
    pub fn primitive_scaled(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut den_lcm = BigInt::one();
        for c in &self.coeffs {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut num_gcd = BigInt::zero();
        for c in &self.coeffs {
            let scaled = c.numer() * (&den_lcm / c.denom());
            num_gcd = num_gcd.gcd(&scaled);
        }
        let factor = Rational::new(den_lcm, num_gcd);
        self.scale(&factor)
    }

    /// Divide by the leading coefficient. Panics on zero.
    pub fn monic(&self) -> Poly {
        let lead = self.leading().expect("monic of zero polynomial");
        let inv = lead.recip();
        self.scale(&inv)
    }

    /// Product of the distinct irreducible factors: p / gcd(p, p'). All roots
    /// preserved, all multiplicities reduced to one.
    pub fn square_free_part(&self) -> Poly {
        if self.is_zero() || self.is_constant() {
            return self.clone();
        }
        let g = poly_gcd(self, &self.derivative()).expect("nonzero input");
        if g.is_constant() {
            self.monic()
        } else {
            self.exact_div(&g).monic()
        }
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({})", self)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if first {
                first = false;
            } else {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            }
            let a = if first && c.is_negative() {
                // leading term printed with its own sign
                c.clone()
            } else {
                c.abs()
            };
            match i {
                0 => write!(f, "{}", format_rational(&a))?,
                1 => write!(f, "{}t", coeff_prefix(&a))?,
                _ => write!(f, "{}t^{}", coeff_prefix(&a), i)?,
            }
        }
        Ok(())
    }
}

fn coeff_prefix(a: &Rational) -> String {
    if a.abs().is_one() {
        if a.is_negative() {
            "-".to_string()
        } else {
            String::new()
        }
    } else {
        format!("{}*", format_rational(a))
    }
}

/// Canonical text form: `p/q`, or just `p` when the denominator is one.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + rhs.coeff(i));
        }
        Poly::new(out)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) - rhs.coeff(i));
        }
        Poly::new(out)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// Monic greatest common divisor over the rationals. Remainders are rescaled
/// to primitive integer form after every Euclidean step to keep coefficient
/// growth in check; positive scaling never changes the gcd.
pub fn poly_gcd(p: &Poly, q: &Poly) -> Result<Poly, PolyError> {
    if p.is_zero() && q.is_zero() {
        return Err(PolyError::BothZero);
    }
    let mut a = p.primitive_scaled();
    let mut b = q.primitive_scaled();
    if a.coeffs.len() < b.coeffs.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_zero() {
        let r = a.div_rem(&b).1.primitive_scaled();
        a = b;
        b = r;
    }
    Ok(a.monic())
}

/// Yun's square-free decomposition: returns pairs `(f_k, k)` with
/// `p = c · Π f_k^k`, each `f_k` monic square-free and pairwise coprime, and
/// `c` the leading coefficient of `p`.
pub fn square_free_decomposition(p: &Poly) -> Result<Vec<(Poly, u32)>, PolyError> {
    if p.is_zero() || p.is_constant() {
        return Err(PolyError::NotDecomposable);
    }
    let p = p.monic();
    let dp = p.derivative();
    let a0 = poly_gcd(&p, &dp).expect("nonzero");
    let mut b = p.exact_div(&a0);
    let mut d = &dp.exact_div(&a0) - &b.derivative();
    let mut out = Vec::new();
    let mut k = 1u32;
    while !b.is_constant() {
        let g = if d.is_zero() {
            b.monic()
        } else {
            poly_gcd(&b, &d).expect("nonzero")
        };
        if !g.is_constant() {
            out.push((g.clone(), k));
        }
        b = b.exact_div(&g);
        let c = d.exact_div(&g);
        d = &c - &b.derivative();
        k += 1;
    }
    Ok(out)
}
