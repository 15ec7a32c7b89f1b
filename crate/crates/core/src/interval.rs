//! Interval endpoints that are either exact rationals or real algebraic
//! numbers (a square-free polynomial plus an isolating bracket). Subdivision
//! and sorting always compare exactly; decimals appear only in output.

use crate::error::Error;
use crate::poly::{Poly, Rational};
use crate::roots::{
    compare_algebraic_on_factors, compare_root_to_rational, refine_root_on_factor, IsolatedRoot,
};
use num_traits::Zero;
use std::cmp::Ordering;

#[derive(Clone, Debug)]
pub struct AlgebraicEndpoint {
    /// Square-free defining polynomial.
    pub poly: Poly,
    pub root: IsolatedRoot,
}

#[derive(Clone, Debug)]
pub enum Endpoint {
    Exact(Rational),
    Algebraic(AlgebraicEndpoint),
}

impl Endpoint {
    pub fn exact(value: Rational) -> Self {
        Endpoint::Exact(value)
    }

    /// Roots already known to be rational collapse to exact endpoints.
    pub fn algebraic(poly: Poly, root: IsolatedRoot) -> Self {
        if let Some(v) = &root.exact {
            return Endpoint::Exact(v.clone());
        }
        Endpoint::Algebraic(AlgebraicEndpoint { poly, root })
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Endpoint::Exact(v) => Some(v),
            Endpoint::Algebraic(_) => None,
        }
    }

    /// Rational lower bound (the value itself when exact).
    pub fn lower(&self) -> Rational {
        match self {
            Endpoint::Exact(v) => v.clone(),
            Endpoint::Algebraic(a) => a.root.lo.clone(),
        }
    }

    /// Rational upper bound (the value itself when exact).
    pub fn upper(&self) -> Rational {
        match self {
            Endpoint::Exact(v) => v.clone(),
            Endpoint::Algebraic(a) => a.root.hi.clone(),
        }
    }

    pub fn compare(&self, other: &Endpoint) -> Ordering {
        match (self, other) {
            (Endpoint::Exact(a), Endpoint::Exact(b)) => a.cmp(b),
            (Endpoint::Exact(a), Endpoint::Algebraic(e)) => {
                compare_root_to_rational(&e.poly, &e.root, a).reverse()
            }
            (Endpoint::Algebraic(e), Endpoint::Exact(b)) => {
                compare_root_to_rational(&e.poly, &e.root, b)
            }
            (Endpoint::Algebraic(x), Endpoint::Algebraic(y)) => {
                compare_algebraic_on_factors(&x.poly, &x.root, &y.poly, &y.root)
            }
        }
    }

    pub fn compare_rational(&self, x: &Rational) -> Ordering {
        match self {
            Endpoint::Exact(v) => v.cmp(x),
            Endpoint::Algebraic(e) => compare_root_to_rational(&e.poly, &e.root, x),
        }
    }

    /// One bisection refinement step; exact endpoints are unchanged. An
    /// algebraic endpoint whose bisection lands on the root exactly collapses
    /// to an exact one.
    pub fn refine_once(&mut self) {
        if let Endpoint::Algebraic(e) = self {
            let width = e.root.width() / Rational::from_integer(2.into());
            if width.is_zero() {
                return;
            }
            let refined = refine_root_on_factor(&e.poly, &e.root, &width);
            if let Some(v) = &refined.exact {
                *self = Endpoint::Exact(v.clone());
            } else {
                e.root = refined;
            }
        }
    }

    /// Endpoint with the bracket narrowed to width at most `eps`.
    pub fn refined(&self, eps: &Rational) -> Endpoint {
        match self {
            Endpoint::Exact(_) => self.clone(),
            Endpoint::Algebraic(e) => {
                Endpoint::algebraic(e.poly.clone(), refine_root_on_factor(&e.poly, &e.root, eps))
            }
        }
    }

    /// Rational approximation within eps/2 of the exact value (the value
    /// itself when rational).
    pub fn approx(&self, eps: &Rational) -> Rational {
        match self.refined(eps) {
            Endpoint::Exact(v) => v,
            Endpoint::Algebraic(e) => e.root.midpoint(),
        }
    }
}

/// Closed interval [lo, hi] with lo ≤ hi under exact comparison.
#[derive(Clone, Debug)]
pub struct ParamInterval {
    lo: Endpoint,
    hi: Endpoint,
}

impl ParamInterval {
    pub fn new(lo: Endpoint, hi: Endpoint) -> Result<Self, Error> {
        if lo.compare(&hi) == Ordering::Greater {
            return Err(Error::internal("interval endpoints out of order"));
        }
        Ok(ParamInterval { lo, hi })
    }

    /// Rational-endpoint interval with positive length.
    pub fn rational(alpha: Rational, beta: Rational) -> Result<Self, Error> {
        if alpha >= beta {
            return Err(Error::Dimension(format!(
                "parameter interval requires alpha < beta, got [{}, {}]",
                alpha, beta
            )));
        }
        Ok(ParamInterval {
            lo: Endpoint::exact(alpha),
            hi: Endpoint::exact(beta),
        })
    }

    pub fn lo(&self) -> &Endpoint {
        &self.lo
    }

    pub fn hi(&self) -> &Endpoint {
        &self.hi
    }

    pub fn is_singleton(&self) -> bool {
        self.lo.compare(&self.hi) == Ordering::Equal
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        self.lo.compare_rational(x) != Ordering::Greater
            && self.hi.compare_rational(x) != Ordering::Less
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_int};
    use crate::roots::isolate_real_roots_factored;
    use num_traits::Signed;

    #[test]
    fn exact_ordering() {
        let a = Endpoint::exact(rat_int(1));
        let b = Endpoint::exact(rat(3, 2));
        assert_eq!(a.compare(&b), Ordering::Less);
        assert_eq!(b.compare(&a), Ordering::Greater);
        assert_eq!(a.compare(&Endpoint::exact(rat_int(1))), Ordering::Equal);
    }

    #[test]
    fn algebraic_vs_rational() {
        // √2 vs 3/2 and vs 1
        let p = Poly::new(vec![rat_int(-2), rat_int(0), rat_int(1)]);
        let (f, r) = isolate_real_roots_factored(&p)
            .into_iter()
            .find(|(_, r)| r.hi > rat_int(0))
            .unwrap();
        let e = Endpoint::algebraic(f, r);
        assert_eq!(e.compare_rational(&rat(3, 2)), Ordering::Less);
        assert_eq!(e.compare_rational(&rat_int(1)), Ordering::Greater);
        assert_eq!(e.compare(&Endpoint::exact(rat_int(2))), Ordering::Less);
    }

    #[test]
    fn rational_roots_collapse_to_exact() {
        let p = Poly::new(vec![rat(-4, 3), rat_int(1)]);
        let (f, r) = isolate_real_roots_factored(&p).pop().unwrap();
        let e = Endpoint::algebraic(f, r);
        assert_eq!(e.as_exact(), Some(&rat(4, 3)));
    }

    #[test]
    fn approx_within_eps() {
        let p = Poly::new(vec![rat_int(-2), rat_int(0), rat_int(1)]);
        let (f, r) = isolate_real_roots_factored(&p)
            .into_iter()
            .find(|(_, r)| r.hi > rat_int(0))
            .unwrap();
        let e = Endpoint::algebraic(f, r);
        let eps = rat(1, 1_000_000);
        let approx = e.approx(&eps);
        // |approx² − 2| must be tiny: within (2·√2 + eps)·eps
        let err = (&approx * &approx - rat_int(2)).abs();
        assert!(err < rat(4, 1_000_000));
    }

    #[test]
    fn singleton_and_containment() {
        let iv = ParamInterval::rational(rat_int(-2), rat_int(2)).unwrap();
        assert!(!iv.is_singleton());
        assert!(iv.contains_rational(&rat_int(0)));
        assert!(iv.contains_rational(&rat_int(2)));
        assert!(!iv.contains_rational(&rat(201, 100)));
        assert!(ParamInterval::rational(rat_int(1), rat_int(1)).is_err());
    }
}
