//! Real root isolation with multiplicities, via Sturm sequences on the
//! square-free factors, plus exact comparison of real algebraic numbers.
//!
//! All brackets have rational endpoints that are themselves never roots, so
//! sign tests stay unambiguous. Interval endpoints discovered here feed the
//! solver's subdivision logic, which is sign-critical; nothing in this module
//! approximates.

use crate::poly::{poly_gcd, square_free_decomposition, Poly, Rational};
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

/// A bracketed real root of some polynomial.
///
/// The closed interval `[lo, hi]` contains exactly one distinct real root of
/// the queried polynomial. When the root is rational and known exactly,
/// `exact` is set and `lo == hi == exact`.
#[derive(Clone, Debug)]
pub struct IsolatedRoot {
    pub lo: Rational,
    pub hi: Rational,
    pub multiplicity: u32,
    pub exact: Option<Rational>,
}

impl IsolatedRoot {
    pub fn exact_root(value: Rational, multiplicity: u32) -> Self {
        IsolatedRoot {
            lo: value.clone(),
            hi: value.clone(),
            multiplicity,
            exact: Some(value),
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }
}

/// Sturm chain of a square-free polynomial, remainders rescaled to primitive
/// integer form (positive scaling keeps every sign pattern intact).
fn sturm_chain(f: &Poly) -> Vec<Poly> {
    let mut chain = Vec::new();
    chain.push(f.primitive_scaled());
    let d = f.derivative();
    if d.is_zero() {
        return chain;
    }
    chain.push(d.primitive_scaled());
    loop {
        let n = chain.len();
        let r = chain[n - 2].div_rem(&chain[n - 1]).1;
        if r.is_zero() {
            return chain;
        }
        chain.push((-&r).primitive_scaled());
    }
}

/// Number of sign changes in the chain evaluated at `x` (zeros skipped).
fn variations(chain: &[Poly], x: &Rational) -> usize {
    let mut count = 0;
    let mut prev = 0i8;
    for p in chain {
        let s = p.sign_at(x);
        if s == 0 {
            continue;
        }
        if prev != 0 && s != prev {
            count += 1;
        }
        prev = s;
    }
    count
}

/// Strict upper bound on the absolute value of every real root:
/// 1 + max |a_i| / |a_n|.
fn cauchy_bound(f: &Poly) -> Rational {
    let lead = f.leading().expect("nonzero polynomial").abs();
    let mut m = Rational::zero();
    let n = f.degree().unwrap();
    for i in 0..n {
        let a = f.coeff(i).abs();
        if a > m {
            m = a;
        }
    }
    Rational::one() + m / lead
}

enum Bisect {
    Split(Rational),
    ExactRoot(Rational),
}

fn bisect_point(f: &Poly, lo: &Rational, hi: &Rational) -> Bisect {
    let m = (lo + hi) / Rational::from_integer(2.into());
    if f.sign_at(&m) == 0 {
        Bisect::ExactRoot(m)
    } else {
        Bisect::Split(m)
    }
}

enum RootRep {
    Bracket(Rational, Rational),
    Exact(Rational),
}

/// Isolate all real roots of a square-free polynomial. Rational roots hit by
/// a bisection midpoint (and all roots of linear factors) come back exact;
/// when that happens mid-search the polynomial is deflated and the bracket
/// search restarts on the quotient.
fn isolate_squarefree(f: &Poly) -> Vec<RootRep> {
    let mut f = f.primitive_scaled();
    let mut exact: Vec<Rational> = Vec::new();
    let mut brackets: Vec<(Rational, Rational)> = Vec::new();
    loop {
        match f.degree() {
            None | Some(0) => break,
            Some(1) => {
                exact.push(-f.coeff(0) / f.coeff(1));
                break;
            }
            Some(_) => {}
        }
        match isolate_no_deflation(&f) {
            Ok(bs) => {
                brackets = bs;
                break;
            }
            Err(root) => {
                let lin = Poly::linear(-root.clone(), Rational::one());
                f = f.exact_div(&lin).primitive_scaled();
                exact.push(root);
            }
        }
    }
    // Brackets were isolated on the deflated quotient; shrink each until it
    // strictly excludes every deflated-out rational root, so the bracket
    // endpoints are never roots of the full factor.
    let mut out: Vec<RootRep> = Vec::new();
    'bracket: for (mut a, mut b) in brackets {
        while exact.iter().any(|e| *e >= a && *e <= b) {
            match bisect_point(&f, &a, &b) {
                Bisect::ExactRoot(m) => {
                    out.push(RootRep::Exact(m));
                    continue 'bracket;
                }
                Bisect::Split(m) => {
                    if f.sign_at(&a) * f.sign_at(&m) < 0 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
            }
        }
        out.push(RootRep::Bracket(a, b));
    }
    out.extend(exact.into_iter().map(RootRep::Exact));
    out
}

/// One pass of Sturm bisection; bails out with the offending rational root if
/// a midpoint lands exactly on one.
fn isolate_no_deflation(f: &Poly) -> Result<Vec<(Rational, Rational)>, Rational> {
    let chain = sturm_chain(f);
    let bound = cauchy_bound(f);
    let lo = -&bound;
    let hi = bound.clone();
    let v_lo = variations(&chain, &lo);
    let v_hi = variations(&chain, &hi);
    let mut out = Vec::new();
    let mut stack = vec![(lo, hi, v_lo, v_hi)];
    while let Some((a, b, va, vb)) = stack.pop() {
        let count = va - vb;
        if count == 0 {
            continue;
        }
        if count == 1 && f.sign_at(&a) * f.sign_at(&b) < 0 {
            out.push((a, b));
            continue;
        }
        match bisect_point(f, &a, &b) {
            Bisect::ExactRoot(m) => return Err(m),
            Bisect::Split(m) => {
                let vm = variations(&chain, &m);
                stack.push((a, m.clone(), va, vm));
                stack.push((m, b, vm, vb));
            }
        }
    }
    Ok(out)
}

struct PendingRoot {
    factor: Poly,
    rep: RootRep,
    multiplicity: u32,
}

impl PendingRoot {
    fn bounds(&self) -> (&Rational, &Rational) {
        match &self.rep {
            RootRep::Bracket(a, b) => (a, b),
            RootRep::Exact(r) => (r, r),
        }
    }

    fn refine(&mut self) {
        let RootRep::Bracket(a, b) = &self.rep else {
            return;
        };
        match bisect_point(&self.factor, a, b) {
            Bisect::ExactRoot(m) => self.rep = RootRep::Exact(m),
            Bisect::Split(m) => {
                let sa = self.factor.sign_at(a);
                let sm = self.factor.sign_at(&m);
                self.rep = if sa * sm < 0 {
                    RootRep::Bracket(a.clone(), m)
                } else {
                    RootRep::Bracket(m, b.clone())
                };
            }
        }
    }
}

fn overlap(x: &PendingRoot, y: &PendingRoot) -> bool {
    let (alo, ahi) = x.bounds();
    let (blo, bhi) = y.bounds();
    alo <= bhi && blo <= ahi
}

/// Shrink brackets until all pending roots are pairwise strictly disjoint.
/// The underlying roots are distinct, so this terminates.
fn separate(items: &mut [PendingRoot]) {
    loop {
        let mut touched = false;
        for i in 0..items.len() {
            for j in (i + 1)..items.len() {
                if overlap(&items[i], &items[j]) {
                    items[i].refine();
                    items[j].refine();
                    touched = true;
                }
            }
        }
        if !touched {
            return;
        }
    }
}

/// Isolate the distinct real roots of `p`, each paired with the square-free
/// factor it is a root of. Results are sorted by position with pairwise
/// disjoint brackets.
pub fn isolate_real_roots_factored(p: &Poly) -> Vec<(Poly, IsolatedRoot)> {
    assert!(!p.is_zero(), "cannot isolate roots of the zero polynomial");
    if p.is_constant() {
        return Vec::new();
    }
    let decomp = square_free_decomposition(p).expect("nonconstant");
    let mut items = Vec::new();
    for (factor, mult) in &decomp {
        for rep in isolate_squarefree(factor) {
            items.push(PendingRoot {
                factor: factor.clone(),
                rep,
                multiplicity: *mult,
            });
        }
    }
    separate(&mut items);
    items.sort_by(|x, y| {
        let (alo, _) = x.bounds();
        let (blo, _) = y.bounds();
        alo.cmp(blo)
    });
    items
        .into_iter()
        .map(|it| {
            let root = match it.rep {
                RootRep::Exact(r) => IsolatedRoot::exact_root(r, it.multiplicity),
                RootRep::Bracket(lo, hi) => IsolatedRoot {
                    lo,
                    hi,
                    multiplicity: it.multiplicity,
                    exact: None,
                },
            };
            (it.factor, root)
        })
        .collect()
}

/// One `IsolatedRoot` per distinct real root of `p`, sorted by position,
/// multiplicities from the square-free decomposition.
pub fn isolate_real_roots(p: &Poly) -> Vec<IsolatedRoot> {
    isolate_real_roots_factored(p)
        .into_iter()
        .map(|(_, r)| r)
        .collect()
}

/// Bisect on the given square-free factor until the bracket width is at most
/// `eps`. Exact roots are returned unchanged; a linear factor resolves to its
/// rational root immediately.
pub fn refine_root_on_factor(factor: &Poly, root: &IsolatedRoot, eps: &Rational) -> IsolatedRoot {
    let mut out = root.clone();
    if out.exact.is_some() {
        return out;
    }
    if factor.degree() == Some(1) {
        let value = -factor.coeff(0) / factor.coeff(1);
        return IsolatedRoot::exact_root(value, out.multiplicity);
    }
    while out.width() > *eps {
        match bisect_point(factor, &out.lo, &out.hi) {
            Bisect::ExactRoot(m) => {
                return IsolatedRoot::exact_root(m, out.multiplicity);
            }
            Bisect::Split(m) => {
                if factor.sign_at(&out.lo) * factor.sign_at(&m) < 0 {
                    out.hi = m;
                } else {
                    out.lo = m;
                }
            }
        }
    }
    out
}

/// Narrow the bracket of an isolated root of `p` to width at most `eps`.
pub fn refine_root(p: &Poly, root: &IsolatedRoot, eps: &Rational) -> IsolatedRoot {
    assert!(eps.is_positive(), "eps must be positive");
    if root.exact.is_some() {
        return root.clone();
    }
    refine_root_on_factor(&p.square_free_part(), root, eps)
}

/// Exact ordering of an isolated root of the square-free `factor` against a
/// rational point.
pub fn compare_root_to_rational(factor: &Poly, root: &IsolatedRoot, x: &Rational) -> Ordering {
    if let Some(e) = &root.exact {
        return e.cmp(x);
    }
    if x <= &root.lo {
        return Ordering::Greater;
    }
    if x >= &root.hi {
        return Ordering::Less;
    }
    let sx = factor.sign_at(x);
    if sx == 0 {
        return Ordering::Equal;
    }
    if factor.sign_at(&root.lo) * sx < 0 {
        // the sign change, and with it the root, sits left of x
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Exact ordering of two real algebraic numbers given as (polynomial, root)
/// pairs. Brackets are refined to disjointness with a 64-step budget; ties
/// fall through to a gcd test on the square-free parts.
pub fn compare_algebraic(a: (&Poly, &IsolatedRoot), b: (&Poly, &IsolatedRoot)) -> Ordering {
    let fa = a.0.square_free_part();
    let fb = b.0.square_free_part();
    compare_algebraic_on_factors(&fa, a.1, &fb, b.1)
}

/// Same as [`compare_algebraic`] but trusting the callers' polynomials to be
/// square-free already.
pub fn compare_algebraic_on_factors(
    fa: &Poly,
    ra: &IsolatedRoot,
    fb: &Poly,
    rb: &IsolatedRoot,
) -> Ordering {
    match (&ra.exact, &rb.exact) {
        (Some(x), Some(y)) => return x.cmp(y),
        (Some(x), None) => return compare_root_to_rational(fb, rb, x).reverse(),
        (None, Some(y)) => return compare_root_to_rational(fa, ra, y),
        (None, None) => {}
    }
    let mut ra = ra.clone();
    let mut rb = rb.clone();
    for _ in 0..64 {
        if let Some(ord) = disjoint_order(&ra, &rb) {
            return ord;
        }
        refine_step(fa, &mut ra);
        refine_step(fb, &mut rb);
        match (&ra.exact, &rb.exact) {
            (Some(x), Some(y)) => return x.cmp(y),
            (Some(x), None) => return compare_root_to_rational(fb, &rb, x).reverse(),
            (None, Some(y)) => return compare_root_to_rational(fa, &ra, y),
            (None, None) => {}
        }
    }
    // Budget exhausted: decide equality exactly through the common factor.
    if let Ok(g) = poly_gcd(fa, fb) {
        if !g.is_constant() {
            let lo = ra.lo.clone().max(rb.lo.clone());
            let hi = ra.hi.clone().min(rb.hi.clone());
            for (gf, gr) in isolate_real_roots_factored(&g) {
                if compare_root_to_rational(&gf, &gr, &lo) != Ordering::Less
                    && compare_root_to_rational(&gf, &gr, &hi) != Ordering::Greater
                {
                    return Ordering::Equal;
                }
            }
        }
    }
    // Provably distinct: keep refining until the brackets split.
    loop {
        if let Some(ord) = disjoint_order(&ra, &rb) {
            return ord;
        }
        refine_step(fa, &mut ra);
        refine_step(fb, &mut rb);
        match (&ra.exact, &rb.exact) {
            (Some(x), Some(y)) => return x.cmp(y),
            (Some(x), None) => return compare_root_to_rational(fb, &rb, x).reverse(),
            (None, Some(y)) => return compare_root_to_rational(fa, &ra, y),
            (None, None) => {}
        }
    }
}

fn disjoint_order(a: &IsolatedRoot, b: &IsolatedRoot) -> Option<Ordering> {
    if a.hi < b.lo {
        Some(Ordering::Less)
    } else if b.hi < a.lo {
        Some(Ordering::Greater)
    } else {
        None
    }
}

fn refine_step(factor: &Poly, root: &mut IsolatedRoot) {
    if root.exact.is_some() {
        return;
    }
    match bisect_point(factor, &root.lo, &root.hi) {
        Bisect::ExactRoot(m) => *root = IsolatedRoot::exact_root(m, root.multiplicity),
        Bisect::Split(m) => {
            if factor.sign_at(&root.lo) * factor.sign_at(&m) < 0 {
                root.hi = m;
            } else {
                root.lo = m;
            }
        }
    }
}

/// Sign of the first nonzero derivative of `g` at `x` (starting from order
/// one). Decides on which side of a root at `x` the function turns positive.
pub fn first_nonzero_derivative_sign(g: &Poly, x: &Rational) -> i8 {
    let mut d = g.derivative();
    while !d.is_zero() {
        let s = d.sign_at(x);
        if s != 0 {
            return s;
        }
        d = d.derivative();
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_int};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn p(coeffs: &[(i64, i64)]) -> Poly {
        Poly::new(coeffs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    #[test]
    fn no_real_roots() {
        let q = p(&[(1, 1), (0, 1), (1, 1)]); // θ² + 1
        assert!(isolate_real_roots(&q).is_empty());
        assert!(isolate_real_roots(&Poly::constant(rat_int(2))).is_empty());
    }

    #[test]
    fn quadratic_roots_bracketed() {
        // θ² − 5θ + 5 has roots (5 ± √5)/2 ≈ 1.382, 3.618
        let q = p(&[(5, 1), (-5, 1), (1, 1)]);
        let roots = isolate_real_roots(&q);
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert_eq!(r.multiplicity, 1);
        }
        let eps = rat(1, 1000);
        let r0 = refine_root(&q, &roots[0], &eps);
        let r1 = refine_root(&q, &roots[1], &eps);
        assert!(r0.lo < rat(1382, 1000) + eps.clone() && r0.hi > rat(1381, 1000));
        assert!(r1.lo < rat(3619, 1000) && r1.hi > rat(3617, 1000));
    }

    #[test]
    fn scaled_constraint_roots() {
        // 3θ² + 2θ − 4 has roots (−1 ± √13)/3 ≈ −1.535 and 0.869
        let q = p(&[(-4, 1), (2, 1), (3, 1)]);
        let roots = isolate_real_roots(&q);
        assert_eq!(roots.len(), 2);
        let eps = rat(1, 10000);
        let r0 = refine_root(&q, &roots[0], &eps);
        let r1 = refine_root(&q, &roots[1], &eps);
        assert!(r0.lo <= rat(-15351, 10000) && r0.hi >= rat(-15352, 10000));
        assert!(r1.lo <= rat(8686, 10000) && r1.hi >= rat(8685, 10000));
    }

    #[test]
    fn exact_rational_root_of_linear_factor() {
        // (3/2)(θ − 4/3): the only root must come back exact
        let q = p(&[(-2, 1), (3, 2)]);
        let roots = isolate_real_roots(&q);
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].exact, Some(rat(4, 3)));
        // and refine leaves it unchanged
        let r = refine_root(&q, &roots[0], &rat(1, 100));
        assert_eq!(r.exact, Some(rat(4, 3)));
        // a hand-made bracket around the same root also resolves exactly
        let loose = IsolatedRoot {
            lo: rat_int(1),
            hi: rat_int(2),
            multiplicity: 1,
            exact: None,
        };
        let r = refine_root(&q, &loose, &rat(1, 2));
        assert_eq!(r.exact, Some(rat(4, 3)));
    }

    #[test]
    fn refine_sqrt_two() {
        let q = p(&[(-2, 1), (0, 1), (1, 1)]);
        let roots = isolate_real_roots(&q);
        let pos = roots
            .iter()
            .find(|r| r.hi > Rational::zero())
            .expect("positive root");
        let refined = refine_root(&q, pos, &rat(1, 100));
        assert!(refined.width() <= rat(1, 100));
        assert!(q.sign_at(&refined.lo) * q.sign_at(&refined.hi) < 0 || refined.exact.is_some());
    }

    #[test]
    fn multiplicities_recovered() {
        // (θ−1)²(θ+3)
        let lin1 = p(&[(-1, 1), (1, 1)]);
        let lin2 = p(&[(3, 1), (1, 1)]);
        let q = &(&lin1 * &lin1) * &lin2;
        let roots = isolate_real_roots(&q);
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].exact, Some(rat_int(-3)));
        assert_eq!(roots[0].multiplicity, 1);
        assert_eq!(roots[1].exact, Some(rat_int(1)));
        assert_eq!(roots[1].multiplicity, 2);
    }

    #[test]
    fn random_products_recover_roots_and_multiplicities() {
        let mut rng = StdRng::seed_from_u64(20240811);
        for _ in 0..60 {
            let k = rng.gen_range(1..=4usize);
            let mut chosen: Vec<(Rational, u32)> = Vec::new();
            let mut q = Poly::constant(rat(rng.gen_range(1..=3), 1));
            for _ in 0..k {
                let r = rat(rng.gen_range(-9..=9), rng.gen_range(1..=4));
                if chosen.iter().any(|(c, _)| *c == r) {
                    continue;
                }
                let m = rng.gen_range(1..=3u32);
                for _ in 0..m {
                    q = &q * &Poly::linear(-r.clone(), Rational::one());
                }
                chosen.push((r, m));
            }
            if chosen.is_empty() {
                continue;
            }
            chosen.sort_by(|a, b| a.0.cmp(&b.0));
            let roots = isolate_real_roots(&q);
            assert_eq!(roots.len(), chosen.len());
            for (got, want) in roots.iter().zip(&chosen) {
                assert_eq!(got.multiplicity, want.1);
                assert!(got.lo <= want.0 && want.0 <= got.hi);
            }
            // brackets pairwise disjoint
            for w in roots.windows(2) {
                assert!(w[0].hi < w[1].lo || (w[0].exact.is_some() && w[1].exact.is_some()));
            }
            // the square-free part changes sign across every proper bracket
            let sfp = q.square_free_part();
            for r in &roots {
                match &r.exact {
                    Some(e) => assert_eq!(sfp.sign_at(e), 0),
                    None => assert!(sfp.sign_at(&r.lo) * sfp.sign_at(&r.hi) < 0),
                }
            }
        }
    }

    #[test]
    fn sign_change_across_brackets() {
        let q = p(&[(5, 1), (-5, 1), (1, 1)]);
        let f = q.square_free_part();
        for r in isolate_real_roots(&q) {
            if r.exact.is_none() {
                assert!(f.sign_at(&r.lo) * f.sign_at(&r.hi) < 0);
            } else {
                assert_eq!(f.sign_at(r.exact.as_ref().unwrap()), 0);
            }
        }
    }

    #[test]
    fn compare_equal_roots_of_different_polynomials() {
        // root of θ−1 vs root of θ²−1 bracketed near 1
        let a = p(&[(-1, 1), (1, 1)]);
        let b = p(&[(-1, 1), (0, 1), (1, 1)]);
        let ra = isolate_real_roots(&a).pop().unwrap();
        let rb = isolate_real_roots(&b)
            .into_iter()
            .find(|r| r.hi > Rational::zero())
            .unwrap();
        assert_eq!(compare_algebraic((&a, &ra), (&b, &rb)), Ordering::Equal);
    }

    #[test]
    fn compare_algebraic_vs_rational_value() {
        // (5−√5)/2 ≈ 1.3819 vs 4/3 ≈ 1.3333 → greater
        let q = p(&[(5, 1), (-5, 1), (1, 1)]);
        let root = isolate_real_roots(&q).remove(0);
        let third = p(&[(-4, 3), (1, 1)]); // θ − 4/3
        let r43 = isolate_real_roots(&third).remove(0);
        assert_eq!(
            compare_algebraic((&q, &root), (&third, &r43)),
            Ordering::Greater
        );
    }

    #[test]
    fn compare_distinct_rationals() {
        let a = p(&[(-2, 1), (1, 1)]);
        let b = p(&[(-3, 1), (1, 1)]);
        let ra = isolate_real_roots(&a).remove(0);
        let rb = isolate_real_roots(&b).remove(0);
        assert_eq!(compare_algebraic((&a, &ra), (&b, &rb)), Ordering::Less);
    }

    #[test]
    fn compare_root_against_interior_rational() {
        let q = p(&[(-2, 1), (0, 1), (1, 1)]); // √2 ≈ 1.414
        let root = isolate_real_roots(&q)
            .into_iter()
            .find(|r| r.hi > Rational::zero())
            .unwrap();
        let f = q.square_free_part();
        assert_eq!(
            compare_root_to_rational(&f, &root, &rat(3, 2)),
            Ordering::Less
        );
        assert_eq!(
            compare_root_to_rational(&f, &root, &rat(7, 5)),
            Ordering::Greater
        );
    }

    #[test]
    fn derivative_direction_sign() {
        // g = θ² at 0: first derivative vanishes, second is positive
        let g = p(&[(0, 1), (0, 1), (1, 1)]);
        assert_eq!(first_nonzero_derivative_sign(&g, &rat_int(0)), 1);
        let g = p(&[(0, 1), (-1, 1)]);
        assert_eq!(first_nonzero_derivative_sign(&g, &rat_int(0)), -1);
    }
}
