//! The fixed-θ linear complementarity problem and the least-index criss-cross
//! method used to find a complementary basis at each probe point.
//!
//! The tableau T = (G_B)⁻¹G and right-hand side t = (G_B)⁻¹q are maintained
//! exactly. Small instances rebuild the tableau from scratch after every
//! pivot; larger ones apply elementary pivot updates. Both paths must agree,
//! which the unit tests check against each other and against brute-force
//! basis enumeration.

use crate::error::Error;
use crate::poly::Rational;
use crate::solver::UpLcpInstance;
use num_traits::{One, Signed, Zero};
use std::collections::HashSet;
use std::fmt;

/// Which variable of the complementary pair (w_i, z_i) is basic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Selector {
    W,
    Z,
}

impl Selector {
    pub fn flipped(self) -> Selector {
        match self {
            Selector::W => Selector::Z,
            Selector::Z => Selector::W,
        }
    }
}

/// One selector per complementary pair, ordered by pair index. Exactly one of
/// {w_i, z_i} is basic for each i.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComplementaryBasis {
    choice: Vec<Selector>,
}

impl ComplementaryBasis {
    pub fn all_w(h: usize) -> Self {
        ComplementaryBasis {
            choice: vec![Selector::W; h],
        }
    }

    pub fn from_selectors(choice: Vec<Selector>) -> Self {
        ComplementaryBasis { choice }
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }

    pub fn selector(&self, pair: usize) -> Selector {
        self.choice[pair]
    }

    pub fn selectors(&self) -> &[Selector] {
        &self.choice
    }

    pub fn flip(&mut self, pair: usize) {
        self.choice[pair] = self.choice[pair].flipped();
    }

    /// Basic-variable names in pair order, e.g. `["w1", "z2"]`.
    pub fn names(&self) -> Vec<String> {
        self.choice
            .iter()
            .enumerate()
            .map(|(i, s)| match s {
                Selector::W => format!("w{}", i + 1),
                Selector::Z => format!("z{}", i + 1),
            })
            .collect()
    }
}

impl fmt::Display for ComplementaryBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names().join(", "))
    }
}

/// LCP data with θ already fixed: find w, z ≥ 0 with w − Mz = q and wᵀz = 0.
#[derive(Clone, Debug)]
pub struct FixedLcp {
    pub m: Vec<Vec<Rational>>,
    pub q: Vec<Rational>,
}

impl FixedLcp {
    pub fn new(m: Vec<Vec<Rational>>, q: Vec<Rational>) -> Result<Self, Error> {
        let h = q.len();
        if m.len() != h || m.iter().any(|row| row.len() != h) {
            return Err(Error::Dimension(format!(
                "M must be {h}x{h} to match q of length {h}"
            )));
        }
        Ok(FixedLcp { m, q })
    }

    pub fn h(&self) -> usize {
        self.q.len()
    }
}

/// Outcome of a criss-cross run.
#[derive(Clone, Debug)]
pub enum LcpOutcome {
    Solved {
        basis: ComplementaryBasis,
        w: Vec<Rational>,
        z: Vec<Rational>,
        pivots: u64,
    },
    /// Certified: some tableau row shows w_r < 0 for every nonnegative z.
    Infeasible { pivots: u64 },
    /// Pivot budget exhausted or a basis repeated; under the sufficiency
    /// assumption the least-index rule is finite, so this signals a suspected
    /// assumption violation.
    PivotLimit { pivots: u64 },
}

impl LcpOutcome {
    pub fn is_solved(&self) -> bool {
        matches!(self, LcpOutcome::Solved { .. })
    }
}

/// Evaluate an instance exactly at theta_star.
pub fn fix_theta(inst: &UpLcpInstance, theta_star: &Rational) -> Result<FixedLcp, Error> {
    let (alpha, beta) = inst.theta_bounds();
    if theta_star < alpha || theta_star > beta {
        return Err(Error::Dimension(format!(
            "theta = {} lies outside the parameter interval",
            theta_star
        )));
    }
    FixedLcp::new(inst.m().eval(theta_star), inst.q().eval_vector(theta_star))
}

/// Singular basis columns: no basic solution exists for this basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularBasis;

/// Exact solve of G_B x = q for the given complementary basis. Basic
/// variables take the solved values, nonbasic variables are zero; no sign
/// requirement is imposed.
pub fn basic_solution(
    lcp: &FixedLcp,
    basis: &ComplementaryBasis,
) -> Result<(Vec<Rational>, Vec<Rational>), SingularBasis> {
    let h = lcp.h();
    assert_eq!(basis.len(), h, "basis/dimension mismatch");
    let mut a = vec![vec![Rational::zero(); h]; h];
    for j in 0..h {
        match basis.selector(j) {
            Selector::W => a[j][j] = Rational::one(),
            Selector::Z => {
                for (i, row) in a.iter_mut().enumerate() {
                    row[j] = -&lcp.m[i][j];
                }
            }
        }
    }
    let x = gauss_solve(a, vec![lcp.q.clone()]).ok_or(SingularBasis)?;
    let mut w = vec![Rational::zero(); h];
    let mut z = vec![Rational::zero(); h];
    for i in 0..h {
        match basis.selector(i) {
            Selector::W => w[i] = x[0][i].clone(),
            Selector::Z => z[i] = x[0][i].clone(),
        }
    }
    Ok((w, z))
}

/// Solve A X = B exactly for several right-hand-side columns; `None` when A
/// is singular.
pub(crate) fn gauss_solve(
    mut a: Vec<Vec<Rational>>,
    rhs: Vec<Vec<Rational>>,
) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut b = rhs;
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot_row);
        for bcol in b.iter_mut() {
            bcol.swap(col, pivot_row);
        }
        let piv = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &piv;
        }
        for bcol in b.iter_mut() {
            bcol[col] = &bcol[col] / &piv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = &a[col][j] * &f;
                a[r][j] = &a[r][j] - t;
            }
            for bcol in b.iter_mut() {
                let t = &bcol[col] * &f;
                bcol[r] = &bcol[r] - t;
            }
        }
    }
    Some(b)
}

/// How the criss-cross tableau is maintained between pivots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableauMode {
    /// Rebuild (G_B)⁻¹[G | q] from scratch after every basis change.
    Resolve,
    /// Elementary pivot updates on the full tableau.
    Incremental,
}

/// Solve the fixed-θ LCP by the least-index criss-cross method starting from
/// the all-w basis. The tableau mode is chosen by dimension; see
/// [`criss_cross_with_mode`].
pub fn criss_cross(lcp: &FixedLcp, pivot_limit: u64) -> LcpOutcome {
    let mode = if lcp.h() <= 8 {
        TableauMode::Resolve
    } else {
        TableauMode::Incremental
    };
    criss_cross_with_mode(lcp, pivot_limit, mode)
}

/// Default pivot budget: 10·2^min(h,20).
pub fn default_pivot_limit(h: usize) -> u64 {
    10u64 << h.min(20)
}

struct Tableau {
    h: usize,
    /// h × 2h, columns 0..h are the w variables, h..2h the z variables.
    t: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
}

impl Tableau {
    fn initial(lcp: &FixedLcp) -> Self {
        let h = lcp.h();
        let mut t = vec![vec![Rational::zero(); 2 * h]; h];
        for i in 0..h {
            t[i][i] = Rational::one();
            for j in 0..h {
                t[i][h + j] = -&lcp.m[i][j];
            }
        }
        Tableau {
            h,
            t,
            rhs: lcp.q.clone(),
        }
    }

    /// Column of the complement of the basic variable of pair `i`.
    fn comp_col(&self, basis: &ComplementaryBasis, i: usize) -> usize {
        match basis.selector(i) {
            Selector::W => self.h + i,
            Selector::Z => i,
        }
    }

    fn rebuild(&mut self, lcp: &FixedLcp, basis: &ComplementaryBasis) {
        let h = self.h;
        let mut gb = vec![vec![Rational::zero(); h]; h];
        for j in 0..h {
            match basis.selector(j) {
                Selector::W => gb[j][j] = Rational::one(),
                Selector::Z => {
                    for (i, row) in gb.iter_mut().enumerate() {
                        row[j] = -&lcp.m[i][j];
                    }
                }
            }
        }
        let mut rhs_cols: Vec<Vec<Rational>> = Vec::with_capacity(2 * h + 1);
        for c in 0..2 * h {
            let mut col = vec![Rational::zero(); h];
            for (i, slot) in col.iter_mut().enumerate() {
                *slot = if c < h {
                    if i == c {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                } else {
                    -&lcp.m[i][c - h]
                };
            }
            rhs_cols.push(col);
        }
        rhs_cols.push(lcp.q.clone());
        let solved = gauss_solve(gb, rhs_cols)
            .expect("basis reached by pivoting must have nonsingular columns");
        for i in 0..h {
            for c in 0..2 * h {
                self.t[i][c] = solved[c][i].clone();
            }
            self.rhs[i] = solved[2 * h][i].clone();
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.t[r][c].clone();
        debug_assert!(!piv.is_zero());
        for j in 0..2 * self.h {
            self.t[r][j] = &self.t[r][j] / &piv;
        }
        self.rhs[r] = &self.rhs[r] / &piv;
        for i in 0..self.h {
            if i == r || self.t[i][c].is_zero() {
                continue;
            }
            let f = self.t[i][c].clone();
            for j in 0..2 * self.h {
                let t = &self.t[r][j] * &f;
                self.t[i][j] = &self.t[i][j] - t;
            }
            let t = &self.rhs[r] * &f;
            self.rhs[i] = &self.rhs[i] - t;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.t.swap(a, b);
        self.rhs.swap(a, b);
    }
}

/// Criss-cross with an explicit tableau maintenance mode. Exposed so that the
/// two modes can be checked against each other.
pub fn criss_cross_with_mode(lcp: &FixedLcp, pivot_limit: u64, mode: TableauMode) -> LcpOutcome {
    assert!(pivot_limit >= 1, "pivot_limit must be at least 1");
    let h = lcp.h();
    let mut basis = ComplementaryBasis::all_w(h);
    let mut tab = Tableau::initial(lcp);
    let mut visited: HashSet<ComplementaryBasis> = HashSet::new();
    visited.insert(basis.clone());
    let mut pivots = 0u64;

    loop {
        let neg = (0..h).find(|&i| tab.rhs[i].is_negative());
        let Some(r) = neg else {
            return extract_solution(lcp, &basis, &tab.rhs, pivots);
        };

        let cr = tab.comp_col(&basis, r);
        if !tab.t[r][cr].is_zero() {
            // diagonal pivot: the complement of the row-r basic enters
            match mode {
                TableauMode::Incremental => tab.pivot(r, cr),
                TableauMode::Resolve => {}
            }
            basis.flip(r);
            if mode == TableauMode::Resolve {
                tab.rebuild(lcp, &basis);
            }
        } else {
            // m̄_rs = −t[r][comp_col(s)]; infeasibility is certified when the
            // whole transformed row is nonpositive.
            if (0..h).all(|s| !tab.t[r][tab.comp_col(&basis, s)].is_negative()) {
                return LcpOutcome::Infeasible { pivots };
            }
            // classical exchange rule first (m̄_rs > 0 and m̄_sr < 0), then
            // any nonsingular 2×2 block as a fallback outside sufficiency
            let sign_rule = (0..h).find(|&s| {
                s != r
                    && tab.t[r][tab.comp_col(&basis, s)].is_negative()
                    && tab.t[s][cr].is_positive()
            });
            let fallback = || {
                (0..h).find(|&s| {
                    s != r
                        && !tab.t[r][tab.comp_col(&basis, s)].is_zero()
                        && !tab.t[s][cr].is_zero()
                })
            };
            let Some(s) = sign_rule.or_else(fallback) else {
                return LcpOutcome::PivotLimit { pivots };
            };
            match mode {
                TableauMode::Incremental => {
                    let cs = tab.comp_col(&basis, s);
                    tab.pivot(r, cs);
                    tab.pivot(s, cr);
                    tab.swap_rows(r, s);
                }
                TableauMode::Resolve => {}
            }
            basis.flip(r);
            basis.flip(s);
            if mode == TableauMode::Resolve {
                tab.rebuild(lcp, &basis);
            }
        }

        pivots += 1;
        if pivots >= pivot_limit {
            return LcpOutcome::PivotLimit { pivots };
        }
        if !visited.insert(basis.clone()) {
            // a repeated basis cannot happen for sufficient matrices
            return LcpOutcome::PivotLimit { pivots };
        }
    }
}

fn extract_solution(
    lcp: &FixedLcp,
    basis: &ComplementaryBasis,
    rhs: &[Rational],
    pivots: u64,
) -> LcpOutcome {
    let h = lcp.h();
    let mut w = vec![Rational::zero(); h];
    let mut z = vec![Rational::zero(); h];
    for i in 0..h {
        match basis.selector(i) {
            Selector::W => w[i] = rhs[i].clone(),
            Selector::Z => z[i] = rhs[i].clone(),
        }
    }
    debug_assert!(residual_ok(lcp, &w, &z));
    LcpOutcome::Solved {
        basis: basis.clone(),
        w,
        z,
        pivots,
    }
}

fn residual_ok(lcp: &FixedLcp, w: &[Rational], z: &[Rational]) -> bool {
    let h = lcp.h();
    for i in 0..h {
        let mut lhs = w[i].clone();
        for j in 0..h {
            lhs = lhs - &lcp.m[i][j] * &z[j];
        }
        if lhs != lcp.q[i] {
            return false;
        }
    }
    true
}
