//! Reformulate uni-parametric convex QP (and LP as the zero-Q special case)
//! into a uni-parametric LCP through the first-order optimality system, and
//! map partition pieces back into primal/dual/slack solution functions.

use crate::error::Error;
use crate::interval::ParamInterval;
use crate::lcp::Selector;
use crate::parmat::{AffineScalar, ParamMatrix};
use crate::poly::{Poly, Rational};
use crate::solver::{Partition, UpLcpInstance};
use num_traits::{Signed, Zero};

/// min ½ xᵀQ(θ)x + c(θ)ᵀx  s.t.  A(θ)x ≤ b(θ), x ≥ 0, θ ∈ [α, β].
#[derive(Clone, Debug)]
pub struct UpQpInstance {
    n: usize,
    m: usize,
    q: ParamMatrix,
    c: ParamMatrix,
    a: ParamMatrix,
    b: ParamMatrix,
    theta: ParamInterval,
}

impl UpQpInstance {
    pub fn new(
        q: ParamMatrix,
        c: ParamMatrix,
        a: ParamMatrix,
        b: ParamMatrix,
        alpha: Rational,
        beta: Rational,
    ) -> Result<Self, Error> {
        let n = q.rows();
        if n == 0 {
            return Err(Error::Dimension("primal dimension must be at least 1".into()));
        }
        if q.cols() != n {
            return Err(Error::Dimension(format!(
                "Q must be square, got {}x{}",
                q.rows(),
                q.cols()
            )));
        }
        if !q.is_symmetric() {
            return Err(Error::Dimension(
                "Q must be symmetric in both its constant and θ parts".into(),
            ));
        }
        if c.rows() != n || c.cols() != 1 {
            return Err(Error::Dimension(format!(
                "c must be {}x1, got {}x{}",
                n,
                c.rows(),
                c.cols()
            )));
        }
        let m = a.rows();
        if m > 0 && a.cols() != n {
            return Err(Error::Dimension(format!(
                "A must have {} columns, got {}",
                n,
                a.cols()
            )));
        }
        if b.rows() != m || (m > 0 && b.cols() != 1) {
            return Err(Error::Dimension(format!(
                "b must be {}x1, got {}x{}",
                m,
                b.rows(),
                b.cols()
            )));
        }
        let theta = ParamInterval::rational(alpha, beta)?;
        Ok(UpQpInstance {
            n,
            m,
            q,
            c,
            a,
            b,
            theta,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q_matrix(&self) -> &ParamMatrix {
        &self.q
    }

    pub fn c(&self) -> &ParamMatrix {
        &self.c
    }

    pub fn a(&self) -> &ParamMatrix {
        &self.a
    }

    pub fn b(&self) -> &ParamMatrix {
        &self.b
    }

    pub fn theta(&self) -> &ParamInterval {
        &self.theta
    }

    pub fn theta_bounds(&self) -> (&Rational, &Rational) {
        (
            self.theta.lo().as_exact().expect("rational bounds"),
            self.theta.hi().as_exact().expect("rational bounds"),
        )
    }

    pub fn is_lp(&self) -> bool {
        (0..self.n).all(|r| (0..self.n).all(|c| self.q.get(r, c).is_zero()))
    }
}

/// Which QP quantity an LCP coordinate stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpRole {
    /// z_i, i < n: primal variable x_i
    Primal(usize),
    /// z_{n+j}: dual multiplier of constraint j
    DualConstraint(usize),
    /// w_i, i < n: dual slack of x_i ≥ 0
    DualNonneg(usize),
    /// w_{n+j}: primal slack of constraint j
    PrimalSlack(usize),
}

/// Bijection between LCP coordinates and QP roles for an n-variable,
/// m-constraint reformulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexMap {
    n: usize,
    m: usize,
}

impl IndexMap {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> usize {
        self.n + self.m
    }

    pub fn z_role(&self, pair: usize) -> QpRole {
        if pair < self.n {
            QpRole::Primal(pair)
        } else {
            QpRole::DualConstraint(pair - self.n)
        }
    }

    pub fn w_role(&self, pair: usize) -> QpRole {
        if pair < self.n {
            QpRole::DualNonneg(pair)
        } else {
            QpRole::PrimalSlack(pair - self.n)
        }
    }
}

/// KKT reformulation:
/// h = n + m, M(θ) = [[Q, Aᵀ], [−A, 0]], q(θ) = (c; b), z = (x, λ),
/// w = (Qx + Aᵀλ + c, b − Ax). Entries stay affine in θ.
pub fn qp_to_lcp(qp: &UpQpInstance) -> Result<(UpLcpInstance, IndexMap), Error> {
    let n = qp.n;
    let m = qp.m;
    let h = n + m;
    let big_m = ParamMatrix::from_fn(h, h, |r, c| {
        if r < n && c < n {
            qp.q.get(r, c).clone()
        } else if r < n {
            // Aᵀ block
            qp.a.get(c - n, r).clone()
        } else if c < n {
            qp.a.get(r - n, c).neg()
        } else {
            AffineScalar::zero()
        }
    });
    let big_q = ParamMatrix::from_fn(h, 1, |r, _| {
        if r < n {
            qp.c.get(r, 0).clone()
        } else {
            qp.b.get(r - n, 0).clone()
        }
    });
    let (alpha, beta) = qp.theta_bounds();
    let inst = UpLcpInstance::new(big_m, big_q, alpha.clone(), beta.clone())?;
    Ok((inst, IndexMap { n, m }))
}

/// LP is the Q ≡ 0 case of the same reformulation.
pub fn lp_to_lcp(lp: &UpQpInstance) -> Result<(UpLcpInstance, IndexMap), Error> {
    if !lp.is_lp() {
        return Err(Error::Dimension(
            "LP reformulation requires Q to be identically zero".into(),
        ));
    }
    qp_to_lcp(lp)
}

/// Numerator over a shared piece denominator.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFunction {
    pub fn zero(den: Poly) -> Self {
        RationalFunction {
            num: Poly::zero(),
            den,
        }
    }

    pub fn eval(&self, theta: &Rational) -> Rational {
        self.num.eval(theta) / self.den.eval(theta)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

/// Piecewise QP solution on one invariancy interval: primal variables,
/// primal slacks, constraint duals, and the duals of the nonnegativity
/// bounds, all sharing the piece denominator.
#[derive(Clone, Debug)]
pub struct QpSolutionPiece {
    pub interval: ParamInterval,
    pub x: Vec<RationalFunction>,
    pub primal_slack: Vec<RationalFunction>,
    pub dual_constraints: Vec<RationalFunction>,
    pub dual_nonneg: Vec<RationalFunction>,
}

/// Route each basic LCP variable's numerator to its QP role; nonbasic roles
/// get the zero function over the same denominator.
pub fn map_solution_back(
    partition: &Partition,
    map: &IndexMap,
) -> Result<Vec<QpSolutionPiece>, Error> {
    let h = map.h();
    let mut out = Vec::with_capacity(partition.len());
    for piece in partition.pieces() {
        if piece.basis.len() != h {
            return Err(Error::Dimension(format!(
                "partition has h = {} but the index map expects {}",
                piece.basis.len(),
                h
            )));
        }
        let den = piece.funcs.polys.det.clone();
        let mut x = vec![RationalFunction::zero(den.clone()); map.n()];
        let mut primal_slack = vec![RationalFunction::zero(den.clone()); map.m()];
        let mut dual_constraints = vec![RationalFunction::zero(den.clone()); map.m()];
        let mut dual_nonneg = vec![RationalFunction::zero(den.clone()); map.n()];
        for pair in 0..h {
            let num = piece.funcs.polys.numerators[pair].clone();
            let f = RationalFunction {
                num,
                den: den.clone(),
            };
            match piece.basis.selector(pair) {
                Selector::Z => match map.z_role(pair) {
                    QpRole::Primal(i) => x[i] = f,
                    QpRole::DualConstraint(j) => dual_constraints[j] = f,
                    _ => unreachable!(),
                },
                Selector::W => match map.w_role(pair) {
                    QpRole::DualNonneg(i) => dual_nonneg[i] = f,
                    QpRole::PrimalSlack(j) => primal_slack[j] = f,
                    _ => unreachable!(),
                },
            }
        }
        out.push(QpSolutionPiece {
            interval: piece.interval.clone(),
            x,
            primal_slack,
            dual_constraints,
            dual_nonneg,
        });
    }
    Ok(out)
}

/// Exact positive-semidefiniteness of a symmetric rational matrix, by
/// pivoting on positive diagonal entries and recursing on the Schur
/// complement. A zero diagonal with nonzero off-diagonal entries refutes
/// semidefiniteness.
fn is_psd(mut m: Vec<Vec<Rational>>) -> bool {
    let mut live: Vec<usize> = (0..m.len()).collect();
    while !live.is_empty() {
        if live.iter().any(|&i| m[i][i].is_negative()) {
            return false;
        }
        let Some(&p) = live.iter().find(|&&i| m[i][i].is_positive()) else {
            // all remaining diagonal entries are zero
            return live
                .iter()
                .all(|&i| live.iter().all(|&j| m[i][j].is_zero()));
        };
        let piv = m[p][p].clone();
        live.retain(|&i| i != p);
        for &i in &live {
            for &j in &live {
                let update = &m[i][p] * &m[p][j] / &piv;
                m[i][j] = &m[i][j] - update;
            }
        }
    }
    true
}

/// Sample Q(θ) at five points of Θ and test exact semidefiniteness at each.
/// Returns false (and logs a warning) if any sample fails; the solve itself
/// proceeds on the caller's responsibility.
pub fn convexity_diagnostic(qp: &UpQpInstance) -> bool {
    let (alpha, beta) = qp.theta_bounds();
    let span = beta - alpha;
    let mut ok = true;
    for k in 0..5 {
        let theta = alpha + &span * Rational::new(k.into(), 4.into());
        if !is_psd(qp.q.eval(&theta)) {
            log::warn!(
                "objective matrix is not positive semidefinite at theta = {} — the problem may not be convex there",
                theta
            );
            ok = false;
        }
    }
    ok
}
