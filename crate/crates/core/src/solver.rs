//! Partition the parameter interval of a uni-parametric LCP into invariancy
//! intervals: probe interval midpoints with the criss-cross method, compute
//! each discovered basis's feasible subinterval from the real roots of its
//! Cramer numerators, and subdivide until the whole interval is covered.

use crate::error::Error;
use crate::interval::{Endpoint, ParamInterval};
use crate::lcp::{criss_cross, default_pivot_limit, fix_theta, ComplementaryBasis, LcpOutcome, Selector};
use crate::parmat::{
    basis_columns, det_and_cramer, det_sign, validate_det_nonvanishing, BasisPolynomials,
    ParamMatrix,
};
use crate::poly::{format_rational, Poly, Rational};
use crate::roots::{
    compare_algebraic_on_factors, compare_root_to_rational, first_nonzero_derivative_sign,
    isolate_real_roots_factored, IsolatedRoot,
};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Condvar, Mutex};

/// A uni-parametric LCP: w − M(θ)z = q(θ), wᵀz = 0, w, z ≥ 0 over θ ∈ [α, β].
#[derive(Clone, Debug)]
pub struct UpLcpInstance {
    h: usize,
    m: ParamMatrix,
    q: ParamMatrix,
    theta: ParamInterval,
}

impl UpLcpInstance {
    pub fn new(m: ParamMatrix, q: ParamMatrix, alpha: Rational, beta: Rational) -> Result<Self, Error> {
        let h = m.rows();
        if h == 0 {
            return Err(Error::Dimension("dimension h must be at least 1".into()));
        }
        if m.cols() != h {
            return Err(Error::Dimension(format!(
                "M must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if q.rows() != h || q.cols() != 1 {
            return Err(Error::Dimension(format!(
                "q must be {}x1, got {}x{}",
                h,
                q.rows(),
                q.cols()
            )));
        }
        // α = β would reduce to a plain LCP and is rejected here
        let theta = ParamInterval::rational(alpha, beta)?;
        Ok(UpLcpInstance { h, m, q, theta })
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn m(&self) -> &ParamMatrix {
        &self.m
    }

    pub fn q(&self) -> &ParamMatrix {
        &self.q
    }

    pub fn theta(&self) -> &ParamInterval {
        &self.theta
    }

    pub fn theta_bounds(&self) -> (&Rational, &Rational) {
        let lo = self
            .theta
            .lo()
            .as_exact()
            .expect("instance Θ has rational endpoints");
        let hi = self
            .theta
            .hi()
            .as_exact()
            .expect("instance Θ has rational endpoints");
        (lo, hi)
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub workers: usize,
    /// Output tolerance for decimal rendering of endpoints and samples.
    pub eps: Rational,
    /// Criss-cross pivot budget; defaults to 10·2^min(h,20).
    pub pivot_limit: Option<u64>,
    /// Cap on processed subintervals; defaults to 64·h. Exceeding it means
    /// the subdivision failed to terminate and is reported as a bug.
    pub interval_budget: Option<u64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            workers: 1,
            eps: Rational::new(BigInt::from(1), BigInt::from(1_000_000_000u64)),
            pivot_limit: None,
            interval_budget: None,
        }
    }
}

/// Isolated real roots of one Cramer numerator, each paired with its
/// square-free defining factor; sorted by position.
#[derive(Clone, Debug, Default)]
pub struct ConstraintRoots {
    pub roots: Vec<(Poly, IsolatedRoot)>,
}

/// Everything the solver knows about one complementary basis: determinant,
/// numerators, invariant determinant sign, and the isolated roots of every
/// nonconstant numerator. Computed once per basis and memoized.
#[derive(Clone, Debug)]
pub struct BasisData {
    pub basis: ComplementaryBasis,
    pub polys: BasisPolynomials,
    pub roots: Vec<ConstraintRoots>,
}

fn compute_basis_data(
    inst: &UpLcpInstance,
    basis: &ComplementaryBasis,
    theta_star: &Rational,
) -> Result<BasisData, Error> {
    let gb = basis_columns(inst.m(), basis)?;
    let (det, numerators) = det_and_cramer(&gb, inst.q());
    if det.is_zero() {
        return Err(Error::internal(format!(
            "basis {basis} has identically singular columns"
        )));
    }
    let sign = det_sign(&det, theta_star)
        .map_err(|_| Error::internal(format!("basis {basis} is degenerate at the probe point")))?;
    let (alpha, beta) = inst.theta_bounds();
    if let Err(v) = validate_det_nonvanishing(&det, alpha, beta) {
        return Err(Error::Sufficiency(format!(
            "determinant of basis {} changes sign inside Θ (root bracketed by [{}, {}])",
            basis,
            format_rational(&v.lo),
            format_rational(&v.hi)
        )));
    }
    let roots = numerators
        .iter()
        .map(|v| {
            if v.degree().map_or(true, |d| d == 0) {
                ConstraintRoots::default()
            } else {
                ConstraintRoots {
                    roots: isolate_real_roots_factored(v),
                }
            }
        })
        .collect();
    Ok(BasisData {
        basis: basis.clone(),
        polys: BasisPolynomials {
            det,
            numerators,
            sign,
        },
        roots,
    })
}

/// Determinant, Cramer numerators, and determinant sign for a basis,
/// computed fresh (the solver itself memoizes per basis).
pub fn basis_polynomials(
    inst: &UpLcpInstance,
    basis: &ComplementaryBasis,
    theta_star: &Rational,
) -> Result<BasisPolynomials, Error> {
    Ok(compute_basis_data(inst, basis, theta_star)?.polys)
}

/// Exact rational probe point strictly inside the interval: the midpoint for
/// rational endpoints, otherwise the midpoint of the gap left after refining
/// both endpoint brackets to disjointness.
pub fn select_probe(interval: &ParamInterval) -> Result<Rational, Error> {
    if interval.is_singleton() {
        return Err(Error::internal("cannot probe a zero-length interval"));
    }
    let two = Rational::from_integer(BigInt::from(2));
    if let (Some(a), Some(b)) = (interval.lo().as_exact(), interval.hi().as_exact()) {
        return Ok((a + b) / two);
    }
    let mut lo = interval.lo().clone();
    let mut hi = interval.hi().clone();
    loop {
        let gap_lo = lo.upper();
        let gap_hi = hi.lower();
        if gap_lo < gap_hi {
            return Ok((gap_lo + gap_hi) / two);
        }
        lo.refine_once();
        hi.refine_once();
    }
}

fn tighten_lo(current: &mut Endpoint, candidate: Endpoint) {
    if candidate.compare(current) == Ordering::Greater {
        *current = candidate;
    }
}

fn tighten_hi(current: &mut Endpoint, candidate: Endpoint) {
    if candidate.compare(current) == Ordering::Less {
        *current = candidate;
    }
}

fn nearest_odd_root_below(c: &ConstraintRoots, theta_star: &Rational) -> Option<Endpoint> {
    c.roots
        .iter()
        .rev()
        .filter(|(_, r)| r.multiplicity % 2 == 1)
        .find(|(f, r)| compare_root_to_rational(f, r, theta_star) == Ordering::Less)
        .map(|(f, r)| Endpoint::algebraic(f.clone(), r.clone()))
}

fn nearest_odd_root_above(c: &ConstraintRoots, theta_star: &Rational) -> Option<Endpoint> {
    c.roots
        .iter()
        .filter(|(_, r)| r.multiplicity % 2 == 1)
        .find(|(f, r)| compare_root_to_rational(f, r, theta_star) == Ordering::Greater)
        .map(|(f, r)| Endpoint::algebraic(f.clone(), r.clone()))
}

/// Largest connected subinterval of the basis's invariancy region that
/// contains `theta_star`, intersected with [alpha_p, beta_p].
///
/// Only odd-multiplicity roots of the numerators restrict the interval. A
/// root sitting exactly at `theta_star` pins the matching side to
/// `theta_star` according to the sign with which the constraint grows there;
/// two constraints pinning opposite sides collapse the result to a
/// singleton, which the caller discards.
pub fn get_extremes(
    data: &BasisData,
    theta_star: &Rational,
    alpha_p: &Endpoint,
    beta_p: &Endpoint,
) -> Result<(Endpoint, Endpoint), Error> {
    if alpha_p.compare_rational(theta_star) == Ordering::Greater
        || beta_p.compare_rational(theta_star) == Ordering::Less
    {
        return Err(Error::internal("probe point outside the current interval"));
    }
    let sign = data.polys.sign;
    for v in &data.polys.numerators {
        let mut val = v.eval(theta_star);
        if sign < 0 {
            val = -val;
        }
        if val.is_negative() {
            return Err(Error::internal(
                "probe point is not in the basis's invariancy region",
            ));
        }
    }

    let mut lo = alpha_p.clone();
    let mut hi = beta_p.clone();
    let mut collapse = false;
    for (v, constraint) in data.polys.numerators.iter().zip(&data.roots) {
        if v.degree().map_or(true, |d| d == 0) {
            continue;
        }
        if v.eval(theta_star).is_zero() {
            let (_, root) = constraint
                .roots
                .iter()
                .find(|(f, r)| compare_root_to_rational(f, r, theta_star) == Ordering::Equal)
                .expect("a numerator root at the probe must be among its isolated roots");
            let g = if sign < 0 { -v } else { v.clone() };
            let c = first_nonzero_derivative_sign(&g, theta_star);
            debug_assert!(c != 0, "nonzero numerator has a nonzero jet at any point");
            if root.multiplicity % 2 == 1 {
                if c > 0 {
                    // constraint turns nonnegative to the right of θ*
                    tighten_lo(&mut lo, Endpoint::exact(theta_star.clone()));
                    if let Some(e) = nearest_odd_root_above(constraint, theta_star) {
                        tighten_hi(&mut hi, e);
                    }
                } else {
                    tighten_hi(&mut hi, Endpoint::exact(theta_star.clone()));
                    if let Some(e) = nearest_odd_root_below(constraint, theta_star) {
                        tighten_lo(&mut lo, e);
                    }
                }
            } else if c < 0 {
                // even-order touch from below: nonnegative only at θ* itself
                collapse = true;
            } else {
                if let Some(e) = nearest_odd_root_below(constraint, theta_star) {
                    tighten_lo(&mut lo, e);
                }
                if let Some(e) = nearest_odd_root_above(constraint, theta_star) {
                    tighten_hi(&mut hi, e);
                }
            }
        } else {
            if let Some(e) = nearest_odd_root_below(constraint, theta_star) {
                tighten_lo(&mut lo, e);
            }
            if let Some(e) = nearest_odd_root_above(constraint, theta_star) {
                tighten_hi(&mut hi, e);
            }
        }
    }
    if collapse {
        let t = Endpoint::exact(theta_star.clone());
        return Ok((t.clone(), t));
    }
    Ok((lo, hi))
}

/// One emitted invariancy-interval piece: a basis, its interval, and the
/// shared per-basis polynomial data. Basic variable i equals
/// numerators[i]/det on the interval; nonbasic variables are identically 0.
#[derive(Clone, Debug)]
pub struct IntervalPiece {
    pub basis: ComplementaryBasis,
    pub interval: ParamInterval,
    pub funcs: Arc<BasisData>,
}

impl IntervalPiece {
    /// Exact (w, z) at a rational parameter value.
    pub fn solution_at(&self, theta: &Rational) -> (Vec<Rational>, Vec<Rational>) {
        let h = self.basis.len();
        let d = self.funcs.polys.det.eval(theta);
        let mut w = vec![Rational::from_integer(0.into()); h];
        let mut z = vec![Rational::from_integer(0.into()); h];
        for i in 0..h {
            let value = self.funcs.polys.numerators[i].eval(theta) / &d;
            match self.basis.selector(i) {
                Selector::W => w[i] = value,
                Selector::Z => z[i] = value,
            }
        }
        (w, z)
    }
}

/// Ordered list of pieces covering Θ with pairwise disjoint interiors.
#[derive(Clone, Debug)]
pub struct Partition {
    pieces: Vec<IntervalPiece>,
}

impl Partition {
    pub fn pieces(&self) -> &[IntervalPiece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn piece_containing(&self, theta: &Rational) -> Option<&IntervalPiece> {
        self.pieces
            .iter()
            .find(|p| p.interval.contains_rational(theta))
    }
}

/// Solve instrumentation, deterministic across worker counts.
#[derive(Clone, Debug, Default)]
pub struct SolveStats {
    pub intervals_processed: u64,
    pub singleton_discards: u64,
    pub criss_cross_pivots: u64,
    /// Times each basis's polynomials and roots were computed (memo misses),
    /// sorted by basis. With the memo working this is 1 per basis.
    pub basis_computations: Vec<(ComplementaryBasis, u64)>,
}

impl SolveStats {
    pub fn computations_for(&self, basis: &ComplementaryBasis) -> u64 {
        self.basis_computations
            .iter()
            .find(|(b, _)| b == basis)
            .map(|(_, n)| *n)
            .unwrap_or(0)
    }

    pub fn distinct_bases(&self) -> usize {
        self.basis_computations.len()
    }
}

#[derive(Debug)]
pub struct SolveResult {
    pub partition: Partition,
    pub stats: SolveStats,
}

#[derive(Default)]
struct MemoSlot {
    data: Mutex<Option<Arc<BasisData>>>,
}

/// Per-basis memo with at-most-once computation per key: concurrent workers
/// asking for the same basis serialize on the slot lock, so the expensive
/// polynomial and root work happens exactly once.
struct MemoTable {
    map: Mutex<HashMap<ComplementaryBasis, Arc<MemoSlot>>>,
    counts: Mutex<HashMap<ComplementaryBasis, u64>>,
}

impl MemoTable {
    fn new() -> Self {
        MemoTable {
            map: Mutex::new(HashMap::new()),
            counts: Mutex::new(HashMap::new()),
        }
    }

    fn get_or_compute<F>(&self, basis: &ComplementaryBasis, compute: F) -> Result<Arc<BasisData>, Error>
    where
        F: FnOnce() -> Result<BasisData, Error>,
    {
        let slot = {
            let mut map = self.map.lock().unwrap();
            map.entry(basis.clone()).or_default().clone()
        };
        let mut guard = slot.data.lock().unwrap();
        if let Some(data) = guard.as_ref() {
            return Ok(data.clone());
        }
        let data = Arc::new(compute()?);
        *guard = Some(data.clone());
        *self.counts.lock().unwrap().entry(basis.clone()).or_insert(0) += 1;
        Ok(data)
    }

    fn counts_sorted(&self) -> Vec<(ComplementaryBasis, u64)> {
        let counts = self.counts.lock().unwrap();
        let mut v: Vec<_> = counts.iter().map(|(b, n)| (b.clone(), *n)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
}

enum ProbeFailure {
    Degenerate,
    Fatal(Error),
}

enum ProcessOutcome {
    Piece {
        piece: IntervalPiece,
        leftovers: Vec<ParamInterval>,
        pivots: u64,
    },
    Singleton {
        leftovers: Vec<ParamInterval>,
        pivots: u64,
    },
}

fn attempt_probe(
    inst: &UpLcpInstance,
    memo: &MemoTable,
    interval: &ParamInterval,
    theta_star: &Rational,
    pivot_limit: u64,
) -> Result<ProcessOutcome, ProbeFailure> {
    let lcp = fix_theta(inst, theta_star).map_err(ProbeFailure::Fatal)?;
    let (basis, pivots) = match criss_cross(&lcp, pivot_limit) {
        LcpOutcome::Solved { basis, pivots, .. } => (basis, pivots),
        LcpOutcome::Infeasible { .. } => {
            return Err(ProbeFailure::Fatal(Error::Feasibility(format_rational(
                theta_star,
            ))));
        }
        LcpOutcome::PivotLimit { pivots } => {
            return Err(ProbeFailure::Fatal(Error::Sufficiency(format!(
                "criss-cross exceeded the pivot budget after {} pivots at theta = {}",
                pivots,
                format_rational(theta_star)
            ))));
        }
    };
    let data = memo
        .get_or_compute(&basis, || compute_basis_data(inst, &basis, theta_star))
        .map_err(ProbeFailure::Fatal)?;
    let (lo, hi) = match get_extremes(&data, theta_star, interval.lo(), interval.hi()) {
        Ok(bounds) => bounds,
        Err(_) => return Err(ProbeFailure::Degenerate),
    };

    if lo.compare(&hi) == Ordering::Equal {
        // singleton at θ*: discard and enqueue both flanks
        let t = Endpoint::exact(theta_star.clone());
        let mut leftovers = Vec::new();
        if interval.lo().compare(&t) == Ordering::Less {
            leftovers.push(ParamInterval::new(interval.lo().clone(), t.clone()).unwrap());
        }
        if t.compare(interval.hi()) == Ordering::Less {
            leftovers.push(ParamInterval::new(t, interval.hi().clone()).unwrap());
        }
        return Ok(ProcessOutcome::Singleton { leftovers, pivots });
    }

    let mut leftovers = Vec::new();
    if interval.lo().compare(&lo) == Ordering::Less {
        leftovers.push(ParamInterval::new(interval.lo().clone(), lo.clone()).unwrap());
    }
    if hi.compare(interval.hi()) == Ordering::Less {
        leftovers.push(ParamInterval::new(hi.clone(), interval.hi().clone()).unwrap());
    }
    let piece = IntervalPiece {
        basis,
        interval: ParamInterval::new(lo, hi).map_err(ProbeFailure::Fatal)?,
        funcs: data,
    };
    Ok(ProcessOutcome::Piece {
        piece,
        leftovers,
        pivots,
    })
}

fn process_interval(
    inst: &UpLcpInstance,
    memo: &MemoTable,
    interval: &ParamInterval,
    pivot_limit: u64,
) -> Result<ProcessOutcome, Error> {
    let theta_star = select_probe(interval)?;
    match attempt_probe(inst, memo, interval, &theta_star, pivot_limit) {
        Ok(out) => Ok(out),
        Err(ProbeFailure::Fatal(e)) => Err(e),
        Err(ProbeFailure::Degenerate) => {
            // fully degenerate probe: perturb toward the left end once
            let two = Rational::from_integer(BigInt::from(2));
            let perturbed = (interval.lo().upper() + &theta_star) / two;
            match attempt_probe(inst, memo, interval, &perturbed, pivot_limit) {
                Ok(out) => Ok(out),
                Err(ProbeFailure::Fatal(e)) => Err(e),
                Err(ProbeFailure::Degenerate) => Err(Error::internal(format!(
                    "probe degenerate at theta = {} and at its perturbation {}",
                    format_rational(&theta_star),
                    format_rational(&perturbed)
                ))),
            }
        }
    }
}

struct SharedState {
    queue: Vec<ParamInterval>,
    active: usize,
    pieces: Vec<IntervalPiece>,
    processed: u64,
    singletons: u64,
    pivots: u64,
    error: Option<Error>,
}

fn worker_loop(
    inst: &UpLcpInstance,
    memo: &MemoTable,
    state: &Mutex<SharedState>,
    cv: &Condvar,
    budget: u64,
    pivot_limit: u64,
) {
    let mut guard = state.lock().unwrap();
    loop {
        if guard.error.is_some() {
            cv.notify_all();
            return;
        }
        if let Some(interval) = guard.queue.pop() {
            if guard.processed >= budget {
                guard.error = Some(Error::internal(format!(
                    "interval budget of {budget} exhausted; subdivision failed to terminate"
                )));
                cv.notify_all();
                return;
            }
            guard.processed += 1;
            guard.active += 1;
            drop(guard);
            let result = process_interval(inst, memo, &interval, pivot_limit);
            guard = state.lock().unwrap();
            guard.active -= 1;
            match result {
                Ok(ProcessOutcome::Piece {
                    piece,
                    leftovers,
                    pivots,
                }) => {
                    guard.pieces.push(piece);
                    guard.queue.extend(leftovers);
                    guard.pivots += pivots;
                }
                Ok(ProcessOutcome::Singleton { leftovers, pivots }) => {
                    guard.singletons += 1;
                    guard.queue.extend(leftovers);
                    guard.pivots += pivots;
                }
                Err(e) => {
                    if guard.error.is_none() {
                        guard.error = Some(e);
                    }
                }
            }
            cv.notify_all();
        } else if guard.active == 0 {
            cv.notify_all();
            return;
        } else {
            guard = cv.wait(guard).unwrap();
        }
    }
}

/// Drop singletons, sort by left endpoint, merge adjacent pieces sharing both
/// an endpoint and a basis, and verify the pieces tile [α, β] exactly.
pub fn normalize_partition(
    pieces: Vec<IntervalPiece>,
    theta: &ParamInterval,
) -> Result<Partition, Error> {
    let mut pieces: Vec<IntervalPiece> = pieces
        .into_iter()
        .filter(|p| !p.interval.is_singleton())
        .collect();
    pieces.sort_by(|a, b| a.interval.lo().compare(b.interval.lo()));
    let mut merged: Vec<IntervalPiece> = Vec::new();
    for piece in pieces {
        if let Some(last) = merged.last_mut() {
            if last.basis == piece.basis
                && last.interval.hi().compare(piece.interval.lo()) == Ordering::Equal
            {
                last.interval = ParamInterval::new(
                    last.interval.lo().clone(),
                    piece.interval.hi().clone(),
                )?;
                continue;
            }
        }
        merged.push(piece);
    }
    if merged.is_empty() {
        return Err(Error::internal("partition is empty"));
    }
    if merged[0].interval.lo().compare(theta.lo()) != Ordering::Equal {
        return Err(Error::internal("partition does not start at alpha"));
    }
    if merged.last().unwrap().interval.hi().compare(theta.hi()) != Ordering::Equal {
        return Err(Error::internal("partition does not end at beta"));
    }
    for i in 1..merged.len() {
        if merged[i - 1].interval.hi().compare(merged[i].interval.lo()) != Ordering::Equal {
            return Err(Error::internal(format!(
                "coverage gap between piece {} and piece {}",
                i,
                i + 1
            )));
        }
    }
    Ok(Partition { pieces: merged })
}

/// Piece-count diagnostic per basis: with n distinct odd-multiplicity real
/// roots over a basis's nonconstant numerators, more than max(1, n − h)
/// pieces for that basis is unexpected. Logged, never fatal.
fn observation_bound_warnings(partition: &Partition) -> Vec<String> {
    let mut by_basis: HashMap<&ComplementaryBasis, (u64, &Arc<BasisData>)> = HashMap::new();
    for piece in partition.pieces() {
        let entry = by_basis.entry(&piece.basis).or_insert((0, &piece.funcs));
        entry.0 += 1;
    }
    let mut warnings = Vec::new();
    for (basis, (count, data)) in by_basis {
        if count <= 1 {
            continue;
        }
        let mut distinct: Vec<(&Poly, &IsolatedRoot)> = Vec::new();
        for c in &data.roots {
            for (f, r) in &c.roots {
                if r.multiplicity % 2 == 0 {
                    continue;
                }
                let dup = distinct.iter().any(|(df, dr)| {
                    compare_algebraic_on_factors(df, dr, f, r) == Ordering::Equal
                });
                if !dup {
                    distinct.push((f, r));
                }
            }
        }
        let n = distinct.len() as u64;
        let h = basis.len() as u64;
        let bound = 1.max(n.saturating_sub(h));
        if count > bound {
            warnings.push(format!(
                "basis {} has {} pieces, above the expected bound {} (n = {}, h = {})",
                basis, count, bound, n, h
            ));
        }
    }
    warnings.sort();
    warnings
}

/// Partition Θ into invariancy intervals. Work queue of subintervals, probed
/// at (effectively) midpoints, processed LIFO; with several workers the
/// queue is shared and the final partition is normalized, so output is
/// independent of the worker count.
pub fn solve_uplcp(inst: &UpLcpInstance, opts: &SolverOptions) -> Result<SolveResult, Error> {
    let h = inst.h();
    let pivot_limit = opts.pivot_limit.unwrap_or_else(|| default_pivot_limit(h));
    let budget = opts.interval_budget.unwrap_or(64 * h as u64);
    let memo = MemoTable::new();
    let state = Mutex::new(SharedState {
        queue: vec![inst.theta().clone()],
        active: 0,
        pieces: Vec::new(),
        processed: 0,
        singletons: 0,
        pivots: 0,
        error: None,
    });
    let cv = Condvar::new();
    let workers = opts.workers.max(1);
    if workers == 1 {
        worker_loop(inst, &memo, &state, &cv, budget, pivot_limit);
    } else {
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| worker_loop(inst, &memo, &state, &cv, budget, pivot_limit));
            }
        });
    }
    let state = state.into_inner().unwrap();
    if let Some(e) = state.error {
        return Err(e);
    }
    let partition = normalize_partition(state.pieces, inst.theta())?;
    for warning in observation_bound_warnings(&partition) {
        log::warn!("{warning}");
    }
    let stats = SolveStats {
        intervals_processed: state.processed,
        singleton_discards: state.singletons,
        criss_cross_pivots: state.pivots,
        basis_computations: memo.counts_sorted(),
    };
    Ok(SolveResult { partition, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parmat::AffineScalar;
    use crate::poly::{rat, rat_int};

    fn aff(s: (i64, i64), m: (i64, i64)) -> AffineScalar {
        AffineScalar::new(rat(s.0, s.1), rat(m.0, m.1))
    }

    pub(crate) fn demo_instance() -> UpLcpInstance {
        let mut m = ParamMatrix::zero(2, 2);
        m.set(0, 0, aff((2, 1), (0, 1)));
        m.set(0, 1, aff((-1, 1), (1, 2)));
        m.set(1, 0, aff((1, 1), (-1, 1)));
        m.set(1, 1, aff((3, 1), (0, 1)));
        let mut q = ParamMatrix::zero(2, 1);
        q.set(0, 0, aff((1, 1), (-1, 1)));
        q.set(1, 0, aff((-2, 1), (3, 2)));
        UpLcpInstance::new(m, q, rat_int(-2), rat_int(2)).unwrap()
    }

    fn approx_f64(e: &Endpoint) -> f64 {
        let r = e.approx(&rat(1, 1_000_000_000));
        let n: f64 = r.numer().to_string().parse().unwrap();
        let d: f64 = r.denom().to_string().parse().unwrap();
        n / d
    }

    #[test]
    fn demo_partition_has_four_pieces() {
        let inst = demo_instance();
        let result = solve_uplcp(&inst, &SolverOptions::default()).unwrap();
        let pieces = result.partition.pieces();
        assert_eq!(pieces.len(), 4);

        let wz = |sel: &[Selector]| ComplementaryBasis::from_selectors(sel.to_vec());
        assert_eq!(pieces[0].basis, wz(&[Selector::Z, Selector::Z]));
        assert_eq!(pieces[1].basis, wz(&[Selector::W, Selector::Z]));
        assert_eq!(pieces[2].basis, wz(&[Selector::Z, Selector::Z]));
        assert_eq!(pieces[3].basis, wz(&[Selector::Z, Selector::W]));

        let breaks = [
            approx_f64(pieces[0].interval.hi()),
            approx_f64(pieces[1].interval.hi()),
            approx_f64(pieces[2].interval.hi()),
        ];
        assert!((breaks[0] - (-1.535_183_7)).abs() < 1e-5);
        assert!((breaks[1] - 0.868_517).abs() < 1e-5);
        assert!((breaks[2] - 1.381_966).abs() < 1e-5);

        // the reused basis is computed exactly once
        assert_eq!(
            result
                .stats
                .computations_for(&wz(&[Selector::Z, Selector::Z])),
            1
        );
    }

    #[test]
    fn trivial_instance_single_piece() {
        let mut m = ParamMatrix::zero(1, 1);
        m.set(0, 0, aff((1, 1), (0, 1)));
        let mut q = ParamMatrix::zero(1, 1);
        q.set(0, 0, aff((1, 1), (0, 1)));
        let inst = UpLcpInstance::new(m, q, rat_int(0), rat_int(1)).unwrap();
        let result = solve_uplcp(&inst, &SolverOptions::default()).unwrap();
        let pieces = result.partition.pieces();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].basis, ComplementaryBasis::all_w(1));
        assert_eq!(pieces[0].interval.lo().as_exact(), Some(&rat_int(0)));
        assert_eq!(pieces[0].interval.hi().as_exact(), Some(&rat_int(1)));
    }

    #[test]
    fn sign_split_instance() {
        // h = 1, M = (1), q = θ on [−1, 1]: z basic left of 0, w basic right
        let mut m = ParamMatrix::zero(1, 1);
        m.set(0, 0, aff((1, 1), (0, 1)));
        let mut q = ParamMatrix::zero(1, 1);
        q.set(0, 0, aff((0, 1), (1, 1)));
        let inst = UpLcpInstance::new(m, q, rat_int(-1), rat_int(1)).unwrap();
        let result = solve_uplcp(&inst, &SolverOptions::default()).unwrap();
        let pieces = result.partition.pieces();
        assert_eq!(pieces.len(), 2);
        assert_eq!(
            pieces[0].basis,
            ComplementaryBasis::from_selectors(vec![Selector::Z])
        );
        assert_eq!(pieces[0].interval.hi().as_exact(), Some(&rat_int(0)));
        assert_eq!(pieces[1].basis, ComplementaryBasis::all_w(1));
        // solution on the left piece: z1 = −θ
        let (w, z) = pieces[0].solution_at(&rat(-1, 2));
        assert!(w[0].is_zero());
        assert_eq!(z[0], rat(1, 2));
    }

    fn basis_data_from(numerators: Vec<Poly>, det: Poly, sign: i8) -> BasisData {
        let roots = numerators
            .iter()
            .map(|v| {
                if v.degree().map_or(true, |d| d == 0) {
                    ConstraintRoots::default()
                } else {
                    ConstraintRoots {
                        roots: isolate_real_roots_factored(v),
                    }
                }
            })
            .collect();
        BasisData {
            basis: ComplementaryBasis::all_w(numerators.len()),
            polys: BasisPolynomials {
                det,
                numerators,
                sign,
            },
            roots,
        }
    }

    #[test]
    fn get_extremes_demo_iteration_one() {
        // basis {w1, z2}: v1 = (3/4)θ² + (1/2)θ − 1, v2 = (3/2)θ − 2, d = −3
        let v1 = Poly::new(vec![rat(-1, 1), rat(1, 2), rat(3, 4)]);
        let v2 = Poly::new(vec![rat(-2, 1), rat(3, 2)]);
        let data = basis_data_from(vec![v1, v2], Poly::constant(rat_int(-3)), -1);
        let (lo, hi) = get_extremes(
            &data,
            &rat_int(0),
            &Endpoint::exact(rat_int(-2)),
            &Endpoint::exact(rat_int(2)),
        )
        .unwrap();
        // (−1−√13)/3 ≈ −1.535 and (−1+√13)/3 ≈ 0.869
        assert!(lo.compare_rational(&rat(-154, 100)) == Ordering::Greater);
        assert!(lo.compare_rational(&rat(-153, 100)) == Ordering::Less);
        assert!(hi.compare_rational(&rat(86, 100)) == Ordering::Greater);
        assert!(hi.compare_rational(&rat(87, 100)) == Ordering::Less);
    }

    #[test]
    fn basis_polynomials_examples() {
        let inst = demo_instance();
        // all-w basis: det = 1 and the numerators are the q entries
        let bp = basis_polynomials(&inst, &ComplementaryBasis::all_w(2), &rat_int(0)).unwrap();
        assert_eq!(bp.det, Poly::one());
        assert_eq!(bp.numerators[0], Poly::new(vec![rat_int(1), rat_int(-1)]));
        assert_eq!(bp.numerators[1], Poly::new(vec![rat_int(-2), rat(3, 2)]));

        // {z1, w2}: z1 = ½θ − ½ and w2 = −½θ² + (5/2)θ − 5/2
        let b = ComplementaryBasis::from_selectors(vec![Selector::Z, Selector::W]);
        let bp = basis_polynomials(&inst, &b, &rat(3, 2)).unwrap();
        let z1 = Poly::new(vec![rat(-1, 2), rat(1, 2)]);
        let w2 = Poly::new(vec![rat(-5, 2), rat(5, 2), rat(-1, 2)]);
        assert_eq!(bp.numerators[0], &z1 * &bp.det);
        assert_eq!(bp.numerators[1], &w2 * &bp.det);

        // {z1, z2}: numerators proportional to −3θ²−2θ+4 and −2θ²+10θ−10
        // over a denominator proportional to −2θ²+6θ−28
        let b = ComplementaryBasis::from_selectors(vec![Selector::Z, Selector::Z]);
        let bp = basis_polynomials(&inst, &b, &rat(9, 8)).unwrap();
        let z1_num = Poly::new(vec![rat_int(4), rat_int(-2), rat_int(-3)]);
        let z1_den = Poly::new(vec![rat_int(-28), rat_int(6), rat_int(-2)]);
        let z2_num = Poly::new(vec![rat_int(-10), rat_int(10), rat_int(-2)]);
        let z2_den = Poly::new(vec![rat_int(-14), rat_int(3), rat_int(-1)]);
        assert_eq!(&bp.numerators[0] * &z1_den, &z1_num * &bp.det);
        assert_eq!(&bp.numerators[1] * &z2_den, &z2_num * &bp.det);
        assert_eq!(bp.sign, 1);
    }

    #[test]
    fn get_extremes_second_iteration_case() {
        // basis {z1, w2} probed right of the 1.382 breakpoint on
        // [0.869…, 2]: the lower extreme moves to the smaller root of
        // θ² − 5θ + 5 and the upper extreme stays at 2.
        let v1 = Poly::new(vec![rat_int(1), rat_int(-1)]); // 1 − θ
        let v2 = Poly::new(vec![rat_int(5), rat_int(-5), rat_int(1)]);
        let data = basis_data_from(vec![v1, v2], Poly::constant(rat_int(-2)), -1);
        let lo_poly = Poly::new(vec![rat_int(-4), rat_int(2), rat_int(3)]);
        let (lf, lr) = isolate_real_roots_factored(&lo_poly)
            .into_iter()
            .find(|(_, r)| r.hi > rat_int(0))
            .unwrap();
        let (lo, hi) = get_extremes(
            &data,
            &rat(14345, 10000),
            &Endpoint::algebraic(lf, lr),
            &Endpoint::exact(rat_int(2)),
        )
        .unwrap();
        let expected = isolate_real_roots_factored(&Poly::new(vec![
            rat_int(5),
            rat_int(-5),
            rat_int(1),
        ]))
        .remove(0);
        assert_eq!(
            lo.compare(&Endpoint::algebraic(expected.0, expected.1)),
            Ordering::Equal
        );
        assert_eq!(hi.as_exact(), Some(&rat_int(2)));
    }

    #[test]
    fn get_extremes_skips_even_multiplicity() {
        // v1 = θ² has a double root at the probe: not restrictive
        let v1 = Poly::new(vec![rat_int(0), rat_int(0), rat_int(1)]);
        let v2 = Poly::constant(rat_int(1));
        let data = basis_data_from(vec![v1, v2], Poly::one(), 1);
        let (lo, hi) = get_extremes(
            &data,
            &rat_int(0),
            &Endpoint::exact(rat_int(-2)),
            &Endpoint::exact(rat_int(2)),
        )
        .unwrap();
        assert_eq!(lo.as_exact(), Some(&rat_int(-2)));
        assert_eq!(hi.as_exact(), Some(&rat_int(2)));
    }

    #[test]
    fn get_extremes_opposite_derivatives_collapse() {
        // v1 = θ grows through 0, v2 = −θ falls through 0: singleton at 0
        let v1 = Poly::linear(rat_int(0), rat_int(1));
        let v2 = Poly::linear(rat_int(0), rat_int(-1));
        let data = basis_data_from(vec![v1, v2], Poly::one(), 1);
        let (lo, hi) = get_extremes(
            &data,
            &rat_int(0),
            &Endpoint::exact(rat_int(-2)),
            &Endpoint::exact(rat_int(2)),
        )
        .unwrap();
        assert_eq!(lo.compare(&hi), Ordering::Equal);
        assert_eq!(lo.as_exact(), Some(&rat_int(0)));
    }

    #[test]
    fn select_probe_examples() {
        let iv = ParamInterval::rational(rat_int(-2), rat_int(2)).unwrap();
        assert_eq!(select_probe(&iv).unwrap(), rat_int(0));

        let singleton =
            ParamInterval::new(Endpoint::exact(rat_int(1)), Endpoint::exact(rat_int(1))).unwrap();
        assert!(select_probe(&singleton).is_err());

        // algebraic endpoints: (−1+√13)/3 and (5−√5)/2
        let p1 = Poly::new(vec![rat_int(-4), rat_int(2), rat_int(3)]);
        let p2 = Poly::new(vec![rat_int(5), rat_int(-5), rat_int(1)]);
        let lo = isolate_real_roots_factored(&p1)
            .into_iter()
            .find(|(_, r)| r.hi > rat_int(0))
            .unwrap();
        let hi = isolate_real_roots_factored(&p2).remove(0);
        let iv = ParamInterval::new(
            Endpoint::algebraic(lo.0, lo.1),
            Endpoint::algebraic(hi.0, hi.1),
        )
        .unwrap();
        let probe = select_probe(&iv).unwrap();
        assert_eq!(iv.lo().compare_rational(&probe), Ordering::Less);
        assert_eq!(iv.hi().compare_rational(&probe), Ordering::Greater);
    }

    #[test]
    fn merge_adjacent_same_basis_pieces() {
        let inst = demo_instance();
        let result = solve_uplcp(&inst, &SolverOptions::default()).unwrap();
        // hand-split one piece in two and check normalization merges it back
        let pieces = result.partition.pieces();
        let mut split = Vec::new();
        for (i, p) in pieces.iter().enumerate() {
            if i == 1 {
                let mid = Endpoint::exact(select_probe(&p.interval).unwrap());
                split.push(IntervalPiece {
                    basis: p.basis.clone(),
                    interval: ParamInterval::new(p.interval.lo().clone(), mid.clone()).unwrap(),
                    funcs: p.funcs.clone(),
                });
                split.push(IntervalPiece {
                    basis: p.basis.clone(),
                    interval: ParamInterval::new(mid, p.interval.hi().clone()).unwrap(),
                    funcs: p.funcs.clone(),
                });
            } else {
                split.push(p.clone());
            }
        }
        let renorm = normalize_partition(split, inst.theta()).unwrap();
        assert_eq!(renorm.len(), pieces.len());
    }

    #[test]
    fn coverage_gap_is_detected() {
        let inst = demo_instance();
        let result = solve_uplcp(&inst, &SolverOptions::default()).unwrap();
        let mut pieces: Vec<_> = result.partition.pieces().to_vec();
        pieces.remove(1);
        assert!(normalize_partition(pieces, inst.theta()).is_err());
    }

    #[test]
    fn worker_counts_agree() {
        let inst = demo_instance();
        let one = solve_uplcp(&inst, &SolverOptions::default()).unwrap();
        let four = solve_uplcp(
            &inst,
            &SolverOptions {
                workers: 4,
                ..SolverOptions::default()
            },
        )
        .unwrap();
        assert_eq!(one.partition.len(), four.partition.len());
        for (a, b) in one.partition.pieces().iter().zip(four.partition.pieces()) {
            assert_eq!(a.basis, b.basis);
            assert_eq!(
                a.interval.lo().compare(b.interval.lo()),
                Ordering::Equal
            );
            assert_eq!(
                a.interval.hi().compare(b.interval.hi()),
                Ordering::Equal
            );
        }
    }

    #[test]
    fn membership_and_solution_invariants() {
        let inst = demo_instance();
        let result = solve_uplcp(&inst, &SolverOptions::default()).unwrap();
        for piece in result.partition.pieces() {
            // ten interior rational samples
            let lo = piece.interval.lo().refined(&rat(1, 1 << 20)).upper();
            let hi = piece.interval.hi().refined(&rat(1, 1 << 20)).lower();
            let span = &hi - &lo;
            for k in 1..=10 {
                let theta = &lo + &span * rat(k, 11);
                if !piece.interval.contains_rational(&theta) {
                    continue;
                }
                // membership: sign·v_i ≥ 0
                for v in &piece.funcs.polys.numerators {
                    let mut val = v.eval(&theta);
                    if piece.funcs.polys.sign < 0 {
                        val = -val;
                    }
                    assert!(!val.is_negative());
                }
                // full system check
                let (w, z) = piece.solution_at(&theta);
                let m = inst.m().eval(&theta);
                let q = inst.q().eval_vector(&theta);
                for i in 0..inst.h() {
                    let mut lhs = w[i].clone();
                    for j in 0..inst.h() {
                        lhs = lhs - &m[i][j] * &z[j];
                    }
                    assert_eq!(lhs, q[i]);
                }
                assert!(w.iter().chain(z.iter()).all(|v| !v.is_negative()));
                let ortho: Rational = w
                    .iter()
                    .zip(&z)
                    .map(|(a, b)| a * b)
                    .fold(rat_int(0), |s, t| s + t);
                assert!(ortho.is_zero());
            }
        }
    }
}
