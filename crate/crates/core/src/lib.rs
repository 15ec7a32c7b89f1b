//! Exact solver for uni-parametric linear complementarity problems, convex
//! quadratic programs, and linear programs with a single scalar parameter θ
//! appearing affinely in any of the input data.
//!
//! The solver partitions the parameter interval Θ = [α, β] into invariancy
//! intervals. On each interval one complementary basis stays optimal and the
//! solution is an explicit rational function of θ: basic variable i equals
//! v_i(θ)/d(θ) where d is the basis determinant and v_i the matching Cramer
//! numerator. All arithmetic is exact — arbitrary-precision rationals,
//! fraction-free determinants, Sturm-sequence root isolation — so interval
//! endpoints are exact algebraic numbers and decimals appear only in output.
//!
//! Module map:
//! - [`poly`]: rational-coefficient polynomials (gcd, square-free
//!   decomposition, derivatives).
//! - [`roots`]: real root isolation with multiplicities and exact
//!   algebraic-number comparison.
//! - [`parmat`]: matrices with affine entries, Bareiss determinants, Cramer
//!   numerators, determinant-sign validation.
//! - [`lcp`]: fixed-θ LCP via the least-index criss-cross method.
//! - [`interval`], [`solver`]: invariancy-interval subdivision with a
//!   work-queue that can run on several threads.
//! - [`qp`]: QP/LP-to-LCP reformulation and solution mapping.
//! - [`format`], [`report`], [`generate`]: instance files, reports, plot
//!   data, and the random instance generator.

pub mod error;
pub mod format;
pub mod generate;
pub mod interval;
pub mod lcp;
pub mod parmat;
pub mod poly;
pub mod qp;
pub mod report;
pub mod roots;
pub mod solver;

pub use error::Error;
pub use format::{parse_instance, write_instance, ParsedInstance};
pub use generate::generate_sufficient_instance;
pub use interval::{Endpoint, ParamInterval};
pub use lcp::{
    basic_solution, criss_cross, fix_theta, ComplementaryBasis, FixedLcp, LcpOutcome, Selector,
};
pub use parmat::{
    basis_columns, cramer_numerators, det_sign, param_determinant, validate_det_nonvanishing,
    AffineScalar, BasisPolynomials, ParamMatrix,
};
pub use poly::{poly_gcd, square_free_decomposition, Poly, Rational};
pub use qp::{lp_to_lcp, map_solution_back, qp_to_lcp, QpSolutionPiece, UpQpInstance};
pub use report::{emit_plot_data, write_partition, write_qp_solution};
pub use roots::{compare_algebraic, isolate_real_roots, refine_root, IsolatedRoot};
pub use solver::{
    basis_polynomials, get_extremes, normalize_partition, select_probe, solve_uplcp,
    IntervalPiece, Partition, SolveResult, SolveStats, SolverOptions, UpLcpInstance,
};
