//! Deterministic serialization of partitions and QP solutions, plus plot-data
//! emission. Every decimal printed here is within `eps` of the exact value it
//! stands for; the exact data (rational coefficients, isolating brackets) is
//! always printed alongside.

use crate::interval::Endpoint;
use crate::poly::{format_rational, Poly, Rational};
use crate::qp::QpSolutionPiece;
use crate::solver::Partition;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Smallest number of decimal digits d with 10^-d ≤ eps/2.
fn digits_for(eps: &Rational) -> usize {
    let half = eps / Rational::from_integer(2.into());
    let mut d = 1usize;
    let mut step = Rational::new(BigInt::one(), BigInt::from(10));
    while step > half && d < 64 {
        d += 1;
        step = step / Rational::from_integer(10.into());
    }
    d
}

/// Fixed-point decimal rendering of an exact rational, rounded to `digits`
/// places (half away from zero).
pub fn decimal_string(x: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10).pow(digits as u32);
    let scaled = x * Rational::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let negative = rounded.is_negative();
    let abs = if negative { -rounded } else { rounded };
    let int_part = &abs / &scale;
    let frac_part = &abs % &scale;
    let mut frac = frac_part.to_string();
    while frac.len() < digits {
        frac.insert(0, '0');
    }
    format!("{}{}.{}", if negative { "-" } else { "" }, int_part, frac)
}

fn poly_coeffs(p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    p.coeffs()
        .iter()
        .map(format_rational)
        .collect::<Vec<_>>()
        .join(" ")
}

/// `<label> exact <value> approx <decimal>` for rational endpoints, or
/// `<label> root approx <decimal> poly <coeffs> bracket <lo> <hi>` with the
/// bracket refined to width ≤ eps/2.
fn endpoint_line(label: &str, e: &Endpoint, eps: &Rational) -> String {
    let digits = digits_for(eps);
    let half = eps / Rational::from_integer(2.into());
    match e.refined(&half) {
        Endpoint::Exact(v) => format!(
            "{} exact {} approx {}",
            label,
            format_rational(&v),
            decimal_string(&v, digits)
        ),
        Endpoint::Algebraic(a) => format!(
            "{} root approx {} poly {} bracket {} {}",
            label,
            decimal_string(&a.root.midpoint(), digits),
            poly_coeffs(&a.poly),
            format_rational(&a.root.lo),
            format_rational(&a.root.hi)
        ),
    }
}

/// Serialize a partition: one block per piece with the interval (exact and
/// decimal forms), the basis, the shared denominator coefficients, and the
/// numerator coefficients of each basic variable. Nonbasic variables are
/// identically zero and omitted. Output is byte-identical across runs and
/// worker counts.
pub fn write_partition(partition: &Partition, eps: &Rational) -> String {
    let mut out = String::new();
    out.push_str("upsolve partition\n");
    out.push_str(&format!("pieces {}\n", partition.len()));
    for (idx, piece) in partition.pieces().iter().enumerate() {
        out.push('\n');
        out.push_str(&format!("piece {}\n", idx + 1));
        out.push_str(&format!("basis {}\n", piece.basis.names().join(" ")));
        out.push_str(&endpoint_line("lo", piece.interval.lo(), eps));
        out.push('\n');
        out.push_str(&endpoint_line("hi", piece.interval.hi(), eps));
        out.push('\n');
        out.push_str(&format!("den {}\n", poly_coeffs(&piece.funcs.polys.det)));
        for (pair, name) in piece.basis.names().iter().enumerate() {
            out.push_str(&format!(
                "{} num {}\n",
                name,
                poly_coeffs(&piece.funcs.polys.numerators[pair])
            ));
        }
    }
    out
}

/// Serialize QP/LP solution pieces: primal variables, primal slacks,
/// constraint duals, and bound duals, each as numerator coefficients over the
/// shared piece denominator.
pub fn write_qp_solution(pieces: &[QpSolutionPiece], eps: &Rational) -> String {
    let mut out = String::new();
    out.push_str("upsolve qp solution\n");
    out.push_str(&format!("pieces {}\n", pieces.len()));
    for (idx, piece) in pieces.iter().enumerate() {
        out.push('\n');
        out.push_str(&format!("piece {}\n", idx + 1));
        out.push_str(&endpoint_line("lo", piece.interval.lo(), eps));
        out.push('\n');
        out.push_str(&endpoint_line("hi", piece.interval.hi(), eps));
        out.push('\n');
        let den = piece
            .x
            .first()
            .map(|f| f.den.clone())
            .or_else(|| piece.dual_constraints.first().map(|f| f.den.clone()))
            .unwrap_or_else(Poly::one);
        out.push_str(&format!("den {}\n", poly_coeffs(&den)));
        for (i, f) in piece.x.iter().enumerate() {
            out.push_str(&format!("x{} num {}\n", i + 1, poly_coeffs(&f.num)));
        }
        for (j, f) in piece.primal_slack.iter().enumerate() {
            out.push_str(&format!("slack{} num {}\n", j + 1, poly_coeffs(&f.num)));
        }
        for (j, f) in piece.dual_constraints.iter().enumerate() {
            out.push_str(&format!("dual_c{} num {}\n", j + 1, poly_coeffs(&f.num)));
        }
        for (i, f) in piece.dual_nonneg.iter().enumerate() {
            out.push_str(&format!("dual_x{} num {}\n", i + 1, poly_coeffs(&f.num)));
        }
    }
    out
}

/// CSV rows `theta,variable,value` with `samples_per_piece` evenly spaced
/// rational sample points per piece, inset from the endpoints by eps so that
/// boundary zeros do not dominate the plot. Values are exact evaluations
/// rendered as decimals.
pub fn emit_plot_data(partition: &Partition, samples_per_piece: usize, eps: &Rational) -> String {
    assert!(samples_per_piece >= 2, "need at least two samples per piece");
    let digits = digits_for(eps);
    let mut out = String::new();
    out.push_str("theta,variable,value\n");
    for piece in partition.pieces() {
        let lo = piece.interval.lo().refined(eps).upper();
        let hi = piece.interval.hi().refined(eps).lower();
        let (mut a, mut b) = (&lo + eps, &hi - eps);
        if a > b {
            // piece narrower than the inset: sample the midpoint region
            let mid = (&lo + &hi) / Rational::from_integer(2.into());
            a = mid.clone();
            b = mid;
        }
        let span = &b - &a;
        let steps = samples_per_piece - 1;
        for k in 0..samples_per_piece {
            let theta = if span.is_zero() && k > 0 {
                break;
            } else {
                &a + &span * Rational::new(BigInt::from(k), BigInt::from(steps.max(1)))
            };
            let d = piece.funcs.polys.det.eval(&theta);
            for (pair, name) in piece.basis.names().iter().enumerate() {
                let value = piece.funcs.polys.numerators[pair].eval(&theta) / &d;
                out.push_str(&format!(
                    "{},{},{}\n",
                    decimal_string(&theta, digits),
                    name,
                    decimal_string(&value, digits)
                ));
            }
        }
    }
    out
}
