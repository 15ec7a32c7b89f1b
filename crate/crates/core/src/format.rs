//! Line-oriented instance file format.
//!
//! ```text
//! # comments start with '#'
//! problem lcp              # or qp, lp
//! h 2                      # lcp dimension (qp/lp use: n N / m N)
//! theta -2 2               # parameter bounds, alpha < beta
//! M 1 2 : -1 1/2           # section row [col] : sigma mu  (entry = sigma + mu·θ)
//! q 2 : -2 3/2
//! ```
//!
//! Sections are `M`/`q` for LCP and `Q`/`c`/`A`/`b` for QP/LP. Indices are
//! 1-based; absent cells default to (0, 0). Numeric literals may be integers,
//! fractions `p/q`, or decimals with an optional exponent — all parsed
//! exactly (`0.5` becomes 1/2).

use crate::error::Error;
use crate::parmat::{AffineScalar, ParamMatrix};
use crate::poly::{format_rational, Rational};
use crate::qp::UpQpInstance;
use crate::solver::UpLcpInstance;
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::HashSet;
use std::str::FromStr;

#[derive(Clone, Debug)]
pub enum ParsedInstance {
    Lcp(UpLcpInstance),
    Qp(UpQpInstance),
    Lp(UpQpInstance),
}

impl ParsedInstance {
    pub fn kind(&self) -> &'static str {
        match self {
            ParsedInstance::Lcp(_) => "lcp",
            ParsedInstance::Qp(_) => "qp",
            ParsedInstance::Lp(_) => "lp",
        }
    }
}

/// Exact rational from an integer, `p/q`, or decimal/exponent literal.
pub fn parse_rational(token: &str) -> Option<Rational> {
    let token = token.trim();
    if token.is_empty() {
        return None;
    }
    if let Some((num, den)) = token.split_once('/') {
        let n = BigInt::from_str(num.trim()).ok()?;
        let d = BigInt::from_str(den.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    // decimal with optional exponent
    let (mantissa, exp) = match token.split_once(['e', 'E']) {
        Some((m, e)) => (m, i64::from_str(e).ok()?),
        None => (token, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let (negative, int_digits) = match int_part.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, int_part.strip_prefix('+').unwrap_or(int_part)),
    };
    if !int_digits.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{}{}", int_digits, frac_part);
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let mut value = Rational::from_integer(BigInt::from_str(&digits).ok()?);
    if negative {
        value = -value;
    }
    let shift = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    if shift >= 0 {
        value = value * Rational::from_integer(ten.pow(shift as u32));
    } else {
        value = value / Rational::from_integer(ten.pow((-shift) as u32));
    }
    Some(value)
}

struct EntryRecord {
    line: usize,
    section: String,
    row: usize,
    col: Option<usize>,
    sigma: Rational,
    mu: Rational,
}

struct RawFile {
    kind: String,
    dims: Vec<(usize, String, usize)>,
    theta: Option<(usize, Rational, Rational)>,
    entries: Vec<EntryRecord>,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn scan(text: &str) -> Result<RawFile, Error> {
    let mut kind = None;
    let mut dims = Vec::new();
    let mut theta = None;
    let mut entries = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        match tokens[0] {
            "problem" => {
                if tokens.len() != 2 {
                    return Err(err(line_no, "expected: problem {lcp|qp|lp}"));
                }
                if kind.is_some() {
                    return Err(err(line_no, "duplicate problem line"));
                }
                let k = tokens[1].to_ascii_lowercase();
                if !matches!(k.as_str(), "lcp" | "qp" | "lp") {
                    return Err(err(line_no, format!("unknown problem kind '{}'", tokens[1])));
                }
                kind = Some(k);
            }
            "h" | "n" | "m" => {
                if tokens.len() != 2 {
                    return Err(err(line_no, format!("expected: {} <count>", tokens[0])));
                }
                if dims.iter().any(|(_, name, _)| name == tokens[0]) {
                    return Err(err(line_no, format!("duplicate '{}' line", tokens[0])));
                }
                let value = usize::from_str(tokens[1])
                    .map_err(|_| err(line_no, format!("bad dimension '{}'", tokens[1])))?;
                dims.push((line_no, tokens[0].to_string(), value));
            }
            "theta" => {
                if tokens.len() != 3 {
                    return Err(err(line_no, "expected: theta <alpha> <beta>"));
                }
                if theta.is_some() {
                    return Err(err(line_no, "duplicate theta line"));
                }
                let a = parse_rational(tokens[1])
                    .ok_or_else(|| err(line_no, format!("bad rational '{}'", tokens[1])))?;
                let b = parse_rational(tokens[2])
                    .ok_or_else(|| err(line_no, format!("bad rational '{}'", tokens[2])))?;
                if a >= b {
                    return Err(err(line_no, "theta bounds require alpha < beta"));
                }
                theta = Some((line_no, a, b));
            }
            section @ ("M" | "q" | "Q" | "c" | "A" | "b") => {
                let colon = tokens.iter().position(|&t| t == ":").ok_or_else(|| {
                    err(line_no, "expected: section row [col] : sigma mu")
                })?;
                let idx_tokens = &tokens[1..colon];
                let val_tokens = &tokens[colon + 1..];
                if idx_tokens.is_empty() || idx_tokens.len() > 2 || val_tokens.len() != 2 {
                    return Err(err(line_no, "expected: section row [col] : sigma mu"));
                }
                let row = usize::from_str(idx_tokens[0])
                    .map_err(|_| err(line_no, format!("bad row index '{}'", idx_tokens[0])))?;
                let col = if idx_tokens.len() == 2 {
                    Some(usize::from_str(idx_tokens[1]).map_err(|_| {
                        err(line_no, format!("bad column index '{}'", idx_tokens[1]))
                    })?)
                } else {
                    None
                };
                let sigma = parse_rational(val_tokens[0])
                    .ok_or_else(|| err(line_no, format!("bad rational '{}'", val_tokens[0])))?;
                let mu = parse_rational(val_tokens[1])
                    .ok_or_else(|| err(line_no, format!("bad rational '{}'", val_tokens[1])))?;
                entries.push(EntryRecord {
                    line: line_no,
                    section: section.to_string(),
                    row,
                    col,
                    sigma,
                    mu,
                });
            }
            other => {
                return Err(err(line_no, format!("unrecognized directive '{}'", other)));
            }
        }
    }
    let kind = kind.ok_or_else(|| err(0, "missing 'problem' line"))?;
    Ok(RawFile {
        kind,
        dims,
        theta,
        entries,
    })
}

fn find_dim(raw: &RawFile, name: &str) -> Option<usize> {
    raw.dims
        .iter()
        .find(|(_, n, _)| n == name)
        .map(|(_, _, v)| *v)
}

fn fill_matrix(
    raw: &RawFile,
    section: &str,
    rows: usize,
    cols: usize,
    vector: bool,
) -> Result<ParamMatrix, Error> {
    let mut matrix = ParamMatrix::zero(rows, cols);
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    for e in raw.entries.iter().filter(|e| e.section == section) {
        let (r, c) = if vector {
            if e.col.is_some() {
                return Err(err(e.line, format!("section {} takes a single index", section)));
            }
            (e.row, 1)
        } else {
            match e.col {
                Some(c) => (e.row, c),
                None => {
                    return Err(err(
                        e.line,
                        format!("section {} needs row and column indices", section),
                    ))
                }
            }
        };
        if r == 0 || r > rows || c == 0 || c > cols {
            return Err(err(
                e.line,
                format!(
                    "index ({}{}) out of range for {} ({}x{})",
                    r,
                    if vector { String::new() } else { format!(", {c}") },
                    section,
                    rows,
                    cols
                ),
            ));
        }
        if !seen.insert((r, c)) {
            return Err(err(e.line, format!("duplicate entry in section {}", section)));
        }
        matrix.set(r - 1, c - 1, AffineScalar::new(e.sigma.clone(), e.mu.clone()));
    }
    Ok(matrix)
}

fn check_sections(raw: &RawFile, allowed: &[&str]) -> Result<(), Error> {
    for e in &raw.entries {
        if !allowed.contains(&e.section.as_str()) {
            return Err(err(
                e.line,
                format!(
                    "section {} does not belong to a {} instance",
                    e.section, raw.kind
                ),
            ));
        }
    }
    Ok(())
}

/// Parse an instance file into an LCP or QP/LP instance with exact data.
pub fn parse_instance(text: &str) -> Result<ParsedInstance, Error> {
    let raw = scan(text)?;
    let (_, alpha, beta) = raw
        .theta
        .clone()
        .ok_or_else(|| err(0, "missing 'theta' line"))?;
    match raw.kind.as_str() {
        "lcp" => {
            check_sections(&raw, &["M", "q"])?;
            let h = find_dim(&raw, "h").ok_or_else(|| err(0, "missing 'h' line"))?;
            if h == 0 {
                return Err(err(0, "h must be at least 1"));
            }
            let m = fill_matrix(&raw, "M", h, h, false)?;
            let q = fill_matrix(&raw, "q", h, 1, true)?;
            let inst = UpLcpInstance::new(m, q, alpha, beta)?;
            Ok(ParsedInstance::Lcp(inst))
        }
        "qp" | "lp" => {
            check_sections(&raw, &["Q", "c", "A", "b"])?;
            let n = find_dim(&raw, "n").ok_or_else(|| err(0, "missing 'n' line"))?;
            let m = find_dim(&raw, "m").ok_or_else(|| err(0, "missing 'm' line"))?;
            if n == 0 {
                return Err(err(0, "n must be at least 1"));
            }
            let q = fill_matrix(&raw, "Q", n, n, false)?;
            let c = fill_matrix(&raw, "c", n, 1, true)?;
            let a = if m == 0 {
                ParamMatrix::zero(0, 0)
            } else {
                fill_matrix(&raw, "A", m, n, false)?
            };
            let b = if m == 0 {
                ParamMatrix::zero(0, 0)
            } else {
                fill_matrix(&raw, "b", m, 1, true)?
            };
            let inst = UpQpInstance::new(q, c, a, b, alpha, beta)?;
            if raw.kind == "lp" {
                if !inst.is_lp() {
                    return Err(err(0, "an lp instance must have an all-zero Q section"));
                }
                Ok(ParsedInstance::Lp(inst))
            } else {
                Ok(ParsedInstance::Qp(inst))
            }
        }
        _ => unreachable!("kind validated in scan"),
    }
}

fn push_affine_line(out: &mut String, section: &str, r: usize, c: Option<usize>, e: &AffineScalar) {
    if e.is_zero() {
        return;
    }
    match c {
        Some(c) => out.push_str(&format!(
            "{} {} {} : {} {}\n",
            section,
            r + 1,
            c + 1,
            format_rational(&e.sigma),
            format_rational(&e.mu)
        )),
        None => out.push_str(&format!(
            "{} {} : {} {}\n",
            section,
            r + 1,
            format_rational(&e.sigma),
            format_rational(&e.mu)
        )),
    }
}

fn write_matrix(out: &mut String, section: &str, m: &ParamMatrix, vector: bool) {
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            push_affine_line(out, section, r, if vector { None } else { Some(c) }, m.get(r, c));
        }
    }
}

pub fn write_lcp_instance(inst: &UpLcpInstance) -> String {
    let (alpha, beta) = inst.theta_bounds();
    let mut out = String::new();
    out.push_str("problem lcp\n");
    out.push_str(&format!("h {}\n", inst.h()));
    out.push_str(&format!(
        "theta {} {}\n",
        format_rational(alpha),
        format_rational(beta)
    ));
    write_matrix(&mut out, "M", inst.m(), false);
    write_matrix(&mut out, "q", inst.q(), true);
    out
}

pub fn write_qp_instance(inst: &UpQpInstance, as_lp: bool) -> String {
    let (alpha, beta) = inst.theta_bounds();
    let mut out = String::new();
    out.push_str(if as_lp { "problem lp\n" } else { "problem qp\n" });
    out.push_str(&format!("n {}\n", inst.n()));
    out.push_str(&format!("m {}\n", inst.m()));
    out.push_str(&format!(
        "theta {} {}\n",
        format_rational(alpha),
        format_rational(beta)
    ));
    write_matrix(&mut out, "Q", inst.q_matrix(), false);
    write_matrix(&mut out, "c", inst.c(), true);
    write_matrix(&mut out, "A", inst.a(), false);
    write_matrix(&mut out, "b", inst.b(), true);
    out
}

pub fn write_instance(inst: &ParsedInstance) -> String {
    match inst {
        ParsedInstance::Lcp(i) => write_lcp_instance(i),
        ParsedInstance::Qp(i) => write_qp_instance(i, false),
        ParsedInstance::Lp(i) => write_qp_instance(i, true),
    }
}
