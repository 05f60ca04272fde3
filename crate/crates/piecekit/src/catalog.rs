//! The built-in formula catalog.
//!
//! Seven parametric elementary functions cover the usual taxonomy of
//! critical points: polynomials for smooth parts, logarithmic and
//! inverse-square-root singularities, square-root and power-law edges,
//! and rational tails. Each formula knows how to evaluate itself, which
//! parameter values are admissible on a given interval, how its
//! parameters transform under `x -> -x`, which parameters scale the
//! amplitude linearly, and a closed-form primitive for the moment
//! kernel `x^n`.

use std::fmt;

use thiserror::Error;

/// Identifier of a catalog formula.
///
/// The serialized names (`POLY`, `LOG`, ...) are frozen; parameter order
/// is documented per variant and frozen as well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `POLY(x; c0..ck) = sum c_i x^i`, variadic with at least one coefficient.
    Poly,
    /// `LOG(x; x0, A) = A ln|x - x0|`.
    Log,
    /// `XLOG(x; x0, A) = A (x - x0) ln|x - x0|`.
    XLog,
    /// `ISRS(x; x0, A) = A / sqrt|x - x0|`.
    Isrs,
    /// `SQRT(x; x0, A) = A sqrt|x - x0|`.
    Sqrt,
    /// `PLS(x; x0, b, A) = A |x - x0|^b` with `b > -1`, `b != 0`.
    Pls,
    /// `TAIL(x; p, q, a, b) = (a + b x) / (p + q x + x^2)`.
    Tail,
}

pub const ALL_FORMULAS: [Formula; 7] = [
    Formula::Poly,
    Formula::Log,
    Formula::XLog,
    Formula::Isrs,
    Formula::Sqrt,
    Formula::Pls,
    Formula::Tail,
];

/// Parameter-count requirement of a formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Exactly(usize),
    AtLeast(usize),
}

impl Arity {
    pub fn accepts(&self, n: usize) -> bool {
        match *self {
            Arity::Exactly(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Arity::Exactly(k) => write!(f, "{k}"),
            Arity::AtLeast(k) => write!(f, ">= {k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown formula name `{0}`")]
    UnknownFormula(String),
    #[error("{formula} expects {expected} parameters, got {got}")]
    ArityMismatch {
        formula: Formula,
        expected: Arity,
        got: usize,
    },
}

/// A constraint violation is a value describing why `(interval, params)`
/// is inadmissible, not a hard error.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintViolation {
    pub formula: Formula,
    pub reason: String,
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.formula, self.reason)
    }
}

impl std::error::Error for ConstraintViolation {}

impl Formula {
    pub fn name(&self) -> &'static str {
        match self {
            Formula::Poly => "POLY",
            Formula::Log => "LOG",
            Formula::XLog => "XLOG",
            Formula::Isrs => "ISRS",
            Formula::Sqrt => "SQRT",
            Formula::Pls => "PLS",
            Formula::Tail => "TAIL",
        }
    }

    pub fn from_name(name: &str) -> Result<Formula, CatalogError> {
        match name {
            "POLY" => Ok(Formula::Poly),
            "LOG" => Ok(Formula::Log),
            "XLOG" => Ok(Formula::XLog),
            "ISRS" => Ok(Formula::Isrs),
            "SQRT" => Ok(Formula::Sqrt),
            "PLS" => Ok(Formula::Pls),
            "TAIL" => Ok(Formula::Tail),
            other => Err(CatalogError::UnknownFormula(other.to_string())),
        }
    }

    pub fn arity(&self) -> Arity {
        match self {
            Formula::Poly => Arity::AtLeast(1),
            Formula::Log | Formula::XLog | Formula::Isrs | Formula::Sqrt => Arity::Exactly(2),
            Formula::Pls => Arity::Exactly(3),
            Formula::Tail => Arity::Exactly(4),
        }
    }

    pub fn check_arity(&self, params: &[f64]) -> Result<(), CatalogError> {
        let arity = self.arity();
        if arity.accepts(params.len()) {
            Ok(())
        } else {
            Err(CatalogError::ArityMismatch {
                formula: *self,
                expected: arity,
                got: params.len(),
            })
        }
    }

    /// Indices of the parameters that scale the formula value linearly.
    pub fn linear_params(&self, param_count: usize) -> Vec<usize> {
        match self {
            Formula::Poly => (0..param_count).collect(),
            Formula::Log | Formula::XLog | Formula::Isrs | Formula::Sqrt => vec![1],
            Formula::Pls => vec![2],
            Formula::Tail => vec![2, 3],
        }
    }

    /// True if the formula is unbounded at its anchor `x0`.
    pub fn singular_at_anchor(&self, params: &[f64]) -> bool {
        match self {
            Formula::Log | Formula::Isrs => true,
            Formula::Pls => params[1] < 0.0,
            _ => false,
        }
    }

    /// The anchor `x0` for anchored formulas, `None` for POLY and TAIL.
    pub fn anchor(&self, params: &[f64]) -> Option<f64> {
        match self {
            Formula::Log | Formula::XLog | Formula::Isrs | Formula::Sqrt | Formula::Pls => {
                Some(params[0])
            }
            Formula::Poly | Formula::Tail => None,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evaluate a formula at `x`. Singular formulas return the (possibly
/// non-finite) limit value at their anchor.
pub fn formula_eval(formula: Formula, params: &[f64], x: f64) -> f64 {
    match formula {
        Formula::Poly => horner(params, x),
        Formula::Log => {
            let (x0, a) = (params[0], params[1]);
            if a == 0.0 {
                return 0.0;
            }
            a * (x - x0).abs().ln()
        }
        Formula::XLog => {
            let (x0, a) = (params[0], params[1]);
            let u = x - x0;
            // u ln|u| -> 0 as u -> 0; the naive product would be 0 * -inf.
            if a == 0.0 || u == 0.0 {
                return 0.0;
            }
            a * u * u.abs().ln()
        }
        Formula::Isrs => {
            let (x0, a) = (params[0], params[1]);
            if a == 0.0 {
                return 0.0;
            }
            a / (x - x0).abs().sqrt()
        }
        Formula::Sqrt => {
            let (x0, a) = (params[0], params[1]);
            a * (x - x0).abs().sqrt()
        }
        Formula::Pls => {
            let (x0, b, a) = (params[0], params[1], params[2]);
            if a == 0.0 {
                return 0.0;
            }
            a * (x - x0).abs().powf(b)
        }
        Formula::Tail => {
            let (p, q, a, b) = (params[0], params[1], params[2], params[3]);
            (a + b * x) / (p + q * x + x * x)
        }
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Check that `params` is admissible on the open interval `(x1, x2)`.
///
/// Anchored formulas require the anchor on or outside the interval
/// boundary; TAIL requires a denominator without real roots in the
/// closed interval; PLS additionally requires an integrable, non-trivial
/// exponent.
pub fn check_constraint(
    formula: Formula,
    params: &[f64],
    interval: (f64, f64),
) -> Result<(), ConstraintViolation> {
    let (x1, x2) = interval;
    let violation = |reason: String| ConstraintViolation { formula, reason };
    match formula {
        Formula::Poly => Ok(()),
        Formula::Log | Formula::XLog | Formula::Isrs | Formula::Sqrt | Formula::Pls => {
            let x0 = params[0];
            if x1 < x0 && x0 < x2 {
                return Err(violation(format!(
                    "anchor x0 = {x0} lies strictly inside ({x1}, {x2})"
                )));
            }
            if formula == Formula::Pls {
                let b = params[1];
                if !(b > -1.0) {
                    return Err(violation(format!("exponent b = {b} must satisfy b > -1")));
                }
                if b == 0.0 {
                    return Err(violation("exponent b = 0 is reserved for POLY".to_string()));
                }
            }
            Ok(())
        }
        Formula::Tail => {
            let (p, q) = (params[0], params[1]);
            let disc = q * q - 4.0 * p;
            if disc >= 0.0 {
                let s = disc.sqrt();
                for root in [(-q - s) / 2.0, (-q + s) / 2.0] {
                    if (x1..=x2).contains(&root) {
                        return Err(violation(format!(
                            "denominator root {root} lies in [{x1}, {x2}]"
                        )));
                    }
                }
            }
            Ok(())
        }
    }
}

/// Reflect parameters for the mirror `x -> -x`: the returned parameter
/// vector satisfies `F(-x; reflect(p)) = F(x; p)` for all `x`.
pub fn reflect_params(formula: Formula, params: &[f64]) -> Vec<f64> {
    let mut out = params.to_vec();
    match formula {
        Formula::Poly => {
            for (k, c) in out.iter_mut().enumerate() {
                if k % 2 == 1 {
                    *c = -*c;
                }
            }
        }
        Formula::Log | Formula::Isrs | Formula::Sqrt => out[0] = -out[0],
        Formula::XLog => {
            out[0] = -out[0];
            out[1] = -out[1];
        }
        Formula::Pls => out[0] = -out[0],
        Formula::Tail => {
            out[1] = -out[1];
            out[3] = -out[3];
        }
    }
    out
}

/// Scale the linear parameters by `c`, so that the formula value scales
/// by `c` everywhere.
pub fn scale_params(formula: Formula, params: &[f64], c: f64) -> Vec<f64> {
    let mut out = params.to_vec();
    for idx in formula.linear_params(params.len()) {
        out[idx] *= c;
    }
    out
}

/// Closed-form primitive `M(x)` of `x^n F(x; params)`, continuous on any
/// closed admissible piece. The moment of a piece is `M(x2) - M(x1)`.
///
/// Anchored formulas use the binomial re-expansion of `x^n` about the
/// anchor `x0`; TAIL reduces by polynomial division and partial
/// fractions of the remainder.
pub fn moment_primitive(formula: Formula, params: &[f64], n: u32, x: f64) -> f64 {
    match formula {
        Formula::Poly => {
            let mut acc = 0.0;
            for (k, &c) in params.iter().enumerate() {
                let m = n as i32 + k as i32 + 1;
                acc += c * x.powi(m) / m as f64;
            }
            acc
        }
        Formula::Log => {
            let (x0, a) = (params[0], params[1]);
            a * anchored_sum(n, x0, x, |k, u| ilog(k, u))
        }
        Formula::XLog => {
            let (x0, a) = (params[0], params[1]);
            a * anchored_sum(n, x0, x, |k, u| ilog(k + 1, u))
        }
        Formula::Isrs => power_law_primitive(params[0], -0.5, params[1], n, x),
        Formula::Sqrt => power_law_primitive(params[0], 0.5, params[1], n, x),
        Formula::Pls => power_law_primitive(params[0], params[1], params[2], n, x),
        Formula::Tail => tail_moment_primitive(params, n, x),
    }
}

/// `sum_k C(n,k) x0^(n-k) inner(k, x - x0)`.
fn anchored_sum(n: u32, x0: f64, x: f64, inner: impl Fn(u32, f64) -> f64) -> f64 {
    let u = x - x0;
    let mut acc = 0.0;
    let mut binom = 1.0;
    for k in 0..=n {
        acc += binom * x0.powi((n - k) as i32) * inner(k, u);
        binom *= (n - k) as f64 / (k + 1) as f64;
    }
    acc
}

/// Antiderivative of `u^k ln|u|`, zero at `u = 0`.
fn ilog(k: u32, u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let kp1 = (k + 1) as f64;
    u.powi(k as i32 + 1) * (u.abs().ln() - 1.0 / kp1) / kp1
}

/// Primitive of `x^n A |x - x0|^b` for sign-constant `x - x0`.
fn power_law_primitive(x0: f64, b: f64, a: f64, n: u32, x: f64) -> f64 {
    a * anchored_sum(n, x0, x, |k, u| {
        // integral of u^k |u|^b with s = sign(u): s^(k+1) |u|^(k+b+1) / (k+b+1)
        let expo = k as f64 + b + 1.0;
        let s: f64 = if u < 0.0 { -1.0 } else { 1.0 };
        s.powi(k as i32 + 1) * u.abs().powf(expo) / expo
    })
}

fn tail_moment_primitive(params: &[f64], n: u32, x: f64) -> f64 {
    let (p, q, a, b) = (params[0], params[1], params[2], params[3]);
    // numerator x^n (a + b x) as coefficients by degree
    let deg = n as usize + 1;
    let mut num = vec![0.0; deg + 1];
    num[deg - 1] += a;
    num[deg] += b;
    // synthetic division by the monic x^2 + q x + p
    let mut quot = vec![0.0; deg.saturating_sub(1)];
    for i in (2..=deg).rev() {
        let c = num[i];
        quot[i - 2] = c;
        num[i - 1] -= q * c;
        num[i - 2] -= p * c;
        num[i] = 0.0;
    }
    let (r0, r1) = (num[0], num[1]);

    let mut acc = 0.0;
    for (j, &c) in quot.iter().enumerate() {
        let m = j as i32 + 1;
        acc += c * x.powi(m) / m as f64;
    }
    let d = p + q * x + x * x;
    acc += 0.5 * r1 * d.abs().ln();
    acc + (r0 - 0.5 * r1 * q) * inv_quadratic_primitive(p, q, x)
}

/// Antiderivative of `1 / (x^2 + q x + p)`, continuous wherever the
/// quadratic has no real root.
fn inv_quadratic_primitive(p: f64, q: f64, x: f64) -> f64 {
    let disc = q * q - 4.0 * p;
    if disc < 0.0 {
        let s = (-disc).sqrt();
        2.0 / s * ((2.0 * x + q) / s).atan()
    } else if disc > 0.0 {
        let s = disc.sqrt();
        ((2.0 * x + q - s) / (2.0 * x + q + s)).abs().ln() / s
    } else {
        -2.0 / (2.0 * x + q)
    }
}
