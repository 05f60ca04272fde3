//! Adaptive least-squares construction of piecewise representations.
//!
//! `piecewisefit` builds a [`PiecewiseFunction`] approximating a target
//! to a requested tolerance. Each interval is fit by linear least
//! squares over a candidate basis (polynomials plus anchored nonanalytic
//! formulas with fixed nonlinear parameters), sampled at Chebyshev nodes
//! and solved by Householder QR. A fit is accepted only if it also holds
//! at seeded random validation points and at midpoints between the fit
//! nodes; otherwise the polynomial degree grows and finally the interval
//! is bisected.
//!
//! Nonlinear parameters (singularity anchors, the PLS exponent, the TAIL
//! denominator) are never optimized: they are anchored by policy, which
//! keeps every solve linear and the whole procedure deterministic for a
//! fixed seed.

use std::cell::Cell;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::catalog::{check_constraint, formula_eval, Formula};
use crate::piece::{BuildError, Parity, Piece, PiecewiseFunction, Term};

/// Where a candidate's nonlinear anchor is placed, resolved against the
/// full fit interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anchor {
    LeftEndpoint,
    RightEndpoint,
    Fixed(f64),
}

impl Anchor {
    fn resolve(&self, interval: (f64, f64)) -> f64 {
        match *self {
            Anchor::LeftEndpoint => interval.0,
            Anchor::RightEndpoint => interval.1,
            Anchor::Fixed(x0) => x0,
        }
    }
}

/// One formula template of the candidate set.
#[derive(Debug, Clone, PartialEq)]
pub enum Candidate {
    /// Polynomial block, degrees `0..=d` with `d` chosen adaptively.
    Poly,
    Log { anchor: Anchor },
    XLog { anchor: Anchor },
    Isrs { anchor: Anchor },
    Sqrt { anchor: Anchor },
    Pls { anchor: Anchor, exponent: f64 },
    /// Rational tail with fixed denominator `p + q x + x^2`.
    Tail { p: f64, q: f64 },
}

/// Tolerances, candidate set and sampling controls for `piecewisefit`.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub rtol: f64,
    pub atol: f64,
    pub candidates: Vec<Candidate>,
    pub parity: Parity,
    pub max_poly_degree: usize,
    pub fit_oversample: usize,
    pub validation_points: usize,
    /// Narrowest interval the subdivision may produce; `None` means
    /// `1e-6` of the full interval width.
    pub min_width: Option<f64>,
    pub max_depth: usize,
    pub rng_seed: u64,
}

impl FitConfig {
    pub fn new(rtol: f64) -> FitConfig {
        FitConfig {
            rtol,
            atol: 0.0,
            candidates: vec![Candidate::Poly],
            parity: Parity::None,
            max_poly_degree: 12,
            fit_oversample: 8,
            validation_points: 64,
            min_width: None,
            max_depth: 40,
            rng_seed: 0,
        }
    }
}

/// Per-piece record in the [`FitReport`].
#[derive(Debug, Clone)]
pub struct PieceSummary {
    pub interval: (f64, f64),
    pub formulas: Vec<Formula>,
    pub poly_degree: Option<usize>,
    /// Largest deviation observed at the piece's validation points.
    pub max_error: f64,
    /// The bound `atol + rtol * S` the piece was accepted against.
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub pieces_produced: usize,
    pub max_observed_error: f64,
    pub evaluations_of_target: u64,
    pub pieces: Vec<PieceSummary>,
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error(
        "fit did not converge on [{a}, {b}]: error {error:e} exceeds tolerance {tolerance:e}",
        a = .interval.0, b = .interval.1
    )]
    DidNotConverge {
        interval: (f64, f64),
        error: f64,
        tolerance: f64,
    },
    #[error("target returned a non-finite value at x = {0}")]
    TargetNotFinite(f64),
    #[error("design matrix is rank deficient at column {column} ({label})")]
    RankDeficient { column: usize, label: String },
    #[error("invalid fit configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Build(#[from] BuildError),
}

// ---------------------------------------------------------------------
// resolved candidates and design columns
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Resolved {
    Poly,
    Anchored {
        formula: Formula,
        x0: f64,
        exponent: Option<f64>,
    },
    Tail {
        p: f64,
        q: f64,
    },
}

impl Resolved {
    fn from_candidate(candidate: &Candidate, interval: (f64, f64)) -> Resolved {
        match candidate {
            Candidate::Poly => Resolved::Poly,
            Candidate::Log { anchor } => Resolved::Anchored {
                formula: Formula::Log,
                x0: anchor.resolve(interval),
                exponent: None,
            },
            Candidate::XLog { anchor } => Resolved::Anchored {
                formula: Formula::XLog,
                x0: anchor.resolve(interval),
                exponent: None,
            },
            Candidate::Isrs { anchor } => Resolved::Anchored {
                formula: Formula::Isrs,
                x0: anchor.resolve(interval),
                exponent: None,
            },
            Candidate::Sqrt { anchor } => Resolved::Anchored {
                formula: Formula::Sqrt,
                x0: anchor.resolve(interval),
                exponent: None,
            },
            Candidate::Pls { anchor, exponent } => Resolved::Anchored {
                formula: Formula::Pls,
                x0: anchor.resolve(interval),
                exponent: Some(*exponent),
            },
            Candidate::Tail { p, q } => Resolved::Tail { p: *p, q: *q },
        }
    }

    /// Unit-amplitude parameter vector.
    fn unit_params(&self) -> Option<(Formula, Vec<f64>)> {
        match self {
            Resolved::Poly => None,
            Resolved::Anchored {
                formula,
                x0,
                exponent,
            } => {
                let params = match exponent {
                    Some(b) => vec![*x0, *b, 1.0],
                    None => vec![*x0, 1.0],
                };
                Some((*formula, params))
            }
            Resolved::Tail { .. } => None,
        }
    }

    fn admissible(&self, interval: (f64, f64)) -> bool {
        match self {
            Resolved::Poly => true,
            Resolved::Anchored { .. } => {
                let (formula, params) = self.unit_params().expect("anchored");
                check_constraint(formula, &params, interval).is_ok()
            }
            Resolved::Tail { p, q } => {
                check_constraint(Formula::Tail, &[*p, *q, 1.0, 0.0], interval).is_ok()
            }
        }
    }

    fn is_singular_at(&self, x: f64) -> bool {
        match self {
            Resolved::Anchored {
                formula,
                x0,
                exponent,
            } => {
                *x0 == x
                    && match formula {
                        Formula::Log | Formula::Isrs => true,
                        Formula::Pls => exponent.unwrap_or(0.0) < 0.0,
                        _ => false,
                    }
            }
            _ => false,
        }
    }
}

/// One column of the linear design.
enum Column {
    /// Chebyshev polynomial `T_k((2x - a - b)/(b - a))`: well conditioned
    /// stand-in for the monomial block, converted back after the solve.
    Cheb { k: usize, mid: f64, half: f64 },
    /// A formula with unit amplitude and fixed nonlinear parameters.
    Basis { formula: Formula, params: Vec<f64> },
}

impl Column {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Column::Cheb { k, mid, half } => chebyshev_t(*k, (x - mid) / half),
            Column::Basis { formula, params } => formula_eval(*formula, params, x),
        }
    }

    fn label(&self) -> String {
        match self {
            Column::Cheb { k, .. } => format!("POLY degree {k}"),
            Column::Basis { formula, params } => format!("{formula}{params:?}"),
        }
    }
}

/// Which term a solved coefficient belongs to.
#[derive(Clone, Copy, PartialEq)]
enum ColumnTarget {
    Poly(usize),
    Anchored(usize),
    TailNumA(usize),
    TailNumB(usize),
}

fn chebyshev_t(k: usize, s: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut curr = s;
    for _ in 1..k {
        (prev, curr) = (curr, 2.0 * s * curr - prev);
    }
    curr
}

/// Convert `sum_k c_k T_k(s)` with `s = (2x - a - b)/(b - a)` to monomial
/// coefficients in `x`.
fn cheb_to_monomial(coeffs: &[f64], a: f64, b: f64) -> Vec<f64> {
    let n = coeffs.len();
    // accumulate the s-monomial form via the T recurrence
    let mut in_s = vec![0.0; n];
    let mut t_prev = vec![1.0];
    let mut t_curr = vec![0.0, 1.0];
    for (k, &c) in coeffs.iter().enumerate() {
        let t_k: &[f64] = match k {
            0 => &t_prev,
            1 => &t_curr,
            _ => {
                // T_k = 2 s T_{k-1} - T_{k-2}
                let mut next = vec![0.0; k + 1];
                for (i, &v) in t_curr.iter().enumerate() {
                    next[i + 1] += 2.0 * v;
                }
                for (i, &v) in t_prev.iter().enumerate() {
                    next[i] -= v;
                }
                t_prev = std::mem::replace(&mut t_curr, next);
                &t_curr
            }
        };
        for (i, &v) in t_k.iter().enumerate() {
            in_s[i] += c * v;
        }
    }
    // substitute s = alpha x + beta by Horner in coefficient space
    let alpha = 2.0 / (b - a);
    let beta = -(a + b) / (b - a);
    let mut out = vec![in_s[n - 1]];
    for j in (0..n - 1).rev() {
        let mut next = vec![0.0; out.len() + 1];
        for (i, &v) in out.iter().enumerate() {
            next[i + 1] += alpha * v;
            next[i] += beta * v;
        }
        next[0] += in_s[j];
        out = next;
    }
    out
}

// ---------------------------------------------------------------------
// target instrumentation
// ---------------------------------------------------------------------

struct Probe<'a> {
    target: &'a dyn Fn(f64) -> f64,
    evaluations: Cell<u64>,
    non_finite_at: Cell<Option<f64>>,
}

impl<'a> Probe<'a> {
    fn eval(&self, x: f64) -> f64 {
        self.evaluations.set(self.evaluations.get() + 1);
        let v = (self.target)(x);
        if !v.is_finite() && self.non_finite_at.get().is_none() {
            self.non_finite_at.set(Some(x));
        }
        v
    }

    fn check(&self) -> Result<(), FitError> {
        match self.non_finite_at.get() {
            Some(x) => Err(FitError::TargetNotFinite(x)),
            None => Ok(()),
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

fn interval_seed(base: u64, a: f64, b: f64) -> u64 {
    splitmix64(base ^ splitmix64(a.to_bits()) ^ splitmix64(b.to_bits().rotate_left(17)))
}

/// Chebyshev nodes of the first kind on `(a, b)`, ascending; all nodes
/// are interior, so excluded endpoints are never sampled.
fn chebyshev_nodes(count: usize, a: f64, b: f64) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..count)
        .map(|i| {
            let theta = std::f64::consts::PI * (2.0 * i as f64 + 1.0) / (2.0 * count as f64);
            mid - half * theta.cos()
        })
        .collect()
}

// ---------------------------------------------------------------------
// single least-squares solve
// ---------------------------------------------------------------------

struct Solved {
    terms: Vec<Term>,
    node_residual: f64,
    nodes: Vec<f64>,
    node_values: Vec<f64>,
}

fn build_columns(
    resolved: &[Resolved],
    degree: Option<usize>,
    interval: (f64, f64),
) -> (Vec<Column>, Vec<ColumnTarget>) {
    let (a, b) = interval;
    let mut columns = Vec::new();
    let mut targets = Vec::new();
    for (idx, candidate) in resolved.iter().enumerate() {
        match candidate {
            Resolved::Poly => {
                let d = degree.expect("poly candidate requires a degree");
                for k in 0..=d {
                    columns.push(Column::Cheb {
                        k,
                        mid: 0.5 * (a + b),
                        half: 0.5 * (b - a),
                    });
                    targets.push(ColumnTarget::Poly(k));
                }
            }
            Resolved::Anchored { .. } => {
                let (formula, params) = candidate.unit_params().expect("anchored");
                columns.push(Column::Basis { formula, params });
                targets.push(ColumnTarget::Anchored(idx));
            }
            Resolved::Tail { p, q } => {
                columns.push(Column::Basis {
                    formula: Formula::Tail,
                    params: vec![*p, *q, 1.0, 0.0],
                });
                targets.push(ColumnTarget::TailNumA(idx));
                columns.push(Column::Basis {
                    formula: Formula::Tail,
                    params: vec![*p, *q, 0.0, 1.0],
                });
                targets.push(ColumnTarget::TailNumB(idx));
            }
        }
    }
    (columns, targets)
}

fn solve_once(
    probe: &Probe,
    interval: (f64, f64),
    resolved: &[Resolved],
    degree: Option<usize>,
    oversample: usize,
) -> Result<Solved, FitError> {
    let (columns, targets) = build_columns(resolved, degree, interval);
    let ncols = columns.len();
    if ncols == 0 {
        return Err(FitError::BadConfig(
            "candidate set produces no basis columns".to_string(),
        ));
    }
    let nrows = ncols + oversample;
    let nodes = chebyshev_nodes(nrows, interval.0, interval.1);
    let node_values: Vec<f64> = nodes.iter().map(|&x| probe.eval(x)).collect();
    probe.check()?;

    let design = DMatrix::from_fn(nrows, ncols, |i, j| columns[j].eval(nodes[i]));
    let rhs = DVector::from_column_slice(&node_values);

    let qr = design.clone().qr();
    let r = qr.r();
    let diag_max = (0..ncols).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    let rank_tol = f64::EPSILON * diag_max * nrows as f64;
    for j in 0..ncols {
        if r[(j, j)].abs() <= rank_tol {
            return Err(FitError::RankDeficient {
                column: j,
                label: columns[j].label(),
            });
        }
    }
    let mut qtb = rhs.clone();
    qr.q_tr_mul(&mut qtb);
    let coeffs = r
        .solve_upper_triangular(&qtb.rows(0, ncols).into_owned())
        .ok_or_else(|| FitError::RankDeficient {
            column: 0,
            label: "upper-triangular solve failed".to_string(),
        })?;

    // assemble terms from the solved coefficients
    let mut terms = Vec::new();
    if let Some(d) = degree {
        let mut cheb = vec![0.0; d + 1];
        for (j, target) in targets.iter().enumerate() {
            if let ColumnTarget::Poly(k) = target {
                cheb[*k] = coeffs[j];
            }
        }
        let monomial = cheb_to_monomial(&cheb, interval.0, interval.1);
        terms.push(Term::new(Formula::Poly, monomial)?);
    }
    for (idx, candidate) in resolved.iter().enumerate() {
        match candidate {
            Resolved::Poly => {}
            Resolved::Anchored { .. } => {
                let coeff = targets
                    .iter()
                    .position(|t| *t == ColumnTarget::Anchored(idx))
                    .map(|j| coeffs[j])
                    .expect("anchored column present");
                let (formula, mut params) = candidate.unit_params().expect("anchored");
                *params.last_mut().expect("amplitude slot") = coeff;
                terms.push(Term::new(formula, params)?);
            }
            Resolved::Tail { p, q } => {
                let col_a = targets
                    .iter()
                    .position(|t| *t == ColumnTarget::TailNumA(idx))
                    .expect("tail column a");
                let col_b = targets
                    .iter()
                    .position(|t| *t == ColumnTarget::TailNumB(idx))
                    .expect("tail column b");
                terms.push(Term::new(
                    Formula::Tail,
                    vec![*p, *q, coeffs[col_a], coeffs[col_b]],
                )?);
            }
        }
    }

    // residual of the assembled rule (after basis conversion), so the
    // accepted piece is exactly what was measured
    let node_residual = nodes
        .iter()
        .zip(&node_values)
        .map(|(&x, &y)| {
            let fit: f64 = terms.iter().map(|t| t.eval(x)).sum();
            (fit - y).abs()
        })
        .fold(0.0, f64::max);

    Ok(Solved {
        terms,
        node_residual,
        nodes,
        node_values,
    })
}

/// One least-squares solve over the candidate set on a single interval,
/// exposed for testing and diagnostics. Anchors resolve against
/// `interval`; POLY contributes degrees `0..=poly_degree`. Returns the
/// fitted terms and the max-abs residual at the fit nodes.
pub fn fit_interval(
    target: impl Fn(f64) -> f64,
    interval: (f64, f64),
    candidates: &[Candidate],
    poly_degree: usize,
) -> Result<(Vec<Term>, f64), FitError> {
    validate_interval(interval)?;
    let probe = Probe {
        target: &target,
        evaluations: Cell::new(0),
        non_finite_at: Cell::new(None),
    };
    let resolved: Vec<Resolved> = candidates
        .iter()
        .map(|c| Resolved::from_candidate(c, interval))
        .collect();
    let degree = resolved
        .iter()
        .any(|r| *r == Resolved::Poly)
        .then_some(poly_degree);
    let solved = solve_once(&probe, interval, &resolved, degree, 8)?;
    Ok((solved.terms, solved.node_residual))
}

// ---------------------------------------------------------------------
// the adaptive driver
// ---------------------------------------------------------------------

struct FittedPiece {
    interval: (f64, f64),
    terms: Vec<Term>,
    poly_degree: Option<usize>,
    max_error: f64,
    tolerance: f64,
    singular: (bool, bool),
}

struct Driver<'a> {
    probe: Probe<'a>,
    config: &'a FitConfig,
    resolved: Vec<Resolved>,
    min_width: f64,
}

impl Driver<'_> {
    fn validation_points(&self, nodes: &[f64], a: f64, b: f64) -> Vec<f64> {
        let total = self.config.validation_points.max(2);
        let random_count = total / 2;
        let mut points = Vec::with_capacity(total);
        let mut rng = ChaCha8Rng::seed_from_u64(interval_seed(self.config.rng_seed, a, b));
        while points.len() < random_count {
            let u: f64 = rng.random();
            let x = a + (b - a) * u;
            if x > a && x < b {
                points.push(x);
            }
        }
        let mids: Vec<f64> = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let need = total - random_count;
        if mids.len() <= need {
            points.extend(mids);
        } else {
            points.extend((0..need).map(|i| mids[i * mids.len() / need]));
        }
        points
    }

    fn attempt(
        &self,
        a: f64,
        b: f64,
        resolved: &[Resolved],
        degree: Option<usize>,
    ) -> Result<(Solved, f64, f64, bool), FitError> {
        let solved = solve_once(&self.probe, (a, b), resolved, degree, self.config.fit_oversample)?;
        let validation = self.validation_points(&solved.nodes, a, b);
        let mut scale: f64 = solved.node_values.iter().fold(0.0, |m, v| m.max(v.abs()));
        let mut max_error: f64 = 0.0;
        for &v in &validation {
            let y = self.probe.eval(v);
            scale = scale.max(y.abs());
            let fit: f64 = solved.terms.iter().map(|t| t.eval(v)).sum();
            max_error = max_error.max((fit - y).abs());
        }
        self.probe.check()?;
        let bound = self.config.atol + self.config.rtol * scale;
        let accepted = max_error <= bound;
        Ok((solved, max_error, bound, accepted))
    }

    fn fit_recursive(
        &self,
        a: f64,
        b: f64,
        depth: usize,
        out: &mut Vec<FittedPiece>,
    ) -> Result<(), FitError> {
        let admissible: Vec<Resolved> = self
            .resolved
            .iter()
            .filter(|r| r.admissible((a, b)))
            .cloned()
            .collect();
        let has_poly = admissible.iter().any(|r| *r == Resolved::Poly);
        let degrees: Vec<Option<usize>> = if has_poly {
            (3.min(self.config.max_poly_degree)..=self.config.max_poly_degree)
                .map(Some)
                .collect()
        } else {
            vec![None]
        };

        let mut worst: Option<(f64, f64)> = None;
        for degree in degrees {
            let (solved, max_error, bound, accepted) = self.attempt(a, b, &admissible, degree)?;
            if accepted {
                out.push(FittedPiece {
                    interval: (a, b),
                    terms: solved.terms,
                    poly_degree: degree,
                    max_error,
                    tolerance: bound,
                    singular: (
                        admissible.iter().any(|r| r.is_singular_at(a)),
                        admissible.iter().any(|r| r.is_singular_at(b)),
                    ),
                });
                return Ok(());
            }
            let record = match worst {
                Some((err, _)) => max_error < err,
                None => true,
            };
            if record {
                worst = Some((max_error, bound));
            }
        }

        let (err, tol) = worst.unwrap_or((f64::INFINITY, 0.0));
        let mid = 0.5 * (a + b);
        if depth >= self.config.max_depth || mid - a < self.min_width {
            return Err(FitError::DidNotConverge {
                interval: (a, b),
                error: err,
                tolerance: tol,
            });
        }
        self.fit_recursive(a, mid, depth + 1, out)?;
        self.fit_recursive(mid, b, depth + 1, out)
    }
}

fn validate_interval(interval: (f64, f64)) -> Result<(), FitError> {
    let (a, b) = interval;
    if !a.is_finite() || !b.is_finite() || !(a < b) {
        return Err(FitError::BadConfig(format!(
            "fit interval must be finite with a < b, got ({a}, {b})"
        )));
    }
    Ok(())
}

/// Fit a piecewise representation of `target` on `interval`.
///
/// On success every accepted piece satisfied
/// `|f(v) - target(v)| <= atol + rtol * S` at all of its validation
/// points, with `S` the largest `|target|` seen among the piece's
/// samples. The target is only ever evaluated strictly inside the
/// interval. Output is bit-reproducible for identical configuration
/// including the seed.
pub fn piecewisefit(
    target: impl Fn(f64) -> f64,
    interval: (f64, f64),
    config: &FitConfig,
) -> Result<(PiecewiseFunction, FitReport), FitError> {
    validate_interval(interval)?;
    if !(config.rtol > 0.0) {
        return Err(FitError::BadConfig(format!(
            "rtol must be positive, got {}",
            config.rtol
        )));
    }
    if config.atol < 0.0 {
        return Err(FitError::BadConfig("atol must be non-negative".to_string()));
    }
    if config.parity != Parity::None && interval.0 < 0.0 {
        return Err(FitError::BadConfig(format!(
            "parity `{}` fits on the half-axis, interval starts at {}",
            config.parity.name(),
            interval.0
        )));
    }
    if config.candidates.is_empty() {
        return Err(FitError::BadConfig("candidate set is empty".to_string()));
    }

    let resolved: Vec<Resolved> = config
        .candidates
        .iter()
        .map(|c| Resolved::from_candidate(c, interval))
        .collect();
    for pair in resolved.iter().enumerate() {
        if resolved[..pair.0].contains(pair.1) {
            return Err(FitError::RankDeficient {
                column: pair.0,
                label: format!("duplicate candidate {:?}", pair.1),
            });
        }
    }

    let driver = Driver {
        probe: Probe {
            target: &target,
            evaluations: Cell::new(0),
            non_finite_at: Cell::new(None),
        },
        config,
        resolved,
        min_width: config
            .min_width
            .unwrap_or(1e-6 * (interval.1 - interval.0)),
    };

    let mut fitted = Vec::new();
    driver.fit_recursive(interval.0, interval.1, 0, &mut fitted)?;

    // ownership convention for interior breakpoints: a piece includes its
    // left endpoint; singular anchors force exclusion
    let count = fitted.len();
    let mut pieces = Vec::with_capacity(count);
    let mut summaries = Vec::with_capacity(count);
    let mut max_observed_error: f64 = 0.0;
    for (i, piece) in fitted.into_iter().enumerate() {
        let included = (!piece.singular.0, i + 1 == count && !piece.singular.1);
        max_observed_error = max_observed_error.max(piece.max_error);
        summaries.push(PieceSummary {
            interval: piece.interval,
            formulas: piece.terms.iter().map(|t| t.formula()).collect(),
            poly_degree: piece.poly_degree,
            max_error: piece.max_error,
            tolerance: piece.tolerance,
        });
        pieces.push(Piece::new(piece.interval, included, piece.terms)?);
    }
    let function = PiecewiseFunction::new(config.parity, pieces)?;
    let report = FitReport {
        pieces_produced: count,
        max_observed_error,
        evaluations_of_target: driver.probe.evaluations.get(),
        pieces: summaries,
    };
    Ok((function, report))
}

/// Re-check a fitted function against the target with a fresh seed and a
/// denser point set; returns the worst ratio of observed error to the
/// per-piece bound `atol + rtol * S`. Values at or below 1 mean the fit
/// still honors its contract on unseen points.
pub fn revalidate(
    f: &PiecewiseFunction,
    target: impl Fn(f64) -> f64,
    config: &FitConfig,
    seed: u64,
    multiplier: usize,
) -> f64 {
    let mut worst: f64 = 0.0;
    for piece in f.pieces() {
        let (a, b) = piece.interval();
        let mut rng = ChaCha8Rng::seed_from_u64(interval_seed(seed, a, b));
        let n = config.validation_points.max(2) * multiplier;
        let mut scale: f64 = 0.0;
        let mut err: f64 = 0.0;
        for _ in 0..n {
            let u: f64 = rng.random();
            let x = a + (b - a) * u;
            if x <= a || x >= b {
                continue;
            }
            let y = target(x);
            scale = scale.max(y.abs());
            err = err.max((piece.eval(x) - y).abs());
        }
        let bound = config.atol + config.rtol * scale;
        if bound > 0.0 {
            worst = worst.max(err / bound);
        } else {
            worst = worst.max(if err > 0.0 { f64::INFINITY } else { 0.0 });
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cubic_is_reproduced() {
        let config = FitConfig::new(1e-12);
        let (f, report) = piecewisefit(|x| 2.0 * x.powi(3) - x, (0.0, 1.0), &config).unwrap();
        assert_eq!(report.pieces_produced, 1);
        let params = f.pieces()[0].terms()[0].params();
        let expected = [0.0, -1.0, 0.0, 2.0];
        for (got, want) in params.iter().zip(expected) {
            assert!((got - want).abs() < 1e-10, "{params:?}");
        }
    }

    #[test]
    fn log_amplitude_is_recovered() {
        let candidates = vec![Candidate::Log {
            anchor: Anchor::LeftEndpoint,
        }];
        let (terms, residual) =
            fit_interval(|x: f64| 3.0 * x.abs().ln(), (0.0, 1.0), &candidates, 0).unwrap();
        assert_eq!(terms.len(), 1);
        assert!((terms[0].params()[1] - 3.0).abs() < 1e-12);
        assert!(residual < 1e-12);
    }

    #[test]
    fn quadratic_residual_is_tiny() {
        let (_, residual) =
            fit_interval(|x: f64| x * x, (0.0, 1.0), &[Candidate::Poly], 2).unwrap();
        assert!(residual <= 1e-13, "residual {residual:e}");
    }

    #[test]
    fn duplicate_candidates_are_rank_deficient() {
        let candidates = vec![
            Candidate::Log {
                anchor: Anchor::LeftEndpoint,
            },
            Candidate::Log {
                anchor: Anchor::Fixed(0.0),
            },
        ];
        let err = fit_interval(|x: f64| x.abs().ln(), (0.0, 1.0), &candidates, 0).unwrap_err();
        assert!(matches!(err, FitError::RankDeficient { .. }), "{err:?}");
    }

    #[test]
    fn non_finite_target_is_reported() {
        let config = FitConfig::new(1e-6);
        let err = piecewisefit(
            |x| if x > 0.5 { f64::NAN } else { x },
            (0.0, 1.0),
            &config,
        )
        .unwrap_err();
        assert!(matches!(err, FitError::TargetNotFinite(_)));
    }

    #[test]
    fn singular_candidate_marks_endpoint_excluded() {
        let mut config = FitConfig::new(1e-8);
        config.candidates = vec![
            Candidate::Poly,
            Candidate::Log {
                anchor: Anchor::LeftEndpoint,
            },
        ];
        let (f, _) =
            piecewisefit(|x: f64| 0.5 * x.abs().ln() + 1.0, (0.0, 1.0), &config).unwrap();
        assert_eq!(f.pieces()[0].included(), (false, true));
    }

    #[test]
    fn deterministic_for_equal_seeds() {
        let mut config = FitConfig::new(1e-9);
        config.rng_seed = 1234;
        let target = |x: f64| (3.0 * x).sin() / (1.0 + x * x);
        let (f1, _) = piecewisefit(target, (0.0, 2.0), &config).unwrap();
        let (f2, _) = piecewisefit(target, (0.0, 2.0), &config).unwrap();
        assert_eq!(crate::json::to_json(&f1), crate::json::to_json(&f2));
    }

    #[test]
    fn runge_function_subdivides_and_converges() {
        let config = FitConfig::new(1e-8);
        let target = |x: f64| 1.0 / (1.0 + 25.0 * x * x);
        let (f, report) = piecewisefit(target, (-1.0, 1.0), &config).unwrap();
        assert!(report.pieces_produced >= 2);
        for i in 0..=1000 {
            let x = -1.0 + 0.002 * i as f64;
            let err = (f.evaluate(x) - target(x)).abs();
            assert!(err < 1e-6, "x={x} err={err:e}");
        }
    }

    #[test]
    fn zero_target_fits_exactly() {
        let config = FitConfig::new(1e-10);
        let (f, report) = piecewisefit(|_| 0.0, (0.0, 1.0), &config).unwrap();
        assert_eq!(report.pieces_produced, 1);
        assert_eq!(f.evaluate(0.5), 0.0);
        assert_eq!(report.max_observed_error, 0.0);
    }

    #[test]
    fn bad_config_is_rejected() {
        let mut config = FitConfig::new(0.0);
        assert!(matches!(
            piecewisefit(|x| x, (0.0, 1.0), &config),
            Err(FitError::BadConfig(_))
        ));
        config.rtol = 1e-6;
        assert!(matches!(
            piecewisefit(|x| x, (1.0, 0.0), &config),
            Err(FitError::BadConfig(_))
        ));
        config.parity = Parity::Even;
        assert!(matches!(
            piecewisefit(|x| x, (-1.0, 1.0), &config),
            Err(FitError::BadConfig(_))
        ));
    }
}
