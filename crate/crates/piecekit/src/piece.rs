//! Pieces and piecewise functions.
//!
//! A [`Piece`] is a finite interval, endpoint-inclusion flags and a rule
//! given as a sum of catalog formula terms. A [`PiecewiseFunction`] is an
//! ordered collection of non-overlapping pieces plus a parity tag; even
//! and odd functions store pieces only for `x >= 0` and mirror them on
//! evaluation. Everything is immutable after construction and all
//! operations are pure, so values can be shared freely across threads.

use std::fmt;

use thiserror::Error;

use crate::catalog::{
    check_constraint, formula_eval, reflect_params, scale_params, CatalogError,
    ConstraintViolation, Formula,
};

/// Symmetry tag of a piecewise function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    None,
    Even,
    Odd,
}

impl Parity {
    pub fn name(&self) -> &'static str {
        match self {
            Parity::None => "none",
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }

    pub fn from_name(name: &str) -> Option<Parity> {
        match name {
            "none" => Some(Parity::None),
            "even" => Some(Parity::Even),
            "odd" => Some(Parity::Odd),
            _ => None,
        }
    }
}

/// One `(formula, parameters)` summand of a piece rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    formula: Formula,
    params: Vec<f64>,
}

impl Term {
    pub fn new(formula: Formula, params: Vec<f64>) -> Result<Term, BuildError> {
        formula.check_arity(&params)?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(BuildError::NonFiniteParam(formula));
        }
        Ok(Term { formula, params })
    }

    pub fn formula(&self) -> Formula {
        self.formula
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn eval(&self, x: f64) -> f64 {
        formula_eval(self.formula, &self.params, x)
    }

    fn reflected(&self) -> Term {
        Term {
            formula: self.formula,
            params: reflect_params(self.formula, &self.params),
        }
    }

    fn scaled(&self, c: f64) -> Term {
        Term {
            formula: self.formula,
            params: scale_params(self.formula, &self.params, c),
        }
    }
}

/// An interval with endpoint flags and a rule.
///
/// An endpoint flagged `false` marks a point where the rule may be
/// singular or undefined; `true` marks a finite, valid endpoint value.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    interval: (f64, f64),
    included: (bool, bool),
    terms: Vec<Term>,
}

impl Piece {
    pub fn new(
        interval: (f64, f64),
        included: (bool, bool),
        terms: Vec<Term>,
    ) -> Result<Piece, BuildError> {
        let (x1, x2) = interval;
        if !x1.is_finite() || !x2.is_finite() || !(x1 < x2) {
            return Err(BuildError::BadInterval(x1, x2));
        }
        if terms.is_empty() {
            return Err(BuildError::EmptyRule);
        }
        for term in &terms {
            check_constraint(term.formula, &term.params, interval)?;
        }
        Ok(Piece {
            interval,
            included,
            terms,
        })
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn included(&self) -> (bool, bool) {
        self.included
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Rule value at `x`; may be non-finite at excluded endpoints.
    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    fn contains_closed(&self, x: f64) -> bool {
        self.interval.0 <= x && x <= self.interval.1
    }

    fn contains_open(&self, x: f64) -> bool {
        self.interval.0 < x && x < self.interval.1
    }

    /// Mirror through the origin: interval and flags swap, parameters
    /// reflect; `negate` additionally flips the amplitude (odd parity).
    fn mirrored(&self, negate: bool) -> Piece {
        let (x1, x2) = self.interval;
        let (left, right) = self.included;
        // a piece starting at 0 keeps ownership of the origin; its mirror
        // never claims it a second time
        let mirrored_right = if x1 == 0.0 { false } else { left };
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let r = t.reflected();
                if negate {
                    r.scaled(-1.0)
                } else {
                    r
                }
            })
            .collect();
        Piece {
            interval: (-x2, -x1),
            included: (right, mirrored_right),
            terms,
        }
    }
}

/// A parity tag plus ordered, pairwise-disjoint pieces. Evaluates to 0
/// outside its support.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction {
    parity: Parity,
    pieces: Vec<Piece>,
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("interval endpoints must be finite with x1 < x2, got ({0}, {1})")]
    BadInterval(f64, f64),
    #[error("piece rule must contain at least one term")]
    EmptyRule,
    #[error(transparent)]
    Arity(#[from] CatalogError),
    #[error(transparent)]
    Constraint(#[from] ConstraintViolation),
    #[error("pieces overlap near x = {0}")]
    Overlap(f64),
    #[error("pieces adjacent at x = {0} both include the shared endpoint")]
    DoubleInclusion(f64),
    #[error("parity `{name}` stores pieces on the half-axis x >= 0, found x1 = {x1}", name = .0.name(), x1 = .1)]
    NegativeHalfAxis(Parity, f64),
    #[error("non-finite parameter in {0} term")]
    NonFiniteParam(Formula),
}

/// The operation needs at least one piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("operation requires a non-empty piecewise function")]
pub struct EmptyFunction;

/// Adding functions of different parities is refused; `unfold` first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("cannot add piecewise functions of different parities; unfold to parity `none` first")]
pub struct MixedParity;

impl PiecewiseFunction {
    pub fn new(parity: Parity, mut pieces: Vec<Piece>) -> Result<PiecewiseFunction, BuildError> {
        pieces.sort_by(|a, b| a.interval.0.total_cmp(&b.interval.0));
        for pair in pieces.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            if prev.interval.1 > next.interval.0 {
                return Err(BuildError::Overlap(next.interval.0));
            }
            if prev.interval.1 == next.interval.0 && prev.included.1 && next.included.0 {
                return Err(BuildError::DoubleInclusion(next.interval.0));
            }
        }
        if parity != Parity::None {
            for piece in &pieces {
                if piece.interval.0 < 0.0 {
                    return Err(BuildError::NegativeHalfAxis(parity, piece.interval.0));
                }
            }
        }
        Ok(PiecewiseFunction { parity, pieces })
    }

    pub fn empty(parity: Parity) -> PiecewiseFunction {
        PiecewiseFunction {
            parity,
            pieces: Vec::new(),
        }
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Total evaluation: 0 outside the support, the rule value inside.
    /// Exactly at an excluded endpoint the rule is still evaluated and
    /// the result may be non-finite.
    pub fn evaluate(&self, x: f64) -> f64 {
        match self.parity {
            Parity::None => self.eval_halfline(x),
            Parity::Even => self.eval_halfline(x.abs()),
            Parity::Odd => {
                let v = self.eval_halfline(x.abs());
                if x < 0.0 {
                    -v
                } else {
                    v
                }
            }
        }
    }

    fn eval_halfline(&self, x: f64) -> f64 {
        match self.piece_at(x) {
            Some(piece) => piece.eval(x),
            None => 0.0,
        }
    }

    /// The piece whose closed interval contains `x`, preferring interior
    /// containment, then an included endpoint, then an excluded one.
    pub fn piece_at(&self, x: f64) -> Option<&Piece> {
        // pieces are sorted and disjoint, so at most two closures contain x
        let idx = self.pieces.partition_point(|p| p.interval.0 <= x);
        let candidates = self.pieces[..idx]
            .iter()
            .rev()
            .take(2)
            .filter(|p| p.contains_closed(x));
        let mut at_endpoint: Option<&Piece> = None;
        for piece in candidates {
            if piece.contains_open(x) {
                return Some(piece);
            }
            let included = (x == piece.interval.0 && piece.included.0)
                || (x == piece.interval.1 && piece.included.1);
            if included {
                return Some(piece);
            }
            at_endpoint.get_or_insert(piece);
        }
        at_endpoint
    }

    /// Hull of the support, mirrored through 0 for even/odd parity.
    pub fn support(&self) -> Result<(f64, f64), EmptyFunction> {
        let first = self.pieces.first().ok_or(EmptyFunction)?;
        let last = self.pieces.last().expect("non-empty");
        match self.parity {
            Parity::None => Ok((first.interval.0, last.interval.1)),
            Parity::Even | Parity::Odd => Ok((-last.interval.1, last.interval.1)),
        }
    }

    /// Pointwise sum. Both partitions are refined to the common set of
    /// breakpoints and term lists concatenated per refined interval; no
    /// re-anchoring takes place (constraints keep holding on shrinking
    /// sub-intervals). Endpoint flags of merged pieces are the AND of the
    /// contributing flags, where an endpoint interior to an original
    /// piece counts as included.
    pub fn add(&self, other: &PiecewiseFunction) -> Result<PiecewiseFunction, MixedParity> {
        if self.parity != other.parity {
            return Err(MixedParity);
        }
        let mut breakpoints: Vec<f64> = Vec::new();
        for piece in self.pieces.iter().chain(other.pieces.iter()) {
            breakpoints.push(piece.interval.0);
            breakpoints.push(piece.interval.1);
        }
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup_by(|a, b| a == b);

        // flag = AND of contributing flags; `explicit` remembers whether
        // some contributor had an included original boundary exactly
        // there, which decides ownership of a shared breakpoint below
        struct MergedEnd {
            flag: bool,
            explicit: bool,
        }
        let mut pieces: Vec<Piece> = Vec::new();
        let mut ends: Vec<(MergedEnd, MergedEnd)> = Vec::new();
        for window in breakpoints.windows(2) {
            let (lo, hi) = (window[0], window[1]);
            let mut terms = Vec::new();
            let mut left = MergedEnd {
                flag: true,
                explicit: false,
            };
            let mut right = MergedEnd {
                flag: true,
                explicit: false,
            };
            for source in [self, other] {
                if let Some(piece) = source
                    .pieces
                    .iter()
                    .find(|p| p.interval.0 <= lo && hi <= p.interval.1)
                {
                    terms.extend(piece.terms.iter().cloned());
                    if piece.interval.0 == lo {
                        left.flag &= piece.included.0;
                        left.explicit |= piece.included.0;
                    }
                    if piece.interval.1 == hi {
                        right.flag &= piece.included.1;
                        right.explicit |= piece.included.1;
                    }
                }
            }
            if terms.is_empty() {
                continue;
            }
            pieces.push(Piece {
                interval: (lo, hi),
                included: (left.flag, right.flag),
                terms,
            });
            ends.push((left, right));
        }
        // resolve double inclusion at shared breakpoints: the side whose
        // inclusion stems from an explicit original boundary owns the
        // point (its terms reproduce the pointwise sum there)
        for i in 1..pieces.len() {
            let (a, b) = pieces.split_at_mut(i);
            let (prev, next) = (a.last_mut().unwrap(), &mut b[0]);
            if prev.interval.1 == next.interval.0 && prev.included.1 && next.included.0 {
                if ends[i - 1].1.explicit && !ends[i].0.explicit {
                    next.included.0 = false;
                } else {
                    prev.included.1 = false;
                }
            }
        }
        Ok(PiecewiseFunction {
            parity: self.parity,
            pieces,
        })
    }

    /// Multiply the function by `c` via each formula's linear-parameter
    /// scaling rule. `scale(f, 1)` reproduces `f` bit-exactly.
    pub fn scale(&self, c: f64) -> PiecewiseFunction {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                interval: p.interval,
                included: p.included,
                terms: p.terms.iter().map(|t| t.scaled(c)).collect(),
            })
            .collect();
        PiecewiseFunction {
            parity: self.parity,
            pieces,
        }
    }

    /// Materialize the parity: the result has parity `none` and is
    /// pointwise identical to `self`. Mirrored pieces use each formula's
    /// parameter reflection rule; odd parity negates mirrored amplitudes.
    pub fn unfold(&self) -> PiecewiseFunction {
        match self.parity {
            Parity::None => self.clone(),
            parity => {
                let negate = parity == Parity::Odd;
                let mut pieces: Vec<Piece> =
                    self.pieces.iter().rev().map(|p| p.mirrored(negate)).collect();
                pieces.extend(self.pieces.iter().cloned());
                PiecewiseFunction {
                    parity: Parity::None,
                    pieces,
                }
            }
        }
    }
}

impl fmt::Display for PiecewiseFunction {
    /// Constructor-style pretty print, e.g.
    /// `PiecewiseFunction(:even, [Piece((0.0, 4.0), (false, true), [LOG], [[...]])])`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "PiecewiseFunction(:{}, [", self.parity.name())?;
        for (i, piece) in self.pieces.iter().enumerate() {
            let names: Vec<&str> = piece.terms.iter().map(|t| t.formula.name()).collect();
            writeln!(
                f,
                "    Piece(({:?}, {:?}), ({}, {}), [{}],",
                piece.interval.0,
                piece.interval.1,
                piece.included.0,
                piece.included.1,
                names.join(", ")
            )?;
            write!(f, "        [")?;
            for (j, term) in piece.terms.iter().enumerate() {
                let params: Vec<String> =
                    term.params.iter().map(|p| format!("{p:.15e}")).collect();
                write!(f, "[{}]", params.join(", "))?;
                if j + 1 < piece.terms.len() {
                    write!(f, ", ")?;
                }
            }
            write!(f, "])")?;
            writeln!(f, "{}", if i + 1 < self.pieces.len() { "," } else { "" })?;
        }
        write!(f, "])")
    }
}
