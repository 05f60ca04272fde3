//! JSON serialization of piecewise functions.
//!
//! The document layout is
//!
//! ```json
//! {
//!   "parity": "none",
//!   "pieces": [
//!     {
//!       "interval": [0.0, 4.0],
//!       "included": [false, true],
//!       "terms": [{"formula": "LOG", "params": [0.0, -0.05]}]
//!     }
//!   ]
//! }
//! ```
//!
//! Numbers are written in shortest round-trip decimal form, so
//! `from_json(to_json(f))` reproduces `f` bit-exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogError, Formula};
use crate::piece::{BuildError, Parity, Piece, PiecewiseFunction, Term};

#[derive(Serialize, Deserialize)]
struct FunctionDoc {
    parity: String,
    pieces: Vec<PieceDoc>,
}

#[derive(Serialize, Deserialize)]
struct PieceDoc {
    interval: [f64; 2],
    included: [bool; 2],
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    formula: String,
    params: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown parity `{0}`")]
    UnknownParity(String),
    #[error(transparent)]
    UnknownFormula(#[from] CatalogError),
    #[error(transparent)]
    Invalid(#[from] BuildError),
}

pub fn to_json(f: &PiecewiseFunction) -> String {
    let doc = FunctionDoc {
        parity: f.parity().name().to_string(),
        pieces: f
            .pieces()
            .iter()
            .map(|p| PieceDoc {
                interval: [p.interval().0, p.interval().1],
                included: [p.included().0, p.included().1],
                terms: p
                    .terms()
                    .iter()
                    .map(|t| TermDoc {
                        formula: t.formula().name().to_string(),
                        params: t.params().to_vec(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("piecewise document is always serializable")
}

pub fn from_json(text: &str) -> Result<PiecewiseFunction, JsonError> {
    let doc: FunctionDoc = serde_json::from_str(text).map_err(|e| JsonError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let parity =
        Parity::from_name(&doc.parity).ok_or_else(|| JsonError::UnknownParity(doc.parity.clone()))?;
    let mut pieces = Vec::with_capacity(doc.pieces.len());
    for piece in doc.pieces {
        let mut terms = Vec::with_capacity(piece.terms.len());
        for term in piece.terms {
            let formula = Formula::from_name(&term.formula)?;
            terms.push(Term::new(formula, term.params).map_err(JsonError::Invalid)?);
        }
        pieces.push(Piece::new(
            (piece.interval[0], piece.interval[1]),
            (piece.included[0], piece.included[1]),
            terms,
        )?);
    }
    Ok(PiecewiseFunction::new(parity, pieces)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ConstraintViolation;
    use std::f64::consts::PI;

    fn dos_constructor() -> PiecewiseFunction {
        // the twelve coefficients of the one-piece square-lattice DOS fit
        let poly = Term::new(
            Formula::Poly,
            vec![
                1.404609620501190e-01,
                1.174637035445451e-04,
                2.462481494536943e-03,
                -1.995071066151247e-03,
                1.349285972889321e-03,
                -6.607932327688245e-04,
                2.158678002039584e-04,
                -4.417944490515085e-05,
                5.103263826300048e-06,
                -2.533300199959029e-07,
            ],
        )
        .unwrap();
        let log = Term::new(Formula::Log, vec![0.0, -5.066059182116889e-02]).unwrap();
        let piece = Piece::new((0.0, 4.0), (false, true), vec![poly, log]).unwrap();
        PiecewiseFunction::new(Parity::Even, vec![piece]).unwrap()
    }

    #[test]
    fn round_trip_preserves_all_coefficients() {
        let f = dos_constructor();
        let back = from_json(&to_json(&f)).unwrap();
        assert_eq!(back, f);
        let params: Vec<f64> = back.pieces()[0]
            .terms()
            .iter()
            .flat_map(|t| t.params().iter().copied())
            .collect();
        assert_eq!(params.len(), 12);
    }

    #[test]
    fn empty_function_is_legal() {
        let f = PiecewiseFunction::empty(Parity::None);
        let text = to_json(&f);
        let back = from_json(&text).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn interior_anchor_is_a_constraint_violation() {
        let text = r#"{
            "parity": "none",
            "pieces": [{
                "interval": [0.0, 4.0],
                "included": [true, true],
                "terms": [{"formula": "LOG", "params": [2.0, 1.0]}]
            }]
        }"#;
        let err = from_json(text).unwrap_err();
        match err {
            JsonError::Invalid(BuildError::Constraint(ConstraintViolation { .. })) => {}
            other => panic!("expected constraint violation, got {other:?}"),
        }
    }

    #[test]
    fn malformed_input_reports_position() {
        let err = from_json("{\"parity\": \"none\", \"pieces\": [\n  {oops}]}").unwrap_err();
        match err {
            JsonError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_formula_is_rejected() {
        let text = r#"{
            "parity": "none",
            "pieces": [{
                "interval": [0.0, 1.0],
                "included": [true, true],
                "terms": [{"formula": "WAVELET", "params": [1.0]}]
            }]
        }"#;
        assert!(matches!(
            from_json(text),
            Err(JsonError::UnknownFormula(CatalogError::UnknownFormula(_)))
        ));
    }

    #[test]
    fn negative_zero_round_trips() {
        let term = Term::new(Formula::Log, vec![-0.0, 1.0 / (2.0 * PI)]).unwrap();
        let piece = Piece::new((-4.0, -1.0), (true, true), vec![term]).unwrap();
        let f = PiecewiseFunction::new(Parity::None, vec![piece]).unwrap();
        let back = from_json(&to_json(&f)).unwrap();
        let x0 = back.pieces()[0].terms()[0].params()[0];
        assert_eq!(x0, 0.0);
        assert!(x0.is_sign_negative());
    }
}
