//! Shared generators for the randomized suites: admissible random
//! parameters per formula, and whole random piecewise functions.

use piecekit::catalog::Formula;
use piecekit::piece::{Parity, Piece, PiecewiseFunction, Term};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random admissible parameters for `formula` on `interval`, anchoring
/// nonlinear parameters on a randomly chosen endpoint.
pub fn random_params(rng: &mut ChaCha8Rng, formula: Formula, interval: (f64, f64)) -> Vec<f64> {
    let (x1, x2) = interval;
    let anchor = if rng.random::<bool>() { x1 } else { x2 };
    let amp = random_amplitude(rng);
    match formula {
        Formula::Poly => {
            let len = rng.random_range(1..=5);
            (0..len).map(|_| rng.random_range(-2.0..2.0)).collect()
        }
        Formula::Log | Formula::XLog | Formula::Isrs | Formula::Sqrt => vec![anchor, amp],
        Formula::Pls => {
            let b = loop {
                let b: f64 = rng.random_range(-0.75..2.5);
                if b.abs() > 0.1 {
                    break b;
                }
            };
            vec![anchor, b, amp]
        }
        Formula::Tail => random_tail_params(rng, interval),
    }
}

/// TAIL parameters whose denominator has no real root in the closed
/// interval: either a complex pair or real roots strictly outside.
pub fn random_tail_params(rng: &mut ChaCha8Rng, interval: (f64, f64)) -> Vec<f64> {
    let (x1, x2) = interval;
    let a = random_amplitude(rng);
    let b = rng.random_range(-1.5..1.5);
    if rng.random::<bool>() {
        let q: f64 = rng.random_range(-2.0..2.0);
        let p = q * q / 4.0 + rng.random_range(0.1..2.0);
        vec![p, q, a, b]
    } else {
        let r1 = x1 - rng.random_range(0.1..2.0);
        let r2 = x2 + rng.random_range(0.1..2.0);
        vec![r1 * r2, -(r1 + r2), a, b]
    }
}

/// Half-integer PLS exponent, the Hilbert-supported subset.
pub fn random_half_integer_exponent(rng: &mut ChaCha8Rng) -> f64 {
    *[-0.5, 0.5, 1.5, 2.5]
        .get(rng.random_range(0..4))
        .expect("index in range")
}

pub fn random_amplitude(rng: &mut ChaCha8Rng) -> f64 {
    let magnitude: f64 = rng.random_range(0.3..2.0);
    if rng.random::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}

pub fn random_interval(rng: &mut ChaCha8Rng, min_start: f64) -> (f64, f64) {
    let x1 = rng.random_range(min_start..min_start + 2.0);
    let width = rng.random_range(0.5..2.0);
    (x1, x1 + width)
}

/// A random piecewise function assembled from catalog formulas, with a
/// random number of contiguous pieces. Pieces include their left
/// endpoint and exclude the right one (the last includes both sides),
/// so the construction invariants hold by construction.
pub fn random_function(rng: &mut ChaCha8Rng, parity: Parity) -> PiecewiseFunction {
    let n_pieces = rng.random_range(1..=3);
    let mut start = if parity == Parity::None {
        rng.random_range(-2.0..0.0)
    } else {
        rng.random_range(0.0..0.5)
    };
    let mut pieces = Vec::new();
    for i in 0..n_pieces {
        let width = rng.random_range(0.4..1.5);
        let interval = (start, start + width);
        let n_terms = rng.random_range(1..=2);
        let mut terms = Vec::new();
        for _ in 0..n_terms {
            let formula = random_formula(rng);
            let params = random_params(rng, formula, interval);
            terms.push(Term::new(formula, params).expect("admissible params"));
        }
        let included = (true, i + 1 == n_pieces);
        pieces.push(Piece::new(interval, included, terms).expect("valid piece"));
        start = interval.1;
    }
    PiecewiseFunction::new(parity, pieces).expect("valid function")
}

pub fn random_formula(rng: &mut ChaCha8Rng) -> Formula {
    use Formula::*;
    *[Poly, Log, XLog, Isrs, Sqrt, Pls, Tail]
        .get(rng.random_range(0..7))
        .expect("index in range")
}

pub fn random_parity(rng: &mut ChaCha8Rng) -> Parity {
    *[Parity::None, Parity::Even, Parity::Odd]
        .get(rng.random_range(0..3))
        .expect("index in range")
}

/// Sum of absolute term values at `x`: the natural magnitude for ulp
/// budgets when a piece rule cancels internally.
pub fn term_magnitude(f: &PiecewiseFunction, x: f64) -> f64 {
    let x_eff = match f.parity() {
        Parity::None => x,
        _ => x.abs(),
    };
    match f.piece_at(x_eff) {
        Some(piece) => piece.terms().iter().map(|t| t.eval(x_eff).abs()).sum(),
        None => 0.0,
    }
}

/// The value of an anchored formula expressed in the shifted variable
/// `u = |x - x0| >= 0`, with `side` the sign of `x - x0` on the piece.
/// Oracles integrate in `u` to avoid the catastrophic `x - x0`
/// cancellation right next to the anchor.
pub fn eval_shifted(formula: Formula, params: &[f64], side: f64, u: f64) -> f64 {
    match formula {
        Formula::Log => params[1] * u.ln(),
        Formula::XLog => params[1] * side * u * u.ln(),
        Formula::Isrs => params[1] / u.sqrt(),
        Formula::Sqrt => params[1] * u.sqrt(),
        Formula::Pls => params[2] * u.powf(params[1]),
        _ => panic!("{formula} is not anchored"),
    }
}
