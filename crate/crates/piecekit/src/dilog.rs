//! Principal-branch complex dilogarithm.
//!
//! `Li2(w) = -int_0^w ln(1-t)/t dt` with the standard cut along
//! `[1, inf)`. The argument is first mapped into the unit disk with
//! `Re w <= 1/2` using the inversion and reflection identities
//!
//! ```text
//! Li2(w) + Li2(1/w)  = -pi^2/6 - ln^2(-w)/2
//! Li2(w) + Li2(1-w)  =  pi^2/6 - ln(w) ln(1-w)
//! ```
//!
//! and the remaining value is summed as the accelerated series in
//! `u = -ln(1-w)` with Bernoulli-number coefficients. The plain defining
//! series `sum w^k/k^2` is deliberately left to the tests as an
//! independent oracle.

use num_complex::Complex64;
use std::f64::consts::PI;

const PI2_6: f64 = PI * PI / 6.0;

// B_{2k} / (2k+1)! for the odd powers u^{2k+1}, k = 1..
const BERNOULLI_COEFFS: [f64; 22] = [
    0.027777777777777777778,
    -0.00027777777777777777778,
    4.7241118669690098262e-6,
    -9.1857730746619635509e-8,
    1.8978869988970999072e-9,
    -4.0647616451442255268e-11,
    8.9216910204564525552e-13,
    -1.9939295860721075687e-14,
    4.5189800296199181917e-16,
    -1.0356517612181247014e-17,
    2.3952186210261867457e-19,
    -5.5817858743250093363e-21,
    1.3091507554183212858e-22,
    -3.0874198024267402932e-24,
    7.3159756527022034204e-26,
    -1.7408456572340007410e-27,
    4.1576356446138997196e-29,
    -9.9621484882846221032e-31,
    2.3940344248961653005e-32,
    -5.7683473553673900843e-34,
    1.3931794796470079778e-35,
    -3.3721219654850894705e-37,
];

/// Principal-branch `Li2(w)`.
pub fn dilog(w: Complex64) -> Complex64 {
    if w == Complex64::new(0.0, 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    if w == Complex64::new(1.0, 0.0) {
        return Complex64::new(PI2_6, 0.0);
    }

    // Li2(w) = acc + sign * Li2(v) with v mapped into the disk
    let mut acc = Complex64::new(0.0, 0.0);
    let mut sign = 1.0;
    let mut v = w;

    if v.norm_sqr() > 1.0 {
        let ln_neg = (-v).ln();
        acc -= Complex64::new(PI2_6, 0.0) + 0.5 * ln_neg * ln_neg;
        sign = -sign;
        v = 1.0 / v;
    }
    if v.re > 0.5 {
        acc += sign * (Complex64::new(PI2_6, 0.0) - v.ln() * (1.0 - v).ln());
        sign = -sign;
        v = 1.0 - v;
    }

    acc + sign * bernoulli_series(v)
}

/// `Li2` on the disk `|v| <= 1`, `Re v <= 1/2`, where `|ln(1-v)|` stays
/// well inside the convergence radius `2 pi`.
fn bernoulli_series(v: Complex64) -> Complex64 {
    let u = -(1.0 - v).ln();
    let u2 = u * u;
    let mut sum = u - 0.25 * u2;
    let mut power = u * u2;
    for &c in &BERNOULLI_COEFFS {
        let term = c * power;
        sum += term;
        if term.norm() <= f64::EPSILON * sum.norm() {
            break;
        }
        power *= u2;
    }
    sum
}

/// `Re Li2(x)` for real `x`; on the cut `x > 1` this is the principal
/// value shared by both one-sided limits.
pub fn dilog_real(x: f64) -> f64 {
    dilog(Complex64::new(x, 0.0)).re
}
