//! Analytic Hilbert transform `H(z) = int f(x) / (z - x) dx`.
//!
//! For `Im z != 0` each catalog formula has a closed-form primitive
//! `P(x, z)` with `dP/dx = F(x) / (z - x)`, built from principal-branch
//! logarithms, `artanh` and the dilogarithm; the log arguments are affine
//! in `x` and never cross the cut within an admissible piece, so naive
//! principal-branch evaluation is safe (the finite-difference property
//! suite enforces this claim).
//!
//! On the real axis the kernel is `1/(y - x + i0+)`, i.e.
//! `H(y) = PV int f(x)/(y - x) dx - i pi f(y)`. The principal value is
//! evaluated analytically with real primitives that carry their
//! `ln|y - x|` coefficient separately, so the pairing of divergent logs
//! across pieces is explicit; the `-i pi f(y)` term is added at the end.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::catalog::Formula;
use crate::dilog::{dilog, dilog_real};
use crate::kernel::{builtin_registry, KernelRegistry, PrimitiveFn, TransformError, HILBERT_KERNEL};
use crate::piece::PiecewiseFunction;

/// Hilbert transform of `f` at `z`.
///
/// With `Im z != 0` this routes through the kernel registry (boundary
/// evaluations of the built-in primitives). With `Im z = 0` the real-axis
/// limit from the upper half plane is returned: the principal-value
/// integral plus `-i pi f(y)`.
pub fn hilbert(f: &PiecewiseFunction, z: Complex64) -> Result<Complex64, TransformError> {
    if z.im != 0.0 {
        builtin_registry().transform(f, HILBERT_KERNEL, z)
    } else {
        hilbert_real_axis(f, z.re)
    }
}

/// Register the built-in Hilbert primitives for all seven formulas under
/// the kernel id `"hilbert"` (or any other id) in a user registry.
pub fn register_hilbert_primitives(registry: &mut KernelRegistry) -> Result<(), TransformError> {
    for formula in crate::catalog::ALL_FORMULAS {
        registry.register(HILBERT_KERNEL, formula, hilbert_primitive(formula))?;
    }
    Ok(())
}

/// The built-in Hilbert primitive of one formula, as a registrable
/// function.
pub fn hilbert_primitive(formula: Formula) -> PrimitiveFn {
    match formula {
        Formula::Poly => Arc::new(|x, z, p| Ok(poly_primitive(x, z, p))),
        Formula::Log => Arc::new(|x, z, p| Ok(log_primitive(x, z, p))),
        Formula::XLog => Arc::new(|x, z, p| Ok(xlog_primitive(x, z, p))),
        Formula::Isrs => Arc::new(|x, z, p| Ok(sqrt_family_primitive(x, z, p[0], -0.5, p[1]))),
        Formula::Sqrt => Arc::new(|x, z, p| Ok(sqrt_family_primitive(x, z, p[0], 0.5, p[1]))),
        Formula::Pls => Arc::new(|x, z, p| {
            let m = half_integer_order(p[1]).ok_or_else(|| TransformError::UnsupportedKernel {
                kernel: HILBERT_KERNEL.to_string(),
                formula: Formula::Pls,
                reason: format!("exponent b = {} is not half-integer", p[1]),
            })?;
            Ok(sqrt_chain_primitive(x, z, p[0], m, p[2]))
        }),
        Formula::Tail => Arc::new(|x, z, p| Ok(tail_primitive(x, z, p))),
    }
}

/// `b = m - 1/2` with integer `m >= 0`, the exponents whose primitives
/// reduce to `artanh` chains.
fn half_integer_order(b: f64) -> Option<i32> {
    let two_b = 2.0 * b;
    if two_b.fract() != 0.0 {
        return None;
    }
    let as_int = two_b as i64;
    if as_int % 2 == 0 {
        return None;
    }
    let m = (as_int + 1) / 2;
    (m >= 0).then_some(m as i32)
}

// ---------------------------------------------------------------------
// complex primitives, Im z != 0
// ---------------------------------------------------------------------

/// `P` for a full POLY term: `sum_k c_k [ -z^k ln(z-x) - sum_{j<k} z^j x^{k-j}/(k-j) ]`.
fn poly_primitive(x: f64, z: Complex64, coeffs: &[f64]) -> Complex64 {
    let ln_zx = (z - x).ln();
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &c) in coeffs.iter().enumerate() {
        let mut term = -z.powu(k as u32) * ln_zx;
        let mut z_pow = Complex64::new(1.0, 0.0);
        for j in 0..k {
            let m = (k - j) as f64;
            term -= z_pow * x.powi((k - j) as i32) / m;
            z_pow *= z;
        }
        acc += c * term;
    }
    acc
}

/// Core antiderivative `p(u, Z)` with `dp/du = ln(u) / (Z - u)` for
/// `u >= 0`; continuous up to `u = 0` where it vanishes.
fn log_core(u: f64, big_z: Complex64) -> Complex64 {
    if u == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    -(u.ln() * ((big_z - u) / big_z).ln() + dilog(u / big_z))
}

/// LOG primitive; the anchor side is read off the sign of `x - x0`.
fn log_primitive(x: f64, z: Complex64, params: &[f64]) -> Complex64 {
    let (x0, a) = (params[0], params[1]);
    let u = x - x0;
    if u >= 0.0 {
        a * log_core(u, z - x0)
    } else {
        a * log_core(-u, x0 - z)
    }
}

/// XLOG primitive: `(z - x0) P_LOG - A [(x-x0) ln|x-x0| - (x-x0)]`.
fn xlog_primitive(x: f64, z: Complex64, params: &[f64]) -> Complex64 {
    let (x0, a) = (params[0], params[1]);
    let u = x - x0;
    let bracket = if u == 0.0 { 0.0 } else { u * u.abs().ln() - u };
    (z - x0) * log_primitive(x, z, params) - a * bracket
}

/// Shifted square-root coordinates: `t = sqrt(|x - x0|)` and the
/// matching principal root `w` of the kernel argument for the anchor
/// side in use.
fn sqrt_coords(x: f64, z: Complex64, x0: f64) -> (f64, Complex64) {
    let u = x - x0;
    if u >= 0.0 {
        (u.sqrt(), (z - x0).sqrt())
    } else {
        ((-u).sqrt(), (x0 - z).sqrt())
    }
}

/// ISRS (`b = -1/2`) and SQRT (`b = 1/2`) primitives in one form.
fn sqrt_family_primitive(x: f64, z: Complex64, x0: f64, b: f64, a: f64) -> Complex64 {
    let (t, w) = sqrt_coords(x, z, x0);
    if b < 0.0 {
        2.0 * a / w * (t / w).atanh()
    } else {
        a * (2.0 * w * (t / w).atanh() - 2.0 * t)
    }
}

/// PLS primitive for `b = m - 1/2`:
/// `2A [ w^(2m-1) artanh(t/w) - sum_{j<m} w^(2(m-1-j)) t^(2j+1)/(2j+1) ]`.
fn sqrt_chain_primitive(x: f64, z: Complex64, x0: f64, m: i32, a: f64) -> Complex64 {
    let (t, w) = sqrt_coords(x, z, x0);
    let mut sum = w.powi(2 * m - 1) * (t / w).atanh();
    let mut t_pow = t;
    for j in 0..m {
        sum -= w.powi(2 * (m - 1 - j)) * t_pow / (2 * j + 1) as f64;
        t_pow *= t * t;
    }
    2.0 * a * sum
}

/// TAIL primitive via partial fractions over the denominator roots.
fn tail_primitive(x: f64, z: Complex64, params: &[f64]) -> Complex64 {
    let (p, q, a, b) = (params[0], params[1], params[2], params[3]);
    let disc = q * q - 4.0 * p;
    let ln_zx = (z - x).ln();
    if disc == 0.0 {
        let r = -q / 2.0;
        let zr = z - r;
        let ln_xr = Complex64::new(x - r, 0.0).ln();
        let c = a + b * r;
        b / zr * (ln_xr - ln_zx) + c * ((ln_xr - ln_zx) / (zr * zr) - 1.0 / (zr * (x - r)))
    } else {
        let s = Complex64::new(disc, 0.0).sqrt();
        let r_plus = (-q + s) / 2.0;
        let r_minus = (-q - s) / 2.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for (root, other) in [(r_plus, r_minus), (r_minus, r_plus)] {
            let residue = (a + b * root) / (root - other);
            acc += residue / (z - root) * ((x - root).ln() - ln_zx);
        }
        acc
    }
}

// ---------------------------------------------------------------------
// real axis: principal value + explicit -i pi f(y)
// ---------------------------------------------------------------------

/// Real antiderivative split as `p(x) = finite + log_coef * ln|y - x|`.
///
/// The split keeps the divergent pairing log explicit: at `x = y` the
/// assembly accumulates `log_coef` instead of evaluating `ln 0`, and a
/// non-cancelling total betrays a genuinely divergent principal value.
struct RealPrimitive {
    finite: f64,
    log_coef: f64,
}

fn real_primitive(
    formula: Formula,
    params: &[f64],
    x: f64,
    y: f64,
) -> Result<RealPrimitive, TransformError> {
    match formula {
        Formula::Poly => Ok(real_poly(params, x, y)),
        Formula::Log => Ok(real_log(params[0], params[1], x, y)),
        Formula::XLog => Ok(real_xlog(params[0], params[1], x, y)),
        Formula::Isrs => Ok(real_sqrt_chain(params[0], 0, params[1], x, y)),
        Formula::Sqrt => Ok(real_sqrt_chain(params[0], 1, params[1], x, y)),
        Formula::Pls => {
            let m = half_integer_order(params[1]).ok_or_else(|| {
                TransformError::UnsupportedKernel {
                    kernel: HILBERT_KERNEL.to_string(),
                    formula: Formula::Pls,
                    reason: format!("exponent b = {} is not half-integer", params[1]),
                }
            })?;
            Ok(real_sqrt_chain(params[0], m, params[2], x, y))
        }
        Formula::Tail => Ok(real_tail(params, x, y)),
    }
}

fn real_poly(coeffs: &[f64], x: f64, y: f64) -> RealPrimitive {
    let mut finite = 0.0;
    let mut log_coef = 0.0;
    for (k, &c) in coeffs.iter().enumerate() {
        log_coef -= c * y.powi(k as i32);
        let mut y_pow = 1.0;
        for j in 0..k {
            let m = (k - j) as f64;
            finite -= c * y_pow * x.powi((k - j) as i32) / m;
            y_pow *= y;
        }
    }
    RealPrimitive { finite, log_coef }
}

fn real_log(x0: f64, a: f64, x: f64, y: f64) -> RealPrimitive {
    let u = x - x0;
    if u == 0.0 {
        return RealPrimitive {
            finite: 0.0,
            log_coef: 0.0,
        };
    }
    let ln_u = u.abs().ln();
    RealPrimitive {
        finite: a * ln_u * (y - x0).abs().ln() - a * dilog_real(u / (y - x0)),
        log_coef: -a * ln_u,
    }
}

fn real_xlog(x0: f64, a: f64, x: f64, y: f64) -> RealPrimitive {
    let u = x - x0;
    let bracket = if u == 0.0 { 0.0 } else { u * u.abs().ln() - u };
    let log_part = real_log(x0, a, x, y);
    RealPrimitive {
        finite: (y - x0) * log_part.finite - a * bracket,
        log_coef: (y - x0) * log_part.log_coef,
    }
}

/// ISRS (`m = 0`), SQRT (`m = 1`) and half-integer PLS (`b = m - 1/2`).
fn real_sqrt_chain(x0: f64, m: i32, a: f64, x: f64, y: f64) -> RealPrimitive {
    let u = x - x0;
    let t = u.abs().sqrt();
    // pole side: y and the piece on the same side of the anchor
    let pole_side = (y - x0 != 0.0) && ((y - x0 > 0.0) == (u >= 0.0));
    let mut finite;
    let mut log_coef = 0.0;
    if pole_side {
        let w = (y - x0).abs().sqrt();
        finite = 2.0 * a * w.powi(2 * m - 1) * (w + t).ln();
        log_coef = -a * w.powi(2 * m - 1);
        let mut t_pow = t;
        for j in 0..m {
            finite -= 2.0 * a * w.powi(2 * (m - 1 - j)) * t_pow / (2 * j + 1) as f64;
            t_pow *= t * t;
        }
    } else {
        // kernel root is imaginary: artanh turns into arctan
        let v = (y - x0).abs().sqrt();
        let parity = if m % 2 == 0 { -1.0 } else { 1.0 };
        finite = 2.0 * a * parity * v.powi(2 * m - 1) * (t / v).atan();
        let mut t_pow = t;
        for j in 0..m {
            let sign = if (m - 1 - j) % 2 == 0 { 1.0 } else { -1.0 };
            finite -= 2.0 * a * sign * v.powi(2 * (m - 1 - j)) * t_pow / (2 * j + 1) as f64;
            t_pow *= t * t;
        }
    }
    RealPrimitive { finite, log_coef }
}

fn real_tail(params: &[f64], x: f64, y: f64) -> RealPrimitive {
    let (p, q, a, b) = (params[0], params[1], params[2], params[3]);
    let disc = q * q - 4.0 * p;
    let f_at_y = |den: f64| (a + b * y) / den;
    if disc < 0.0 {
        // conjugate root pair
        let sigma = (-disc).sqrt() / 2.0;
        let rho = -q / 2.0;
        let r = Complex64::new(rho, sigma);
        let residue = Complex64::new(a + b * rho, b * sigma) / (2.0 * Complex64::new(0.0, sigma));
        let coef = residue / (y - r);
        let finite = 2.0 * (coef * (Complex64::new(x - rho, -sigma)).ln()).re;
        let den = p + q * y + y * y;
        RealPrimitive {
            finite,
            log_coef: -f_at_y(den),
        }
    } else if disc > 0.0 {
        let s = disc.sqrt();
        let roots = [(-q + s) / 2.0, (-q - s) / 2.0];
        if y != roots[0] && y != roots[1] {
            let mut finite = 0.0;
            for (root, other) in [(roots[0], roots[1]), (roots[1], roots[0])] {
                let residue = (a + b * root) / (root - other);
                finite += residue / (y - root) * (x - root).abs().ln();
            }
            let den = p + q * y + y * y;
            RealPrimitive {
                finite,
                log_coef: -f_at_y(den),
            }
        } else {
            // y sits on a simple denominator root (outside the piece):
            // second-order pole at y in the partial fractions
            let other = if y == roots[0] { roots[1] } else { roots[0] };
            let alpha = (a + b * other) / ((other - y) * (other - y));
            let gamma = (a + b * y) / (y - other);
            let beta = b / (y - other) - (a + b * y) / ((y - other) * (y - other));
            RealPrimitive {
                finite: -alpha * (x - other).abs().ln() + gamma / (x - y),
                log_coef: -beta,
            }
        }
    } else {
        let r = -q / 2.0;
        if y != r {
            let yr = y - r;
            let c = a + b * r;
            RealPrimitive {
                finite: (b / yr + c / (yr * yr)) * (x - r).abs().ln() - c / (yr * (x - r)),
                log_coef: -(b / yr + c / (yr * yr)),
            }
        } else {
            // y on the double root: integrand is -(a + b x)/(x - y)^3
            let d = x - y;
            RealPrimitive {
                finite: b / d + (a + b * y) / (2.0 * d * d),
                log_coef: 0.0,
            }
        }
    }
}

fn hilbert_real_axis(f: &PiecewiseFunction, y: f64) -> Result<Complex64, TransformError> {
    let unfolded = f.unfold();
    for piece in unfolded.pieces() {
        let (x1, x2) = piece.interval();
        if (y == x1 && !piece.included().0) || (y == x2 && !piece.included().1) {
            return Err(TransformError::SingularPoint { point: y });
        }
        for term in piece.terms() {
            // the closed forms degenerate when y sits exactly on an anchor
            if term.formula().anchor(term.params()) == Some(y) {
                return Err(TransformError::SingularPoint { point: y });
            }
        }
    }

    let mut real = 0.0;
    // coefficient of the unpaired ln|y - x| at x = y, per endpoint sign
    let mut log_acc = 0.0;
    let mut log_scale: f64 = 0.0;
    for piece in unfolded.pieces() {
        let (x1, x2) = piece.interval();
        for term in piece.terms() {
            for (endpoint, sign) in [(x2, 1.0), (x1, -1.0)] {
                let prim = real_primitive(term.formula(), term.params(), endpoint, y)?;
                real += sign * prim.finite;
                if endpoint == y {
                    log_acc += sign * prim.log_coef;
                    log_scale = log_scale.max(prim.log_coef.abs());
                } else {
                    real += sign * prim.log_coef * (y - endpoint).abs().ln();
                }
            }
        }
    }
    if log_acc.abs() > 1e-9 * log_scale.max(1.0) {
        // the one-sided logs do not cancel: H diverges at y
        return Err(TransformError::SingularPoint { point: y });
    }
    Ok(Complex64::new(real, -PI * f.evaluate(y)))
}
