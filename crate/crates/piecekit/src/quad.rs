//! Adaptive Gauss-Kronrod quadrature.
//!
//! This is the slow path: a globally adaptive 7-15 pair used by tests,
//! the acceptance suite and the `quad` CLI subcommand to cross-check the
//! analytic transforms. It shares no code with the kernel primitives, so
//! agreement between the two is evidence rather than tautology.
//!
//! Endpoints are never evaluated (all nodes are interior) and a
//! square-root substitution is available for integrable endpoint
//! singularities.

use std::fmt;

use num_complex::Complex64;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

/// The subdivision budget ran out; carries the best value found.
#[derive(Debug, Clone, Copy)]
pub struct NoConvergence<T> {
    pub value: T,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

impl<T> fmt::Display for NoConvergence<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "quadrature did not converge after {} subdivisions (error estimate {:e})",
            self.subdivisions, self.error_estimate
        )
    }
}

impl<T: fmt::Debug> std::error::Error for NoConvergence<T> {}

const MAX_SUBDIVISIONS: usize = 10_000;

// 15-point Kronrod abscissae (positive half) and weights, with the
// embedded 7-point Gauss weights on the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Scalar the engine can integrate: real or complex values.
pub trait QuadScalar: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn scale(self, c: f64) -> Self;
    fn norm(self) -> f64;
}

impl QuadScalar for f64 {
    fn zero() -> f64 {
        0.0
    }
    fn add(self, other: f64) -> f64 {
        self + other
    }
    fn sub(self, other: f64) -> f64 {
        self - other
    }
    fn scale(self, c: f64) -> f64 {
        self * c
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadScalar for Complex64 {
    fn zero() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Complex64) -> Complex64 {
        self + other
    }
    fn sub(self, other: Complex64) -> Complex64 {
        self - other
    }
    fn scale(self, c: f64) -> Complex64 {
        self * c
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
}

/// QUADPACK-style conservative rescaling of the raw `|K - G|` estimate.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn gk15<T: QuadScalar, F: Fn(f64) -> T>(g: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = g(center);

    let mut resk = fc.scale(WGK[7]);
    let mut resg = fc.scale(WG[3]);
    let mut resabs = resk.norm();
    let mut samples = [T::zero(); 15];
    samples[7] = fc;

    for j in 0..7 {
        let offset = half * XGK[j];
        let f1 = g(center - offset);
        let f2 = g(center + offset);
        samples[j] = f1;
        samples[14 - j] = f2;
        let fsum = f1.add(f2);
        resk = resk.add(fsum.scale(WGK[j]));
        if j % 2 == 1 {
            resg = resg.add(fsum.scale(WG[j / 2]));
        }
        resabs += WGK[j] * (f1.norm() + f2.norm());
    }

    let mean = resk.scale(0.5);
    let mut resasc = WGK[7] * fc.sub(mean).norm();
    for j in 0..7 {
        resasc += WGK[j] * (samples[j].sub(mean).norm() + samples[14 - j].sub(mean).norm());
    }

    let err = resk.sub(resg).norm() * half.abs();
    let value = resk.scale(half);
    resabs *= half.abs();
    resasc *= half.abs();
    (value, rescale_error(err, resabs, resasc))
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

fn adaptive<T: QuadScalar, F: Fn(f64) -> T>(
    g: &F,
    a: f64,
    b: f64,
    rtol: f64,
    atol: f64,
) -> Result<QuadResult<T>, NoConvergence<T>> {
    let (value, err) = gk15(g, a, b);
    let mut panels = vec![Panel { a, b, value, err }];
    let mut total = value;
    let mut err_sum = err;

    loop {
        let finite = total.norm().is_finite() && err_sum.is_finite();
        if finite && err_sum <= atol.max(rtol * total.norm()) {
            return Ok(QuadResult {
                value: total,
                error_estimate: err_sum,
                subdivisions: panels.len(),
            });
        }
        if !finite || panels.len() >= MAX_SUBDIVISIONS {
            return Err(NoConvergence {
                value: total,
                error_estimate: err_sum,
                subdivisions: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.err.total_cmp(&b.1.err))
            .map(|(i, _)| i)
            .expect("panel list is never empty");
        let Panel { a, b, value, err } = panels.swap_remove(worst);
        total = total.sub(value);
        err_sum -= err;

        let mid = 0.5 * (a + b);
        for (lo, hi) in [(a, mid), (mid, b)] {
            let (v, e) = gk15(g, lo, hi);
            total = total.add(v);
            err_sum += e;
            panels.push(Panel {
                a: lo,
                b: hi,
                value: v,
                err: e,
            });
        }
    }
}

// x = a + t^2 (resp. b - t^2) softens an integrable endpoint singularity
fn left_substituted<T: QuadScalar>(
    g: &impl Fn(f64) -> T,
    a: f64,
    b: f64,
    rtol: f64,
    atol: f64,
) -> Result<QuadResult<T>, NoConvergence<T>> {
    let h = |t: f64| g(a + t * t).scale(2.0 * t);
    adaptive(&h, 0.0, (b - a).sqrt(), rtol, atol)
}

fn right_substituted<T: QuadScalar>(
    g: &impl Fn(f64) -> T,
    a: f64,
    b: f64,
    rtol: f64,
    atol: f64,
) -> Result<QuadResult<T>, NoConvergence<T>> {
    let h = |t: f64| g(b - t * t).scale(2.0 * t);
    adaptive(&h, 0.0, (b - a).sqrt(), rtol, atol)
}

fn with_flags<T: QuadScalar>(
    g: impl Fn(f64) -> T,
    interval: (f64, f64),
    singular: (bool, bool),
    rtol: f64,
    atol: f64,
) -> Result<QuadResult<T>, NoConvergence<T>> {
    let (a, b) = interval;
    match singular {
        (false, false) => adaptive(&g, a, b, rtol, atol),
        (true, false) => left_substituted(&g, a, b, rtol, atol),
        (false, true) => right_substituted(&g, a, b, rtol, atol),
        (true, true) => {
            let mid = 0.5 * (a + b);
            let left = left_substituted(&g, a, mid, rtol, 0.5 * atol)?;
            let right = right_substituted(&g, mid, b, rtol, 0.5 * atol)?;
            Ok(QuadResult {
                value: left.value.add(right.value),
                error_estimate: left.error_estimate + right.error_estimate,
                subdivisions: left.subdivisions + right.subdivisions,
            })
        }
    }
}

/// Integrate a real function over a finite interval.
pub fn integrate(
    g: impl Fn(f64) -> f64,
    interval: (f64, f64),
    rtol: f64,
    atol: f64,
) -> Result<QuadResult<f64>, NoConvergence<f64>> {
    adaptive(&g, interval.0, interval.1, rtol, atol)
}

/// Integrate a real function whose endpoints may carry integrable
/// singularities; flagged ends use the square-root substitution.
pub fn integrate_singular(
    g: impl Fn(f64) -> f64,
    interval: (f64, f64),
    singular: (bool, bool),
    rtol: f64,
    atol: f64,
) -> Result<QuadResult<f64>, NoConvergence<f64>> {
    with_flags(g, interval, singular, rtol, atol)
}

/// Integrate a complex-valued function of a real variable.
pub fn integrate_complex(
    g: impl Fn(f64) -> Complex64,
    interval: (f64, f64),
    rtol: f64,
    atol: f64,
) -> Result<QuadResult<Complex64>, NoConvergence<Complex64>> {
    adaptive(&g, interval.0, interval.1, rtol, atol)
}

/// Complex variant of [`integrate_singular`].
pub fn integrate_complex_singular(
    g: impl Fn(f64) -> Complex64,
    interval: (f64, f64),
    singular: (bool, bool),
    rtol: f64,
    atol: f64,
) -> Result<QuadResult<Complex64>, NoConvergence<Complex64>> {
    with_flags(g, interval, singular, rtol, atol)
}

/// Moment `int x^n f(x) dx` of a piecewise function by quadrature: the
/// slow cross-check for [`crate::kernel::moments`]. Pieces are
/// integrated one by one, excluded endpoints flagged as singular.
pub fn piecewise_moment(
    f: &crate::piece::PiecewiseFunction,
    n: u32,
    rtol: f64,
    atol: f64,
) -> Result<QuadResult<f64>, NoConvergence<f64>> {
    let unfolded = f.unfold();
    let mut value = 0.0;
    let mut error_estimate = 0.0;
    let mut subdivisions = 0;
    for piece in unfolded.pieces() {
        let flags = (!piece.included().0, !piece.included().1);
        let r = integrate_singular(
            |x| x.powi(n as i32) * piece.eval(x),
            piece.interval(),
            flags,
            rtol,
            atol,
        )?;
        value += r.value;
        error_estimate += r.error_estimate;
        subdivisions += r.subdivisions;
    }
    Ok(QuadResult {
        value,
        error_estimate,
        subdivisions,
    })
}

/// Hilbert transform `int f(x)/(z - x) dx` by quadrature for `Im z != 0`:
/// the slow cross-check for [`crate::hilbert::hilbert`].
pub fn piecewise_hilbert(
    f: &crate::piece::PiecewiseFunction,
    z: Complex64,
    rtol: f64,
    atol: f64,
) -> Result<QuadResult<Complex64>, NoConvergence<Complex64>> {
    assert!(z.im != 0.0, "quadrature Hilbert oracle needs Im z != 0");
    let unfolded = f.unfold();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error_estimate = 0.0;
    let mut subdivisions = 0;
    for piece in unfolded.pieces() {
        let flags = (!piece.included().0, !piece.included().1);
        let r = integrate_complex_singular(
            |x| piece.eval(x) / (z - x),
            piece.interval(),
            flags,
            rtol,
            atol,
        )?;
        value += r.value;
        error_estimate += r.error_estimate;
        subdivisions += r.subdivisions;
    }
    Ok(QuadResult {
        value,
        error_estimate,
        subdivisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_on_single_panel() {
        let r = integrate(|x| x * x, (0.0, 1.0), 1e-12, 0.0).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(r.subdivisions, 1);
    }

    #[test]
    fn polynomials_up_to_degree_ten_are_exact() {
        for deg in 0..=10 {
            let r = integrate(|x| x.powi(deg), (0.0, 1.0), 1e-12, 0.0).unwrap();
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!(
                ((r.value - exact) / exact).abs() < 1e-14,
                "degree {deg}: {} vs {exact}",
                r.value
            );
        }
    }

    #[test]
    fn log_singularity_with_flag() {
        let r = integrate_singular(|x| x.ln(), (0.0, 1.0), (true, false), 1e-12, 0.0).unwrap();
        assert!((r.value + 1.0).abs() < 1e-10, "got {}", r.value);
    }

    #[test]
    fn inverse_sqrt_singularity_both_ends() {
        let g = |x: f64| 1.0 / (x * (1.0 - x)).sqrt();
        let r = integrate_singular(g, (0.0, 1.0), (true, true), 1e-12, 0.0).unwrap();
        assert!((r.value - std::f64::consts::PI).abs() < 1e-10, "got {}", r.value);
    }

    #[test]
    fn complex_cauchy_kernel_matches_closed_form() {
        let z = Complex64::new(0.0, 2.0);
        let r = integrate_complex(|x| 1.0 / (z - x), (-1.0, 1.0), 1e-12, 0.0).unwrap();
        let exact = ((z + 1.0) / (z - 1.0)).ln();
        assert!((r.value - exact).norm() / exact.norm() < 1e-10);
    }

    #[test]
    fn divergent_integral_reports_no_convergence() {
        let err = integrate(|x| 1.0 / x, (0.0, 1.0), 1e-10, 0.0).unwrap_err();
        assert!(err.error_estimate > 0.0);
        assert!(err.subdivisions > 100);
    }

    #[test]
    fn error_estimate_is_nonnegative_and_honest() {
        let r = integrate(|x| (5.0 * x).sin(), (0.0, 3.0), 1e-10, 0.0).unwrap();
        let exact = (1.0 - (15.0_f64).cos()) / 5.0;
        assert!(r.error_estimate >= 0.0);
        assert!((r.value - exact).abs() <= r.error_estimate.max(1e-12));
    }
}
