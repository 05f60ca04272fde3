//! Built-in demonstration target: the tight-binding density of states of
//! the two-dimensional square lattice.
//!
//! Electrons hopping with unit energy between neighboring sites disperse
//! as `eps(k) = 2(cos kx + cos ky)`; the density of states is known in
//! closed form, `N(E) = K(1 - (E/4)^2) / (2 pi^2)` on `|E| <= 4` with
//! `K` the complete elliptic integral of the first kind. It carries jump
//! discontinuities at `E = +-4` and a logarithmic singularity at `E = 0`,
//! which makes it a good stress test for nonanalytic fitting.

use std::f64::consts::PI;

/// Complete elliptic integral of the first kind `K(m)` (parameter
/// convention, `m = k^2`), via the arithmetic-geometric mean.
///
/// Quadratic convergence gives full double precision in a handful of
/// iterations for `m < 1`.
pub fn elliptic_k_agm(m: f64) -> f64 {
    assert!(m < 1.0, "K(m) requires m < 1, got {m}");
    let mut a = 1.0_f64;
    let mut g = (1.0 - m).sqrt();
    for _ in 0..60 {
        if (a - g).abs() <= f64::EPSILON * a.abs() {
            break;
        }
        (a, g) = (0.5 * (a + g), (a * g).sqrt());
    }
    PI / (2.0 * a)
}

/// Square-lattice density of states `N(E)`.
///
/// The elliptic-integral form loses accuracy through the `1 - (E/4)^2`
/// cancellation for tiny `|E|`, so below `1e-4` the logarithmic
/// expansion `ln(16/|E|) / (2 pi^2)` is used instead. Zero outside
/// `|E| <= 4`.
pub fn square_lattice_dos(e: f64) -> f64 {
    let abs_e = e.abs();
    if abs_e > 4.0 {
        return 0.0;
    }
    if abs_e < 1e-4 {
        return (16.0 / abs_e).ln() / (2.0 * PI * PI);
    }
    elliptic_k_agm(1.0 - (e / 4.0) * (e / 4.0)) / (2.0 * PI * PI)
}
