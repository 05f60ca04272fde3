//! Kernel-primitive registry and quadrature-free transforms.
//!
//! An integral transform `(K o f)(X) = int f(x) K(x, X) dx` becomes a sum
//! of boundary evaluations once a primitive `P` with `dP/dx = F(x) K(x, X)`
//! is known for every formula `F` appearing in `f`. The registry maps
//! `(kernel id, formula)` pairs to such primitives; the built-in Hilbert
//! kernel is pre-registered, and users may register their own kernels
//! before freezing a registry.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock};

use num_complex::Complex64;
use thiserror::Error;

use crate::catalog::{moment_primitive, Formula};
use crate::hilbert;
use crate::piece::{EmptyFunction, Parity, Piece, PiecewiseFunction};

/// Closed-form primitive of `F(x; params) K(x, X)` in `x`.
pub type PrimitiveFn =
    Arc<dyn Fn(f64, Complex64, &[f64]) -> Result<Complex64, TransformError> + Send + Sync>;

#[derive(Debug, Clone, Error)]
pub enum TransformError {
    #[error("no primitive registered for formula {formula} under kernel `{kernel}`")]
    MissingPrimitive { kernel: String, formula: Formula },
    #[error("kernel `{kernel}` does not support {formula}: {reason}")]
    UnsupportedKernel {
        kernel: String,
        formula: Formula,
        reason: String,
    },
    #[error("registry is frozen; register primitives during initialization")]
    RegistryFrozen,
    #[error("real-axis evaluation at y = {point} hits a singular point of the function")]
    SingularPoint { point: f64 },
    #[error(transparent)]
    Empty(#[from] EmptyFunction),
}

/// Write-once table of kernel primitives: filled during initialization,
/// then frozen and shared read-only between threads.
pub struct KernelRegistry {
    primitives: HashMap<(String, Formula), PrimitiveFn>,
    frozen: bool,
}

impl KernelRegistry {
    pub fn new() -> KernelRegistry {
        KernelRegistry {
            primitives: HashMap::new(),
            frozen: false,
        }
    }

    /// Register a primitive for `(kernel, formula)`. Fails once the
    /// registry has been frozen.
    pub fn register(
        &mut self,
        kernel: &str,
        formula: Formula,
        primitive: PrimitiveFn,
    ) -> Result<(), TransformError> {
        if self.frozen {
            return Err(TransformError::RegistryFrozen);
        }
        self.primitives.insert((kernel.to_string(), formula), primitive);
        Ok(())
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    fn get(&self, kernel: &str, formula: Formula) -> Result<&PrimitiveFn, TransformError> {
        self.primitives
            .get(&(kernel.to_string(), formula))
            .ok_or_else(|| TransformError::MissingPrimitive {
                kernel: kernel.to_string(),
                formula,
            })
    }

    /// `sum over pieces, terms of [P(x2, X) - P(x1, X)]` on the unfolded
    /// function.
    pub fn transform(
        &self,
        f: &PiecewiseFunction,
        kernel: &str,
        x: Complex64,
    ) -> Result<Complex64, TransformError> {
        let unfolded = f.unfold();
        let mut acc = Complex64::new(0.0, 0.0);
        for piece in unfolded.pieces() {
            let (x1, x2) = piece.interval();
            for term in piece.terms() {
                let primitive = self.get(kernel, term.formula())?;
                let hi = primitive(x2, x, term.params())?;
                let lo = primitive(x1, x, term.params())?;
                acc += hi - lo;
            }
        }
        Ok(acc)
    }
}

impl Default for KernelRegistry {
    fn default() -> Self {
        KernelRegistry::new()
    }
}

/// The kernel id of the built-in Hilbert primitives.
pub const HILBERT_KERNEL: &str = "hilbert";

/// Shared frozen registry holding the built-in Hilbert primitives.
pub fn builtin_registry() -> &'static KernelRegistry {
    static REGISTRY: LazyLock<KernelRegistry> = LazyLock::new(|| {
        let mut registry = KernelRegistry::new();
        hilbert::register_hilbert_primitives(&mut registry)
            .expect("fresh registry accepts registrations");
        registry.freeze();
        registry
    });
    &REGISTRY
}

fn piece_moment(piece: &Piece, n: u32) -> f64 {
    let (x1, x2) = piece.interval();
    piece
        .terms()
        .iter()
        .map(|t| {
            moment_primitive(t.formula(), t.params(), n, x2)
                - moment_primitive(t.formula(), t.params(), n, x1)
        })
        .sum()
}

/// Moments `M_n = int x^n f(x) dx` for `n = 0..=n_max`, evaluated from
/// the closed-form primitives. Parity shortcut: for even functions the
/// odd moments vanish identically and the even ones double the half-axis
/// contribution; conversely for odd functions.
pub fn moments(f: &PiecewiseFunction, n_max: u32) -> Result<Vec<f64>, EmptyFunction> {
    if f.is_empty() {
        return Err(EmptyFunction);
    }
    let half = |n: u32| -> f64 { f.pieces().iter().map(|p| piece_moment(p, n)).sum() };
    let out = (0..=n_max)
        .map(|n| match f.parity() {
            Parity::None => half(n),
            Parity::Even => {
                if n % 2 == 1 {
                    0.0
                } else {
                    2.0 * half(n)
                }
            }
            Parity::Odd => {
                if n % 2 == 0 {
                    0.0
                } else {
                    2.0 * half(n)
                }
            }
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piece::Term;

    fn box_even() -> PiecewiseFunction {
        let piece = Piece::new(
            (0.0, 1.0),
            (true, true),
            vec![Term::new(Formula::Poly, vec![1.0]).unwrap()],
        )
        .unwrap();
        PiecewiseFunction::new(Parity::Even, vec![piece]).unwrap()
    }

    #[test]
    fn moments_of_even_box() {
        let m = moments(&box_even(), 2).unwrap();
        assert_eq!(m[0], 2.0);
        assert_eq!(m[1], 0.0);
        assert!((m[2] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn odd_functions_have_vanishing_even_moments() {
        let piece = Piece::new(
            (0.5, 2.0),
            (true, true),
            vec![Term::new(Formula::Sqrt, vec![0.25, 1.3]).unwrap()],
        )
        .unwrap();
        let f = PiecewiseFunction::new(Parity::Odd, vec![piece]).unwrap();
        let m = moments(&f, 4).unwrap();
        assert_eq!(m[0], 0.0);
        assert_eq!(m[2], 0.0);
        assert_eq!(m[4], 0.0);
        assert!(m[1] != 0.0 && m[3] != 0.0);
    }

    #[test]
    fn moments_of_empty_function_error() {
        assert!(moments(&PiecewiseFunction::empty(Parity::None), 0).is_err());
    }

    #[test]
    fn frozen_registry_rejects_registration() {
        let mut registry = KernelRegistry::new();
        registry.freeze();
        let primitive: PrimitiveFn = Arc::new(|_, _, _| Ok(Complex64::new(0.0, 0.0)));
        assert!(matches!(
            registry.register("unit", Formula::Poly, primitive),
            Err(TransformError::RegistryFrozen)
        ));
    }

    #[test]
    fn missing_primitive_is_reported() {
        let registry = KernelRegistry::new();
        let err = registry
            .transform(&box_even(), "unit", Complex64::new(0.0, 1.0))
            .unwrap_err();
        assert!(matches!(err, TransformError::MissingPrimitive { .. }));
    }

    #[test]
    fn unit_kernel_via_moment_primitive_reproduces_m0() {
        let mut registry = KernelRegistry::new();
        let primitive: PrimitiveFn = Arc::new(|x, _, params| {
            Ok(Complex64::new(
                moment_primitive(Formula::Poly, params, 0, x),
                0.0,
            ))
        });
        registry.register("unit", Formula::Poly, primitive).unwrap();
        registry.freeze();
        let f = box_even();
        let value = registry
            .transform(&f, "unit", Complex64::new(0.0, 0.0))
            .unwrap();
        let m0 = moments(&f, 0).unwrap()[0];
        assert_eq!(value.re, m0);
        assert_eq!(value.im, 0.0);
    }
}
