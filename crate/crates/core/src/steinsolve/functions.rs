use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// How fast a test function may grow at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Growth {
    Bounded,
    Linear,
    Unbounded,
}

type Eval = dyn Fn(f64, usize) -> f64 + Send + Sync;

/// A test function `h` on `(0, ∞)` together with its derivatives.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    eval: Arc<Eval>,
    max_order: Option<usize>,
    growth: Growth,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("max_order", &self.max_order)
            .field("growth", &self.growth)
            .finish()
    }
}

/// Names accepted by [`TestFunction::builtin`].
pub const BUILTIN_NAMES: [&str; 8] = [
    "exp", "sin", "cos", "lorentz", "gauss", "saturating", "identity", "one",
];

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl TestFunction {
    /// `f(x, k)` must return the `k`-th derivative for `k <= max_order`.
    pub fn new(
        name: impl Into<String>,
        max_order: Option<usize>,
        growth: Growth,
        f: impl Fn(f64, usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            max_order,
            growth,
        }
    }

    /// `exp` = e^-x, `sin`, `cos`, `lorentz` = 1/(1+x²), `gauss` = e^-x²,
    /// `saturating` = x/(1+x), `identity` = x, `one` = 1.
    pub fn builtin(name: &str) -> Result<Self> {
        let f = match name {
            "exp" => Self::new(name, None, Growth::Bounded, |x, k| sign(k) * (-x).exp()),
            "sin" => Self::new(name, None, Growth::Bounded, |x, k| {
                (x + k as f64 * FRAC_PI_2).sin()
            }),
            "cos" => Self::new(name, None, Growth::Bounded, |x, k| {
                (x + k as f64 * FRAC_PI_2).cos()
            }),
            // 1/(1+x²) = Im 1/(x - i)
            "lorentz" => Self::new(name, None, Growth::Bounded, |x, k| {
                let z = Complex64::new(x, -1.0);
                sign(k) * factorial(k) * z.powi(-(k as i32) - 1).im
            }),
            // (-1)^k H_k(x) e^-x² with physicists' Hermite polynomials
            "gauss" => Self::new(name, None, Growth::Bounded, |x, k| {
                let (mut h0, mut h1) = (1.0, 2.0 * x);
                if k == 0 {
                    return (-x * x).exp();
                }
                for j in 1..k {
                    let h2 = 2.0 * x * h1 - 2.0 * j as f64 * h0;
                    h0 = h1;
                    h1 = h2;
                }
                sign(k) * h1 * (-x * x).exp()
            }),
            "saturating" => Self::new(name, None, Growth::Bounded, |x, k| {
                if k == 0 {
                    x / (1.0 + x)
                } else {
                    -sign(k) * factorial(k) / (1.0 + x).powi(k as i32 + 1)
                }
            }),
            "identity" => Self::new(name, None, Growth::Linear, |x, k| match k {
                0 => x,
                1 => 1.0,
                _ => 0.0,
            }),
            "one" => Self::new(name, None, Growth::Bounded, |_, k| if k == 0 { 1.0 } else { 0.0 }),
            _ => {
                return Err(invalid!(
                    "unknown test function '{name}' (expected one of {})",
                    BUILTIN_NAMES.join(", ")
                ))
            }
        };
        Ok(f)
    }

    /// The six bounded, infinitely smooth builtins.
    pub fn bounded_family() -> Vec<Self> {
        ["exp", "sin", "cos", "lorentz", "gauss", "saturating"]
            .iter()
            .map(|n| Self::builtin(n).expect("builtin"))
            .collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn max_order(&self) -> Option<usize> {
        self.max_order
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.eval)(x, 0)
    }

    pub fn derivative(&self, x: f64, k: usize) -> Result<f64> {
        self.check_order(k)?;
        Ok((self.eval)(x, k))
    }

    pub(crate) fn check_order(&self, k: usize) -> Result<()> {
        match self.max_order {
            Some(m) if k > m => Err(Error::InsufficientSmoothness {
                required: k,
                available: m,
            }),
            _ => Ok(()),
        }
    }

    pub(crate) fn raw(&self) -> Arc<Eval> {
        self.eval.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-4;
        for f in TestFunction::bounded_family() {
            for &x in &[0.3, 1.0, 2.7] {
                for k in 0..4 {
                    let d = (f.derivative(x + h, k).unwrap() - f.derivative(x - h, k).unwrap()) / (2.0 * h);
                    let exact = f.derivative(x, k + 1).unwrap();
                    assert!((d - exact).abs() < 1e-6 * (1.0 + exact.abs()), "{} k={k} x={x}", f.name());
                }
            }
        }
    }

    #[test]
    fn closed_values() {
        let l = TestFunction::builtin("lorentz").unwrap();
        assert_relative_eq!(l.value(2.0), 0.2, max_relative = 1e-15);
        assert_relative_eq!(l.derivative(2.0, 1).unwrap(), -4.0 / 25.0, max_relative = 1e-14);
        let g = TestFunction::builtin("gauss").unwrap();
        assert_relative_eq!(g.derivative(1.0, 2).unwrap(), 2.0 * (-1.0f64).exp(), max_relative = 1e-14);
        assert!(TestFunction::builtin("nope").is_err());
        let limited = TestFunction::new("p", Some(1), Growth::Bounded, |x, _| x);
        assert!(matches!(
            limited.derivative(1.0, 2),
            Err(Error::InsufficientSmoothness { required: 2, available: 1 })
        ));
    }
}
