//! Linear differential operators with (Laurent) polynomial coefficients.
//!
//! An operator is stored as a sparse sum `Σ c[k,j] x^j D^k`. Composition,
//! addition and the formal adjoint are exact whenever the coefficient type is
//! exact, which is what the operator identities in this crate are checked with.

mod chains;
mod coeff;
mod factored;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use chains::{compose_chain, disentangle_b, make_an, make_t, shift_past_an, stirling2};
pub use coeff::{binomial, decimal_rational, falling_int, pochhammer, Coeff};

/// Exact coefficient type.
pub type Rational = num_rational::BigRational;
pub use factored::{adjoint_under_weight, Factor, FactoredOp, FactoredTerm};

/// `Σ c[k,j] x^j D^k`, keyed by `(k, j)`. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyDiffOp<C: Coeff = f64> {
    terms: BTreeMap<(usize, i32), C>,
}

/// A Laurent polynomial `Σ c[j] x^j`, the image of a monomial under an operator.
pub type LaurentPoly<C> = BTreeMap<i32, C>;

impl<C: Coeff> Default for PolyDiffOp<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> PolyDiffOp<C> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn identity() -> Self {
        Self::term(0, 0, C::one())
    }

    pub fn scalar(c: C) -> Self {
        Self::term(0, 0, c)
    }

    /// Multiplication by `x^j`.
    pub fn x_pow(j: i32) -> Self {
        Self::term(0, j, C::one())
    }

    /// `D^k`.
    pub fn deriv(k: usize) -> Self {
        Self::term(k, 0, C::one())
    }

    /// The single term `c x^j D^k`.
    pub fn term(k: usize, j: i32, c: C) -> Self {
        let mut op = Self::zero();
        op.add_term(k, j, c);
        op
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, i32, C)>) -> Self {
        let mut op = Self::zero();
        for (k, j, c) in terms {
            op.add_term(k, j, c);
        }
        op
    }

    fn add_term(&mut self, k: usize, j: i32, c: C) {
        if c.is_zero() {
            return;
        }
        let key = (k, j);
        let merged = match self.terms.remove(&key) {
            Some(old) => old + c,
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(key, merged);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest derivative present (0 for the zero operator).
    pub fn order(&self) -> usize {
        self.terms.keys().map(|&(k, _)| k).max().unwrap_or(0)
    }

    pub fn coeff(&self, k: usize, j: i32) -> C {
        self.terms.get(&(k, j)).cloned().unwrap_or_else(C::zero)
    }

    /// Terms as `(k, j, coeff)` in `(k, j)` order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, i32, &C)> {
        self.terms.iter().map(|(&(k, j), c)| (k, j, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Smallest power of `x` in any coefficient; negative means a genuine
    /// Laurent term.
    pub fn min_x_power(&self) -> i32 {
        self.terms.keys().map(|&(_, j)| j).min().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(k, j), c) in &other.terms {
            out.add_term(k, j, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-C::one()))
    }

    pub fn scale(&self, s: &C) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(&(k, j), c)| (k, j, c.clone() * s.clone())),
        )
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    ///
    /// Uses `D^k x^l = Σ_i C(k,i) l^(i) x^(l-i) D^(k-i)` with `l^(i)` the
    /// falling factorial, valid for negative `l` as well.
    pub fn compose(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(k, j), c) in &self.terms {
            for (&(m, l), d) in &other.terms {
                for i in 0..=k {
                    let ff = falling_int(l as i64, i);
                    if ff == 0 {
                        break;
                    }
                    let w = C::from_i64(binomial(k, i) * ff);
                    out.add_term(k - i + m, j + l - i as i32, w * c.clone() * d.clone());
                }
            }
        }
        out
    }

    /// Image of the monomial `x^m` as a Laurent polynomial.
    pub fn apply_monomial(&self, m: i32) -> LaurentPoly<C> {
        let mut out = LaurentPoly::new();
        for (&(k, j), c) in &self.terms {
            let ff = falling_int(m as i64, k);
            if ff == 0 {
                continue;
            }
            let entry = out.entry(m - k as i32 + j).or_insert_with(C::zero);
            *entry = entry.clone() + c.clone() * C::from_i64(ff);
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Image of a Laurent polynomial.
    pub fn apply_poly(&self, poly: &LaurentPoly<C>) -> LaurentPoly<C> {
        let mut out = LaurentPoly::new();
        for (&m, a) in poly {
            for (p, c) in self.apply_monomial(m) {
                let entry = out.entry(p).or_insert_with(C::zero);
                *entry = entry.clone() + c * a.clone();
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Formal adjoint with respect to the weight `x^γ dx`, computed from the
    /// expanded form: `x^-γ ∘ (Σ c (-1)^k D^k x^j) ∘ x^γ`.
    pub fn formal_adjoint(&self, gamma: i32) -> Self {
        let mut dagger = Self::zero();
        for (&(k, j), c) in &self.terms {
            let sign = if k % 2 == 0 { C::one() } else { -C::one() };
            let term = Self::deriv(k).compose(&Self::x_pow(j)).scale(&(sign * c.clone()));
            dagger = dagger.add(&term);
        }
        Self::x_pow(-gamma).compose(&dagger).compose(&Self::x_pow(gamma))
    }

    /// Termwise equality using the coefficient type's comparison.
    pub fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        let keys: std::collections::BTreeSet<_> =
            self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter()
            .all(|&(k, j)| self.coeff(k, j).approx_eq(&other.coeff(k, j), rel_tol))
    }

    pub fn to_f64(&self) -> PolyDiffOp<f64> {
        PolyDiffOp::from_terms(self.terms.iter().map(|(&(k, j), c)| (k, j, c.to_f64())))
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> PolyDiffOp<D> {
        PolyDiffOp::from_terms(self.terms.iter().map(|(&(k, j), c)| (k, j, f(c))))
    }

    /// `Σ c x^j f^(k)(x)` given the derivative values `derivs[k] = f^(k)(x)`.
    pub fn apply_derivs(&self, x: f64, derivs: &[f64]) -> Result<f64> {
        let order = self.order();
        if derivs.len() <= order && !self.is_zero() {
            return Err(Error::InsufficientSmoothness {
                required: order,
                available: derivs.len().saturating_sub(1),
            });
        }
        let mut acc = 0.0;
        for (&(k, j), c) in &self.terms {
            acc += c.to_f64() * x.powi(j) * derivs[k];
        }
        Ok(acc)
    }

    /// Applies the operator to `f` at `x`.
    pub fn apply_to(&self, f: &dyn Smooth, x: f64) -> Result<f64> {
        let order = self.order();
        if order > f.max_order() {
            return Err(Error::InsufficientSmoothness {
                required: order,
                available: f.max_order(),
            });
        }
        let mut derivs = vec![0.0; order + 1];
        f.derivatives(x, &mut derivs);
        self.apply_derivs(x, &derivs)
    }

    pub fn to_json(&self) -> OperatorJson {
        OperatorJson {
            order: self.order(),
            terms: self
                .terms
                .iter()
                .map(|(&(k, j), c)| TermJson {
                    k,
                    j,
                    coeff: c.to_f64(),
                    exact: c.exact_repr(),
                })
                .collect(),
        }
    }
}

/// A function that can report its value and derivatives at a point.
pub trait Smooth {
    /// Highest derivative the function can supply.
    fn max_order(&self) -> usize;

    /// Fills `out[k]` with `f^(k)(x)` for `k < out.len()`.
    fn derivatives(&self, x: f64, out: &mut [f64]);

    fn value(&self, x: f64) -> f64 {
        let mut v = [0.0];
        self.derivatives(x, &mut v);
        v[0]
    }
}

/// Closure adapter: `f(x, k)` returns the `k`-th derivative.
pub struct SmoothFn<F> {
    pub max_order: usize,
    pub f: F,
}

impl<F: Fn(f64, usize) -> f64> Smooth for SmoothFn<F> {
    fn max_order(&self) -> usize {
        self.max_order
    }

    fn derivatives(&self, x: f64, out: &mut [f64]) {
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = (self.f)(x, k);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub k: usize,
    pub j: i32,
    pub coeff: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub order: usize,
    pub terms: Vec<TermJson>,
}

impl OperatorJson {
    pub fn to_op(&self) -> PolyDiffOp<f64> {
        PolyDiffOp::from_terms(self.terms.iter().map(|t| (t.k, t.j, t.coeff)))
    }
}

fn fmt_coeff<C: Coeff>(c: &C) -> String {
    c.exact_repr().unwrap_or_else(|| format!("{}", c.to_f64()))
}

impl<C: Coeff> fmt::Display for PolyDiffOp<C> {
    /// Highest derivative first: `x^2 D^2 + 3 x D + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(k, j), c) in self.terms.iter().rev() {
            let v = c.to_f64();
            let neg = v < 0.0;
            let mag = if neg { fmt_coeff(&-c.clone()) } else { fmt_coeff(c) };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let mut parts = Vec::new();
            if mag != "1" || (k == 0 && j == 0) {
                parts.push(mag);
            }
            match j {
                0 => {}
                1 => parts.push("x".into()),
                _ => parts.push(format!("x^{j}")),
            }
            match k {
                0 => {}
                1 => parts.push("D".into()),
                _ => parts.push(format!("D^{k}")),
            }
            write!(f, "{}", parts.join(" "))?;
        }
        Ok(())
    }
}
