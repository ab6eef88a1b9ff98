use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive};

/// Scalar field for operator coefficients.
///
/// Two instances matter: `BigRational` for exact identities and `f64` for
/// operators that are applied to samples. Every finite `f64` is a dyadic
/// rational, so `from_f64` on `BigRational` is exact.
pub trait Coeff: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static {
    fn from_f64(x: f64) -> Self;

    fn from_i64(n: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Termwise comparison: exact equality for rationals, relative tolerance for floats.
    fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool;

    /// Exact textual form, if the type carries one.
    fn exact_repr(&self) -> Option<String> {
        None
    }

    fn pow_u(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Coeff for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn approx_eq(&self, other: &Self, rel_tol: f64) -> bool {
        let scale = self.abs().max(other.abs()).max(1.0);
        (self - other).abs() <= rel_tol * scale
    }

    fn pow_u(&self, n: u32) -> Self {
        self.powi(n as i32)
    }
}

impl Coeff for BigRational {
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(|| panic!("non-finite coefficient {x}"))
    }

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn to_f64(&self) -> f64 {
        // numer/denom may individually overflow f64
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
            _ => {
                let shift = self.numer().bits().max(self.denom().bits()) as i64 - 900;
                let shift = shift.max(0) as usize;
                let n = (self.numer() >> shift).to_f64().unwrap_or(0.0);
                let d = (self.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
                n / d
            }
        }
    }

    fn approx_eq(&self, other: &Self, _rel_tol: f64) -> bool {
        self == other
    }

    fn exact_repr(&self) -> Option<String> {
        if self.denom().is_one() {
            Some(self.numer().to_string())
        } else {
            Some(format!("{}/{}", self.numer(), self.denom()))
        }
    }
}

/// Rising factorial (a)_j.
pub fn pochhammer<C: Coeff>(a: &C, j: usize) -> C {
    let mut acc = C::one();
    for i in 0..j {
        acc = acc * (a.clone() + C::from_i64(i as i64));
    }
    acc
}

/// Falling factorial l (l-1) ... (l-i+1) for an integer l.
pub fn falling_int(l: i64, i: usize) -> i64 {
    let mut acc = 1i64;
    for t in 0..i as i64 {
        acc *= l - t;
        if acc == 0 {
            break;
        }
    }
    acc
}

pub fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

/// The rational with the same shortest decimal expansion as `x`, so that
/// `0.1 + 0.2` and `0.3` map to values that compare equal.
pub fn decimal_rational(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let s = format!("{x}");
    let (neg, s) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.as_str()),
    };
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let numer: BigInt = format!("{int}{frac}").parse().ok()?;
    let denom = BigInt::from(10u32).pow(frac.len() as u32);
    let q = BigRational::new(numer, denom);
    Some(if neg { -q } else { q })
}
