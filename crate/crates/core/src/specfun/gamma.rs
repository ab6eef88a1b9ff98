use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `B_2k / (2k (2k-1))` for k = 1..10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

/// `B_2k / 2k` for k = 1..10.
const DIGAMMA: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
    -174611.0 / 6600.0,
];

const SHIFT_TO: f64 = 15.0;

fn stirling_tail_real(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in STIRLING.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// `ln |Γ(x)|` and the sign of `Γ(x)`.
pub fn ln_gamma_sign(x: f64) -> Result<(f64, f64)> {
    if x.is_nan() || is_nonpositive_integer(x) {
        return Err(Error::Domain(format!("gamma pole at {x}")));
    }
    if x < 0.5 {
        // Γ(x) Γ(1-x) = π / sin(πx)
        let s = (PI * x).sin();
        let (lg, sg) = ln_gamma_sign(1.0 - x)?;
        return Ok((PI.ln() - s.abs().ln() - lg, s.signum() * sg));
    }
    let mut x = x;
    let mut prod = 1.0;
    while x < SHIFT_TO {
        prod *= x;
        x += 1.0;
    }
    let lg = (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_tail_real(x) - prod.ln();
    Ok((lg, 1.0))
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NAN;
    }
    ln_gamma_sign(x).map(|v| v.0).unwrap_or(f64::NAN)
}

/// `Γ(x)` for real `x`, `NaN` at the poles.
pub fn gamma(x: f64) -> f64 {
    if x.fract() == 0.0 && (1.0..=30.0).contains(&x) {
        let mut f = 1.0;
        for i in 2..x as u32 {
            f *= i as f64;
        }
        return f;
    }
    match ln_gamma_sign(x) {
        Ok((lg, s)) => s * lg.exp(),
        Err(_) => f64::NAN,
    }
}

/// Digamma `ψ(x)`.
pub fn digamma(x: f64) -> f64 {
    if x.is_nan() || is_nonpositive_integer(x) {
        return f64::NAN;
    }
    if x < 0.5 {
        // ψ(1-x) - ψ(x) = π cot(πx)
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < SHIFT_TO {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut tail = 0.0;
    for c in DIGAMMA.iter().rev() {
        tail = tail * inv2 + c;
    }
    acc + x.ln() - 0.5 / x - tail * inv2
}

/// Principal-branch `ln Γ(z)` for complex `z`.
///
/// Arguments are shifted upward until `Re z` or `|Im z|` is large and then fed
/// to the Stirling series; no reflection is used, so the result is continuous
/// along vertical lines.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && is_nonpositive_integer(z.re) {
        return Err(Error::Domain(format!("gamma pole at {}", z.re)));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite gamma argument {z}")));
    }
    // ln Π z_k: modulus from block products, argument summed term by term so
    // the branch stays principal
    let mut z = z;
    let mut ln_mod = 0.0;
    let mut arg = 0.0;
    let mut prod = 1.0;
    let mut count = 0;
    while (z.re < SHIFT_TO && z.im.abs() < SHIFT_TO) || z.re < 0.0 {
        prod *= z.norm_sqr();
        arg += z.im.atan2(z.re);
        z += 1.0;
        count += 1;
        if count % 8 == 0 {
            ln_mod += 0.5 * prod.ln();
            prod = 1.0;
        }
    }
    ln_mod += 0.5 * prod.ln();
    let shift = Complex64::new(ln_mod, arg);
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut tail = Complex64::new(0.0, 0.0);
    for c in STIRLING.iter().rev() {
        tail = tail * inv2 + c;
    }
    Ok((z - 0.5) * z.ln() - z + LN_SQRT_2PI + tail * inv - shift)
}
