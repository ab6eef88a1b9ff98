//! Quadrature rules shared by the density, Stein-equation and verification code.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes from Newton iteration on `P_n`, seeded by the Chebyshev-like guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let legendre = |z: f64| {
                let (mut p1, mut p2) = (1.0, 0.0);
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
                }
                (p1, n as f64 * (z * p1 - p2) / (z * z - 1.0))
            };
            for _ in 0..100 {
                let (p1, pp) = legendre(z);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() < 1e-16 {
                    break;
                }
            }
            let (_, pp) = legendre(z);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + h * x);
        }
        acc * h
    }
}

/// Double-exponential rule on `[a, b]`, robust to integrable endpoint
/// singularities. The integrand receives the abscissa together with its
/// distances to `a` and to `b`, which stay accurate near the endpoints.
pub fn tanh_sinh(
    a: f64,
    b: f64,
    tol: f64,
    mut f: impl FnMut(f64, f64, f64) -> f64,
) -> Result<f64> {
    let len = b - a;
    if len == 0.0 {
        return Ok(0.0);
    }
    let half_pi = 0.5 * PI;
    let tmax = 3.6;
    let mut eval = |t: f64| -> f64 {
        let u = half_pi * t.sinh();
        let cu = u.cosh();
        let w = half_pi * t.cosh() / (cu * cu);
        // distances to the endpoints, computed without cancellation
        let da = len / (1.0 + (-2.0 * u).exp());
        let db = len / (1.0 + (2.0 * u).exp());
        let x = if u < 0.0 { a + da } else { b - db };
        if da <= 0.0 || db <= 0.0 || w == 0.0 {
            return 0.0;
        }
        let v = f(x, da, db);
        if v.is_finite() {
            0.5 * len * w * v
        } else {
            0.0
        }
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut prev = sum * h;
    for level in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let cur = sum * h;
        if level >= 2 && (cur - prev).abs() <= tol * cur.abs().max(tol) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Numerical(format!(
        "tanh-sinh rule did not converge on [{a}, {b}]"
    )))
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(a: f64, b: f64, f: &mut impl FnMut(f64) -> f64) -> (f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

const MAX_PANELS: usize = 2000;

/// Globally adaptive Gauss–Kronrod (7/15) quadrature: the panel with the
/// largest error estimate is bisected until the summed estimate is below
/// `max(abs_tol, rel_tol |I|)`.
pub fn adaptive_gk(
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    mut f: impl FnMut(f64) -> f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    // (error, lo, hi, value)
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new();
    let pieces = 4;
    let w = (b - a) / pieces as f64;
    for i in 0..pieces {
        let (lo, hi) = (a + i as f64 * w, if i + 1 == pieces { b } else { a + (i + 1) as f64 * w });
        let (v, e) = gk15(lo, hi, &mut f);
        panels.push((e, lo, hi, v));
    }
    loop {
        let total: f64 = panels.iter().map(|p| p.3).sum();
        let err: f64 = panels.iter().map(|p| p.0).sum();
        if !total.is_finite() {
            return Err(Error::Numerical(format!(
                "adaptive quadrature on [{a}, {b}] produced a non-finite value"
            )));
        }
        let tol = abs_tol.max(rel_tol * total.abs());
        if err <= tol {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            // integrands computed to finite precision stall at their noise floor
            if err <= 1e3 * tol {
                return Ok(total);
            }
            return Err(Error::Numerical(format!(
                "adaptive quadrature on [{a}, {b}] stalled with error estimate {err:e}"
            )));
        }
        let (i, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .expect("panels");
        let (_, lo, hi, _) = panels.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(lo, mid, &mut f);
        let (v2, e2) = gk15(mid, hi, &mut f);
        panels.push((e1, lo, mid, v1));
        panels.push((e2, mid, hi, v2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let gl = GaussLegendre::new(10);
        let sum: f64 = gl.weights.iter().sum();
        assert_relative_eq!(sum, 2.0, max_relative = 1e-15);
        // degree 19 is integrated exactly
        let v = gl.integrate(0.0, 2.0, |x| x.powi(19));
        assert_relative_eq!(v, 2f64.powi(20) / 20.0, max_relative = 1e-14);
        let v = GaussLegendre::new(1).integrate(-1.0, 3.0, |x| 2.0 * x + 1.0);
        assert_relative_eq!(v, 12.0, max_relative = 1e-15);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularities() {
        let v = tanh_sinh(0.0, 1.0, 1e-12, |_, da, _| da.powf(-0.5)).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-11);
        let v = tanh_sinh(0.0, 1.0, 1e-12, |x, _, _| -x.ln()).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-11);
        let v = tanh_sinh(0.0, 1.0, 1e-12, |_, da, db| (da * db).powf(-0.5)).unwrap();
        assert_relative_eq!(v, PI, max_relative = 1e-11);
    }

    #[test]
    fn adaptive_gk_on_peaked_integrand() {
        let v = adaptive_gk(-1.0, 1.0, 1e-13, 1e-13, |x| 1.0 / (1e-4 + x * x)).unwrap();
        assert_relative_eq!(v, 2.0 * (1.0f64 / 1e-2).atan() / 1e-2, max_relative = 1e-11);
        let v = adaptive_gk(0.0, PI, 1e-14, 1e-14, f64::sin).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-13);
    }
}
