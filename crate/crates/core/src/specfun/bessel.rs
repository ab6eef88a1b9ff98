use std::f64::consts::PI;

use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAXIT: usize = 200_000;
const XMIN: f64 = 2.0;

/// `I_ν`, `K_ν` and their derivatives at one point.
///
/// For the scaled variants `i`, `ip` carry a factor `e^-x` and `k`, `kp` a
/// factor `e^x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselIK {
    pub i: f64,
    pub k: f64,
    pub ip: f64,
    pub kp: f64,
}

const C1: [f64; 7] = [
    -1.142_022_680_371_168e0,
    6.516_511_267_073_7e-3,
    3.087_090_173_086e-4,
    -3.470_626_964_9e-6,
    6.943_766_4e-9,
    3.677_95e-11,
    -1.356e-13,
];
const C2: [f64; 8] = [
    1.843_740_587_300_905e0,
    -7.685_284_084_478_67e-2,
    1.271_927_136_654_6e-3,
    -4.971_736_704_2e-6,
    -3.312_611_98e-8,
    2.423_096e-10,
    -1.702e-13,
    -1.49e-15,
];

fn chebev(c: &[f64], x: f64) -> f64 {
    let y2 = 2.0 * x;
    let (mut d, mut dd) = (0.0, 0.0);
    for &cj in c[1..].iter().rev() {
        let sv = d;
        d = y2 * d - dd + cj;
        dd = sv;
    }
    x * d - dd + 0.5 * c[0]
}

/// `(gam1, gam2, 1/Γ(1+μ), 1/Γ(1-μ))` for `|μ| <= 1/2`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let xx = 8.0 * mu * mu - 1.0;
    let gam1 = chebev(&C1, xx);
    let gam2 = chebev(&C2, xx);
    (gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1)
}

/// Scaled `I_ν`, `K_ν` and derivatives for `ν >= 0`, `x > 0`.
///
/// Continued fraction for `I'/I`; Temme's series for `K_μ`, `K_(μ+1)` when
/// `x < 2` and Steed's second continued fraction otherwise; upward recurrence
/// in the order for `K` and the Wronskian for `I`.
pub fn bessel_ik_scaled(nu: f64, x: f64) -> Result<BesselIK> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel functions need x > 0, got {x}")));
    }
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("order must be non-negative, got {nu}")));
    }
    let nl = (nu + 0.5) as usize;
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;

    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!("I'/I continued fraction failed at x={x}")));
    }

    let mut ril = FPMIN;
    let mut ripl = h * ril;
    let ril1 = ril;
    let rip1 = ripl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let ritemp = fact * ril + ripl;
        fact -= xi;
        ripl = fact * ritemp + ril;
        ril = ritemp;
    }
    let f = ripl / ril;

    // K_μ and K_(μ+1), scaled by e^x
    let (rkmu, rk1) = if x < XMIN {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= dd / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Numerical(format!("Temme series failed at x={x}")));
        }
        let scale = x.exp();
        (sum * scale, sum1 * xi2 * scale)
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - xmu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut ok = false;
        for i in 2..MAXIT {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Numerical(format!("Steed continued fraction failed at x={x}")));
        }
        let h = a1 * h;
        let rkmu = (PI / (2.0 * x)).sqrt() / s;
        (rkmu, rkmu * (xmu + x + 0.5 - h) * xi)
    };

    let rkmup = xmu * xi * rkmu - rk1;
    let rimu = xi / (f * rkmu - rkmup);
    let i = rimu * ril1 / ril;
    let ip = rimu * rip1 / ril;
    let (mut rkmu, mut rk1) = (rkmu, rk1);
    for j in 1..=nl {
        let t = (xmu + j as f64) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = t;
    }
    Ok(BesselIK {
        i,
        ip,
        k: rkmu,
        kp: nu * xi * rkmu - rk1,
    })
}

/// Unscaled `I_ν`, `K_ν` and derivatives for `ν >= 0`, `x > 0`.
pub fn bessel_ik(nu: f64, x: f64) -> Result<BesselIK> {
    let s = bessel_ik_scaled(nu, x)?;
    let (eu, ed) = (x.exp(), (-x).exp());
    Ok(BesselIK {
        i: s.i * eu,
        ip: s.ip * eu,
        k: s.k * ed,
        kp: s.kp * ed,
    })
}

/// `K_ν(x)`; even in `ν`.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_ik(nu.abs(), x)?.k)
}

/// `e^x K_ν(x)`.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_ik_scaled(nu.abs(), x)?.k)
}

/// `I_ν(x)` for `x >= 0`, using `I_-ν = I_ν + (2/π) sin(νπ) K_ν` for `ν < 0`.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_i_scaled(nu, x)? * x.exp())
}

/// `e^-x I_ν(x)`.
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(match nu {
            0.0 => 1.0,
            v if v > 0.0 || v.fract() == 0.0 => 0.0,
            _ => f64::INFINITY,
        });
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("I_ν needs x >= 0, got {x}")));
    }
    let s = bessel_ik_scaled(nu.abs(), x)?;
    if nu >= 0.0 {
        return Ok(s.i);
    }
    let extra = if nu.fract() == 0.0 {
        0.0
    } else {
        2.0 / PI * (-nu * PI).sin() * s.k * (-2.0 * x).exp()
    };
    Ok(s.i + extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn half_integer_closed_forms() {
        for &x in &[0.01, 0.5, 1.0, 1.999, 2.0, 7.5, 40.0] {
            let k = bessel_k(0.5, x).unwrap();
            assert_relative_eq!(k, (PI / (2.0 * x)).sqrt() * (-x).exp(), max_relative = 1e-14);
            let i = bessel_i(0.5, x).unwrap();
            assert_relative_eq!(i, (2.0 / (PI * x)).sqrt() * x.sinh(), max_relative = 1e-13);
            let k32 = bessel_k(1.5, x).unwrap();
            let exact = (PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 + 1.0 / x);
            assert_relative_eq!(k32, exact, max_relative = 1e-14);
        }
    }

    #[test]
    fn special_points_and_symmetry() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1.3, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_k(-0.7, 1.3).unwrap(), bessel_k(0.7, 1.3).unwrap());
        assert!(bessel_k(1.0, 0.0).is_err());
        assert!(bessel_k(1.0, -1.0).is_err());
        // I_-1/2(x) = sqrt(2/(πx)) cosh x
        let x = 0.8;
        assert_relative_eq!(
            bessel_i(-0.5, x).unwrap(),
            (2.0 / (PI * x)).sqrt() * x.cosh(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn wronskian() {
        for &(nu, x) in &[(0.7, 2.0), (0.0, 0.3), (2.5, 1.0), (3.0, 15.0), (0.2, 60.0)] {
            let b = bessel_ik(nu, x).unwrap();
            assert_relative_eq!(b.k * b.ip - b.i * b.kp, 1.0 / x, max_relative = 1e-13);
            let s = bessel_ik_scaled(nu, x).unwrap();
            assert_relative_eq!(s.k * s.ip - s.i * s.kp, 1.0 / x, max_relative = 1e-13);
        }
    }

    #[test]
    fn against_scipy() {
        // scipy.special.kv / iv
        let cases = [
            (0.0, 0.1, 2.427_069_024_702_016_7, 1.002_501_562_934_095_6),
            (0.0, 1.0, 0.421_024_438_240_708_3, 1.266_065_877_752_008_4),
            (1.0, 2.5, 0.073_890_816_347_747_08, 2.516_716_245_288_700_6),
            (2.7, 0.5, 31.458_720_904_338_723, 0.005_775_066_858_926),
            (0.3, 12.0, 2.208_776_072_733_588e-6, 18_874.745_079_467_69),
        ];
        for (nu, x, k, i) in cases {
            assert_relative_eq!(bessel_k(nu, x).unwrap(), k, max_relative = 1e-13);
            assert_relative_eq!(bessel_i(nu, x).unwrap(), i, max_relative = 1e-13);
        }
    }

    #[test]
    fn small_argument_behaviour() {
        let x = 1e-8;
        assert_relative_eq!(
            bessel_k(1.3, x).unwrap(),
            2f64.powf(0.3) * super::super::gamma(1.3) * x.powf(-1.3),
            max_relative = 1e-7
        );
        assert_relative_eq!(bessel_k(0.0, x).unwrap(), -x.ln() + 2f64.ln() - 0.577_215_664_901_532_9, max_relative = 1e-12);
    }
}
