use std::f64::consts::PI;

use serde_json::json;

use super::VerificationReport;
use crate::dist::DensityEvaluator;
use crate::error::{Error, Result};
use crate::specfun::{bessel_k, ln_gamma};
use crate::steinops::{adjoint_ode, ProductKind, ProductSpec};

/// Where the density derivatives in the adjoint residual come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeSource {
    /// Closed forms for the normal, gamma and two-gamma densities.
    Analytic,
    /// Differentiation under the Meijer G contour integral.
    Meijer,
    /// Central differences in `ln x` with one Richardson step.
    FiniteDifference,
}

impl DerivativeSource {
    pub fn name(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Meijer => "meijer",
            Self::FiniteDifference => "finite-difference",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Self::Analytic | Self::Meijer => 1e-8,
            Self::FiniteDifference => 1e-4,
        }
    }
}

/// Step in `ln x` for the finite-difference source.
pub const FD_STEP: f64 = 0.08;

enum Closed {
    Normal { sigma: f64 },
    Gamma { r: f64, lambda: f64 },
    TwoGamma { r1: f64, r2: f64, lambda: f64 },
}

fn closed_form(spec: &ProductSpec) -> Option<Closed> {
    if spec.kind() == ProductKind::Pgg {
        return None;
    }
    match (spec.m(), spec.n(), spec.normal_count) {
        (0, 0, 1) => Some(Closed::Normal { sigma: spec.sigma }),
        (0, 1, 0) => Some(Closed::Gamma {
            r: spec.gamma_shapes[0],
            lambda: spec.lambda,
        }),
        (0, 2, 0) => Some(Closed::TwoGamma {
            r1: spec.gamma_shapes[0],
            r2: spec.gamma_shapes[1],
            lambda: spec.lambda,
        }),
        _ => None,
    }
}

pub fn has_closed_form(spec: &ProductSpec) -> bool {
    closed_form(spec).is_some()
}

fn falling(a: f64, i: usize) -> f64 {
    (0..i).map(|j| a - j as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

impl Closed {
    /// `p^(k)(x)` for `k = 0..=order`.
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        Ok(match *self {
            Closed::Normal { sigma } => {
                // (-1/σ)^k He_k(x/σ) φ(x/σ)/σ
                let t = x / sigma;
                let p = (-0.5 * t * t).exp() / ((2.0 * PI).sqrt() * sigma);
                let (mut h0, mut h1) = (1.0, t);
                let mut out = Vec::with_capacity(order + 1);
                let mut s = 1.0;
                for k in 0..=order {
                    out.push(s * if k == 0 { h0 } else { h1 } * p);
                    s *= -1.0 / sigma;
                    if k >= 1 {
                        let h2 = t * h1 - k as f64 * h0;
                        h0 = h1;
                        h1 = h2;
                    }
                }
                out
            }
            Closed::Gamma { r, lambda } => {
                let c = (r * lambda.ln() - ln_gamma(r)).exp() * (-lambda * x).exp();
                (0..=order)
                    .map(|k| {
                        (0..=k)
                            .map(|i| {
                                binomial(k, i)
                                    * falling(r - 1.0, i)
                                    * x.powf(r - 1.0 - i as f64)
                                    * (-lambda).powi((k - i) as i32)
                            })
                            .sum::<f64>()
                            * c
                    })
                    .collect()
            }
            Closed::TwoGamma { r1, r2, lambda } => {
                // p = C x^(r1-1) g_ν, g_ν = x^(-ν/2) K_ν(2λ√x), g_ν' = -λ g_(ν+1)
                let nu = r1 - r2;
                let c = (2.0f64.ln() + (r1 + r2) * lambda.ln() - ln_gamma(r1) - ln_gamma(r2)).exp();
                let z = 2.0 * lambda * x.sqrt();
                let g = (0..=order)
                    .map(|i| {
                        let v = nu + i as f64;
                        Ok(x.powf(-0.5 * v) * bessel_k(v, z)? * (-lambda).powi(i as i32))
                    })
                    .collect::<Result<Vec<_>>>()?;
                (0..=order)
                    .map(|k| {
                        c * (0..=k)
                            .map(|i| {
                                binomial(k, i) * falling(r1 - 1.0, k - i) * x.powf(r1 - 1.0 - (k - i) as f64) * g[i]
                            })
                            .sum::<f64>()
                    })
                    .collect()
            }
        })
    }
}

/// Finite-difference weights for derivatives `0..=m` at `z` on `nodes`.
pub fn fornberg_weights(z: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// `θ^i p(x)` with `θ = x d/dx`, `i = 0..=order`, by central differences in
/// `u = ln x`; every stencil is at least fourth-order accurate and one
/// Richardson step removes the leading error.
pub fn log_derivatives_fd(p: &dyn Fn(f64) -> Result<f64>, x: f64, order: usize, h: f64) -> Result<Vec<f64>> {
    let half = (order + 3).div_ceil(2);
    let offsets: Vec<f64> = (-(half as i64)..=half as i64).map(|v| v as f64).collect();
    let w = fornberg_weights(0.0, &offsets, order);
    let u = x.ln();
    let mut values = std::collections::BTreeMap::new();
    for &scale in &[1i64, 2] {
        for &o in &offsets {
            let key = o as i64 * scale;
            if let std::collections::btree_map::Entry::Vacant(e) = values.entry(key) {
                e.insert(p((u + key as f64 * h).exp())?);
            }
        }
    }
    let stencil = |i: usize, scale: i64| -> f64 {
        let step = h * scale as f64;
        offsets
            .iter()
            .zip(&w[i])
            .map(|(&o, c)| c * values[&(o as i64 * scale)])
            .sum::<f64>()
            / step.powi(i as i32)
    };
    Ok((0..=order)
        .map(|i| {
            if i == 0 {
                values[&0]
            } else {
                // a symmetric stencil on 2·half+1 points has even order 2·half - 2⌊(i-1)/2⌋
                let f = 2f64.powi((2 * half - 2 * ((i - 1) / 2)) as i32);
                (f * stencil(i, 1) - stencil(i, 2)) / (f - 1.0)
            }
        })
        .collect())
}

/// `x^k p^(k) = Σ_i s(k, i) θ^i p` with signed Stirling numbers of the first kind.
fn theta_to_x(x: f64, theta: &[f64]) -> Vec<f64> {
    let n = theta.len();
    let mut s = vec![vec![0.0; n]; n];
    s[0][0] = 1.0;
    for k in 0..n - 1 {
        for i in 0..=k {
            s[k + 1][i + 1] += s[k][i];
            s[k + 1][i] -= k as f64 * s[k][i];
        }
    }
    (0..n)
        .map(|k| (0..=k).map(|i| s[k][i] * theta[i]).sum::<f64>() / x.powi(k as i32))
        .collect()
}

/// Default source: closed forms when available, finite differences otherwise.
pub fn default_source(spec: &ProductSpec) -> DerivativeSource {
    if has_closed_form(spec) {
        DerivativeSource::Analytic
    } else {
        DerivativeSource::FiniteDifference
    }
}

pub fn adjoint_residual_scan(spec: &ProductSpec, grid: &[f64]) -> Result<VerificationReport> {
    adjoint_residual_scan_with(spec, grid, default_source(spec), None)
}

/// `max |A* p(x)| / max |p(x)|` over the grid points inside the open support.
pub fn adjoint_residual_scan_with(
    spec: &ProductSpec,
    grid: &[f64],
    source: DerivativeSource,
    tolerance: Option<f64>,
) -> Result<VerificationReport> {
    let ode = adjoint_ode(spec)?;
    let op = ode.operator.to_f64();
    let order = op.order();
    let density = DensityEvaluator::new(spec)?;
    let closed = closed_form(spec);
    if source == DerivativeSource::Analytic && closed.is_none() {
        return Err(Error::Unsupported(format!(
            "no closed-form density derivatives for {}",
            spec.label()
        )));
    }
    let (_, upper) = density.support();
    let mut excluded = Vec::new();
    let mut worst: f64 = 0.0;
    let mut worst_x = f64::NAN;
    let mut p_max: f64 = 0.0;
    let mut used = 0usize;
    for &x in grid {
        if !(x > 0.0) || x >= upper {
            excluded.push(x);
            continue;
        }
        let d = match source {
            DerivativeSource::Analytic => closed.as_ref().expect("closed form").derivatives(x, order)?,
            DerivativeSource::Meijer => theta_to_x(x, &density.x_derivatives(x, order)?),
            DerivativeSource::FiniteDifference => {
                let p = |t: f64| density.pdf(t);
                theta_to_x(x, &log_derivatives_fd(&p, x, order, FD_STEP)?)
            }
        };
        let r = op.apply_derivs(x, &d)?;
        p_max = p_max.max(d[0].abs());
        if r.abs() > worst || worst_x.is_nan() {
            worst = worst.max(r.abs());
            worst_x = x;
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::Domain("no grid point lies inside the support".into()));
    }
    let estimate = worst / p_max;
    let tolerance = tolerance.unwrap_or(source.default_tolerance());
    Ok(VerificationReport::deterministic(
        format!("adjoint/{}", spec.label()),
        estimate,
        tolerance,
        json!({
            "source": source.name(),
            "operator_order": order,
            "points": used,
            "excluded": excluded,
            "max_abs_residual": worst,
            "worst_x": worst_x,
            "max_density": p_max,
        }),
    ))
}
