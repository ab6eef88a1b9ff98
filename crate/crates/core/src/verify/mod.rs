//! Cross-checks between operators, densities, transforms and samplers, each
//! producing a machine-readable [`VerificationReport`].

mod adjoint;
mod family;

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use adjoint::{
    adjoint_residual_scan, adjoint_residual_scan_with, default_source, fornberg_weights,
    has_closed_form, log_derivatives_fd, DerivativeSource, FD_STEP,
};
pub use family::{FamilyKind, FamilyMember, TestFunctionFamily};

use crate::dist::{self, duplication_sides, DensityEvaluator, MellinTransform};
use crate::error::{invalid, Error, Result};
use crate::opalg::{Coeff, PolyDiffOp, Smooth};
use crate::steinops::{build_stein, reduce_order, ProductKind, ProductSpec};

/// Version of the report JSON layout.
pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub test_id: String,
    pub estimate: f64,
    pub standard_error: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
    pub passed: bool,
    pub details: Value,
}

impl VerificationReport {
    /// Monte Carlo test: passes when `|estimate| <= max(tolerance, 3 SE)`.
    pub fn monte_carlo(
        test_id: String,
        estimate: f64,
        standard_error: f64,
        tolerance: f64,
        samples: usize,
        seed: u64,
        details: Value,
    ) -> Self {
        let passed = estimate.abs() <= tolerance.max(3.0 * standard_error);
        Self {
            test_id,
            estimate,
            standard_error,
            tolerance,
            samples,
            seed,
            passed,
            details,
        }
    }

    /// Deterministic test: passes when `|estimate| <= tolerance`.
    pub fn deterministic(test_id: String, estimate: f64, tolerance: f64, details: Value) -> Self {
        Self {
            test_id,
            estimate,
            standard_error: 0.0,
            tolerance,
            samples: 0,
            seed: 0,
            passed: estimate.abs() <= tolerance,
            details,
        }
    }
}

/// A suite run as written by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportSet {
    pub version: u32,
    pub spec: String,
    pub all_passed: bool,
    pub reports: Vec<VerificationReport>,
    /// Checks that do not apply to the spec, with the reason.
    pub skipped: Vec<(String, String)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Stein,
    Adjoint,
    Mellin,
    Ks,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "stein" => Self::Stein,
            "adjoint" => Self::Adjoint,
            "mellin" => Self::Mellin,
            "ks" => Self::Ks,
            "all" => Self::All,
            _ => return Err(invalid!("unknown suite '{s}' (stein, adjoint, mellin, ks, all)")),
        })
    }
}

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 64 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Sample mean and its standard error.
pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = pairwise_sum(v) / n;
    let dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

fn map_samples(w: &[f64], f: impl Fn(f64) -> (f64, f64) + Sync) -> (Vec<f64>, Vec<f64>) {
    #[cfg(feature = "parallel")]
    let pairs: Vec<(f64, f64)> = {
        use rayon::prelude::*;
        w.par_iter().map(|&x| f(x)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let pairs: Vec<(f64, f64)> = w.iter().map(|&x| f(x)).collect();
    pairs.into_iter().unzip()
}

/// `(A f(x), Σ |c x^j f^(k)(x)|)`.
fn apply_with_scale(op: &PolyDiffOp<f64>, f: &dyn Smooth, x: f64, buf: &mut [f64]) -> (f64, f64) {
    f.derivatives(x, buf);
    let (mut v, mut s) = (0.0, 0.0);
    for (k, j, c) in op.terms() {
        let t = c * x.powi(j) * buf[k];
        v += t;
        s += t.abs();
    }
    (v, s)
}

/// Standard deviation of `W` from its closed-form moments.
pub fn standard_deviation(spec: &ProductSpec) -> Result<f64> {
    let m1 = dist::moment(spec, 1)?;
    let m2 = dist::moment(spec, 2)?;
    Ok((m2 - m1 * m1).max(0.0).sqrt())
}

/// Families with at least five members, scaled by the standard deviation.
pub fn standard_families(spec: &ProductSpec) -> Result<Vec<TestFunctionFamily>> {
    let tau = standard_deviation(spec)?;
    let second = if spec.normal_count > 0 {
        FamilyKind::SechDamped
    } else {
        FamilyKind::ExponentialDamped
    };
    Ok(vec![
        TestFunctionFamily::new(FamilyKind::GaussianDamped, &[0, 1, 2], tau)?,
        TestFunctionFamily::new(second, &[0, 1], tau)?,
    ])
}

/// As [`standard_families`] with every member vanishing at zero, the class on
/// which reduced operators with `x^-1` terms act.
pub fn reduced_families(spec: &ProductSpec) -> Result<Vec<TestFunctionFamily>> {
    let mut fams = standard_families(spec)?;
    fams[0].indices = vec![1, 2, 3];
    fams[1].indices = vec![1, 2];
    Ok(fams)
}

fn check_family(spec: &ProductSpec, family: &TestFunctionFamily, order: usize) -> Result<()> {
    if family.kind == FamilyKind::ExponentialDamped && spec.normal_count > 0 {
        return Err(invalid!(
            "exponentially damped test functions grow on the negative half-line"
        ));
    }
    if let Some(m) = family.max_order {
        if m < order {
            return Err(Error::InsufficientSmoothness {
                required: order,
                available: m,
            });
        }
    }
    Ok(())
}

/// `E[A f(W)]` for every member of `family`, from `samples` draws.
pub fn mc_stein_identity(
    spec: &ProductSpec,
    family: &TestFunctionFamily,
    samples: usize,
    seed: u64,
) -> Result<Vec<VerificationReport>> {
    let op = build_stein(spec)?.operator_f64();
    check_family(spec, family, op.order())?;
    let w = dist::sample(spec, samples, seed)?;
    mc_stein_identity_on(spec, &op, family, &w, seed)
}

/// As [`mc_stein_identity`] on given draws and operator.
pub fn mc_stein_identity_on(
    spec: &ProductSpec,
    op: &PolyDiffOp<f64>,
    family: &TestFunctionFamily,
    w: &[f64],
    seed: u64,
) -> Result<Vec<VerificationReport>> {
    check_family(spec, family, op.order())?;
    let n = op.order() + 1;
    Ok(family
        .members()
        .iter()
        .map(|m| {
            let (vals, scales) = map_samples(w, |x| apply_with_scale(op, m, x, &mut vec![0.0; n]));
            let (est, se) = mean_and_se(&vals);
            let scale = pairwise_sum(&scales) / w.len() as f64;
            VerificationReport::monte_carlo(
                format!("stein/{}/{}", spec.label(), m.label()),
                est,
                se,
                1e-3 * scale,
                w.len(),
                seed,
                json!({ "operator_order": op.order(), "test_function": m.label(), "scale": scale }),
            )
        })
        .collect())
}

/// Paired comparison of `E[A f(W)]` with `E[A_red f(W)]`, both of which
/// vanish when the reduced-order operator characterises `W`. Members must
/// vanish at zero to the order of the reduced operator's `x^-k` terms.
pub fn reduced_vs_full(
    spec: &ProductSpec,
    family: &TestFunctionFamily,
    samples: usize,
    seed: u64,
) -> Result<Vec<VerificationReport>> {
    let red = reduce_order(spec)?;
    if !red.is_reduced() {
        return Err(Error::Unsupported(format!("{} has no order reduction", spec.label())));
    }
    let full = build_stein(spec)?.operator_f64();
    let reduced = red.operator.to_f64();
    check_family(spec, family, full.order())?;
    let pole = (-reduced.min_x_power()).max(0) as u32;
    if let Some(j) = family.indices.iter().find(|&&j| j < pole) {
        return Err(Error::Domain(format!(
            "reduced operator has an x^-{pole} term; x^{j} times the damping is outside its domain"
        )));
    }
    let w = dist::sample(spec, samples, seed)?;
    let n = full.order() + 1;
    Ok(family
        .members()
        .iter()
        .map(|m| {
            let (a, _) = map_samples(&w, |x| apply_with_scale(&full, m, x, &mut vec![0.0; n]));
            let (b, scales) = map_samples(&w, |x| apply_with_scale(&reduced, m, x, &mut vec![0.0; n]));
            let diff: Vec<f64> = a.iter().zip(&b).map(|(a, b)| a - b).collect();
            let (est, se) = mean_and_se(&diff);
            let (ea, sa) = mean_and_se(&a);
            let (eb, sb) = mean_and_se(&b);
            let scale = pairwise_sum(&scales) / w.len() as f64;
            VerificationReport::monte_carlo(
                format!("reduced/{}/{}", spec.label(), m.label()),
                est,
                se,
                1e-3 * scale,
                w.len(),
                seed,
                json!({
                    "expected_order": red.expected_order,
                    "reduced_order": red.reduced_order,
                    "full_estimate": ea, "full_se": sa,
                    "reduced_estimate": eb, "reduced_se": sb,
                    "test_function": m.label(),
                }),
            )
        })
        .collect())
}

/// `E W^p` from the Mellin transform, with odd moments of symmetric laws zero.
fn signed_moment(spec: &ProductSpec, p: i32) -> Result<f64> {
    if spec.normal_count > 0 && p % 2 != 0 {
        if p < 0 {
            return Err(Error::Domain(format!("E W^{p} diverges")));
        }
        return Ok(0.0);
    }
    MellinTransform::new(spec)?.eval(p as f64 + 1.0)
}

/// `E[A x^k] = Σ c_p E W^p` from closed-form moments for `k` in `degrees`,
/// relative to `Σ |c_p E W^p|`. Uses the reduced operator composed with its
/// substitution when `reduced` is set.
pub fn moment_recursion_check(spec: &ProductSpec, degrees: &[u32], reduced: bool) -> Result<Vec<VerificationReport>> {
    let op = if reduced {
        let r = reduce_order(spec)?;
        r.operator.compose(&r.substitution_operator())
    } else {
        build_stein(spec)?.operator
    };
    let mut out = Vec::new();
    for &k in degrees {
        let image = op.apply_monomial(k as i32);
        let (mut sum, mut abs) = (0.0, 0.0);
        for (&p, c) in &image {
            let t = c.to_f64() * signed_moment(spec, p)?;
            sum += t;
            abs += t.abs();
        }
        let estimate = if abs > 0.0 { sum / abs } else { 0.0 };
        out.push(VerificationReport::deterministic(
            format!("moments/{}/{}x^{k}", spec.label(), if reduced { "reduced/" } else { "" }),
            estimate,
            1e-12,
            json!({ "terms": image.len(), "abs_sum": abs }),
        ));
    }
    Ok(out)
}

/// `count` points in the Mellin strip, from 0.05 past its left end.
pub fn mellin_points(spec: &ProductSpec, count: usize) -> Result<Vec<f64>> {
    let lo = MellinTransform::new(spec)?.strip().0.max(-20.0);
    Ok((0..count).map(|i| lo + 0.05 + 0.3 * i as f64).collect())
}

/// Factorised against G-integral transform, plus the duplication formula at
/// each point.
pub fn mellin_equality_scan(spec: &ProductSpec, points: &[f64]) -> Result<VerificationReport> {
    if spec.kind() == ProductKind::Pgg {
        return Err(Error::Unsupported("density form of the transform needs q = 1".into()));
    }
    let m = MellinTransform::new(spec)?;
    let mut worst: f64 = 0.0;
    let mut dup: f64 = 0.0;
    for &s in points {
        let a = m.ln_eval(s)?;
        let b = m.ln_eval_from_density(s)?;
        worst = worst.max((a - b).exp_m1().abs());
        let (l, r) = duplication_sides(s);
        dup = dup.max((l - r).exp_m1().abs());
    }
    Ok(VerificationReport::deterministic(
        format!("mellin/{}", spec.label()),
        worst.max(dup),
        1e-10,
        json!({ "points": points, "max_rel_diff": worst, "duplication_max_rel_diff": dup }),
    ))
}

/// Kolmogorov–Smirnov distance between draws and the numeric CDF; passes
/// below the asymptotic 1% critical value `1.63/√n`.
pub fn sampler_density_ks(spec: &ProductSpec, samples: usize, seed: u64) -> Result<VerificationReport> {
    let table = DensityEvaluator::new(spec)?.cdf_table()?;
    let mut w = dist::sample(spec, samples, seed)?;
    w.sort_by(f64::total_cmp);
    let n = w.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in w.iter().enumerate() {
        let f = table.cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let crit = 1.63 / n.sqrt();
    let mut r = VerificationReport::deterministic(
        format!("ks/{}", spec.label()),
        d,
        crit,
        json!({ "statistic": d, "critical_value": crit }),
    );
    r.samples = w.len();
    r.seed = seed;
    Ok(r)
}

/// Default adjoint grid: 25 log-spaced points on `[0.2, 5]`, or inside `(0, 1)`
/// for compact supports.
pub fn adjoint_grid(spec: &ProductSpec) -> Vec<f64> {
    let (a, b) = if spec.n() == 0 && spec.normal_count == 0 { (0.05f64, 0.9f64) } else { (0.2, 5.0) };
    (0..25)
        .map(|i| (a.ln() + (b / a).ln() * i as f64 / 24.0).exp())
        .collect()
}

fn collect(
    out: &mut Vec<VerificationReport>,
    skipped: &mut Vec<(String, String)>,
    name: &str,
    r: Result<Vec<VerificationReport>>,
) -> Result<()> {
    match r {
        Ok(v) => out.extend(v),
        Err(e @ (Error::Unsupported(_) | Error::Domain(_))) => skipped.push((name.into(), e.to_string())),
        Err(e) => return Err(e),
    }
    Ok(())
}

/// Runs `suite` on `spec`; checks that do not apply are listed as skipped.
pub fn run_suite(spec: &ProductSpec, suite: Suite, samples: usize, seed: u64) -> Result<ReportSet> {
    spec.validate()?;
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Stein {
        let op = build_stein(spec)?.operator_f64();
        let w = dist::sample(spec, samples, seed)?;
        for fam in standard_families(spec)? {
            reports.extend(mc_stein_identity_on(spec, &op, &fam, &w, seed)?);
        }
        collect(&mut reports, &mut skipped, "moments", moment_recursion_check(spec, &[0, 1, 2, 3], false))?;
        let reducible = spec.m() > 0 && spec.normal_count > 0 && reduce_order(spec)?.is_reduced();
        if reducible {
            for fam in reduced_families(spec)? {
                collect(&mut reports, &mut skipped, "reduced", reduced_vs_full(spec, &fam, samples, seed))?;
            }
        }
    }
    if all || suite == Suite::Adjoint {
        let r = adjoint_residual_scan(spec, &adjoint_grid(spec)).map(|r| vec![r]);
        collect(&mut reports, &mut skipped, "adjoint", r)?;
    }
    if all || suite == Suite::Mellin {
        let r = mellin_points(spec, 20).and_then(|p| mellin_equality_scan(spec, &p)).map(|r| vec![r]);
        collect(&mut reports, &mut skipped, "mellin", r)?;
    }
    if all || suite == Suite::Ks {
        let r = sampler_density_ks(spec, samples, seed).map(|r| vec![r]);
        collect(&mut reports, &mut skipped, "ks", r)?;
    }
    Ok(ReportSet {
        version: REPORT_VERSION,
        spec: spec.label(),
        all_passed: reports.iter().all(|r| r.passed),
        reports,
        skipped,
    })
}
