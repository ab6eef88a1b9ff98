use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, RwLock};

use num_complex::Complex64;
use serde::Serialize;

use super::gamma::{digamma, ln_gamma, ln_gamma_complex};
use super::quad::tanh_sinh;
use crate::error::{invalid, Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Orders and parameters of `G^{m,n}_{p,q}(x | a; b)`.
///
/// The Mellin–Barnes integrand is
/// `x^-s Π_{j<=m} Γ(s+b_j) Π_{j<=n} Γ(1-a_j-s) / (Π_{j>n} Γ(s+a_j) Π_{j>m} Γ(1-b_j-s))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeijerGParams {
    pub m: usize,
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl MeijerGParams {
    pub fn new(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let params = Self { m, n, a, b };
        params.validate()?;
        Ok(params)
    }

    /// `G^{q,0}_{p,q}`, the form taken by every density in this crate.
    pub fn full(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::new(b.len(), 0, a, b)
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    /// `2(m+n) - p - q`; the integrand decays like `exp(-decay π |t| / 2)`.
    pub fn decay(&self) -> i64 {
        2 * (self.m + self.n) as i64 - self.p() as i64 - self.q() as i64
    }

    fn validate(&self) -> Result<()> {
        if self.m > self.q() || self.n > self.p() {
            return Err(invalid!(
                "Meijer G orders m={} n={} incompatible with p={} q={}",
                self.m,
                self.n,
                self.p(),
                self.q()
            ));
        }
        if self.a.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(invalid!("Meijer G parameters must be finite"));
        }
        if self.decay() == 0 && self.compact_pairs().is_some() {
            return Ok(());
        }
        if self.decay() <= 0 {
            return Err(Error::Unsupported(format!(
                "Meijer G^{{{},{}}}_{{{},{}}} has no exponential decay on a vertical line",
                self.m,
                self.n,
                self.p(),
                self.q()
            )));
        }
        let (lo, hi) = self.strip();
        if lo >= hi {
            return Err(invalid!(
                "no vertical line separates the poles (left {lo}, right {hi})"
            ));
        }
        Ok(())
    }

    /// For `G^{p,0}_{p,p}` with `p <= 2`: parameter pairs `(a, b)`, `a > b`, whose
    /// `G^{1,0}_{1,1}` factors convolve to the whole function.
    fn compact_pairs(&self) -> Option<Vec<(f64, f64)>> {
        let r = self.reduce();
        if r.n != 0 || r.m != r.q() || r.p() != r.q() {
            return None;
        }
        let ok = |pairs: Vec<(f64, f64)>| pairs.iter().all(|(a, b)| a > b).then_some(pairs);
        match r.q() {
            1 => ok(vec![(r.a[0], r.b[0])]),
            2 => ok(vec![(r.a[0], r.b[0]), (r.a[1], r.b[1])])
                .or_else(|| ok(vec![(r.a[0], r.b[1]), (r.a[1], r.b[0])])),
            _ => None,
        }
    }

    /// Open interval of abscissae separating the two pole families.
    pub fn strip(&self) -> (f64, f64) {
        let lo = self.b[..self.m]
            .iter()
            .map(|b| -b)
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = self.a[..self.n]
            .iter()
            .map(|a| 1.0 - a)
            .fold(f64::INFINITY, f64::min);
        (lo, hi)
    }

    /// Adds `c` to every parameter: `x^c G(x | a; b) = G(x | a+c; b+c)`.
    pub fn shift(&self, c: f64) -> Self {
        Self {
            m: self.m,
            n: self.n,
            a: self.a.iter().map(|v| v + c).collect(),
            b: self.b.iter().map(|v| v + c).collect(),
        }
    }

    /// Cancels each `a_j` (j > n) against an equal `b_k` (k <= m), one pair per
    /// coincidence.
    pub fn reduce(&self) -> Self {
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-13 * (1.0 + x.abs().max(y.abs()));
        let mut a_num: Vec<f64> = self.a[..self.n].to_vec();
        let mut a_den: Vec<f64> = self.a[self.n..].to_vec();
        let mut b_num: Vec<f64> = self.b[..self.m].to_vec();
        let b_den: Vec<f64> = self.b[self.m..].to_vec();
        let mut i = 0;
        while i < a_den.len() {
            if let Some(k) = b_num.iter().position(|&b| close(a_den[i], b)) {
                a_den.remove(i);
                b_num.remove(k);
            } else {
                i += 1;
            }
        }
        let (m, n) = (b_num.len(), a_num.len());
        a_num.extend(a_den);
        b_num.extend(b_den);
        Self {
            m,
            n,
            a: a_num,
            b: b_num,
        }
    }

    /// Real part of the log-integrand derivative along the real axis, minus `ln x`.
    fn log_slope(&self, s: f64, ln_x: f64) -> f64 {
        let mut d = -ln_x;
        for (j, &b) in self.b.iter().enumerate() {
            if j < self.m {
                d += digamma(s + b);
            } else {
                d += digamma(1.0 - b - s);
            }
        }
        for (j, &a) in self.a.iter().enumerate() {
            if j < self.n {
                d -= digamma(1.0 - a - s);
            } else {
                d -= digamma(s + a);
            }
        }
        d
    }

    fn ln_phi(&self, s: Complex64) -> Option<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &b) in self.b.iter().enumerate() {
            if j < self.m {
                acc += ln_gamma_complex(s + b).ok()?;
            } else {
                // a pole of the denominator makes the integrand vanish
                match ln_gamma_complex(1.0 - b - s) {
                    Ok(v) => acc -= v,
                    Err(_) => return None,
                }
            }
        }
        for (j, &a) in self.a.iter().enumerate() {
            if j < self.n {
                acc += ln_gamma_complex(1.0 - a - s).ok()?;
            } else {
                match ln_gamma_complex(s + a) {
                    Ok(v) => acc -= v,
                    Err(_) => return None,
                }
            }
        }
        Some(acc)
    }
}

/// Where and how finely the contour was sampled for one evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourPlan {
    /// Abscissa of the vertical line.
    pub c: f64,
    /// Largest `|Im s|` sampled.
    pub half_height: f64,
    /// Final trapezoid step.
    pub step: f64,
    /// Number of nodes on `t >= 0` at the final step.
    pub step_count: usize,
    /// Relative size of the neglected tail.
    pub estimated_tail_error: f64,
}

const C_QUANTUM: f64 = 0.125;
const MAX_GEOMETRIC_GAP: f64 = 0.5;
const MIN_POLE_GAP: f64 = 1e-3;
const MAX_LEVEL: usize = 8;
const MAX_NODES: usize = 400_000;
const TAIL_REL: f64 = 1e-19;

/// `ln Φ(c + i t)` at trapezoid nodes, refined level by level.
struct ContourTable {
    c: f64,
    h0: f64,
    half_height: f64,
    tail: f64,
    levels: RwLock<Vec<Arc<Vec<Option<Complex64>>>>>,
}

impl ContourTable {
    fn build(params: &MeijerGParams, c: f64, d: f64) -> Result<Self> {
        let h0 = 2.0 * PI * d.min(2.0) / 12.0;
        let decay = params.decay() as f64;
        let mut nodes = Vec::new();
        let mut max_env = f64::NEG_INFINITY;
        let mut below = 0;
        let mut prev = f64::INFINITY;
        let mut tail = 0.0;
        for k in 0.. {
            if k > MAX_NODES {
                return Err(Error::Numerical(format!(
                    "Meijer G contour at c={c} did not decay within {MAX_NODES} nodes"
                )));
            }
            let t = k as f64 * h0;
            let v = params.ln_phi(Complex64::new(c, t));
            nodes.push(v);
            let env = v.map_or(f64::NEG_INFINITY, |z| z.re);
            max_env = max_env.max(env);
            // geometric tail bound with ratio exp(-decay π h0 / 2)
            let rel = (env - max_env).exp() / (1.0 - (-decay * PI * h0 / 2.0).exp());
            if env < prev && rel < TAIL_REL && t > 2.0 {
                below += 1;
                if below >= 3 {
                    tail = rel;
                    break;
                }
            } else {
                below = 0;
            }
            prev = env;
        }
        let half_height = (nodes.len() - 1) as f64 * h0;
        Ok(Self {
            c,
            h0,
            half_height,
            tail,
            levels: RwLock::new(vec![Arc::new(nodes)]),
        })
    }

    /// Nodes new at `level`: `t = (2k+1) h0 / 2^level`.
    fn level(&self, params: &MeijerGParams, level: usize) -> Arc<Vec<Option<Complex64>>> {
        if let Some(l) = self.levels.read().expect("contour lock").get(level) {
            return l.clone();
        }
        let mut guard = self.levels.write().expect("contour lock");
        while guard.len() <= level {
            let lv = guard.len();
            let h = self.h0 / (1u64 << lv) as f64;
            let count = (self.half_height / (2.0 * h)).ceil() as usize;
            let nodes = (0..count)
                .map(|k| params.ln_phi(Complex64::new(self.c, (2 * k + 1) as f64 * h)))
                .collect();
            guard.push(Arc::new(nodes));
        }
        guard[level].clone()
    }
}

/// A reusable evaluator for one parameter set. Contour tables are cached per
/// abscissa so that evaluating on a grid costs one complex exponential per node.
pub struct MeijerG {
    params: MeijerGParams,
    tol: f64,
    lo: f64,
    hi: f64,
    compact: Option<Vec<(f64, f64)>>,
    cache: Mutex<HashMap<i64, Arc<ContourTable>>>,
}

impl std::fmt::Debug for MeijerG {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MeijerG")
            .field("params", &self.params)
            .field("tol", &self.tol)
            .finish()
    }
}

impl Clone for MeijerG {
    fn clone(&self) -> Self {
        Self {
            params: self.params.clone(),
            tol: self.tol,
            lo: self.lo,
            hi: self.hi,
            compact: self.compact.clone(),
            cache: Mutex::new(self.cache.lock().expect("cache lock").clone()),
        }
    }
}

/// Value as `mantissa * exp(log_scale)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn value(&self) -> f64 {
        self.mantissa * self.log_scale.exp()
    }

    /// `ln |value|`.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.abs().ln() + self.log_scale
    }
}

impl MeijerG {
    pub fn new(params: MeijerGParams) -> Result<Self> {
        params.validate()?;
        let (lo, hi) = params.strip();
        let compact = if params.decay() == 0 {
            params.compact_pairs()
        } else {
            None
        };
        Ok(Self {
            params,
            tol: DEFAULT_TOL,
            lo,
            hi,
            compact,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn params(&self) -> &MeijerGParams {
        &self.params
    }

    /// Root of the real log-slope, i.e. the saddle of `|x^-s Φ(s)|` on the real axis.
    fn saddle(&self, ln_x: f64) -> f64 {
        let p = &self.params;
        let eps = 1e-9;
        let (mut a, mut b) = match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => (self.lo + eps, self.hi - eps),
            (true, false) => {
                let mut a = self.lo + eps;
                let mut step = 1.0;
                let mut b = a + step;
                while p.log_slope(b, ln_x) < 0.0 && b < 1e8 {
                    a = b;
                    step *= 2.0;
                    b += step;
                }
                (a, b)
            }
            _ => {
                let mut b = self.hi - eps;
                let mut step = 1.0;
                let mut a = b - step;
                while p.log_slope(a, ln_x) > 0.0 && a > -1e8 {
                    b = a;
                    step *= 2.0;
                    a -= step;
                }
                (a, b)
            }
        };
        // relative precision near a strip end, absolute elsewhere
        let edge = |s: f64| (s - self.lo).min(self.hi - s);
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if b - a < 1e-3 * edge(mid).min(1.0) {
                break;
            }
            let v = p.log_slope(mid, ln_x);
            if v.is_nan() {
                break;
            }
            if v < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    /// Abscissa for argument `x`: the saddle, rounded to a fixed lattice so
    /// tables can be shared. The lattice is geometric in the distance to the
    /// nearest pole family and linear beyond `MAX_GEOMETRIC_GAP`.
    fn abscissa(&self, ln_x: f64) -> (f64, f64, i64) {
        let saddle = self.saddle(ln_x);
        let lattice = |gap: f64| -> (i64, f64) {
            let gap = gap.max(MIN_POLE_GAP);
            if gap >= MAX_GEOMETRIC_GAP {
                let k = ((gap - MAX_GEOMETRIC_GAP) / C_QUANTUM).round() as i64;
                (k, MAX_GEOMETRIC_GAP + k as f64 * C_QUANTUM)
            } else {
                let j = (2.0 * (MAX_GEOMETRIC_GAP / gap).log2()).round() as i64;
                (-j, MAX_GEOMETRIC_GAP * 2f64.powf(-(j as f64) / 2.0))
            }
        };
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => {
                let width = self.hi - self.lo;
                let gap = MAX_GEOMETRIC_GAP.min(width / 4.0);
                let (left, right) = (self.lo + gap, self.hi - gap);
                let c = saddle.clamp(left, right);
                let key = ((c - left) / C_QUANTUM).round() as i64;
                let c = (left + key as f64 * C_QUANTUM).min(right);
                (c, (c - self.lo).min(self.hi - c), key)
            }
            (true, false) => {
                let (key, gap) = lattice(saddle - self.lo);
                (self.lo + gap, gap, key)
            }
            _ => {
                let (key, gap) = lattice(self.hi - saddle);
                (self.hi - gap, gap, key)
            }
        }
    }

    fn table(&self, ln_x: f64) -> Result<Arc<ContourTable>> {
        let (c, d, key) = self.abscissa(ln_x);
        if let Some(t) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(t.clone());
        }
        let table = Arc::new(ContourTable::build(&self.params, c, d)?);
        self.cache
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_insert(table.clone());
        Ok(table)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.eval_scaled(x)?.value())
    }

    pub fn eval_scaled(&self, x: f64) -> Result<Scaled> {
        self.eval_detailed(x, None).map(|(v, _)| v)
    }

    /// Evaluates `(1/2πi) ∫ w(s) Φ(s) x^-s ds`; with `w(s) = (-s)^k` this is
    /// `(x d/dx)^k G`.
    pub fn eval_weighted(&self, x: f64, w: &dyn Fn(Complex64) -> Complex64) -> Result<f64> {
        Ok(self.eval_detailed(x, Some(w))?.0.value())
    }

    /// Weight given as polynomial coefficients in `s`, lowest degree first.
    pub fn eval_poly(&self, x: f64, coeffs: &[f64]) -> Result<f64> {
        let w = |s: Complex64| {
            coeffs
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
        };
        self.eval_weighted(x, &w)
    }

    pub fn plan(&self, x: f64) -> Result<ContourPlan> {
        Ok(self.eval_detailed(x, None)?.1)
    }

    pub fn eval_detailed(
        &self,
        x: f64,
        w: Option<&dyn Fn(Complex64) -> Complex64>,
    ) -> Result<(Scaled, ContourPlan)> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("Meijer G evaluated at x = {x}")));
        }
        if let Some(pairs) = &self.compact {
            if w.is_some() {
                return Err(Error::Unsupported(
                    "weighted evaluation of a compactly supported G".into(),
                ));
            }
            let v = compact_g(pairs, x, self.tol)?;
            let plan = ContourPlan {
                c: f64::NAN,
                half_height: 0.0,
                step: 0.0,
                step_count: 0,
                estimated_tail_error: 0.0,
            };
            return Ok((
                Scaled {
                    mantissa: v,
                    log_scale: 0.0,
                },
                plan,
            ));
        }
        let ln_x = x.ln();
        let table = self.table(ln_x)?;
        let c = table.c;
        let level0 = table.level(&self.params, 0);
        let log_scale = level0[0]
            .map(|z| z.re)
            .or_else(|| level0.iter().flatten().map(|z| z.re).reduce(f64::max))
            .unwrap_or(0.0)
            - c * ln_x;
        let term = |t: f64, lp: &Option<Complex64>| -> (f64, f64) {
            let Some(lp) = lp else { return (0.0, 0.0) };
            let s = Complex64::new(c, t);
            let mut z = (lp - s * ln_x - log_scale).exp();
            if let Some(w) = w {
                z *= w(s);
            }
            (z.re, z.norm())
        };
        let (mut sum, mut sum_abs) = {
            let (v, a) = term(0.0, &level0[0]);
            (0.5 * v, 0.5 * a)
        };
        for (k, lp) in level0.iter().enumerate().skip(1) {
            let (v, a) = term(k as f64 * table.h0, lp);
            sum += v;
            sum_abs += a;
        }
        let mut h = table.h0;
        let mut prev = sum * h / PI;
        let mut prev_diff = f64::INFINITY;
        for level in 1..=MAX_LEVEL {
            let nodes = table.level(&self.params, level);
            h *= 0.5;
            for (k, lp) in nodes.iter().enumerate() {
                let (v, a) = term((2 * k + 1) as f64 * h, lp);
                sum += v;
                sum_abs += a;
            }
            let cur = sum * h / PI;
            let diff = (cur - prev).abs();
            let noise = 64.0 * f64::EPSILON * sum_abs * h / PI;
            let scale = cur.abs().max(noise);
            let plan = || ContourPlan {
                c,
                half_height: table.half_height,
                step: h,
                step_count: (table.half_height / h).round() as usize + 1,
                estimated_tail_error: table.tail,
            };
            let exponential_regime = level >= 2 && diff < 0.1 * prev_diff;
            if diff <= self.tol * scale
                || diff <= noise
                || (exponential_regime && diff <= 0.01 * self.tol.sqrt() * scale)
            {
                return Ok((
                    Scaled {
                        mantissa: cur,
                        log_scale,
                    },
                    plan(),
                ));
            }
            prev = cur;
            prev_diff = diff;
        }
        Err(Error::Numerical(format!(
            "Meijer G quadrature at x={x:e} (c={c}) did not converge: last change {prev_diff:e}"
        )))
    }
}

/// `G^{1,0}_{1,1}(x | a; b) = x^b (1-x)^(a-b-1) / Γ(a-b)` on `(0, 1)`, with `1 - x`
/// supplied separately.
fn beta_kernel(a: f64, b: f64, x: f64, one_minus_x: f64) -> f64 {
    (b * x.ln() + (a - b - 1.0) * one_minus_x.ln() - ln_gamma(a - b)).exp()
}

fn compact_g(pairs: &[(f64, f64)], x: f64, tol: f64) -> Result<f64> {
    if x >= 1.0 {
        return Ok(0.0);
    }
    match pairs {
        [(a, b)] => Ok(beta_kernel(*a, *b, x, 1.0 - x)),
        [(a1, b1), (a2, b2)] => {
            // multiplicative convolution over u in (x, 1)
            tanh_sinh(x, 1.0, tol.max(1e-14), |u, du_lo, du_hi| {
                beta_kernel(*a1, *b1, u, du_hi) * beta_kernel(*a2, *b2, x / u, du_lo / u) / u
            })
        }
        _ => Err(Error::Unsupported(
            "compactly supported G with more than two factors".into(),
        )),
    }
}

/// One-off evaluation of `G(x)` to relative tolerance `tol`.
pub fn meijer_g(params: &MeijerGParams, x: f64, tol: f64) -> Result<f64> {
    MeijerG::new(params.clone())?.with_tolerance(tol).eval(x)
}

/// The contour used for `G(x)` at tolerance `tol`.
pub fn plan_contour(params: &MeijerGParams, x: f64, tol: f64) -> Result<ContourPlan> {
    MeijerG::new(params.clone())?.with_tolerance(tol).plan(x)
}

/// Leading large-`x` behaviour of `G^{q,0}_{p,q}`:
/// `(2π)^((σ-1)/2) σ^(-1/2) x^θ exp(-σ x^(1/σ))`, `σ = q - p`.
pub fn asymptotic_g(params: &MeijerGParams, x: f64) -> Result<f64> {
    Ok(ln_asymptotic_g(params, x)?.exp())
}

/// Natural log of [`asymptotic_g`].
pub fn ln_asymptotic_g(params: &MeijerGParams, x: f64) -> Result<f64> {
    let p = params.p();
    let q = params.q();
    if q <= p || params.n != 0 || params.m != q {
        return Err(invalid!(
            "asymptotic form needs G^{{q,0}}_{{p,q}} with q > p"
        ));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!("asymptotic G at x = {x}")));
    }
    let sigma = (q - p) as f64;
    let theta = ((1.0 - sigma) / 2.0 + params.b.iter().sum::<f64>() - params.a.iter().sum::<f64>())
        / sigma;
    Ok(0.5 * (sigma - 1.0) * (2.0 * PI).ln() - 0.5 * sigma.ln() + theta * x.ln()
        - sigma * (x.ln() / sigma).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{bessel_k, gamma};
    use approx::assert_relative_eq;

    fn exp_params(b: f64) -> MeijerGParams {
        MeijerGParams::full(vec![], vec![b]).unwrap()
    }

    #[test]
    fn exponential_identity() {
        let g = MeijerG::new(exp_params(0.0)).unwrap();
        for i in 0..=40 {
            let x = 0.1 + i as f64 * 0.2475;
            assert!((g.eval(x).unwrap() - (-x).exp()).abs() <= 1e-10, "x={x}");
        }
        assert_relative_eq!(meijer_g(&exp_params(0.0), 1.0, 1e-10).unwrap(), (-1f64).exp(), max_relative = 1e-10);
    }

    #[test]
    fn exponential_tail_is_relatively_accurate() {
        let g = MeijerG::new(exp_params(0.0)).unwrap();
        for &x in &[30.0, 200.0, 700.0, 2000.0] {
            let v = g.eval_scaled(x).unwrap();
            assert_relative_eq!(v.ln_abs(), -x, max_relative = 1e-12);
        }
    }

    #[test]
    fn bessel_k_representation() {
        for &nu in &[0.0, 0.3, 1.0, 1.7, 3.0] {
            let g = MeijerG::new(MeijerGParams::full(vec![], vec![nu / 2.0, -nu / 2.0]).unwrap())
                .unwrap();
            for &x in &[0.2, 1.0, 1.7, 5.0, 20.0] {
                let v = g.eval(x * x / 4.0).unwrap();
                assert_relative_eq!(v, 2.0 * bessel_k(nu, x).unwrap(), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn beta_density() {
        // G^{1,0}_{1,1}(x | a+b-1; a-1) Γ(a+b)/Γ(a) = Beta(a,b) density
        let (a, b) = (2.5, 1.5);
        let g = MeijerG::new(MeijerGParams::full(vec![a + b - 1.0], vec![a - 1.0]).unwrap()).unwrap();
        let k = gamma(a + b) / gamma(a);
        let beta_fn = gamma(a) * gamma(b) / gamma(a + b);
        for &x in &[0.1f64, 0.35, 0.5, 0.8, 0.95] {
            let oracle = x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0) / beta_fn;
            assert_relative_eq!(k * g.eval(x).unwrap(), oracle, max_relative = 1e-9);
        }
    }

    #[test]
    fn product_of_two_betas() {
        // density of X1 X2 by direct quadrature over x1
        let ((a1, b1), (a2, b2)) = ((2.5, 2.0), (1.2, 3.0));
        let p = MeijerGParams::full(vec![a1 + b1 - 1.0, a2 + b2 - 1.0], vec![a1 - 1.0, a2 - 1.0]).unwrap();
        let g = MeijerG::new(p).unwrap();
        let k = gamma(a1 + b1) / gamma(a1) * gamma(a2 + b2) / gamma(a2);
        let beta_pdf = |a: f64, b: f64, x: f64| {
            x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0) * gamma(a + b) / (gamma(a) * gamma(b))
        };
        for &w in &[0.05f64, 0.3, 0.7] {
            let oracle = crate::specfun::quad::adaptive_gk(w, 1.0, 1e-14, 1e-12, |u| {
                beta_pdf(a1, b1, u) * beta_pdf(a2, b2, w / u) / u
            })
            .unwrap();
            assert_relative_eq!(k * g.eval(w).unwrap(), oracle, max_relative = 1e-8);
        }
        assert_eq!(g.eval(1.5).unwrap(), 0.0);
        assert!(g.eval_poly(0.5, &[1.0]).is_err());
    }

    #[test]
    fn decay_and_strip() {
        let p = MeijerGParams::full(vec![1.0], vec![0.5, 0.25]).unwrap();
        assert_eq!(p.decay(), 1);
        assert_eq!(p.strip(), (-0.25, f64::INFINITY));
        assert!(MeijerGParams::full(vec![0.1, 0.2], vec![0.5, 0.25]).is_err());
        assert!(MeijerGParams::new(1, 1, vec![0.0], vec![-1.5]).is_err());
        assert!(MeijerGParams::full(vec![0.5, 0.7], vec![0.6, 0.9]).is_err());
        let slow = MeijerG::new(MeijerGParams::full(vec![], vec![0.0]).unwrap()).unwrap();
        let fast = MeijerG::new(MeijerGParams::full(vec![], vec![0.0, 0.5]).unwrap()).unwrap();
        let (ps, pf) = (slow.plan(1.0).unwrap(), fast.plan(1.0).unwrap());
        assert!(pf.half_height < ps.half_height);
        assert!(slow.plan(50.0).unwrap().c > ps.c);
    }

    #[test]
    fn reduction_identity() {
        let full = MeijerGParams::full(vec![0.7], vec![0.7, 0.2]).unwrap();
        let red = full.reduce();
        assert_eq!(red, MeijerGParams::full(vec![], vec![0.2]).unwrap());
        let two = MeijerGParams::full(vec![0.3, 1.1], vec![1.1, 0.4, 0.3]).unwrap();
        let r2 = two.reduce();
        assert_eq!((r2.p(), r2.q()), (0, 1));
        let none = MeijerGParams::full(vec![0.9], vec![0.4, 0.3]).unwrap();
        assert_eq!(none.reduce(), none);
        for &x in &[0.3, 1.0, 4.0] {
            let a = meijer_g(&full, x, 1e-11).unwrap();
            let b = meijer_g(&red, x, 1e-11).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-9);
            let a = meijer_g(&two, x, 1e-11).unwrap();
            let b = meijer_g(&r2, x, 1e-11).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn shift_identity() {
        let base = MeijerGParams::full(vec![1.2], vec![0.3, 0.8, 0.0]).unwrap();
        assert_eq!(base.shift(0.0), base);
        for &c in &[-0.25, 1.0, 2.7] {
            let shifted = base.shift(c);
            for &x in &[0.5f64, 2.0, 9.0] {
                let lhs = x.powf(c) * meijer_g(&base, x, 1e-11).unwrap();
                let rhs = meijer_g(&shifted, x, 1e-11).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-9);
            }
        }
        // x e^-x = G(x | ; 1)
        assert_relative_eq!(meijer_g(&exp_params(1.0), 2.0, 1e-11).unwrap(), 2.0 * (-2f64).exp(), max_relative = 1e-10);
    }

    #[test]
    fn weighted_evaluation_gives_log_derivatives() {
        // (x d/dx) e^-x = -x e^-x
        let g = MeijerG::new(exp_params(0.0)).unwrap();
        for &x in &[0.3, 2.0, 7.0] {
            let v = g.eval_poly(x, &[0.0, -1.0]).unwrap();
            assert_relative_eq!(v, -x * (-x).exp(), max_relative = 1e-10);
            let v2 = g.eval_poly(x, &[0.0, 0.0, 1.0]).unwrap();
            assert_relative_eq!(v2, (x * x - x) * (-x).exp(), max_relative = 1e-10);
        }
    }

    #[test]
    fn asymptotic_ratios() {
        let e = exp_params(0.6);
        assert_relative_eq!(asymptotic_g(&e, 3.0).unwrap(), 3f64.powf(0.6) * (-3f64).exp(), max_relative = 1e-14);
        let k = MeijerGParams::full(vec![], vec![0.35, -0.35]).unwrap();
        let x = 30.0f64;
        // 2 K_ν(x) ~ sqrt(2π/x) e^-x at y = x²/4
        let ratio = asymptotic_g(&k, x * x / 4.0).unwrap() / (2.0 * bessel_k(0.7, x).unwrap());
        assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
        let p = MeijerGParams::full(vec![1.3, 0.9], vec![0.4, 0.1, 0.6, 0.0]).unwrap();
        let g = MeijerG::new(p.clone()).unwrap();
        // leading-order error is O(x^(-1/σ))
        let mut last = f64::INFINITY;
        for &x in &[1e2, 1e4, 1e6] {
            let ratio = (g.eval_scaled(x).unwrap().ln_abs() - ln_asymptotic_g(&p, x).unwrap()).exp();
            let err = (ratio - 1.0).abs();
            assert!(err < last, "{x} {ratio}");
            last = err;
        }
        assert!(last < 0.01, "{last}");
        assert!(asymptotic_g(&MeijerGParams::new(1, 1, vec![0.5], vec![0.1, 0.2]).unwrap(), 2.0).is_err());
    }

    #[test]
    fn small_arguments_near_the_leading_pole() {
        let k0 = MeijerG::new(MeijerGParams::full(vec![], vec![0.0, 0.0]).unwrap()).unwrap();
        for &y in &[1e-6, 1e-20, 1e-60] {
            let v = k0.eval(y).unwrap();
            assert_relative_eq!(v, 2.0 * bessel_k(0.0, 2.0 * f64::sqrt(y)).unwrap(), max_relative = 1e-9);
        }
        let g = MeijerG::new(exp_params(-0.3)).unwrap();
        for &y in &[1e-10, 1e-40] {
            assert_relative_eq!(g.eval(y).unwrap(), y.powf(-0.3) * (-y).exp(), max_relative = 1e-9);
        }
    }

    #[test]
    fn only_right_poles() {
        // G^{0,1}_{1,0}(z | 1; ) = exp(-1/z)
        let p = MeijerGParams::new(0, 1, vec![1.0], vec![]).unwrap();
        for &z in &[0.2, 1.0, 5.0] {
            assert_relative_eq!(meijer_g(&p, z, 1e-11).unwrap(), (-1.0 / z).exp(), max_relative = 1e-9);
        }
    }

    #[test]
    fn n_equal_one_against_closed_form() {
        // G^{1,1}_{1,1}(x | 0; 0) = 1/(1+x)
        let p = MeijerGParams::new(1, 1, vec![0.0], vec![0.0]).unwrap();
        for &x in &[0.2, 1.0, 3.0] {
            assert_relative_eq!(meijer_g(&p, x, 1e-11).unwrap(), 1.0 / (1.0 + x), max_relative = 1e-9);
        }
    }
}
