//! Bounded solution of the two-factor product gamma Stein equation
//!
//! `x² f'' + (1 + r1 + r2) x f' + (r1 r2 - λ² x) f = h(x) - E h(Y)`,
//! `Y ~ PG(r1, r2, λ)`, by variation of parameters on the fundamental pair
//! `x^(-ρ) K_ν(2λ√x)`, `x^(-ρ) I_|ν|(2λ√x)` with `ρ = (r1 + r2)/2`, `ν = r1 - r2`.

mod functions;

use std::sync::Arc;

pub use functions::{Growth, TestFunction, BUILTIN_NAMES};

use crate::error::{invalid, Error, Result};
use crate::specfun::bessel_ik_scaled;
use crate::specfun::quad::{adaptive_gk, tanh_sinh, GaussLegendre};

const NODES: usize = 8;
const LOWER: f64 = 1e-7;
const MAX_STEP: f64 = 1.0 / 16.0;
const MAX_UPPER: f64 = 1e5;
/// Below this value of `2λ√x` the solution is assembled from integrals over
/// `(0, x)`, above it from the tail integral over `(x, ∞)`.
const SWITCH_Z: f64 = 2.0;
const TAIL_Z: f64 = 40.0;

type Source = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `I_μ(z)`, `K_μ(z)` and first derivatives, unscaled.
#[derive(Clone, Copy, Debug)]
struct Pair {
    i: f64,
    k: f64,
    ip: f64,
    kp: f64,
}

fn pair(mu: f64, z: f64) -> Result<Pair> {
    let s = bessel_ik_scaled(mu, z)?;
    let (eu, ed) = (z.exp(), (-z).exp());
    Ok(Pair {
        i: s.i * eu,
        k: s.k * ed,
        ip: s.ip * eu,
        kp: s.kp * ed,
    })
}

/// Integration grid in `u = ln t` shared by all stages with the same `λ`, `μ`.
#[derive(Debug)]
struct Grid {
    lambda: f64,
    mu: f64,
    edges: Vec<f64>,
    gl: GaussLegendre,
    /// `cum[j][l] = ∫_{-1}^{s_j} L_l(s) ds` for the Lagrange basis on the nodes.
    cum: Vec<[f64; NODES]>,
    /// Bessel pair at every node, panel-major.
    bessel: Vec<(f64, f64)>,
}

impl Grid {
    fn new(lambda: f64, mu: f64) -> Result<Self> {
        let upper = (20.0 / lambda).powi(2).max((150.0 / lambda).powi(2).min(2e3));
        if upper > MAX_UPPER {
            return Err(Error::Unsupported(format!(
                "λ = {lambda} is too small for the tabulated Stein solution (needs λ >= 0.0633)"
            )));
        }
        let (u0, u1) = (LOWER.ln(), upper.ln());
        let mut edges = vec![u0];
        let mut u = u0;
        while u < u1 {
            // panels at most one unit wide in t, to resolve oscillating h
            let step = MAX_STEP.min((-u).exp());
            u = if u1 - (u + step) < 0.25 * step { u1 } else { u + step };
            edges.push(u);
        }
        let gl = GaussLegendre::new(NODES);
        let s = &gl.nodes;
        let mut cum = vec![[0.0; NODES]; NODES];
        for j in 0..NODES {
            for (l, c) in cum[j].iter_mut().enumerate() {
                *c = gl.integrate(-1.0, s[j], |v| {
                    (0..NODES)
                        .filter(|&m| m != l)
                        .map(|m| (v - s[m]) / (s[l] - s[m]))
                        .product()
                });
            }
        }
        let mut bessel = Vec::with_capacity((edges.len() - 1) * NODES);
        for w in edges.windows(2) {
            for &sj in &gl.nodes {
                let t = node(w[0], w[1], sj).exp();
                let p = pair(mu, 2.0 * lambda * t.sqrt())?;
                bessel.push((p.i, p.k));
            }
        }
        Ok(Self {
            lambda,
            mu,
            edges,
            gl,
            cum,
            bessel,
        })
    }

    fn lower(&self) -> f64 {
        self.edges[0].exp()
    }

    fn upper(&self) -> f64 {
        self.edges[self.edges.len() - 1].exp()
    }

    fn panels(&self) -> usize {
        self.edges.len() - 1
    }

    fn node_t(&self, p: usize, j: usize) -> f64 {
        node(self.edges[p], self.edges[p + 1], self.gl.nodes[j]).exp()
    }
}

fn node(a: f64, b: f64, s: f64) -> f64 {
    0.5 * (a + b) + 0.5 * (b - a) * s
}

/// `∫_0^x t^(ρ-1) I_μ h̃`, `∫_0^x t^(ρ-1) K_ν h̃` and `∫_x^∞ t^(ρ-1) K_ν h̃`.
#[derive(Clone, Copy, Debug)]
struct Integrals {
    ji: f64,
    jk0: f64,
    jkinf: f64,
}

/// The bounded solution for one `(r1, r2, λ, h)`.
pub struct SteinSolution {
    r1: f64,
    r2: f64,
    lambda: f64,
    rho: f64,
    name: String,
    h: Source,
    grid: Arc<Grid>,
    mean: f64,
    normaliser: f64,
    h_tilde_sup: f64,
    ji: Vec<f64>,
    jk0: Vec<f64>,
    jkinf: Vec<f64>,
    f_nodes: Vec<f64>,
}

impl std::fmt::Debug for SteinSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SteinSolution")
            .field("r1", &self.r1)
            .field("r2", &self.r2)
            .field("lambda", &self.lambda)
            .field("h", &self.name)
            .field("mean", &self.mean)
            .finish()
    }
}

fn check_params(r1: f64, r2: f64, lambda: f64) -> Result<()> {
    for (name, v) in [("r1", r1), ("r2", r2), ("lambda", lambda)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid!("{name} must be positive and finite, got {v}"));
        }
    }
    Ok(())
}

/// Solve the Stein equation for `h`. Functions of linear growth are accepted
/// since the kernel decays like `e^(-2λ√t)`.
pub fn solve_stein_pg(r1: f64, r2: f64, lambda: f64, h: &TestFunction) -> Result<SteinSolution> {
    check_params(r1, r2, lambda)?;
    if h.growth() == Growth::Unbounded {
        return Err(invalid!("test function '{}' is unbounded", h.name()));
    }
    let raw = h.raw();
    let grid = Arc::new(Grid::new(lambda, (r1 - r2).abs())?);
    let (lo, hi) = (1e-12f64, grid.upper());
    let mut sol = SteinSolution::build(r1, r2, h.name().to_string(), Arc::new(move |x| raw(x, 0)), None, grid)?;
    // the supremum of a monotone h sits at an end of the half-line
    let mut sup = sol.h_tilde_sup;
    for i in 0..=200 {
        let v = sol.h_tilde(lo * (hi / lo).powf(i as f64 / 200.0));
        if v.is_finite() {
            sup = sup.max(v.abs());
        }
    }
    let v0 = sol.h_tilde(0.0);
    if v0.is_finite() {
        sup = sup.max(v0.abs());
    }
    sol.h_tilde_sup = sup;
    Ok(sol)
}

/// `x² f'' + (1 + r1 + r2) x f' + (r1 r2 - λ² x) f - h̃(x)` for the computed `f`.
pub fn stein_residual(sol: &SteinSolution, x: f64) -> Result<f64> {
    sol.residual(x)
}

impl SteinSolution {
    fn build(
        r1: f64,
        r2: f64,
        name: String,
        h: Source,
        node_values: Option<Vec<f64>>,
        grid: Arc<Grid>,
    ) -> Result<Self> {
        let rho = 0.5 * (r1 + r2);
        let (lambda, mu) = (grid.lambda, grid.mu);
        let count = grid.panels() * NODES;
        let hv = match node_values {
            Some(v) => v,
            None => (0..count)
                .map(|n| h(grid.node_t(n / NODES, n % NODES)))
                .collect(),
        };
        // t^ρ I, t^ρ K at nodes: integrands in u for unit h
        let mut wi = Vec::with_capacity(count);
        let mut wk = Vec::with_capacity(count);
        for n in 0..count {
            let t = grid.node_t(n / NODES, n % NODES);
            let (bi, bk) = grid.bessel[n];
            let tr = t.powf(rho);
            wi.push(tr * bi);
            wk.push(tr * bk);
        }
        let lo = grid.lower();
        let below = |kernel: fn(&Pair) -> f64, with_h: bool| -> Result<f64> {
            tanh_sinh(0.0, lo, 1e-13, |_, t, _| {
                if t < 1e-280 {
                    return 0.0;
                }
                match pair(mu, 2.0 * lambda * t.sqrt()) {
                    Ok(p) => t.powf(rho - 1.0) * kernel(&p) * if with_h { h(t) } else { 1.0 },
                    Err(_) => f64::NAN,
                }
            })
        };
        let (bi_h, bi_1) = (below(|p| p.i, true)?, below(|p| p.i, false)?);
        let (bk_h, bk_1) = (below(|p| p.k, true)?, below(|p| p.k, false)?);

        let w = &grid.gl.weights;
        let mut panel_k_h = 0.0;
        let mut panel_k_1 = 0.0;
        for p in 0..grid.panels() {
            let half = 0.5 * (grid.edges[p + 1] - grid.edges[p]);
            for j in 0..NODES {
                let n = p * NODES + j;
                panel_k_h += half * w[j] * wk[n] * hv[n];
                panel_k_1 += half * w[j] * wk[n];
            }
        }
        let normaliser = bk_1 + panel_k_1;
        let mean = (bk_h + panel_k_h) / normaliser;
        if !mean.is_finite() {
            return Err(Error::Numerical(format!("E h(Y) is not finite for '{name}'")));
        }

        let panels = grid.panels();
        let mut ji = vec![0.0; panels + 1];
        let mut jk0 = vec![0.0; panels + 1];
        let mut jkinf = vec![0.0; panels + 1];
        ji[0] = bi_h - mean * bi_1;
        jk0[0] = bk_h - mean * bk_1;
        let mut panel_k = vec![0.0; panels];
        let mut cum_i = vec![0.0; count];
        let mut cum_k = vec![0.0; count];
        let mut h_tilde_sup = 0.0f64;
        for p in 0..panels {
            let half = 0.5 * (grid.edges[p + 1] - grid.edges[p]);
            let mut gi = [0.0; NODES];
            let mut gk = [0.0; NODES];
            for j in 0..NODES {
                let n = p * NODES + j;
                let ht = hv[n] - mean;
                h_tilde_sup = h_tilde_sup.max(ht.abs());
                gi[j] = wi[n] * ht;
                gk[j] = wk[n] * ht;
            }
            let (mut si, mut sk) = (0.0, 0.0);
            for j in 0..NODES {
                si += w[j] * gi[j];
                sk += w[j] * gk[j];
                let row = &grid.cum[j];
                cum_i[p * NODES + j] = half * row.iter().zip(&gi).map(|(c, g)| c * g).sum::<f64>();
                cum_k[p * NODES + j] = half * row.iter().zip(&gk).map(|(c, g)| c * g).sum::<f64>();
            }
            ji[p + 1] = ji[p] + half * si;
            jk0[p + 1] = jk0[p] + half * sk;
            panel_k[p] = half * sk;
        }
        for p in (0..panels).rev() {
            jkinf[p] = jkinf[p + 1] + panel_k[p];
        }
        let mut sol = Self {
            r1,
            r2,
            lambda,
            rho,
            name,
            h,
            grid: grid.clone(),
            mean,
            normaliser,
            h_tilde_sup,
            ji,
            jk0,
            jkinf,
            f_nodes: Vec::new(),
        };
        let mut f_nodes = Vec::with_capacity(count);
        for n in 0..count {
            let p = n / NODES;
            let t = grid.node_t(p, n % NODES);
            let j = Integrals {
                ji: sol.ji[p] + cum_i[n],
                jk0: sol.jk0[p] + cum_k[n],
                jkinf: sol.jkinf[p] - cum_k[n],
            };
            let (bi, bk) = grid.bessel[n];
            f_nodes.push(sol.assemble(t, bi, bk, &j, sol.prefer_ink(t)));
        }
        sol.f_nodes = f_nodes;
        Ok(sol)
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn test_function_name(&self) -> &str {
        &self.name
    }

    /// `E h(Y)` from the tabulated kernel integrals.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `∫_0^∞ t^(ρ-1) K_ν(2λ√t) dt`, computed on the same grid; exactly
    /// `Γ(r1) Γ(r2) / (2 λ^(r1+r2))`.
    pub fn normaliser(&self) -> f64 {
        self.normaliser
    }

    /// `sup |h̃|` over the integration nodes.
    pub fn h_tilde_sup(&self) -> f64 {
        self.h_tilde_sup
    }

    /// Tabulated range; outside it integrals are computed directly.
    pub fn table_range(&self) -> (f64, f64) {
        (self.grid.lower(), self.grid.upper())
    }

    pub fn h_tilde(&self, x: f64) -> f64 {
        (self.h)(x) - self.mean
    }

    /// Limit bound `4 ‖h̃‖ / (r1 + r2)²` for `|f(x)|` as `x ↓ 0` when `r1 = r2`.
    pub fn small_x_bound(&self) -> Option<f64> {
        (self.r1 == self.r2).then(|| 4.0 * self.h_tilde_sup / (self.r1 + self.r2).powi(2))
    }

    fn prefer_ink(&self, x: f64) -> bool {
        2.0 * self.lambda * x.sqrt() < SWITCH_Z
    }

    fn assemble(&self, x: f64, bi: f64, bk: f64, j: &Integrals, ink: bool) -> f64 {
        let s = 2.0 / x.powf(self.rho);
        if ink {
            s * (-bk * j.ji + bi * j.jk0)
        } else {
            s * (-bk * j.ji - bi * j.jkinf)
        }
    }

    fn integrals(&self, x: f64) -> Result<Integrals> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("Stein solution needs x > 0, got {x}")));
        }
        let (mu, lambda, rho) = (self.grid.mu, self.lambda, self.rho);
        let integrand = |t: f64, kernel: fn(&Pair) -> f64| -> f64 {
            match pair(mu, 2.0 * lambda * t.sqrt()) {
                Ok(p) => t.powf(rho - 1.0) * kernel(&p) * self.h_tilde(t),
                Err(_) => f64::NAN,
            }
        };
        let g = &self.grid;
        if x < g.lower() {
            let part = |kernel: fn(&Pair) -> f64| {
                tanh_sinh(0.0, x, 1e-13, |_, t, _| if t < 1e-280 { 0.0 } else { integrand(t, kernel) })
            };
            let (ji, jk0) = (part(|p| p.i)?, part(|p| p.k)?);
            return Ok(Integrals {
                ji,
                jk0,
                jkinf: self.jkinf[0] + self.jk0[0] - jk0,
            });
        }
        let last = g.panels();
        if x >= g.upper() {
            let z = 2.0 * lambda * x.sqrt();
            if z > 600.0 {
                return Err(Error::Domain(format!("x = {x} is too large for the Stein solution")));
            }
            let far = ((z + TAIL_Z) / (2.0 * lambda)).powi(2);
            let in_u = |kernel: fn(&Pair) -> f64| move |u: f64| {
                let t = u.exp();
                t * integrand(t, kernel)
            };
            let ji = self.ji[last] + adaptive_gk(g.upper().ln(), x.ln(), 0.0, 1e-13, in_u(|p| p.i))?;
            let jkinf = adaptive_gk(x.ln(), far.ln(), 0.0, 1e-13, in_u(|p| p.k))?;
            return Ok(Integrals {
                ji,
                jk0: self.jk0[last] - jkinf,
                jkinf,
            });
        }
        let u = x.ln();
        let p = (g.edges.partition_point(|&e| e <= u) - 1).min(last - 1);
        let a = g.edges[p];
        let (mut si, mut sk) = (0.0, 0.0);
        let half = 0.5 * (u - a);
        for (s, w) in g.gl.nodes.iter().zip(&g.gl.weights) {
            let t = (0.5 * (u + a) + half * s).exp();
            si += w * t * integrand(t, |p| p.i);
            sk += w * t * integrand(t, |p| p.k);
        }
        Ok(Integrals {
            ji: self.ji[p] + half * si,
            jk0: self.jk0[p] + half * sk,
            jkinf: self.jkinf[p] - half * sk,
        })
    }

    fn eval_with(&self, x: f64, ink: bool) -> Result<f64> {
        let j = self.integrals(x)?;
        let b = pair(self.grid.mu, 2.0 * self.lambda * x.sqrt())?;
        let v = self.assemble(x, b.i, b.k, &j, ink);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numerical(format!("Stein solution not finite at x = {x}")))
        }
    }

    /// `f(x)`, from the representation that is numerically stable at `x`.
    pub fn f(&self, x: f64) -> Result<f64> {
        self.eval_with(x, self.prefer_ink(x))
    }

    /// Representation with both integrals over `(0, x)`.
    pub fn f_ink(&self, x: f64) -> Result<f64> {
        self.eval_with(x, true)
    }

    /// Representation with the `K` integral over `(x, ∞)`.
    pub fn f_pen(&self, x: f64) -> Result<f64> {
        self.eval_with(x, false)
    }

    /// `(f, f', f'')` by differentiating the integral representation.
    pub fn derivatives(&self, x: f64) -> Result<(f64, f64, f64)> {
        let j = self.integrals(x)?;
        let ink = self.prefer_ink(x);
        let jk = if ink { j.jk0 } else { -j.jkinf };
        let (w1, w2) = fundamental_pair(self.r1, self.r2, self.lambda, x)?;
        let ht = self.h_tilde(x);
        let xr = x.powf(self.rho - 1.0);
        let (gi, gk) = (xr * w2.bessel * ht, xr * w1.bessel * ht);
        let f = 2.0 * (-w1.w * j.ji + w2.w * jk);
        let d1 = 2.0 * (-w1.d1 * j.ji + w2.d1 * jk);
        let d2 = 2.0 * (-w1.d2 * j.ji + w2.d2 * jk) + 2.0 * (-w1.d1 * gi + w2.d1 * gk);
        Ok((f, d1, d2))
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        Ok(self.derivatives(x)?.1)
    }

    pub fn residual(&self, x: f64) -> Result<f64> {
        let (f, d1, d2) = self.derivatives(x)?;
        let (r1, r2, l) = (self.r1, self.r2, self.lambda);
        Ok(x * x * d2 + (1.0 + r1 + r2) * x * d1 + (r1 * r2 - l * l * x) * f - self.h_tilde(x))
    }

    /// `max |f|` over `points`.
    pub fn sup_norm(&self, points: &[f64]) -> Result<f64> {
        points
            .iter()
            .try_fold(0.0f64, |acc, &x| Ok(acc.max(self.f(x)?.abs())))
    }

    /// Solution of the differentiated equation
    /// `A_{r1+k, r2+k, λ} f^(k) = h^(k) + k λ² f^(k-1)`, where `self` holds
    /// `f^(k-1)` and `h` is the original test function.
    fn next_stage(self: &Arc<Self>, h: &TestFunction, k: usize) -> Result<SteinSolution> {
        h.check_order(k)?;
        let prev = self.clone();
        let raw = h.raw();
        let at_nodes = raw.clone();
        let l2 = self.lambda * self.lambda;
        let kf = k as f64;
        let lo = self.grid.lower();
        // below the table f^(k-1) is flat to within its own small-x limit
        let floor = prev.f(lo)?;
        let source: Source = Arc::new(move |x| {
            let fx = if x < lo { floor } else { prev.f(x).unwrap_or(f64::NAN) };
            raw(x, k) + kf * l2 * fx
        });
        let g = &self.grid;
        let values = (0..g.panels() * NODES)
            .map(|n| at_nodes(g.node_t(n / NODES, n % NODES), k) + kf * l2 * self.f_nodes[n])
            .collect();
        SteinSolution::build(
            self.r1 + 1.0,
            self.r2 + 1.0,
            format!("{}^({k}) + {k}λ²f^({})", h.name(), k - 1),
            source,
            Some(values),
            self.grid.clone(),
        )
    }
}

/// `w`, `w'`, `w''` for `w(x) = x^(-ρ) B(2λ√x)`, with the Bessel value kept.
#[derive(Clone, Copy, Debug)]
pub struct PairDerivatives {
    pub bessel: f64,
    pub w: f64,
    pub d1: f64,
    pub d2: f64,
}

/// `(K-solution, I-solution)` of the homogeneous equation with derivatives.
/// Second derivatives of the Bessel functions come from an independent
/// evaluation at order `μ + 1`.
pub fn fundamental_pair(r1: f64, r2: f64, lambda: f64, x: f64) -> Result<(PairDerivatives, PairDerivatives)> {
    check_params(r1, r2, lambda)?;
    let rho = 0.5 * (r1 + r2);
    let mu = (r1 - r2).abs();
    let z = 2.0 * lambda * x.sqrt();
    let p = pair(mu, z)?;
    let q = pair(mu + 1.0, z)?;
    let kpp = -(mu / (z * z)) * p.k + (mu / z) * p.kp + p.k + ((mu + 1.0) / z) * q.k;
    let ipp = (p.i - ((mu + 1.0) / z) * q.i) - (mu / (z * z)) * p.i + (mu / z) * p.ip;
    let build = |b: f64, bp: f64, bpp: f64| {
        let c = -rho * b + 0.5 * z * bp;
        PairDerivatives {
            bessel: b,
            w: x.powf(-rho) * b,
            d1: x.powf(-rho - 1.0) * c,
            d2: x.powf(-rho - 2.0) * (-(rho + 1.0) * c + 0.5 * z * (-rho * bp + 0.5 * bp + 0.5 * z * bpp)),
        }
    };
    Ok((build(p.k, p.kp, kpp), build(p.i, p.ip, ipp)))
}

/// Relative residuals of the homogeneous equation at `x` for both solutions:
/// `|A w| / (|x² w''| + |(1+r1+r2) x w'| + |(r1 r2 - λ² x) w|)`.
pub fn homogeneous_residuals(r1: f64, r2: f64, lambda: f64, x: f64) -> Result<(f64, f64)> {
    let (a, b) = fundamental_pair(r1, r2, lambda, x)?;
    let rel = |w: &PairDerivatives| {
        let terms = [
            x * x * w.d2,
            (1.0 + r1 + r2) * x * w.d1,
            (r1 * r2 - lambda * lambda * x) * w.w,
        ];
        terms.iter().sum::<f64>().abs() / terms.iter().map(|t| t.abs()).sum::<f64>()
    };
    Ok((rel(&a), rel(&b)))
}

/// `count` log-spaced points on `[1e-3, 1e2]`.
pub fn sup_grid(count: usize) -> Vec<f64> {
    let (a, b) = (1e-3f64.ln(), 1e2f64.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Empirical sup norms of `f, f', …, f^(k_max)`.
#[derive(Debug)]
pub struct DerivativeBounds {
    /// `sup |f^(k)|` over [`DerivativeBounds::grid`].
    pub sups: Vec<f64>,
    /// `E[h^(k)(Y_k) + k λ² f^(k-1)(Y_k)]` for `Y_k ~ PG(r1+k, r2+k, λ)`;
    /// zero in exact arithmetic for `k >= 1`.
    pub stage_means: Vec<f64>,
    pub grid: Vec<f64>,
    pub stages: Vec<Arc<SteinSolution>>,
}

/// Estimate `‖f^(k)‖`, `k = 0..=k_max`, on 400 log-spaced points, solving the
/// stage-`k` equation at shifted shapes `(r1 + k, r2 + k)`.
pub fn estimate_derivative_bounds(
    r1: f64,
    r2: f64,
    lambda: f64,
    h: &TestFunction,
    k_max: usize,
) -> Result<DerivativeBounds> {
    h.check_order(k_max)?;
    let grid = sup_grid(400);
    let mut stages = vec![Arc::new(solve_stein_pg(r1, r2, lambda, h)?)];
    for k in 1..=k_max {
        let next = stages[k - 1].next_stage(h, k)?;
        stages.push(Arc::new(next));
    }
    let sups = stages
        .iter()
        .map(|s| s.sup_norm(&grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(DerivativeBounds {
        sups,
        stage_means: stages.iter().map(|s| s.mean()).collect(),
        grid,
        stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::ln_gamma;
    use approx::assert_relative_eq;

    const PARAMS: [(f64, f64, f64); 3] = [(1.0, 1.0, 1.0), (2.0, 0.5, 1.0), (1.5, 1.5, 2.0)];

    #[test]
    fn normaliser_and_mean_of_exponential() {
        // E e^{-Y} = E (1 + Y1/λ)^{-r2}, evaluated in high precision
        let oracle = [0.596_347_362_323_194_1, 0.621_063_921_929_343_9, 0.667_401_857_972_946_2];
        let h = TestFunction::builtin("exp").unwrap();
        for (&(r1, r2, l), e) in PARAMS.iter().zip(oracle) {
            let s = solve_stein_pg(r1, r2, l, &h).unwrap();
            let exact = (ln_gamma(r1) + ln_gamma(r2)).exp() / (2.0 * l.powf(r1 + r2));
            assert_relative_eq!(s.normaliser(), exact, max_relative = 1e-12);
            assert_relative_eq!(s.mean(), e, max_relative = 1e-12);
        }
    }

    #[test]
    fn linear_test_function_has_constant_solution() {
        // (r1 r2 - λ² x) c = x - r1 r2/λ²  gives  c = -1/λ²
        let h = TestFunction::builtin("identity").unwrap();
        for &(r1, r2, l) in &PARAMS {
            let s = solve_stein_pg(r1, r2, l, &h).unwrap();
            assert_relative_eq!(s.mean(), r1 * r2 / (l * l), max_relative = 1e-12);
            for &x in &[1e-3, 0.1, 1.0, 10.0, 50.0] {
                assert_relative_eq!(s.f(x).unwrap(), -1.0 / (l * l), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn constant_test_function() {
        let s = solve_stein_pg(1.0, 2.0, 1.0, &TestFunction::builtin("one").unwrap()).unwrap();
        for &x in &[0.01, 1.0, 30.0] {
            assert!(s.f(x).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn representations_agree_and_residual_vanishes() {
        for &(r1, r2, l) in &PARAMS {
            for h in TestFunction::bounded_family() {
                let s = solve_stein_pg(r1, r2, l, &h).unwrap();
                for &x in &[0.1, 1.0, 10.0] {
                    let (a, b) = (s.f_ink(x).unwrap(), s.f_pen(x).unwrap());
                    assert!((a - b).abs() < 1e-8, "{} {r1} {r2} x={x}: {a} {b}", h.name());
                }
                for i in 0..40 {
                    let x = 0.01 * 5000f64.powf(i as f64 / 39.0);
                    let r = s.residual(x).unwrap();
                    assert!(r.abs() < 1e-6, "{} ({r1},{r2}) x={x}: {r}", h.name());
                }
            }
        }
    }

    #[test]
    fn residual_by_finite_differences() {
        // central differences in u = ln x with one Richardson step
        let h = TestFunction::builtin("sin").unwrap();
        let (r1, r2, l) = (2.0, 0.5, 1.0);
        let s = solve_stein_pg(r1, r2, l, &h).unwrap();
        for &x in &[0.05f64, 0.7, 3.0, 20.0] {
            let u = x.ln();
            let d = |step: f64| {
                let f = |k: f64| s.f((u + k * step).exp()).unwrap();
                let (fm, f0, fp) = (f(-1.0), f(0.0), f(1.0));
                ((fp - fm) / (2.0 * step), (fp - 2.0 * f0 + fm) / (step * step))
            };
            let (a1, a2) = d(2e-3);
            let (b1, b2) = d(1e-3);
            let (du, duu) = ((4.0 * b1 - a1) / 3.0, (4.0 * b2 - a2) / 3.0);
            // x f' = f_u, x² f'' = f_uu - f_u
            let f = s.f(x).unwrap();
            let res = (duu - du) + (1.0 + r1 + r2) * du + (r1 * r2 - l * l * x) * f - s.h_tilde(x);
            assert!(res.abs() < 1e-5, "x={x}: {res}");
            let (_, d1, _) = s.derivatives(x).unwrap();
            assert!((x * d1 - du).abs() < 1e-6);
        }
    }

    #[test]
    fn homogeneous_solutions() {
        for &(r1, r2, l) in &PARAMS {
            for &x in &[0.01, 0.5, 3.0, 40.0] {
                let (a, b) = homogeneous_residuals(r1, r2, l, x).unwrap();
                assert!(a < 1e-8 && b < 1e-8, "({r1},{r2}) x={x}: {a} {b}");
            }
        }
    }

    #[test]
    fn bounded_and_small_x_limit() {
        let h = TestFunction::builtin("cos").unwrap();
        for &(r1, r2, l) in &PARAMS {
            let s = solve_stein_pg(r1, r2, l, &h).unwrap();
            let a = s.sup_norm(&sup_grid(400)).unwrap();
            let b = s.sup_norm(&sup_grid(800)).unwrap();
            assert!(a.is_finite() && (a - b).abs() < 0.01 * b);
            if let Some(bound) = s.small_x_bound() {
                for &x in &[1e-6, 1e-9, 1e-12] {
                    assert!(s.f(x).unwrap().abs() <= bound);
                }
            }
        }
        assert!(solve_stein_pg(1.0, 1.0, 1.0, &TestFunction::new("e", None, Growth::Unbounded, |x, _| x.exp())).is_err());
    }

    #[test]
    fn stage_equations() {
        let h = TestFunction::builtin("sin").unwrap();
        let (r1, r2, l) = (2.0, 0.5, 1.0);
        let b = estimate_derivative_bounds(r1, r2, l, &h, 2).unwrap();
        assert_eq!(b.sups.len(), 3);
        assert_eq!((b.stages[1].r1(), b.stages[1].r2()), (3.0, 1.5));
        for k in 1..3 {
            assert!(b.stage_means[k].abs() < 1e-6, "stage {k}: {}", b.stage_means[k]);
        }
        // the stage-1 solution is the derivative of f
        for &x in &[0.05, 0.5, 2.0, 15.0] {
            let direct = b.stages[0].derivative(x).unwrap();
            assert!((b.stages[1].f(x).unwrap() - direct).abs() < 1e-7, "x={x}");
        }
        let limited = TestFunction::new("p", Some(1), Growth::Bounded, |x, k| if k == 0 { x.sin() } else { x.cos() });
        assert!(estimate_derivative_bounds(r1, r2, l, &limited, 2).is_err());
    }
}
