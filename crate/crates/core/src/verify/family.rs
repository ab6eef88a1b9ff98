use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::opalg::Smooth;

/// Damping profile of a test-function family; member `j` is `x^j` times it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FamilyKind {
    /// `e^(-x²/(2τ²))`
    GaussianDamped,
    /// `e^(-x/τ)`; positive supports only.
    ExponentialDamped,
    /// `sech(x/τ)`
    SechDamped,
    /// no damping
    Monomial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionFamily {
    pub kind: FamilyKind,
    pub indices: Vec<u32>,
    pub tau: f64,
    /// Highest derivative supplied; unlimited when absent.
    #[serde(default)]
    pub max_order: Option<usize>,
}

impl TestFunctionFamily {
    pub fn new(kind: FamilyKind, indices: &[u32], tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(invalid!("test-function scale must be positive, got {tau}"));
        }
        if indices.is_empty() {
            return Err(invalid!("test-function family needs at least one index"));
        }
        Ok(Self {
            kind,
            indices: indices.to_vec(),
            tau,
            max_order: None,
        })
    }

    pub fn with_max_order(mut self, order: usize) -> Self {
        self.max_order = Some(order);
        self
    }

    pub fn members(&self) -> Vec<FamilyMember> {
        self.indices
            .iter()
            .map(|&j| FamilyMember {
                kind: self.kind,
                index: j,
                tau: self.tau,
                max_order: self.max_order.unwrap_or(usize::MAX),
            })
            .collect()
    }
}

/// One test function `x^j d(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyMember {
    pub kind: FamilyKind,
    pub index: u32,
    pub tau: f64,
    max_order: usize,
}

impl FamilyMember {
    pub fn label(&self) -> String {
        let damp = match self.kind {
            FamilyKind::GaussianDamped => format!("exp(-x^2/(2*{}^2))", self.tau),
            FamilyKind::ExponentialDamped => format!("exp(-x/{})", self.tau),
            FamilyKind::SechDamped => format!("sech(x/{})", self.tau),
            FamilyKind::Monomial => String::new(),
        };
        match (self.index, damp.is_empty()) {
            (0, true) => "1".into(),
            (0, false) => damp,
            (j, true) => format!("x^{j}"),
            (j, false) => format!("x^{j}*{damp}"),
        }
    }

    fn damping(&self, x: f64, out: &mut [f64]) {
        let n = out.len();
        let tau = self.tau;
        match self.kind {
            FamilyKind::Monomial => {
                out.fill(0.0);
                out[0] = 1.0;
            }
            FamilyKind::ExponentialDamped => {
                let mut v = (-x / tau).exp();
                for slot in out.iter_mut() {
                    *slot = v;
                    v *= -1.0 / tau;
                }
            }
            FamilyKind::GaussianDamped => {
                // (-1/τ)^k He_k(x/τ) e^(-x²/(2τ²))
                let t = x / tau;
                let g = (-0.5 * t * t).exp();
                let (mut h0, mut h1) = (1.0, t);
                let mut s = 1.0;
                for (k, slot) in out.iter_mut().enumerate() {
                    let he = if k == 0 { h0 } else { h1 };
                    *slot = s * he * g;
                    s *= -1.0 / tau;
                    if k >= 1 {
                        let h2 = t * h1 - k as f64 * h0;
                        h0 = h1;
                        h1 = h2;
                    }
                }
            }
            FamilyKind::SechDamped => {
                // sech a = 2 e^(-|a|) / (1 + e^(-2|a|)) as a truncated Taylor series
                let a0 = x / tau;
                let sgn = if a0 >= 0.0 { -1.0 } else { 1.0 };
                let mut a = vec![0.0; n];
                a[0] = sgn * a0;
                if n > 1 {
                    a[1] = sgn / tau;
                }
                let e = jet_exp(&a);
                let num: Vec<f64> = e.iter().map(|v| 2.0 * v).collect();
                let mut den = jet_mul(&e, &e);
                den[0] += 1.0;
                let c = jet_mul(&num, &jet_recip(&den));
                let mut fact = 1.0;
                for (k, slot) in out.iter_mut().enumerate() {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    *slot = fact * c[k];
                }
            }
        }
    }
}

impl Smooth for FamilyMember {
    fn max_order(&self) -> usize {
        self.max_order
    }

    fn derivatives(&self, x: f64, out: &mut [f64]) {
        let n = out.len();
        let mut d = vec![0.0; n];
        self.damping(x, &mut d);
        let j = self.index as usize;
        // Leibniz with (x^j)^(i) = j!/(j-i)! x^(j-i)
        let mut pw = vec![0.0; j.min(n - 1) + 1];
        for (i, p) in pw.iter_mut().enumerate() {
            let ff: f64 = ((j - i + 1)..=j).map(|v| v as f64).product();
            *p = ff * x.powi((j - i) as i32);
        }
        for k in 0..n {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for i in 0..=k.min(j) {
                acc += binom * pw[i] * d[k - i];
                binom *= (k - i) as f64 / (i + 1) as f64;
            }
            out[k] = acc;
        }
    }
}

fn jet_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
        .collect()
}

fn jet_exp(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut b = vec![0.0; n];
    b[0] = a[0].exp();
    for k in 1..n {
        b[k] = (1..=k).map(|i| i as f64 * a[i] * b[k - i]).sum::<f64>() / k as f64;
    }
    b
}

fn jet_recip(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut b = vec![0.0; n];
    b[0] = 1.0 / a[0];
    for k in 1..n {
        b[k] = -(1..=k).map(|i| a[i] * b[k - i]).sum::<f64>() * b[0];
    }
    b
}
