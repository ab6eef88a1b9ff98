use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const SPEC_VERSION: u32 = 1;

/// Parameters of `W = X Y Z` with `X` a product of betas, `Y` a product of
/// (generalised) gammas with common rate and `Z` a product of centred normals.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductSpec {
    /// `(a_i, b_i)` for each beta factor.
    pub beta: Vec<(f64, f64)>,
    /// Shapes `r_j` of the gamma factors.
    pub gamma_shapes: Vec<f64>,
    /// Common rate of the gamma factors.
    pub lambda: f64,
    /// Number of normal factors.
    pub normal_count: usize,
    /// Product of the normal scales.
    pub sigma: f64,
    /// Generalised gamma power; only the pure gamma product may use `q != 1`.
    pub q: f64,
}

/// Which row of the operator table a spec falls under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductKind {
    X,
    Y,
    Z,
    XY,
    XZ,
    YZ,
    XYZ,
    Pgg,
}

impl Default for ProductSpec {
    fn default() -> Self {
        Self {
            beta: Vec::new(),
            gamma_shapes: Vec::new(),
            lambda: 1.0,
            normal_count: 0,
            sigma: 1.0,
            q: 1.0,
        }
    }
}

impl ProductSpec {
    pub fn product_beta(pairs: &[(f64, f64)]) -> Self {
        Self {
            beta: pairs.to_vec(),
            ..Self::default()
        }
    }

    pub fn product_gamma(shapes: &[f64], lambda: f64) -> Self {
        Self {
            gamma_shapes: shapes.to_vec(),
            lambda,
            ..Self::default()
        }
    }

    pub fn product_normal(count: usize, sigma: f64) -> Self {
        Self {
            normal_count: count,
            sigma,
            ..Self::default()
        }
    }

    pub fn generalised_gamma(shapes: &[f64], lambda: f64, q: f64) -> Self {
        Self {
            q,
            ..Self::product_gamma(shapes, lambda)
        }
    }

    pub fn with_beta(mut self, pairs: &[(f64, f64)]) -> Self {
        self.beta = pairs.to_vec();
        self
    }

    pub fn with_gamma(mut self, shapes: &[f64], lambda: f64) -> Self {
        self.gamma_shapes = shapes.to_vec();
        self.lambda = lambda;
        self
    }

    pub fn with_normal(mut self, count: usize, sigma: f64) -> Self {
        self.normal_count = count;
        self.sigma = sigma;
        self
    }

    /// Number of beta factors.
    pub fn m(&self) -> usize {
        self.beta.len()
    }

    /// Number of gamma factors.
    pub fn n(&self) -> usize {
        self.gamma_shapes.len()
    }

    /// Number of normal factors.
    pub fn big_n(&self) -> usize {
        self.normal_count
    }

    pub fn is_generalised(&self) -> bool {
        self.q != 1.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.m() + self.n() + self.normal_count == 0 {
            return Err(invalid!("at least one factor is required"));
        }
        for (i, &(a, b)) in self.beta.iter().enumerate() {
            if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
                return Err(invalid!("beta[{i}] = ({a}, {b}) must be positive"));
            }
        }
        for (j, &r) in self.gamma_shapes.iter().enumerate() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid!("gamma shape[{j}] = {r} must be positive"));
            }
        }
        if self.n() > 0 && !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(invalid!("lambda = {} must be positive", self.lambda));
        }
        if self.normal_count > 0 && !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid!("sigma = {} must be positive", self.sigma));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(invalid!("q = {} must be positive", self.q));
        }
        if self.is_generalised() && (self.m() > 0 || self.normal_count > 0 || self.n() == 0) {
            return Err(Error::Unsupported(
                "q != 1 is only defined for a pure generalised gamma product".into(),
            ));
        }
        Ok(())
    }

    pub fn kind(&self) -> ProductKind {
        if self.is_generalised() {
            return ProductKind::Pgg;
        }
        match (self.m() > 0, self.n() > 0, self.normal_count > 0) {
            (true, false, false) => ProductKind::X,
            (false, true, false) => ProductKind::Y,
            (false, false, true) => ProductKind::Z,
            (true, true, false) => ProductKind::XY,
            (true, false, true) => ProductKind::XZ,
            (false, true, true) => ProductKind::YZ,
            _ => ProductKind::XYZ,
        }
    }

    /// Short human-readable label such as `PB(1)xPG(2)xPN(1)`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.m() > 0 {
            parts.push(format!("PB({})", self.m()));
        }
        if self.n() > 0 {
            if self.is_generalised() {
                parts.push(format!("PGG({},q={})", self.n(), self.q));
            } else {
                parts.push(format!("PG({})", self.n()));
            }
        }
        if self.normal_count > 0 {
            parts.push(format!("PN({})", self.normal_count));
        }
        parts.join("x")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: SpecFile =
            serde_json::from_str(s).map_err(|e| invalid!("spec: {e}"))?;
        file.into_spec()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&SpecFile::from_spec(self)).expect("spec serialises")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaBlock {
    pub shapes: Vec<f64>,
    pub lambda: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalBlock {
    pub count: usize,
    pub sigma: f64,
}

/// On-disk form of a [`ProductSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<NormalBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl SpecFile {
    pub fn into_spec(self) -> Result<ProductSpec> {
        if self.version != SPEC_VERSION {
            return Err(invalid!(
                "spec: unsupported version {} (expected {SPEC_VERSION})",
                self.version
            ));
        }
        let mut spec = ProductSpec {
            beta: self.beta.iter().map(|p| (p[0], p[1])).collect(),
            q: self.q.unwrap_or(1.0),
            ..ProductSpec::default()
        };
        if let Some(g) = self.gamma {
            spec.gamma_shapes = g.shapes;
            spec.lambda = g.lambda;
        }
        if let Some(n) = self.normal {
            spec.normal_count = n.count;
            spec.sigma = n.sigma;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &ProductSpec) -> Self {
        Self {
            version: SPEC_VERSION,
            beta: spec.beta.iter().map(|&(a, b)| [a, b]).collect(),
            gamma: (spec.n() > 0).then(|| GammaBlock {
                shapes: spec.gamma_shapes.clone(),
                lambda: spec.lambda,
            }),
            normal: (spec.normal_count > 0).then(|| NormalBlock {
                count: spec.normal_count,
                sigma: spec.sigma,
            }),
            q: spec.is_generalised().then_some(spec.q),
        }
    }
}
