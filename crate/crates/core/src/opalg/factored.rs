use super::{make_t, Coeff, PolyDiffOp};
use crate::error::{Error, Result};

/// One factor of an operator product.
#[derive(Clone, Debug, PartialEq)]
pub enum Factor<C: Coeff> {
    /// `T_r = x D + r`
    T(C),
    /// multiplication by `x^j`
    XPow(i32),
    /// an already-expanded operator; blocks the structural adjoint
    Opaque(PolyDiffOp<C>),
}

impl<C: Coeff> Factor<C> {
    pub fn expand(&self) -> PolyDiffOp<C> {
        match self {
            Factor::T(r) => make_t(r.clone()),
            Factor::XPow(j) => PolyDiffOp::x_pow(*j),
            Factor::Opaque(op) => op.clone(),
        }
    }
}

/// `coeff · F_k ∘ ... ∘ F_1` where `factors[0] = F_1` acts first.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredTerm<C: Coeff> {
    pub coeff: C,
    pub factors: Vec<Factor<C>>,
}

impl<C: Coeff> FactoredTerm<C> {
    pub fn identity() -> Self {
        Self {
            coeff: C::one(),
            factors: Vec::new(),
        }
    }

    /// `B_{rs}`; since the `T_r` commute the order of `rs` is immaterial.
    pub fn chain(rs: &[C]) -> Self {
        Self::identity().then_chain(rs)
    }

    pub fn then_t(mut self, r: C) -> Self {
        self.factors.push(Factor::T(r));
        self
    }

    pub fn then_chain(mut self, rs: &[C]) -> Self {
        self.factors.extend(rs.iter().cloned().map(Factor::T));
        self
    }

    pub fn then_x_pow(mut self, j: i32) -> Self {
        if j != 0 {
            self.factors.push(Factor::XPow(j));
        }
        self
    }

    /// `A_N = x^-1 T_0^N`.
    pub fn then_an(self, n: usize) -> Self {
        self.then_chain(&vec![C::zero(); n]).then_x_pow(-1)
    }

    pub fn then_opaque(mut self, op: PolyDiffOp<C>) -> Self {
        self.factors.push(Factor::Opaque(op));
        self
    }

    pub fn scaled(mut self, c: C) -> Self {
        self.coeff = self.coeff * c;
        self
    }

    /// Number of `T` factors, which is the differential order of the term.
    pub fn t_count(&self) -> usize {
        self.factors
            .iter()
            .filter(|f| matches!(f, Factor::T(_)))
            .count()
    }

    /// Moves every power of `x` to the far left using `T_r x^j = x^j T_(r+j)`.
    pub fn with_x_leftmost(&self) -> Result<Self> {
        let mut power = 0i32;
        let mut factors = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            match f {
                Factor::T(r) => factors.push(Factor::T(r.clone() + C::from_i64(power as i64))),
                Factor::XPow(j) => power += j,
                Factor::Opaque(_) => return Err(Error::FactoredFormRequired),
            }
        }
        Ok(Self {
            coeff: self.coeff.clone(),
            factors,
        }
        .then_x_pow(power))
    }

    pub fn expand(&self) -> PolyDiffOp<C> {
        let mut acc = PolyDiffOp::identity();
        for f in &self.factors {
            acc = f.expand().compose(&acc);
        }
        acc.scale(&self.coeff)
    }

    /// Structural adjoint with respect to `x^γ dx`:
    /// the factor order reverses, `T_r ↦ -T_{γ+1-r}`, and `x^j` is self-adjoint.
    pub fn adjoint(&self, gamma: &C) -> Result<Self> {
        let mut coeff = self.coeff.clone();
        let mut factors = Vec::with_capacity(self.factors.len());
        for f in self.factors.iter().rev() {
            match f {
                Factor::T(r) => {
                    coeff = -coeff;
                    factors.push(Factor::T(gamma.clone() + C::one() - r.clone()));
                }
                Factor::XPow(j) => factors.push(Factor::XPow(*j)),
                Factor::Opaque(_) => return Err(Error::FactoredFormRequired),
            }
        }
        Ok(Self { coeff, factors })
    }
}

/// A sum of factored terms.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredOp<C: Coeff> {
    pub terms: Vec<FactoredTerm<C>>,
}

impl<C: Coeff> FactoredOp<C> {
    pub fn new(terms: Vec<FactoredTerm<C>>) -> Self {
        Self { terms }
    }

    pub fn expand(&self) -> PolyDiffOp<C> {
        self.terms
            .iter()
            .fold(PolyDiffOp::zero(), |acc, t| acc.add(&t.expand()))
    }

    pub fn is_structural(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.factors.iter().all(|f| !matches!(f, Factor::Opaque(_))))
    }

    pub fn scaled(&self, c: &C) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .cloned()
                .map(|t| t.scaled(c.clone()))
                .collect(),
        }
    }

    pub fn with_x_leftmost(&self) -> Result<Self> {
        Ok(Self {
            terms: self
                .terms
                .iter()
                .map(|t| t.with_x_leftmost())
                .collect::<Result<_>>()?,
        })
    }

    /// Multiplies every term on the left by `x^j`.
    pub fn left_x_pow(&self, j: i32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .cloned()
                .map(|t| t.then_x_pow(j))
                .collect(),
        }
    }
}

/// Formal adjoint of a factored operator under the weight `x^γ`.
pub fn adjoint_under_weight<C: Coeff>(op: &FactoredOp<C>, gamma: &C) -> Result<FactoredOp<C>> {
    let terms = op
        .terms
        .iter()
        .map(|t| t.adjoint(gamma))
        .collect::<Result<Vec<_>>>()?;
    Ok(FactoredOp { terms })
}
