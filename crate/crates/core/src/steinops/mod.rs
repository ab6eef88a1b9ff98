//! Stein operators for product distributions, their reduced-order variants and
//! the adjoint differential equation satisfied by the density.

mod spec;

pub use spec::{GammaBlock, NormalBlock, ProductKind, ProductSpec, SpecFile, SPEC_VERSION};

use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::opalg::{
    adjoint_under_weight, decimal_rational, Coeff, Factor, FactoredOp, FactoredTerm, PolyDiffOp,
    Rational,
};

/// A Stein operator together with the factored form it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct SteinOperatorBundle {
    /// The operator, acting on `g = B_I f` when `substitution` is non-empty.
    pub operator: PolyDiffOp<Rational>,
    pub factored: FactoredOp<Rational>,
    /// Order of the unreduced operator.
    pub expected_order: usize,
    pub reduced_order: usize,
    /// The chain `I` of the substitution `g = B_I f`.
    pub substitution: Vec<Rational>,
}

impl SteinOperatorBundle {
    fn from_factored(factored: FactoredOp<Rational>, expected_order: usize) -> Self {
        let operator = factored.expand();
        Self {
            reduced_order: operator.order(),
            operator,
            factored,
            expected_order,
            substitution: Vec::new(),
        }
    }

    pub fn is_reduced(&self) -> bool {
        !self.substitution.is_empty()
    }

    /// `B_I` for the substitution (the identity when there is none).
    pub fn substitution_operator(&self) -> PolyDiffOp<Rational> {
        FactoredTerm::chain(&self.substitution).expand()
    }

    pub fn operator_f64(&self) -> PolyDiffOp<f64> {
        self.operator.to_f64()
    }
}

pub(crate) fn exact(x: f64) -> Result<Rational> {
    decimal_rational(x).ok_or_else(|| invalid!("non-finite parameter {x}"))
}

fn exact_all(xs: impl IntoIterator<Item = f64>) -> Result<Vec<Rational>> {
    xs.into_iter().map(exact).collect()
}

struct ExactParams {
    a: Vec<Rational>,
    ab: Vec<Rational>,
    r: Vec<Rational>,
    lambda_n: Rational,
    sigma2: Rational,
}

fn exact_params(spec: &ProductSpec) -> Result<ExactParams> {
    let a = exact_all(spec.beta.iter().map(|p| p.0))?;
    let b = exact_all(spec.beta.iter().map(|p| p.1))?;
    let ab = a.iter().zip(&b).map(|(a, b)| a + b).collect();
    let r = exact_all(spec.gamma_shapes.iter().copied())?;
    let lambda = exact(spec.lambda)?;
    let sigma = exact(spec.sigma)?;
    Ok(ExactParams {
        a,
        ab,
        r,
        lambda_n: lambda.pow_u(spec.n() as u32),
        sigma2: sigma.clone() * sigma,
    })
}

fn shifted(v: &[Rational], c: i64) -> Vec<Rational> {
    v.iter().map(|x| x + Rational::from_i64(c)).collect()
}

/// Order of the unreduced operator for `spec`.
pub fn table_order(spec: &ProductSpec) -> usize {
    let (m, n, nn) = (spec.m(), spec.n(), spec.normal_count);
    match spec.kind() {
        ProductKind::Pgg => n,
        _ if nn > 0 => 2 * m + 2 * n + nn,
        _ => m + n,
    }
}

/// The Stein operator for the product described by `spec`.
pub fn build_stein(spec: &ProductSpec) -> Result<SteinOperatorBundle> {
    spec.validate()?;
    let order = table_order(spec);
    if spec.kind() == ProductKind::Pgg {
        return Ok(SteinOperatorBundle::from_factored(pgg_factored(spec)?, order));
    }
    let p = exact_params(spec)?;
    let factored = if spec.normal_count > 0 {
        let lambda_2n = p.lambda_n.clone() * p.lambda_n.clone();
        FactoredOp::new(vec![
            FactoredTerm::chain(&p.a)
                .then_chain(&p.r)
                .then_an(spec.normal_count)
                .then_chain(&p.r)
                .then_chain(&p.a)
                .scaled(p.sigma2),
            FactoredTerm::chain(&shifted(&p.ab, -1))
                .then_chain(&p.ab)
                .then_x_pow(1)
                .scaled(-lambda_2n),
        ])
    } else {
        FactoredOp::new(vec![
            FactoredTerm::chain(&p.r).then_chain(&p.a),
            FactoredTerm::chain(&p.ab).then_x_pow(1).scaled(-p.lambda_n),
        ])
    };
    Ok(SteinOperatorBundle::from_factored(factored, order))
}

fn pgg_factored(spec: &ProductSpec) -> Result<FactoredOp<Rational>> {
    let q = spec.q;
    if q.fract() != 0.0 || q > 64.0 {
        return Err(Error::Unsupported(format!(
            "generalised gamma operator needs an integer power q, got {q}"
        )));
    }
    let qi = q as i32;
    let r = exact_all(spec.gamma_shapes.iter().copied())?;
    let lam_q = exact(spec.lambda)?.pow_u(qi as u32);
    let c = (Rational::from_i64(qi as i64) * lam_q).pow_u(spec.n() as u32);
    Ok(FactoredOp::new(vec![
        FactoredTerm::chain(&r),
        FactoredTerm::identity().then_x_pow(qi).scaled(-c),
    ]))
}

/// The sets `R = {a+b, a+b-1}` and `S = {a, a-1, r, r-1, 0 (N times)}`.
pub fn reduction_sets(spec: &ProductSpec) -> Result<(Vec<Rational>, Vec<Rational>)> {
    let p = exact_params(spec)?;
    let mut rset = p.ab.clone();
    rset.extend(shifted(&p.ab, -1));
    let mut sset = p.a.clone();
    sset.extend(shifted(&p.a, -1));
    sset.extend(p.r.iter().cloned());
    sset.extend(shifted(&p.r, -1));
    sset.extend(std::iter::repeat_n(Rational::zero(), spec.normal_count));
    Ok((rset, sset))
}

/// Multiset intersection and the two remainders `(R∩S, R∖I, S∖I)`.
pub fn multiset_split(
    rset: &[Rational],
    sset: &[Rational],
) -> (Vec<Rational>, Vec<Rational>, Vec<Rational>) {
    let mut s_left: Vec<Option<Rational>> = sset.iter().cloned().map(Some).collect();
    let mut common = Vec::new();
    let mut r_left = Vec::new();
    for r in rset {
        match s_left.iter_mut().find(|s| s.as_ref() == Some(r)) {
            Some(slot) => {
                *slot = None;
                common.push(r.clone());
            }
            None => r_left.push(r.clone()),
        }
    }
    (common, r_left, s_left.into_iter().flatten().collect())
}

/// `σ² x^-1 B_S - λ^(2n) x B_R`, the rewritten form of the operator for
/// products with beta and normal factors.
pub fn split_form(spec: &ProductSpec) -> Result<FactoredOp<Rational>> {
    spec.validate()?;
    if spec.normal_count == 0 || spec.kind() == ProductKind::Pgg {
        return Err(Error::Unsupported(
            "split form needs at least one normal factor".into(),
        ));
    }
    let (rset, sset) = reduction_sets(spec)?;
    split_terms(spec, &rset, &sset)
}

fn split_terms(
    spec: &ProductSpec,
    rset: &[Rational],
    sset: &[Rational],
) -> Result<FactoredOp<Rational>> {
    let p = exact_params(spec)?;
    let lambda_2n = p.lambda_n.clone() * p.lambda_n;
    // zeros first so that x^-1 T_0 stays polynomial
    let mut s_sorted = sset.to_vec();
    s_sorted.sort_by_key(|s| !s.is_zero());
    Ok(FactoredOp::new(vec![
        FactoredTerm::chain(&s_sorted).then_x_pow(-1).scaled(p.sigma2),
        FactoredTerm::chain(rset).then_x_pow(1).scaled(-lambda_2n),
    ]))
}

/// Lowers the order by `|R∩S|` through the substitution `g = B_(R∩S) f`.
///
/// Specs without both beta and normal factors are returned unreduced.
pub fn reduce_order(spec: &ProductSpec) -> Result<SteinOperatorBundle> {
    let full = build_stein(spec)?;
    if spec.m() == 0 || spec.normal_count == 0 {
        return Ok(full);
    }
    let (rset, sset) = reduction_sets(spec)?;
    let (common, r_left, s_left) = multiset_split(&rset, &sset);
    if common.is_empty() {
        return Ok(full);
    }
    let factored = split_terms(spec, &r_left, &s_left)?;
    let operator = factored.expand();
    Ok(SteinOperatorBundle {
        reduced_order: full.expected_order - common.len(),
        operator,
        factored,
        expected_order: full.expected_order,
        substitution: common,
    })
}

/// Adjoint of the Stein operator under Lebesgue measure, i.e. the operator
/// annihilating the density.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjointOde {
    pub factored: FactoredOp<Rational>,
    pub operator: PolyDiffOp<Rational>,
}

/// For specs with normal factors the adjoint is rescaled by `(-1)^N x / σ²`,
/// giving `T_0^N B_(-a) B_(-r) B_(1-r) B_(1-a) - (-1)^N σ^-2 λ^(2n) x² B_(3-a-b) B_(2-a-b)`.
pub fn adjoint_ode(spec: &ProductSpec) -> Result<AdjointOde> {
    if spec.kind() == ProductKind::Pgg {
        return Err(Error::Unsupported(
            "adjoint equation is only built for q = 1".into(),
        ));
    }
    let bundle = build_stein(spec)?;
    let raw = adjoint_under_weight(&bundle.factored, &Rational::zero())?;
    let factored = if spec.normal_count > 0 {
        let sign = if spec.normal_count % 2 == 0 {
            Rational::one()
        } else {
            -Rational::one()
        };
        let sigma2 = exact(spec.sigma)?.pow_u(2);
        raw.left_x_pow(1).scaled(&(sign / sigma2)).with_x_leftmost()?
    } else {
        raw.with_x_leftmost()?
    };
    Ok(AdjointOde {
        operator: factored.expand(),
        factored,
    })
}

/// Exact `a`- and `b`-parameters of the Meijer G function whose equation the
/// rescaled adjoint becomes, for specs with at least one normal factor.
pub fn meijer_parameters(spec: &ProductSpec) -> Result<(Vec<Rational>, Vec<Rational>)> {
    spec.validate()?;
    if spec.normal_count == 0 || spec.kind() == ProductKind::Pgg {
        return Err(Error::Unsupported(
            "Meijer parameters in the squared variable need a normal factor".into(),
        ));
    }
    let p = exact_params(spec)?;
    let half = Rational::new(1.into(), 2.into());
    let halve = |v: &[Rational]| -> Vec<Rational> { v.iter().map(|x| x * &half).collect() };
    let mut a = halve(&p.ab);
    a.extend(halve(&shifted(&p.ab, -1)));
    let mut b = halve(&p.a);
    b.extend(halve(&shifted(&p.a, -1)));
    b.extend(halve(&p.r));
    b.extend(halve(&shifted(&p.r, -1)));
    b.extend(std::iter::repeat_n(Rational::zero(), spec.normal_count));
    Ok((a, b))
}

/// `y = c x²` with `c = λ^(2n) / (2^(2n+N) σ²)`.
pub fn square_variable_scale(spec: &ProductSpec) -> Result<Rational> {
    let p = exact_params(spec)?;
    let two = Rational::from_i64(2);
    Ok(p.lambda_n.clone() * p.lambda_n
        / (two.pow_u((2 * spec.n() + spec.normal_count) as u32) * p.sigma2))
}

/// Rewrites an operator in `x` as one in `y = c x²`: `T_r ↦ 2 T_(r/2)` and
/// `x^(2k) ↦ c^-k y^k`. Odd powers of `x` have no counterpart.
pub fn rescale_to_square(op: &FactoredOp<Rational>, c: &Rational) -> Result<FactoredOp<Rational>> {
    let half = Rational::new(1.into(), 2.into());
    let two = Rational::from_i64(2);
    let mut terms = Vec::new();
    for t in &op.with_x_leftmost()?.terms {
        let mut out = FactoredTerm {
            coeff: t.coeff.clone(),
            factors: Vec::new(),
        };
        for f in &t.factors {
            match f {
                Factor::T(r) => {
                    out.coeff = out.coeff * two.clone();
                    out.factors.push(Factor::T(r * &half));
                }
                Factor::XPow(j) if j % 2 == 0 => {
                    let k = j / 2;
                    let ck = c.pow_u(k.unsigned_abs());
                    out.coeff = if k >= 0 { out.coeff / ck } else { out.coeff * ck };
                    out.factors.push(Factor::XPow(k));
                }
                Factor::XPow(j) => {
                    return Err(Error::Unsupported(format!(
                        "x^{j} has no counterpart in the squared variable"
                    )))
                }
                Factor::Opaque(_) => return Err(Error::FactoredFormRequired),
            }
        }
        terms.push(out);
    }
    Ok(FactoredOp::new(terms))
}

/// `(-1)^(p-m-n) y B_(1-a) - B_(-b)`, which annihilates `G^(m,n)_(p,q)(y | a; b)`.
pub fn meijer_ode(a: &[Rational], b: &[Rational], m: usize, n: usize) -> PolyDiffOp<Rational> {
    let p = a.len();
    let sign = if (p + m + n) % 2 == 0 {
        Rational::one()
    } else {
        -Rational::one()
    };
    let one_minus_a: Vec<Rational> = a.iter().map(|x| Rational::one() - x).collect();
    let minus_b: Vec<Rational> = b.iter().map(|x| -x.clone()).collect();
    let left = FactoredTerm::chain(&one_minus_a).then_x_pow(1).scaled(sign);
    let right = FactoredTerm::chain(&minus_b).scaled(-Rational::one());
    FactoredOp::new(vec![left, right]).expand()
}

/// The adjoint equation rewritten in `y = c x²`. For specs with normal factors
/// this is `-2^q` times [`meijer_ode`] of the [`meijer_parameters`].
pub fn adjoint_ode_square_variable(spec: &ProductSpec) -> Result<PolyDiffOp<Rational>> {
    let ode = adjoint_ode(spec)?;
    let c = square_variable_scale(spec)?;
    Ok(rescale_to_square(&ode.factored, &c)?.expand())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn ex(x: f64) -> Rational {
        exact(x).unwrap()
    }

    #[test]
    fn gamma_operator() {
        let (r, l) = (2.5, 1.5);
        let op = build_stein(&ProductSpec::product_gamma(&[r], l)).unwrap().operator;
        let expected = PolyDiffOp::from_terms([(1, 1, q(1, 1)), (0, 0, ex(r)), (0, 1, -ex(l))]);
        assert_eq!(op, expected);
    }

    #[test]
    fn beta_operator() {
        let (a, b) = (0.5, 3.0);
        let op = build_stein(&ProductSpec::product_beta(&[(a, b)])).unwrap().operator;
        let expected = PolyDiffOp::from_terms([
            (1, 1, q(1, 1)),
            (1, 2, q(-1, 1)),
            (0, 0, ex(a)),
            (0, 1, -ex(a + b)),
        ]);
        assert_eq!(op, expected);
    }

    #[test]
    fn normal_operator() {
        let s = 1.5;
        let op = build_stein(&ProductSpec::product_normal(1, s)).unwrap().operator;
        let expected = PolyDiffOp::from_terms([(1, 0, ex(s) * ex(s)), (0, 1, q(-1, 1))]);
        assert_eq!(op, expected);
    }

    #[test]
    fn two_gamma_operator() {
        let (r1, r2, l) = (1.5, 0.25, 2.0);
        let op = build_stein(&ProductSpec::product_gamma(&[r1, r2], l)).unwrap().operator;
        let expected = PolyDiffOp::from_terms([
            (2, 2, q(1, 1)),
            (1, 1, q(1, 1) + ex(r1) + ex(r2)),
            (0, 0, ex(r1) * ex(r2)),
            (0, 1, -ex(l) * ex(l)),
        ]);
        assert_eq!(op, expected);
    }

    #[test]
    fn two_normal_operator() {
        let s = 0.5;
        let op = build_stein(&ProductSpec::product_normal(2, s)).unwrap().operator;
        let s2 = ex(s) * ex(s);
        let expected = PolyDiffOp::from_terms([(2, 1, s2.clone()), (1, 0, s2), (0, 1, q(-1, 1))]);
        assert_eq!(op, expected);
    }

    #[test]
    fn orders_match_table() {
        let cases = [
            (ProductSpec::product_beta(&[(1.0, 2.0), (0.5, 0.5)]), 2),
            (ProductSpec::product_gamma(&[1.0, 2.0, 3.0], 1.0), 3),
            (ProductSpec::product_normal(4, 1.0), 4),
            (ProductSpec::product_beta(&[(1.0, 2.0)]).with_gamma(&[2.0], 1.0), 2),
            (ProductSpec::product_beta(&[(1.5, 2.0)]).with_normal(2, 1.0), 4),
            (ProductSpec::product_gamma(&[1.5, 2.5], 2.0).with_normal(1, 1.0), 5),
            (
                ProductSpec::product_beta(&[(1.5, 2.0), (3.0, 0.5)])
                    .with_gamma(&[0.7], 1.0)
                    .with_normal(3, 0.5),
                9,
            ),
            (ProductSpec::generalised_gamma(&[1.0, 2.0], 1.5, 2.0), 2),
        ];
        for (spec, order) in cases {
            let b = build_stein(&spec).unwrap();
            assert_eq!(b.expected_order, order, "{}", spec.label());
            assert_eq!(b.operator.order(), order, "{}", spec.label());
            assert_eq!(b.reduced_order, order);
        }
    }

    #[test]
    fn pgg_operator_and_errors() {
        let spec = ProductSpec::generalised_gamma(&[1.0], 0.5, 2.0);
        let op = build_stein(&spec).unwrap().operator;
        // T_1 f - (2 * 0.25) x^2 f
        let expected = PolyDiffOp::from_terms([(1, 1, q(1, 1)), (0, 0, q(1, 1)), (0, 2, q(-1, 2))]);
        assert_eq!(op, expected);
        assert!(matches!(
            build_stein(&ProductSpec::generalised_gamma(&[1.0], 1.0, 1.5)),
            Err(Error::Unsupported(_))
        ));
        let mut mixed = ProductSpec::generalised_gamma(&[1.0], 1.0, 2.0);
        mixed.normal_count = 1;
        assert!(matches!(build_stein(&mixed), Err(Error::Unsupported(_))));
    }

    #[test]
    fn split_form_matches_table_form() {
        let specs = [
            ProductSpec::product_beta(&[(1.5, 2.0)]).with_normal(2, 0.5),
            ProductSpec::product_beta(&[(1.5, 2.0), (0.5, 1.0)])
                .with_gamma(&[0.7, 2.0], 1.5)
                .with_normal(1, 2.0),
            ProductSpec::product_gamma(&[3.0], 2.0).with_normal(3, 1.0),
        ];
        for spec in specs {
            let full = build_stein(&spec).unwrap().operator;
            assert_eq!(split_form(&spec).unwrap().expand(), full, "{}", spec.label());
        }
    }

    fn reduction_cases() -> Vec<(ProductSpec, usize)> {
        let m = 2;
        vec![
            // b_i = 1
            (
                ProductSpec::product_beta(&[(1.5, 1.0), (0.7, 1.0)])
                    .with_gamma(&[2.2], 1.0)
                    .with_normal(1, 1.0),
                m + 2 + 1,
            ),
            // a_i + b_i = 1
            (
                ProductSpec::product_beta(&[(0.5, 0.5), (0.3, 0.7)])
                    .with_gamma(&[1.5], 1.0)
                    .with_normal(2, 1.0),
                m + 2 + 2,
            ),
            // m = n = N, arcsine and exponential factors
            (
                ProductSpec::product_beta(&[(0.5, 0.5), (0.5, 0.5)])
                    .with_gamma(&[1.0, 1.0], 1.0)
                    .with_normal(2, 1.0),
                3 * m,
            ),
            (
                ProductSpec::product_beta(&[(0.5, 0.5), (0.25, 0.75)])
                    .with_gamma(&[2.0, 2.0], 1.0)
                    .with_normal(2, 1.0),
                3 * m,
            ),
        ]
    }

    #[test]
    fn reduction_orders_and_factorisation() {
        for (spec, order) in reduction_cases() {
            let full = build_stein(&spec).unwrap();
            let red = reduce_order(&spec).unwrap();
            assert_eq!(red.reduced_order, order, "{}", spec.label());
            assert_eq!(red.operator.order(), order, "{}", spec.label());
            assert_eq!(
                red.operator.compose(&red.substitution_operator()),
                full.operator,
                "{}",
                spec.label()
            );
        }
    }

    #[test]
    fn first_reduction_case_matches_displayed_operator() {
        // σ² B_a B_r A_N B_r g - λ^(2n) x B_(a+1) g
        let spec = ProductSpec::product_beta(&[(1.5, 1.0), (0.7, 1.0)])
            .with_gamma(&[2.2], 1.5)
            .with_normal(1, 0.5);
        let red = reduce_order(&spec).unwrap();
        let (a, r) = (vec![ex(1.5), ex(0.7)], vec![ex(2.2)]);
        let sigma2 = ex(0.5) * ex(0.5);
        let lam2 = ex(1.5) * ex(1.5);
        let displayed = FactoredOp::new(vec![
            FactoredTerm::chain(&r)
                .then_an(1)
                .then_chain(&r)
                .then_chain(&a)
                .scaled(sigma2),
            FactoredTerm::chain(&shifted(&a, 1)).then_x_pow(1).scaled(-lam2),
        ]);
        assert_eq!(red.operator, displayed.expand());
        assert_eq!(red.substitution, a);
    }

    #[test]
    fn no_coincidence_leaves_operator_unchanged() {
        let spec = ProductSpec::product_beta(&[(1.3, 2.2)])
            .with_gamma(&[0.9], 1.0)
            .with_normal(1, 1.0);
        let (rset, sset) = reduction_sets(&spec).unwrap();
        assert!(multiset_split(&rset, &sset).0.is_empty());
        assert_eq!(reduce_order(&spec).unwrap(), build_stein(&spec).unwrap());
    }

    #[test]
    fn multiset_semantics() {
        let (c, r, s) = multiset_split(
            &[q(0, 1), q(0, 1), q(1, 1)],
            &[q(0, 1), q(2, 1), q(1, 1), q(1, 1)],
        );
        assert_eq!(c, vec![q(0, 1), q(1, 1)]);
        assert_eq!(r, vec![q(0, 1)]);
        assert_eq!(s, vec![q(2, 1), q(1, 1)]);
    }

    #[test]
    fn adjoint_matches_displayed_form() {
        let specs = [
            ProductSpec::product_normal(1, 1.0),
            ProductSpec::product_normal(2, 0.5),
            ProductSpec::product_beta(&[(1.5, 2.0)])
                .with_gamma(&[2.5], 1.5)
                .with_normal(1, 2.0),
            ProductSpec::product_beta(&[(1.5, 2.0), (0.5, 0.5)])
                .with_gamma(&[0.7, 2.0], 1.0)
                .with_normal(2, 1.0),
        ];
        for spec in specs {
            let p = exact_params(&spec).unwrap();
            let neg = |v: &[Rational], c: i64| -> Vec<Rational> {
                v.iter().map(|x| Rational::from_i64(c) - x).collect()
            };
            let sign = if spec.normal_count % 2 == 0 { q(1, 1) } else { q(-1, 1) };
            let lam_2n = p.lambda_n.clone() * p.lambda_n.clone();
            let displayed = FactoredOp::new(vec![
                FactoredTerm::chain(&neg(&p.a, 1))
                    .then_chain(&neg(&p.r, 1))
                    .then_chain(&neg(&p.r, 0))
                    .then_chain(&neg(&p.a, 0))
                    .then_chain(&vec![q(0, 1); spec.normal_count]),
                FactoredTerm::chain(&neg(&p.ab, 2))
                    .then_chain(&neg(&p.ab, 3))
                    .then_x_pow(2)
                    .scaled(-sign.clone() * lam_2n / p.sigma2.clone()),
            ]);
            let ode = adjoint_ode(&spec).unwrap();
            assert_eq!(ode.operator, displayed.expand(), "{}", spec.label());
            let raw = build_stein(&spec).unwrap().operator.formal_adjoint(0);
            let rescaled = PolyDiffOp::x_pow(1)
                .compose(&raw)
                .scale(&(q(1, 1) / p.sigma2.clone()))
                .scale(&sign);
            assert_eq!(ode.operator, rescaled, "{}", spec.label());
        }
    }

    #[test]
    fn adjoint_rescales_to_meijer_equation() {
        let specs = [
            ProductSpec::product_normal(1, 1.0),
            ProductSpec::product_normal(3, 0.5),
            ProductSpec::product_gamma(&[1.5, 0.5], 2.0).with_normal(1, 1.0),
            ProductSpec::product_beta(&[(1.5, 2.0), (0.5, 0.5)])
                .with_gamma(&[0.7], 1.5)
                .with_normal(2, 2.0),
        ];
        for spec in specs {
            let (a, b) = meijer_parameters(&spec).unwrap();
            let y_ode = adjoint_ode_square_variable(&spec).unwrap();
            let target = meijer_ode(&a, &b, b.len(), 0);
            let scale = -Rational::from_i64(2).pow_u(b.len() as u32);
            assert_eq!(y_ode, target.scale(&scale), "{}", spec.label());
        }
    }

    #[test]
    fn meijer_equation_of_exponential() {
        // G^{1,0}_{0,1}(y | 0) = e^-y satisfies -y f - T_0 f = 0 -> y f + y f' = 0
        let op = meijer_ode(&[], &[q(0, 1)], 1, 0);
        let img = op.apply_derivs(0.7, &[(-0.7f64).exp(), -(-0.7f64).exp()]).unwrap();
        assert!(img.abs() < 1e-15);
    }
}
