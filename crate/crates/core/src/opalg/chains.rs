use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{binomial, pochhammer, Coeff, FactoredTerm, PolyDiffOp};
use crate::error::{invalid, Error, Result};

/// `T_r = x D + r`.
pub fn make_t<C: Coeff>(r: C) -> PolyDiffOp<C> {
    PolyDiffOp::from_terms([(1, 1, C::one()), (0, 0, r)])
}

/// `B_{r1..rn} = T_{rn} ... T_{r1}` by repeated composition.
pub fn compose_chain<C: Coeff>(rs: &[C]) -> Result<PolyDiffOp<C>> {
    if rs.is_empty() {
        return Err(Error::EmptyChain);
    }
    Ok(FactoredTerm::chain(rs).expand())
}

/// `A_N = Σ_k S(N,k) x^(k-1) D^k`, the expanded form of `x^-1 T_0^N`.
pub fn make_an<C: Coeff>(n: usize) -> Result<PolyDiffOp<C>> {
    if n == 0 {
        return Err(invalid!("A_N requires N >= 1"));
    }
    let mut terms = Vec::with_capacity(n);
    for k in 1..=n {
        let s = stirling2(n, k)?;
        let s = i64::try_from(s).map_err(|_| invalid!("Stirling number S({n},{k}) overflows"))?;
        terms.push((k, k as i32 - 1, C::from_i64(s)));
    }
    Ok(PolyDiffOp::from_terms(terms))
}

/// Stirling numbers of the second kind from the alternating sum
/// `S(n,k) = (1/k!) Σ_j (-1)^(k-j) C(k,j) j^n`.
pub fn stirling2(n: usize, k: usize) -> Result<u128> {
    if k > n {
        return Err(invalid!("stirling2 requires k <= n, got n={n}, k={k}"));
    }
    let mut sum = BigInt::zero();
    for j in 0..=k {
        let term = BigInt::from(binomial(k, j)) * BigInt::from(j).pow(n as u32);
        if (k - j) % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let mut fact = BigInt::one();
    for i in 2..=k {
        fact *= BigInt::from(i);
    }
    let q = &sum / &fact;
    debug_assert!((&q * &fact - &sum).is_zero() && !q.is_negative());
    q.to_u128()
        .ok_or_else(|| invalid!("Stirling number S({n},{k}) overflows u128"))
}

/// `B_{r1..rn}` built directly from its disentangled coefficients
/// `Σ_k c_k x^k D^k`, where
///
/// `c_k = ((-1)^k / k!) Σ_{j=0..k} ((-k)_j / j!) (j + r_n) Π_{i<n} (j + r_i)`.
///
/// Since `B x^j = Π(j + r_i) x^j`, `c_k` is the k-th Newton forward
/// difference of that product at 0 divided by `k!`.
pub fn disentangle_b<C: Coeff>(rs: &[C]) -> Result<PolyDiffOp<C>> {
    let (last, rest) = rs.split_last().ok_or(Error::EmptyChain)?;
    let n = rs.len();
    let mut terms = Vec::with_capacity(n + 1);
    let mut k_fact = C::one();
    for k in 0..=n {
        if k > 0 {
            k_fact = k_fact * C::from_i64(k as i64);
        }
        let minus_k = C::from_i64(-(k as i64));
        let mut sum = C::zero();
        let mut j_fact = C::one();
        for j in 0..=k {
            if j > 0 {
                j_fact = j_fact * C::from_i64(j as i64);
            }
            let jc = C::from_i64(j as i64);
            let mut prod = jc.clone() + last.clone();
            for r in rest {
                prod = prod * (jc.clone() + r.clone());
            }
            sum = sum + pochhammer(&minus_k, j) / j_fact.clone() * prod;
        }
        let sign = if k % 2 == 0 { C::one() } else { -C::one() };
        terms.push((k, k as i32, sign * sum / k_fact.clone()));
    }
    Ok(PolyDiffOp::from_terms(terms))
}

/// Both sides of the shift identity `A_N B_{rs} = B_{rs+1} A_N`, in that order.
pub fn shift_past_an<C: Coeff>(rs: &[C], n: usize) -> Result<(PolyDiffOp<C>, PolyDiffOp<C>)> {
    let b = compose_chain(rs)?;
    let shifted: Vec<C> = rs.iter().map(|r| r.clone() + C::one()).collect();
    let b1 = compose_chain(&shifted)?;
    let an = make_an::<C>(n)?;
    Ok((an.compose(&b), b1.compose(&an)))
}
