//! Indices of the cyclotomic units beta_r = prod_{i=1}^{p-1} (1 - zeta^i)^{i^{p-1-r}}
//! modulo a prime above q, and the two identities linking them to the periods.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff_arith::{CyclotomicSetup, FieldContext, FieldElement};
use crate::nt;
use crate::periods::{big_mod_u64, PeriodTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    /// e_r(A) is trivial.
    Trivial,
    /// The criterion is one-sided; a zero index proves nothing.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRecord {
    pub r: u64,
    pub i_mod_p: u64,
    pub verdict: Verdict,
}

pub fn verdict(i_mod_p: u64) -> Verdict {
    if i_mod_p != 0 {
        Verdict::Trivial
    } else {
        Verdict::Unknown
    }
}

/// beta_r reduced into the field, with exponents i^{p-1-r} taken mod q^n - 1.
pub fn beta_element(ctx: &FieldContext, r: u64) -> FieldElement {
    let p = ctx.p;
    let order = BigUint::from(ctx.order);
    let one = ctx.one();
    let mut acc = ctx.one();
    let mut zeta_i = ctx.one();
    for i in 1..p {
        zeta_i = ctx.mul(&zeta_i, &ctx.zeta);
        let unit = ctx.sub(&one, &zeta_i);
        let exponent = BigUint::from(i).pow((p - 1 - r) as u32) % &order;
        acc = ctx.mul(&acc, &ctx.pow(&unit, &exponent));
    }
    acc
}

/// i_r(Q) mod p for any 1 <= r <= p - 2, without the parity restriction.
///
/// If beta_r = alpha^i then beta_r^f = zeta^i, so the order-p discrete log
/// of beta_r^f is i mod p.
pub fn index_mod_p(ctx: &FieldContext, r: u64) -> Result<u64> {
    if r == 0 || r > ctx.p - 2 {
        return Err(Error::InvalidInput(format!("r={r} outside [1, p-2]")));
    }
    let beta = beta_element(ctx, r);
    ctx.dlog_order_p(&ctx.pow_u64(&beta, ctx.f))
}

/// Index record for an even eigenspace 2 <= r <= p - 3.
pub fn beta_index_mod_p(ctx: &FieldContext, setup: &CyclotomicSetup, r: u64) -> Result<IndexRecord> {
    let p = setup.p;
    if r % 2 == 1 || r < 2 || r + 3 > p {
        return Err(Error::BadEigenspaceIndex { r, max: p.saturating_sub(3) });
    }
    if ctx.p != p || ctx.q != setup.q {
        return Err(Error::InvalidInput("field context does not match setup".into()));
    }
    let i_mod_p = index_mod_p(ctx, r)?;
    Ok(IndexRecord { r, i_mod_p, verdict: verdict(i_mod_p) })
}

/// Both sides of e^2 q^{n-2v} = S^2 + p (e sum d_i^2 - S^2), S = sum d_i.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityTerms {
    #[serde(with = "crate::serde_big::bigint")]
    pub lhs: BigInt,
    #[serde(with = "crate::serde_big::bigint")]
    pub sum_d: BigInt,
    /// e sum d_i^2 - (sum d_i)^2
    #[serde(with = "crate::serde_big::bigint")]
    pub spread: BigInt,
    #[serde(with = "crate::serde_big::bigint")]
    pub rhs: BigInt,
    #[serde(with = "crate::serde_big::bigint")]
    pub residual: BigInt,
}

pub fn identity_terms(p: u64, q: u64, n: u64, v: u32, d: &[BigInt]) -> Result<IdentityTerms> {
    let e = d.len() as u64;
    let exp = n
        .checked_sub(2 * v as u64)
        .ok_or_else(|| Error::InternalInvariant(format!("n - 2v < 0 (n={n}, v={v})")))?;
    let lhs = BigInt::from(e * e) * BigInt::from(q).pow(exp as u32);
    let sum_d: BigInt = d.iter().sum();
    let sum_sq: BigInt = d.iter().map(|x| x * x).sum();
    let spread = BigInt::from(e) * sum_sq - &sum_d * &sum_d;
    let rhs = &sum_d * &sum_d + BigInt::from(p) * &spread;
    let residual = &lhs - &rhs;
    Ok(IdentityTerms { lhs, sum_d, spread, rhs, residual })
}

/// LHS - RHS of the quadratic identity for a full table; zero when it holds.
pub fn verify_identity_i(setup: &CyclotomicSetup, table: &PeriodTable) -> Result<BigInt> {
    Ok(identity_terms(setup.p, setup.q, setup.n, table.v, &table.d)?.residual)
}

/// Odd l with 1 <= l <= e - 1, paired with r = p - l n.
pub fn congruence_targets(setup: &CyclotomicSetup) -> Vec<(u64, u64)> {
    (1..setup.e).step_by(2).map(|l| (l, setup.p - l * setup.n)).collect()
}

/// i_{p - l n} mod p for every odd l < e.
pub fn congruence_indices(ctx: &FieldContext, setup: &CyclotomicSetup) -> Result<BTreeMap<u64, u64>> {
    congruence_targets(setup)
        .into_iter()
        .map(|(l, r)| Ok((l, index_mod_p(ctx, r)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceReport {
    /// (a_0 + 1) mod p
    pub a0_residual: u64,
    /// l -> (sum_{m=1}^{l} (-1)^m m C(ln, mn) a_{l-m} a_m + l i_{p-ln}) mod p
    pub residuals: BTreeMap<u64, u64>,
    /// Same sum without the weight m; it telescopes to -a_0 a_l and is reported only for comparison.
    pub literal_residuals: BTreeMap<u64, u64>,
}

impl CongruenceReport {
    pub fn holds(&self) -> bool {
        self.a0_residual == 0 && self.residuals.values().all(|&r| r == 0)
    }
}

/// Congruences between the a_k and the indices i_{p-ln}, all mod p.
pub fn verify_congruences_ii(
    setup: &CyclotomicSetup,
    a: &[BigInt],
    indices: &BTreeMap<u64, u64>,
) -> Result<CongruenceReport> {
    let p = setup.p;
    let pb = BigInt::from(p);
    let a_mod: Vec<u64> = a.iter().map(|x| big_mod_u64(x, &pb)).collect();
    let a0_residual = (a_mod.first().copied().unwrap_or(0) + 1) % p;
    let mut residuals = BTreeMap::new();
    let mut literal_residuals = BTreeMap::new();
    for (l, _) in congruence_targets(setup) {
        let i = *indices.get(&l).ok_or(Error::MissingIndex { l })?;
        let (weighted, literal) = congruence_sums(p, setup.n, &a_mod, l, i);
        residuals.insert(l, weighted);
        literal_residuals.insert(l, literal);
    }
    Ok(CongruenceReport { a0_residual, residuals, literal_residuals })
}

/// Weighted and unweighted residuals for one odd l, from a_k mod p and i = i_{p-ln} mod p.
pub fn congruence_sums(p: u64, n: u64, a_mod: &[u64], l: u64, i: u64) -> (u64, u64) {
    let pb = BigInt::from(p);
    let mut weighted = BigInt::zero();
    let mut literal = BigInt::zero();
    for m in 1..=l {
        let binom = nt::binomial(l * n, m * n);
        let prod = BigInt::from(a_mod[(l - m) as usize] * a_mod[m as usize]);
        let sign = if m % 2 == 1 { -1 } else { 1 };
        let term = binom * prod * sign;
        weighted += &term * BigInt::from(m);
        literal += term;
    }
    let li = BigInt::from(l * i);
    (big_mod_u64(&(weighted + &li), &pb), big_mod_u64(&(literal + &li), &pb))
}

/// a_k mod p computed straight from a d-vector, for record re-verification.
pub fn a_mod_p_from_d(p: u64, q: u64, n: u64, g: u64, v: u32, d: &[BigInt]) -> Vec<u64> {
    let pb = BigInt::from(p);
    let scale = (n % p) * nt::pow_mod(q, v as u64, p) % p;
    let d_mod: Vec<u64> = d.iter().map(|x| big_mod_u64(x, &pb)).collect();
    (0..d.len() as u64)
        .map(|k| {
            let step = nt::pow_mod(g, n * k, p);
            let mut w = 1u64;
            let mut acc = 0u64;
            for &di in &d_mod {
                acc = (acc + w * di) % p;
                w = w * step % p;
            }
            scale * acc % p
        })
        .collect()
}
