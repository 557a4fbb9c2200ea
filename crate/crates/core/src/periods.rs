//! Gaussian periods eta_m and the integers v, d_i, a_k derived from them.
//!
//! eta_m = sum over j < f of zeta_q^{T(alpha^{m + p j})}. Each period is kept
//! as a count vector over the exponents of zeta_q, so rationality is a
//! syntactic property: all counts except the zeroth coincide.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff_arith::{CyclotomicSetup, FieldContext};
use crate::nt;

/// sum_t counts[t] * zeta_q^t, defined up to adding a constant sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycIntQ {
    #[serde(with = "crate::serde_big::bigint_vec")]
    pub counts: Vec<BigInt>,
}

impl CycIntQ {
    pub fn zero(q: u64) -> Self {
        Self { counts: vec![BigInt::zero(); q as usize] }
    }

    pub fn is_rational(&self) -> bool {
        self.counts[1..].windows(2).all(|w| w[0] == w[1])
    }

    /// c_0 - c_1 when rational.
    pub fn rational_value(&self) -> Option<BigInt> {
        if !self.is_rational() {
            return None;
        }
        Some(match self.counts.get(1) {
            Some(c1) => &self.counts[0] - c1,
            None => self.counts[0].clone(),
        })
    }

    pub fn count_sum(&self) -> BigInt {
        self.counts.iter().sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a - b).collect(),
        }
    }

    /// Equality modulo constant sequences.
    pub fn equivalent(&self, other: &Self) -> bool {
        let diff = self.sub(other);
        diff.counts.windows(2).all(|w| w[0] == w[1])
    }
}

/// How the period scan walks F^x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanMode {
    #[default]
    Sequential,
    /// Strided starts alpha^{k_0}, one chunk per worker; bit-identical result.
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodTable {
    pub setup: CyclotomicSetup,
    pub eta: Vec<CycIntQ>,
    /// Rational values of the periods, eta_values[m] = eta_m.
    #[serde(with = "crate::serde_big::bigint_vec")]
    pub eta_values: Vec<BigInt>,
    pub v: u32,
    #[serde(with = "crate::serde_big::bigint_vec")]
    pub d: Vec<BigInt>,
    #[serde(with = "crate::serde_big::bigint_vec")]
    pub a: Vec<BigInt>,
}

/// v = min over k < e of (1/p) sum_{l < n} |g^{k + e l}|_p.
pub fn compute_v(p: u64, q: u64, g: u64) -> Result<u32> {
    let n = nt::multiplicative_order(q, p)?;
    let e = (p - 1) / n;
    let mut best = u64::MAX;
    for k in 0..e {
        let s: u64 = (0..n).map(|l| nt::pow_mod(g, k + e * l, p)).sum();
        if s % p != 0 {
            return Err(Error::InternalInvariant(format!("residue sum {s} for k={k} not divisible by {p}")));
        }
        best = best.min(s / p);
    }
    Ok(best as u32)
}

/// Raw counts[m * q + t] = #{ k < q^n - 1 : k = m mod p, T(alpha^k) = t } over a k-range.
fn scan_range(ctx: &FieldContext, start: u64, end: u64) -> Vec<u64> {
    let (p, q, n) = (ctx.p as usize, ctx.q as usize, ctx.n as usize);
    let mut counts = vec![0u64; p * q];
    if start >= end {
        return counts;
    }
    let mut cur = ctx.pow_u64(&ctx.alpha, start).0;
    let mut next = vec![0u64; n];
    let mut tmp = vec![0u64; n];
    let mut m = (start % ctx.p) as usize;
    for _ in start..end {
        let t = ctx.trace_coeffs(&cur) as usize;
        counts[m * q + t] += 1;
        ctx.mul_alpha_into(&cur, &mut next, &mut tmp);
        std::mem::swap(&mut cur, &mut next);
        m += 1;
        if m == p {
            m = 0;
        }
    }
    counts
}

fn scan(ctx: &FieldContext, mode: ScanMode) -> Vec<u64> {
    let total = ctx.order;
    match mode {
        ScanMode::Sequential => scan_range(ctx, 0, total),
        ScanMode::Parallel => {
            let chunks = (rayon::current_num_threads() as u64 * 4).max(1);
            let step = total.div_ceil(chunks).max(1);
            (0..chunks)
                .into_par_iter()
                .map(|c| scan_range(ctx, (c * step).min(total), ((c + 1) * step).min(total)))
                .reduce(
                    || vec![0u64; (ctx.p * ctx.q) as usize],
                    |mut acc, part| {
                        acc.iter_mut().zip(part).for_each(|(a, b)| *a += b);
                        acc
                    },
                )
        }
    }
}

/// Scans F^x once and fills every field of the table.
pub fn compute_period_table(ctx: &FieldContext, setup: &CyclotomicSetup) -> Result<PeriodTable> {
    compute_period_table_with(ctx, setup, ScanMode::Sequential)
}

pub fn compute_period_table_with(ctx: &FieldContext, setup: &CyclotomicSetup, mode: ScanMode) -> Result<PeriodTable> {
    if ctx.p != setup.p || ctx.q != setup.q || ctx.n != setup.n {
        return Err(Error::InvalidInput("field context does not match setup".into()));
    }
    if setup.n < 2 {
        return Err(Error::InvalidSetup(format!("q={} = 1 mod p has no periods of this kind", setup.q)));
    }
    let q = setup.q as usize;
    let raw = scan(ctx, mode);
    let eta: Vec<CycIntQ> = raw
        .chunks(q)
        .map(|row| CycIntQ { counts: row.iter().map(|&c| BigInt::from(c)).collect() })
        .collect();
    let eta_values = eta
        .iter()
        .enumerate()
        .map(|(m, e)| {
            e.rational_value()
                .ok_or_else(|| Error::InternalInvariant(format!("eta_{m} is not rational")))
        })
        .collect::<Result<Vec<_>>>()?;
    let v = compute_v(setup.p, setup.q, setup.g)?;
    let mut table = PeriodTable {
        setup: setup.clone(),
        eta,
        eta_values,
        v,
        d: Vec::new(),
        a: Vec::new(),
    };
    table.d = compute_d(&table)?;
    table.a = compute_a(setup, &table.d, v);
    Ok(table)
}

/// d_i = (eta_{g^i} - eta_0) / q^v for i < e.
pub fn compute_d(table: &PeriodTable) -> Result<Vec<BigInt>> {
    let s = &table.setup;
    let qv = BigInt::from(s.q).pow(table.v);
    (0..s.e)
        .map(|i| {
            let m = nt::pow_mod(s.g, i, s.p);
            let diff = table.eta[m as usize]
                .sub(&table.eta[0])
                .rational_value()
                .ok_or(Error::NonIntegralPeriod { index: m })?;
            if !(&diff % &qv).is_zero() {
                return Err(Error::DivisibilityFailure { index: m });
            }
            Ok(diff / &qv)
        })
        .collect()
}

/// a_k = n q^v sum_{i < e} g^{n k i} d_i for k < e.
pub fn compute_a(setup: &CyclotomicSetup, d: &[BigInt], v: u32) -> Vec<BigInt> {
    let scale = BigInt::from(setup.n) * BigInt::from(setup.q).pow(v);
    let g = BigInt::from(setup.g);
    (0..d.len() as u64)
        .map(|k| {
            let step = g.pow((setup.n * k) as u32);
            let mut weight = BigInt::one();
            let mut acc = BigInt::zero();
            for di in d {
                acc += &weight * di;
                weight *= &step;
            }
            &scale * acc
        })
        .collect()
}

impl PeriodTable {
    /// Every structural invariant of the periods, as named pass/fail checks.
    pub fn invariant_checks(&self) -> Vec<(String, bool)> {
        let s = &self.setup;
        let f = BigInt::from(s.f.clone());
        let q = BigInt::from(s.q);
        let rational = self.eta.iter().all(CycIntQ::is_rational);
        let mass = self.eta.iter().all(|e| e.count_sum() == f);
        let congruent = self
            .eta_values
            .iter()
            .all(|x| (x - &f).mod_floor(&q).is_zero());
        let total: BigInt = self.eta_values.iter().sum();
        vec![
            ("eta rational".into(), rational),
            ("eta count sum = f".into(), mass),
            ("eta = f mod q".into(), congruent),
            ("sum eta = -1".into(), total == BigInt::from(-1)),
            ("v >= 1".into(), self.v >= 1),
            ("n - 2v >= 0".into(), s.n >= 2 * self.v as u64),
        ]
    }

    /// a_k mod p as residues in [0, p).
    pub fn a_mod_p(&self) -> Vec<u64> {
        let p = BigInt::from(self.setup.p);
        self.a.iter().map(|x| big_mod_u64(x, &p)).collect()
    }
}

/// Nonnegative residue of a big integer as u64.
pub fn big_mod_u64(x: &BigInt, m: &BigInt) -> u64 {
    use num_traits::ToPrimitive;
    x.mod_floor(m).to_u64().expect("residue fits")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff_arith::build_field;

    fn table(p: u64, q: u64) -> PeriodTable {
        let setup = CyclotomicSetup::new(p, q).unwrap();
        let ctx = build_field(&setup, 1 << 24).unwrap();
        compute_period_table(&ctx, &setup).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn v_examples() {
        assert_eq!(compute_v(7, 2, 3).unwrap(), 1);
        assert_eq!(compute_v(11, 3, 2).unwrap(), 2);
        assert_eq!(compute_v(7, 3, 3).unwrap(), 3);
    }

    #[test]
    fn p7_q2_table() {
        let t = table(7, 2);
        assert_eq!(t.eta_values, ints(&[-1, 1, 1, -1, 1, -1, -1]));
        assert_eq!(t.v, 1);
        assert_eq!(t.d, ints(&[1, 0]));
        assert_eq!(t.a, ints(&[6, 6]));
        assert!(t.invariant_checks().iter().all(|(_, ok)| *ok));
    }

    #[test]
    fn p11_q3_table() {
        let t = table(11, 3);
        assert!(t.eta.iter().all(|e| e.count_sum() == BigInt::from(22)));
        let mut d = t.d.clone();
        d.sort();
        assert_eq!(d, ints(&[-1, 0]));
        assert_eq!(t.a_mod_p()[0], 10);
        assert!(t.invariant_checks().iter().all(|(_, ok)| *ok));
    }

    #[test]
    fn parallel_scan_is_bit_identical() {
        for (p, q) in [(7, 2), (11, 3), (13, 3), (31, 2), (19, 7)] {
            let setup = CyclotomicSetup::new(p, q).unwrap();
            let ctx = build_field(&setup, 1 << 22).unwrap();
            let a = compute_period_table_with(&ctx, &setup, ScanMode::Sequential).unwrap();
            let b = compute_period_table_with(&ctx, &setup, ScanMode::Parallel).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn a_of_zero_d_is_zero() {
        let setup = CyclotomicSetup::new(7, 2).unwrap();
        assert_eq!(compute_a(&setup, &ints(&[0, 0]), 1), ints(&[0, 0]));
    }

    #[test]
    fn non_rational_difference_is_rejected() {
        let mut t = table(11, 3);
        t.eta[1].counts[1] += 1;
        assert_eq!(compute_d(&t), Err(Error::NonIntegralPeriod { index: 1 }));
        let mut t = table(11, 3);
        t.eta[1].counts[0] += 1;
        assert_eq!(compute_d(&t), Err(Error::DivisibilityFailure { index: 1 }));
    }

    #[test]
    fn cycintq_equivalence() {
        let a = CycIntQ { counts: ints(&[3, 1, 1]) };
        let b = CycIntQ { counts: ints(&[5, 3, 3]) };
        assert!(a.equivalent(&b));
        assert_eq!(a.rational_value(), Some(BigInt::from(2)));
        assert!(!CycIntQ { counts: ints(&[3, 1, 2]) }.is_rational());
    }
}
