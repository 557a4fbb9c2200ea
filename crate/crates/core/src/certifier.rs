//! Witness searches and certificates for the vanishing of e_r(A).
//!
//! The main route targets r = (p+1)/2 for p = 3 mod 4: a prime q of order
//! (p-1)/2 gives two periods d_0, d_1 with 4 q^h = (d_0+d_1)^2 + p (d_0-d_1)^2,
//! and p does not divide d_0 - d_1 exactly when the index i_r is nonzero.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclo_units::{self, IdentityTerms, IndexRecord, Verdict};
use crate::error::{Error, Result};
use crate::ff_arith::{build_field, CyclotomicSetup, FieldContext};
use crate::nt;
use crate::periods::{big_mod_u64, compute_period_table_with, compute_v, PeriodTable, ScanMode};
use crate::quadforms::class_number;

pub const CERTIFICATE_SCHEMA_VERSION: u32 = 1;

/// First `count` primes q <= qbound with ord_p(q) = n.
pub fn find_primes_of_order(p: u64, n: u64, count: usize, qbound: u64) -> Result<Vec<u64>> {
    if !nt::is_prime(p) || p < 3 {
        return Err(Error::Precondition(format!("{p} is not an odd prime")));
    }
    if n < 2 || (p - 1) % n != 0 {
        return Err(Error::Precondition(format!("n={n} must divide p-1={} and be at least 2", p - 1)));
    }
    let found: Vec<u64> = nt::primes_up_to(qbound)
        .into_iter()
        .filter(|&q| q != p && nt::multiplicative_order(q, p).ok() == Some(n))
        .take(count)
        .collect();
    if found.len() < count {
        return Err(Error::BoundExhausted { found: found.len(), wanted: count, bound: qbound });
    }
    Ok(found)
}

/// Canonical choices that pin down the prime above q: the modulus of the
/// field and the generator alpha, both as coefficient lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldFingerprint {
    pub modulus: Vec<u64>,
    pub alpha: Vec<u64>,
}

impl FieldFingerprint {
    fn of(ctx: &FieldContext) -> Self {
        Self { modulus: ctx.modulus.clone(), alpha: ctx.alpha.0.clone() }
    }
}

/// Witness with ord_p(q) = (p-1)/2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfOrderWitness {
    pub q: u64,
    pub n: u64,
    pub v: u32,
    pub h: u64,
    #[serde(with = "crate::serde_big::bigint")]
    pub d0: BigInt,
    #[serde(with = "crate::serde_big::bigint")]
    pub d1: BigInt,
    #[serde(with = "crate::serde_big::bigint")]
    pub a: BigInt,
    #[serde(with = "crate::serde_big::bigint")]
    pub b: BigInt,
    pub a0_mod_p: u64,
    pub a1_mod_p: u64,
    pub i_mod_p: u64,
    /// 4 q^h = a^2 + p b^2
    pub qf_identity_ok: bool,
    pub field: FieldFingerprint,
}

/// Witness of any other order n >= 2; only the index criterion applies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxiliaryWitness {
    pub q: u64,
    pub n: u64,
    pub v: u32,
    #[serde(with = "crate::serde_big::bigint_vec")]
    pub d: Vec<BigInt>,
    pub identity: IdentityTerms,
    pub a_mod_p: Vec<u64>,
    pub i_mod_p: u64,
    pub field: FieldFingerprint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessRecord {
    HalfOrder(HalfOrderWitness),
    Auxiliary(AuxiliaryWitness),
}

impl WitnessRecord {
    pub fn q(&self) -> u64 {
        match self {
            WitnessRecord::HalfOrder(w) => w.q,
            WitnessRecord::Auxiliary(w) => w.q,
        }
    }

    pub fn i_mod_p(&self) -> u64 {
        match self {
            WitnessRecord::HalfOrder(w) => w.i_mod_p,
            WitnessRecord::Auxiliary(w) => w.i_mod_p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateVerdict {
    Trivial,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub field_rule: String,
    pub field_cap: u64,
    pub qbound: u64,
    pub max_witnesses: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub p: u64,
    pub r: u64,
    pub g: u64,
    pub h: u64,
    pub witnesses: Vec<WitnessRecord>,
    /// Candidate primes passed over, with the reason.
    pub skipped: Vec<String>,
    pub verdict: CertificateVerdict,
    pub environment: Environment,
}

const FIELD_RULE: &str = "F_q[x]/(m), m lex-least monic irreducible; alpha least primitive; zeta = alpha^f";

fn field_size(q: u64, n: u64) -> Option<u64> {
    q.checked_pow(n.try_into().ok()?)
}

/// Primes q <= qbound with q != p, as (field size, q, n), smallest field first.
fn witness_candidates(p: u64, qbound: u64, cap: u64) -> (Vec<(u64, u64, u64)>, usize) {
    let mut feasible = Vec::new();
    let mut too_large = 0;
    for q in nt::primes_up_to(qbound) {
        if q == p {
            continue;
        }
        let n = nt::multiplicative_order(q, p).expect("q prime, q != p");
        match field_size(q, n) {
            Some(size) if size <= cap => feasible.push((size, q, n)),
            _ => too_large += 1,
        }
    }
    feasible.sort_unstable();
    (feasible, too_large)
}

fn period_data(setup: &CyclotomicSetup, cap: u64) -> Result<(FieldContext, PeriodTable)> {
    let ctx = build_field(setup, cap)?;
    let table = compute_period_table_with(&ctx, setup, ScanMode::Parallel)?;
    Ok((ctx, table))
}

fn half_order_witness(setup: &CyclotomicSetup, cap: u64, r: u64, h_expected: u64) -> Result<HalfOrderWitness> {
    let (ctx, table) = period_data(setup, cap)?;
    let (p, q, n) = (setup.p, setup.q, setup.n);
    let h = n
        .checked_sub(2 * table.v as u64)
        .ok_or_else(|| Error::InternalInvariant(format!("n - 2v negative for q={q}")))?;
    if h != h_expected {
        return Err(Error::InternalInvariant(format!("(p-1)/2 - 2v = {h} but class number is {h_expected} (q={q})")));
    }
    let d0 = table.d[0].clone();
    let d1 = table.d[1].clone();
    let a = &d0 + &d1;
    let b = &d0 - &d1;
    let qf_identity_ok = BigInt::from(q).pow(h as u32) * 4 == &a * &a + BigInt::from(p) * &b * &b;
    let a_mod = table.a_mod_p();
    let IndexRecord { i_mod_p, .. } = cyclo_units::beta_index_mod_p(&ctx, setup, r)?;
    Ok(HalfOrderWitness {
        q,
        n,
        v: table.v,
        h,
        d0,
        d1,
        a,
        b,
        a0_mod_p: a_mod[0],
        a1_mod_p: a_mod[1],
        i_mod_p,
        qf_identity_ok,
        field: FieldFingerprint::of(&ctx),
    })
}

fn auxiliary_witness(setup: &CyclotomicSetup, cap: u64, r: u64) -> Result<AuxiliaryWitness> {
    let (ctx, table) = period_data(setup, cap)?;
    let identity = cyclo_units::identity_terms(setup.p, setup.q, setup.n, table.v, &table.d)?;
    let IndexRecord { i_mod_p, .. } = cyclo_units::beta_index_mod_p(&ctx, setup, r)?;
    Ok(AuxiliaryWitness {
        q: setup.q,
        n: setup.n,
        v: table.v,
        a_mod_p: table.a_mod_p(),
        d: table.d,
        identity,
        i_mod_p,
        field: FieldFingerprint::of(&ctx),
    })
}

/// Certificate for e_{(p+1)/2}(A) with the least primitive root.
pub fn certify_half_plus(p: u64, max_witnesses: usize, qbound: u64, field_cap: u64) -> Result<Certificate> {
    class_number(p)?;
    let g = nt::least_primitive_root(p)?;
    certify_half_plus_with_root(p, g, max_witnesses, qbound, field_cap)
}

/// Tries primes of order (p-1)/2 first, smallest first; if none of those
/// settles the question within the cap, continues with primes of any other
/// order, smallest field first.
pub fn certify_half_plus_with_root(
    p: u64,
    g: u64,
    max_witnesses: usize,
    qbound: u64,
    field_cap: u64,
) -> Result<Certificate> {
    let cn = class_number(p)?;
    if !nt::is_primitive_root(g, p) {
        return Err(Error::InvalidSetup(format!("{g} is not a primitive root mod {p}")));
    }
    let r = (p + 1) / 2;
    let half = (p - 1) / 2;
    let (candidates, too_large) = witness_candidates(p, qbound, field_cap);
    let mut skipped = Vec::new();
    if too_large > 0 {
        skipped.push(format!("{too_large} primes up to {qbound} have fields above the cap {field_cap}"));
    }
    // Frobenius at q fixes the prime above q, so i_r (q^{r-1} - 1) = 0 mod p:
    // only orders dividing r - 1 can give a nonzero index.
    let useful = |n: u64| n != half && n >= 2 && (r - 1) % n == 0;
    let excluded = candidates.iter().filter(|c| c.2 != half && !useful(c.2)).count();
    if excluded > 0 {
        skipped.push(format!("{excluded} primes whose order does not divide r-1 = {} (index forced to 0)", r - 1));
    }
    let ordered = candidates
        .iter()
        .filter(|c| c.2 == half)
        .chain(candidates.iter().filter(|c| useful(c.2)));
    let mut witnesses = Vec::new();
    for &(_, q, n) in ordered {
        if witnesses.len() >= max_witnesses {
            break;
        }
        let setup = CyclotomicSetup::with_primitive_root(p, q, g)?;
        let record = if n == half {
            half_order_witness(&setup, field_cap, r, cn.h).map(WitnessRecord::HalfOrder)
        } else {
            auxiliary_witness(&setup, field_cap, r).map(WitnessRecord::Auxiliary)
        };
        match record {
            Ok(w) => {
                let done = w.i_mod_p() != 0;
                witnesses.push(w);
                if done {
                    break;
                }
            }
            Err(err @ (Error::FieldTooLarge { .. } | Error::FactorizationFailure(_))) => {
                skipped.push(format!("q={q}: {err}"));
            }
            Err(err) => return Err(err),
        }
    }
    if witnesses.is_empty() {
        return Err(Error::BoundExhausted { found: 0, wanted: 1, bound: qbound });
    }
    let verdict = if witnesses.iter().any(|w| w.i_mod_p() != 0) {
        CertificateVerdict::Trivial
    } else {
        CertificateVerdict::Inconclusive
    };
    Ok(Certificate {
        schema_version: CERTIFICATE_SCHEMA_VERSION,
        p,
        r,
        g,
        h: cn.h,
        witnesses,
        skipped,
        verdict,
        environment: Environment { field_rule: FIELD_RULE.into(), field_cap, qbound, max_witnesses },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

fn check_half_order(p: u64, g: u64, h_class: u64, r: u64, w: &HalfOrderWitness, diag: &mut Vec<String>) {
    let q = w.q;
    let mut fail = |msg: String| diag.push(format!("witness q={q}: {msg}"));
    if w.n != (p - 1) / 2 || nt::multiplicative_order(q, p).ok() != Some(w.n) {
        fail(format!("order of q is not n={}", w.n));
        return;
    }
    if compute_v(p, q, g).ok() != Some(w.v) {
        fail(format!("v={} does not match the residue-sum formula", w.v));
    }
    if w.h != h_class || (w.n as i64 - 2 * w.v as i64) != w.h as i64 {
        fail(format!("h={} disagrees with class number {h_class} or n - 2v", w.h));
    }
    if w.a != &w.d0 + &w.d1 || w.b != &w.d0 - &w.d1 {
        fail("a, b are not d0 + d1, d0 - d1".into());
    }
    let lhs = BigInt::from(q).pow(w.h as u32) * 4;
    let holds = lhs == &w.a * &w.a + BigInt::from(p) * &w.b * &w.b;
    if !holds {
        fail(format!("4 q^h != a^2 + p b^2 for a={}, b={}", w.a, w.b));
    }
    if holds != w.qf_identity_ok {
        fail("stored qf_identity_ok is wrong".into());
    }
    let a_mod = cyclo_units::a_mod_p_from_d(p, q, w.n, g, w.v, &[w.d0.clone(), w.d1.clone()]);
    if a_mod != [w.a0_mod_p, w.a1_mod_p] {
        fail(format!("stored a_k mod p {:?} differ from recomputed {a_mod:?}", [w.a0_mod_p, w.a1_mod_p]));
    }
    if (w.a0_mod_p + 1) % p != 0 {
        fail("a_0 is not -1 mod p".into());
    }
    if w.i_mod_p >= p || w.i_mod_p != w.a0_mod_p * w.a1_mod_p % p {
        fail(format!("i={} is not a_0 a_1 mod p", w.i_mod_p));
    }
    let b_zero = big_mod_u64(&w.b, &BigInt::from(p)) == 0;
    if (w.i_mod_p == 0) != b_zero || (w.i_mod_p == 0) != (w.a1_mod_p == 0) {
        fail("i = 0, p | b and a_1 = 0 are not equivalent".into());
    }
    debug_assert_eq!(r, (p + 1) / 2);
}

fn check_auxiliary(p: u64, g: u64, r: u64, w: &AuxiliaryWitness, diag: &mut Vec<String>) {
    let q = w.q;
    let mut fail = |msg: String| diag.push(format!("witness q={q}: {msg}"));
    let n = w.n;
    if n < 2 || nt::multiplicative_order(q, p).ok() != Some(n) {
        fail(format!("order of q is not n={n}"));
        return;
    }
    let e = (p - 1) / n;
    if w.d.len() as u64 != e {
        fail(format!("d has {} entries, expected {e}", w.d.len()));
        return;
    }
    if compute_v(p, q, g).ok() != Some(w.v) {
        fail(format!("v={} does not match the residue-sum formula", w.v));
    }
    match cyclo_units::identity_terms(p, q, n, w.v, &w.d) {
        Ok(t) if t == w.identity && t.residual.is_zero() => {}
        Ok(t) => fail(format!("quadratic identity residual {} or stored terms differ", t.residual)),
        Err(err) => fail(err.to_string()),
    }
    let a_mod = cyclo_units::a_mod_p_from_d(p, q, n, g, w.v, &w.d);
    if a_mod != w.a_mod_p {
        fail("stored a_k mod p differ from recomputed".into());
    }
    if (a_mod[0] + 1) % p != 0 {
        fail("a_0 is not -1 mod p".into());
    }
    if w.i_mod_p >= p {
        fail(format!("i={} is not reduced mod p", w.i_mod_p));
    }
    // r = p - l n for odd l links the index to the periods
    if (p - r) % n == 0 {
        let l = (p - r) / n;
        if l % 2 == 1 && l < e {
            let (res, _) = cyclo_units::congruence_sums(p, n, &a_mod, l, w.i_mod_p);
            if res != 0 {
                fail(format!("congruence for l={l} has residual {res}"));
            }
        }
    }
}

/// Re-checks every stored identity and the verdict logic without touching a field.
pub fn verify_certificate(cert: &Certificate) -> VerifyOutcome {
    let mut diag = Vec::new();
    let p = cert.p;
    if cert.schema_version != CERTIFICATE_SCHEMA_VERSION {
        diag.push(format!("unknown schema version {}", cert.schema_version));
    }
    match class_number(p) {
        Ok(cn) if cn.h == cert.h => {}
        Ok(cn) => diag.push(format!("h={} but class number is {}", cert.h, cn.h)),
        Err(err) => diag.push(err.to_string()),
    }
    if !diag.is_empty() {
        return VerifyOutcome { ok: false, diagnostics: diag };
    }
    if cert.r != (p + 1) / 2 {
        diag.push(format!("r={} is not (p+1)/2", cert.r));
    }
    if !nt::is_primitive_root(cert.g, p) {
        diag.push(format!("g={} is not a primitive root", cert.g));
    }
    for w in &cert.witnesses {
        match w {
            WitnessRecord::HalfOrder(w) => check_half_order(p, cert.g, cert.h, cert.r, w, &mut diag),
            WitnessRecord::Auxiliary(w) => check_auxiliary(p, cert.g, cert.r, w, &mut diag),
        }
    }
    let trivial = cert.witnesses.iter().any(|w| w.i_mod_p() != 0);
    match (cert.verdict, trivial) {
        (CertificateVerdict::Trivial, false) => diag.push("verdict Trivial without a nonzero index".into()),
        (CertificateVerdict::Inconclusive, true) => diag.push("verdict Inconclusive despite a nonzero index".into()),
        _ => {}
    }
    VerifyOutcome { ok: diag.is_empty(), diagnostics: diag }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanAttempt {
    pub q: u64,
    pub n: u64,
    pub i_mod_p: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VandiverEntry {
    pub verdict: Verdict,
    pub witness_q: Option<u64>,
    pub i_mod_p: Option<u64>,
    pub attempts: Vec<ScanAttempt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VandiverReport {
    pub p: u64,
    pub g: u64,
    pub entries: BTreeMap<u64, VandiverEntry>,
    pub skipped: Vec<String>,
}

impl VandiverReport {
    pub fn all_trivial(&self) -> bool {
        self.entries.values().all(|e| e.verdict == Verdict::Trivial)
    }
}

/// Tests every even r in [2, p-3] against successive primes q, smallest field first.
pub fn vandiver_scan(p: u64, max_per_r: usize, qbound: u64, field_cap: u64) -> Result<VandiverReport> {
    if p <= 3 || !nt::is_prime(p) {
        return Err(Error::Precondition(format!("p={p} must be a prime greater than 3")));
    }
    let g = nt::least_primitive_root(p)?;
    let mut entries: BTreeMap<u64, VandiverEntry> = (2..=p.saturating_sub(3))
        .step_by(2)
        .map(|r| (r, VandiverEntry { verdict: Verdict::Unknown, witness_q: None, i_mod_p: None, attempts: Vec::new() }))
        .collect();
    let (candidates, too_large) = witness_candidates(p, qbound, field_cap);
    let mut skipped = Vec::new();
    if too_large > 0 {
        skipped.push(format!("{too_large} primes up to {qbound} have fields above the cap {field_cap}"));
    }
    for &(_, q, _) in &candidates {
        let open: Vec<u64> = entries
            .iter()
            .filter(|(_, e)| e.verdict == Verdict::Unknown && e.attempts.len() < max_per_r)
            .map(|(&r, _)| r)
            .collect();
        if open.is_empty() {
            break;
        }
        let setup = CyclotomicSetup::for_index(p, q, g)?;
        let ctx = match build_field(&setup, field_cap) {
            Ok(ctx) => ctx,
            Err(err @ (Error::FieldTooLarge { .. } | Error::FactorizationFailure(_))) => {
                skipped.push(format!("q={q}: {err}"));
                continue;
            }
            Err(err) => return Err(err),
        };
        let results: Vec<(u64, Result<u64>)> =
            open.par_iter().map(|&r| (r, cyclo_units::index_mod_p(&ctx, r))).collect();
        for (r, i) in results {
            let i = i?;
            let entry = entries.get_mut(&r).expect("open r is present");
            entry.attempts.push(ScanAttempt { q, n: setup.n, i_mod_p: i });
            if i != 0 {
                entry.verdict = Verdict::Trivial;
                entry.witness_q = Some(q);
                entry.i_mod_p = Some(i);
            }
        }
    }
    Ok(VandiverReport { p, g, entries, skipped })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RemarkCase {
    E4,
    E6,
}

impl std::str::FromStr for RemarkCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e4" => Ok(RemarkCase::E4),
            "e6" => Ok(RemarkCase::E6),
            other => Err(Error::InvalidInput(format!("unknown case {other:?}, expected e4 or e6"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemarkReport {
    pub p: u64,
    pub case: RemarkCase,
    pub e: u64,
    pub q: u64,
    pub n: u64,
    pub v: u32,
    #[serde(with = "crate::serde_big::bigint_vec")]
    pub d: Vec<BigInt>,
    /// e^2 q^{n - 2v} against (sum d)^2 + p (e sum d^2 - (sum d)^2)
    pub identity: IdentityTerms,
    pub index: IndexRecord,
    /// Congruence residual for l = 1 linking a_0 a_1 to the index.
    pub congruence_residual: u64,
}

/// Data for e = 4 (p = 5 mod 8) or e = 6 (p = 7 mod 12); nothing is claimed beyond the identity.
pub fn remark_explore(p: u64, case: RemarkCase, qbound: u64, field_cap: u64) -> Result<RemarkReport> {
    let (e, ok) = match case {
        RemarkCase::E4 => (4, p % 8 == 5),
        RemarkCase::E6 => (6, p % 12 == 7),
    };
    if !ok || !nt::is_prime(p) {
        return Err(Error::Precondition(format!("p={p} does not fit case e={e}")));
    }
    let n = (p - 1) / e;
    if n < 2 {
        return Err(Error::Precondition(format!("p={p} gives n={n} < 2")));
    }
    let r = p - n;
    let q = nt::primes_up_to(qbound)
        .into_iter()
        .find(|&q| {
            q != p
                && nt::multiplicative_order(q, p).ok() == Some(n)
                && field_size(q, n).is_some_and(|s| s <= field_cap)
        })
        .ok_or(Error::BoundExhausted { found: 0, wanted: 1, bound: qbound })?;
    let setup = CyclotomicSetup::new(p, q)?;
    let (ctx, table) = period_data(&setup, field_cap)?;
    let identity = cyclo_units::identity_terms(p, q, n, table.v, &table.d)?;
    let index = cyclo_units::beta_index_mod_p(&ctx, &setup, r)?;
    let a_mod = table.a_mod_p();
    let (congruence_residual, _) = cyclo_units::congruence_sums(p, n, &a_mod, 1, index.i_mod_p);
    Ok(RemarkReport { p, case, e, q, n, v: table.v, d: table.d, identity, index, congruence_residual })
}
