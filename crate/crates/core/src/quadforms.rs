//! Class numbers of Q(sqrt(-p)) and representations by x^2 + D y^2.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nt;

pub use crate::nt::legendre;

/// Residue/nonresidue sums for p = 3 mod 4 and the class number h = V - R.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassNumberData {
    pub p: u64,
    /// (sum of quadratic residues in [1, p-1]) / p
    #[serde(rename = "R")]
    pub r: u64,
    /// (sum of quadratic nonresidues in [1, p-1]) / p
    #[serde(rename = "V")]
    pub v: u64,
    pub h: u64,
}

fn check_half_prime(p: u64) -> Result<()> {
    if p <= 3 || p % 4 != 3 || !nt::is_prime(p) {
        return Err(Error::BadPrime(p));
    }
    Ok(())
}

pub fn class_number(p: u64) -> Result<ClassNumberData> {
    check_half_prime(p)?;
    let (mut res, mut non) = (0u64, 0u64);
    for s in 1..p {
        if nt::legendre(s as i64, p) == 1 {
            res += s;
        } else {
            non += s;
        }
    }
    if res % p != 0 || non % p != 0 {
        return Err(Error::InternalInvariant(format!("residue sums for p={p} not divisible by p")));
    }
    let (r, v) = (res / p, non / p);
    if v <= r || r + v != (p - 1) / 2 || (v - r) % 2 == 0 {
        return Err(Error::InternalInvariant(format!("V={v}, R={r} inconsistent for p={p}")));
    }
    Ok(ClassNumberData { p, r, v, h: v - r })
}

/// Number of reduced primitive forms (a, b, c) of discriminant `disc`.
pub fn reduced_forms_count(disc: i64) -> Result<u64> {
    if disc >= 0 || !matches!(disc.rem_euclid(4), 0 | 1) {
        return Err(Error::BadDiscriminant(disc));
    }
    let abs = disc.unsigned_abs();
    let mut count = 0;
    let mut a = 1u64;
    while 3 * a * a <= abs {
        for b in -(a as i64)..=(a as i64) {
            let num = (b * b) as i128 - disc as i128;
            if num % (4 * a as i128) != 0 {
                continue;
            }
            let c = (num / (4 * a as i128)) as u64;
            if c < a {
                continue;
            }
            if b < 0 && (b.unsigned_abs() == a || a == c) {
                continue;
            }
            if nt::gcd(nt::gcd(a, b.unsigned_abs()), c) != 1 {
                continue;
            }
            count += 1;
        }
        a += 1;
    }
    Ok(count)
}

/// Solution of x^2 + D y^2 = N for prime N, with x >= 0 and y > 0.
pub fn cornacchia(d: u64, n: u64) -> Option<(u64, u64)> {
    if d == 0 || n < 2 {
        return None;
    }
    if n % d == 0 && n == d {
        return Some((0, 1));
    }
    if d > n {
        return None;
    }
    if n == 2 {
        return (d == 1).then_some((1, 1));
    }
    if d % n == 0 {
        return None;
    }
    let mut r0 = nt::sqrt_mod((n - d % n) % n, n)?;
    if r0 > n / 2 {
        r0 = n - r0;
    }
    let (mut a, mut b) = (n, r0);
    let limit = nt::isqrt(n);
    while b > limit {
        (a, b) = (b, a % b);
    }
    let rest = n - b * b;
    if rest % d != 0 {
        return None;
    }
    let y2 = rest / d;
    let y = nt::isqrt(y2);
    (y * y == y2 && y > 0).then_some((b, y))
}

/// Every (x, y) with x, y >= 0 and x^2 + D y^2 = N, ascending in x, by exhaustive search.
pub fn represent_all(d: u64, n: &BigInt, guard: u64) -> Result<Vec<(BigInt, BigInt)>> {
    if n.is_negative() || d == 0 {
        return Err(Error::InvalidInput("need N >= 0 and D >= 1".into()));
    }
    let db = BigInt::from(d);
    let ymax = (n / &db).sqrt();
    let iterations = ymax.to_u128().unwrap_or(u128::MAX).saturating_add(1);
    if iterations > guard as u128 {
        return Err(Error::SearchTooLarge { iterations, guard });
    }
    let mut out = Vec::new();
    let mut y = BigInt::zero();
    while y <= ymax {
        let rest = n - &db * &y * &y;
        let x = rest.sqrt();
        if &x * &x == rest {
            out.push((x, y.clone()));
        }
        y += 1;
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Form {
    a: BigInt,
    b: BigInt,
    c: BigInt,
}

/// Reduces `f` and returns the reduced form and G with reduced(v) = f(G v).
fn reduce_tracking(mut f: Form) -> (Form, [BigInt; 4]) {
    let (mut g00, mut g01, mut g10, mut g11) = (BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one());
    loop {
        let two_a = &f.a * 2;
        let t = (&f.a - &f.b).div_floor(&two_a);
        if !t.is_zero() {
            f.c = &f.a * &t * &t + &f.b * &t + &f.c;
            f.b += &two_a * &t;
            g01 += &g00 * &t;
            g11 += &g10 * &t;
        }
        if f.a > f.c || (f.a == f.c && f.b.is_negative()) {
            std::mem::swap(&mut f.a, &mut f.c);
            f.b = -&f.b;
            let (n00, n01) = (g01.clone(), -&g00);
            let (n10, n11) = (g11.clone(), -&g10);
            (g00, g01, g10, g11) = (n00, n01, n10, n11);
            continue;
        }
        return (f, [g00, g01, g10, g11]);
    }
}

/// Square roots b mod 2M of disc mod 4M, where M = q^s and disc = 1 mod 4.
fn discriminant_roots(disc: &BigInt, q: u64, s: u32) -> Vec<BigInt> {
    let m = BigInt::from(q).pow(s);
    let two_m = &m * 2;
    let mut roots = BTreeSet::new();
    if q == 2 {
        // lift solutions of b^2 = disc mod 2^j one bit at a time
        let mut sols = vec![BigInt::one()];
        for j in 1..s + 2 {
            let modulus = BigInt::one() << (j + 1);
            let bit = BigInt::one() << j;
            let mut next = Vec::new();
            for b in &sols {
                for cand in [b.clone(), b + &bit] {
                    if (&cand * &cand - disc).mod_floor(&modulus).is_zero() {
                        next.push(cand);
                    }
                }
            }
            sols = next;
        }
        for b in sols {
            roots.insert(b.mod_floor(&two_m));
        }
    } else {
        let base = match s {
            0 => vec![BigInt::zero()],
            _ => {
                let dm = disc.mod_floor(&BigInt::from(q)).to_u64().unwrap();
                let Some(r) = nt::sqrt_mod(dm, q) else { return Vec::new() };
                if r == 0 {
                    return Vec::new();
                }
                // Hensel: r <- r - (r^2 - disc) / (2r) mod q^k
                let mut r = BigInt::from(r);
                let mut modulus = BigInt::from(q);
                for _ in 1..s {
                    modulus *= q;
                    let inv = BigInt::from(&r * 2).modinv(&modulus).expect("q odd, r unit");
                    r = (&r - (&r * &r - disc) * inv).mod_floor(&modulus);
                }
                vec![r.clone(), (&m - &r).mod_floor(&m)]
            }
        };
        for r in base {
            let b = if r.is_odd() { r } else { r + &m };
            roots.insert(b.mod_floor(&two_m));
        }
    }
    roots.into_iter().collect()
}

/// Primitive (x, y) with x^2 + x y + c y^2 = q^s, c = (k + 1) / 4.
fn primitive_principal_reps(k: u64, q: u64, s: u32) -> Vec<(BigInt, BigInt)> {
    let disc = BigInt::from(-(k as i64));
    let m = BigInt::from(q).pow(s);
    let principal = Form { a: BigInt::one(), b: BigInt::one(), c: BigInt::from((k + 1) / 4) };
    let mut out = Vec::new();
    for b in discriminant_roots(&disc, q, s) {
        let c = (&b * &b - &disc) / (&m * 4);
        let (reduced, g) = reduce_tracking(Form { a: m.clone(), b, c });
        if reduced == principal {
            let [_, _, g10, g11] = g;
            let (x, y) = (g11, -g10);
            out.push((-&x, -&y));
            out.push((x, y));
        }
    }
    out
}

/// Every (C, D) with C, D >= 0 and C^2 + k D^2 = 4 q^h, for prime k = 3 mod 4, k > 3.
///
/// Solutions correspond to elements of norm q^h in the ring of integers of
/// Q(sqrt(-k)); they are enumerated through the roots of the discriminant
/// modulo 4 q^s and reduction of the associated forms, so the cost is
/// polynomial in h log q.
pub fn represent_four_prime_power(k: u64, q: u64, h: u32) -> Result<Vec<(BigInt, BigInt)>> {
    check_half_prime(k)?;
    if !nt::is_prime(q) || q == k {
        return Err(Error::InvalidInput(format!("q={q} must be a prime different from {k}")));
    }
    let qb = BigInt::from(q);
    let mut found = BTreeSet::new();
    for j in 0..=h / 2 {
        let scale = qb.pow(j);
        for (x, y) in primitive_principal_reps(k, q, h - 2 * j) {
            let (x, y) = (x * &scale, y * &scale);
            let cc: BigInt = &x * 2 + &y;
            found.insert((cc.abs(), y.abs()));
        }
    }
    let target = qb.pow(h) * 4;
    let kb = BigInt::from(k);
    for (c, d) in &found {
        if c * c + &kb * d * d != target {
            return Err(Error::InternalInvariant(format!("({c}, {d}) does not represent 4*{q}^{h}")));
        }
    }
    Ok(found.into_iter().collect())
}

/// A verified solution of x^2 + D y^2 = N.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawQfSolution")]
pub struct QfSolution {
    #[serde(rename = "D")]
    pub d: u64,
    #[serde(rename = "N", with = "crate::serde_big::bigint")]
    pub n: BigInt,
    #[serde(rename = "x", with = "crate::serde_big::bigint")]
    pub xval: BigInt,
    #[serde(rename = "y", with = "crate::serde_big::bigint")]
    pub yval: BigInt,
}

#[derive(Deserialize)]
struct RawQfSolution {
    #[serde(rename = "D")]
    d: u64,
    #[serde(rename = "N", with = "crate::serde_big::bigint")]
    n: BigInt,
    #[serde(with = "crate::serde_big::bigint")]
    x: BigInt,
    #[serde(with = "crate::serde_big::bigint")]
    y: BigInt,
}

impl TryFrom<RawQfSolution> for QfSolution {
    type Error = Error;

    fn try_from(raw: RawQfSolution) -> Result<Self> {
        QfSolution::new(raw.d, raw.n, raw.x, raw.y)
    }
}

impl QfSolution {
    pub fn new(d: u64, n: BigInt, xval: BigInt, yval: BigInt) -> Result<Self> {
        if &xval * &xval + BigInt::from(d) * &yval * &yval != n {
            return Err(Error::NotARepresentation {
                d,
                n: n.to_string(),
                x: xval.to_string(),
                y: yval.to_string(),
            });
        }
        Ok(Self { d, n, xval, yval })
    }
}

/// y(u, w) = w sum_{j} C(s, 2j) (-p w^2)^{(s-2j-1)/2} (u^2)^j.
pub fn closed_form_y(u: &BigInt, w: &BigInt, s: u32, p: u64) -> BigInt {
    let neg_pw2 = -(BigInt::from(p) * w * w);
    let u2 = u * u;
    let mut acc = BigInt::zero();
    for j in 0..=(s - 1) / 2 {
        acc += nt::binomial(s as u64, 2 * j as u64) * neg_pw2.pow((s - 2 * j - 1) / 2) * u2.pow(j);
    }
    w * acc
}

/// (u + w sqrt(-p))^s = X + Y sqrt(-p), checked against the norm and the closed form for Y.
pub fn power_representation(u: &BigInt, w: &BigInt, s: u32, p: u64) -> Result<QfSolution> {
    if s % 2 == 0 {
        return Err(Error::EvenExponent);
    }
    let pb = BigInt::from(p);
    let (mut x, mut y) = (BigInt::one(), BigInt::zero());
    for _ in 0..s {
        (x, y) = (&x * u - &pb * &y * w, &x * w + &y * u);
    }
    if y != closed_form_y(u, w, s, p) {
        return Err(Error::InternalInvariant(format!("expansion disagrees with closed form for ({u}, {w}, {s}, {p})")));
    }
    let norm = (u * u + &pb * w * w).pow(s);
    QfSolution::new(p, norm, x, y).map_err(|e| Error::InternalInvariant(e.to_string()))
}

/// A prime q = u^2 + p w^2 with p not dividing w, and the lifted solution of C^2 + p D^2 = 4 q^h.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodPrime {
    pub q: u64,
    pub h: u64,
    pub base: QfSolution,
    pub power: QfSolution,
    pub lifted: QfSolution,
}

pub fn find_good_prime(p: u64, qbound: u64) -> Result<GoodPrime> {
    let cn = class_number(p)?;
    for q in nt::primes_up_to(qbound) {
        if q == 2 || q == p || nt::legendre(-(p as i64), q) != 1 {
            continue;
        }
        let Some((u, w)) = cornacchia(p, q) else { continue };
        if w % p == 0 || u % p == 0 {
            continue;
        }
        let (u, w) = (BigInt::from(u), BigInt::from(w));
        let base = QfSolution::new(p, BigInt::from(q), u.clone(), w.clone())?;
        let power = power_representation(&u, &w, cn.h as u32, p)?;
        let lifted = QfSolution::new(p, &power.n * 4, &power.xval * 2, &power.yval * 2)?;
        if (&lifted.yval % BigInt::from(p)).is_zero() {
            return Err(Error::InternalInvariant(format!("p divides D for q={q}")));
        }
        return Ok(GoodPrime { q, h: cn.h, base, power, lifted });
    }
    Err(Error::NoWitnessFound(qbound))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StickelbergerOutcome {
    pub holds: bool,
    /// +1 if C itself satisfies the congruence, -1 if -C does.
    pub sign: Option<i8>,
    /// 2 (-q)^{-R} mod p, absent when p | q
    pub expected_residue: Option<u64>,
}

/// Checks p does not divide C and that +-C = 2 (-q)^{-R} (mod p), given C^2 + p D^2 = 4 q^h.
pub fn stickelberger_check(p: u64, q: u64, r: u64, c: &BigInt, d: &BigInt, h: u32) -> Result<StickelbergerOutcome> {
    let n = BigInt::from(q).pow(h) * 4;
    QfSolution::new(p, n, c.clone(), d.clone())?;
    let minus_q = (p - q % p) % p;
    let expected_residue = nt::inv_mod(nt::pow_mod(minus_q, r, p), p).map(|inv| 2 * inv % p);
    let c_mod = c.mod_floor(&BigInt::from(p)).to_u64().unwrap();
    let sign = match expected_residue {
        _ if c_mod == 0 => None,
        Some(x) if c_mod == x => Some(1),
        Some(x) if p - c_mod == x => Some(-1),
        _ => None,
    };
    Ok(StickelbergerOutcome { holds: sign.is_some(), sign, expected_residue })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    #[serde(rename = "D")]
    pub d: u64,
    pub bound: u64,
    pub represented: u64,
    pub primes: u64,
    pub ratio: f64,
}

/// Share of primes up to `bound` represented by x^2 + D y^2.
pub fn density_estimate(d: u64, bound: u64) -> Result<DensityEstimate> {
    if bound < 100 {
        return Err(Error::BoundTooSmall(bound));
    }
    let primes = nt::primes_up_to(bound);
    let represented = primes.par_iter().filter(|&&q| cornacchia(d, q).is_some()).count() as u64;
    let total = primes.len() as u64;
    Ok(DensityEstimate { d, bound, represented, primes: total, ratio: represented as f64 / total as f64 })
}
