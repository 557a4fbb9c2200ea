//! Arithmetic in F_q and F_{q^n}, realized as F_q[x]/(m(x)) for a canonical
//! modulus, together with the cyclotomic frame (p, q, n, e, f, g).
//!
//! Canonical choices: the modulus is the monic irreducible polynomial of
//! degree n whose coefficient vector, read as the base-q integer
//! `c_0 + c_1 q + ... + c_{n-1} q^{n-1}`, is least; alpha is the least
//! primitive element in the same order; zeta is alpha^f. Every downstream
//! number is therefore a pure function of (p, q, g).

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nt;

pub use crate::nt::multiplicative_order;

/// Default resource cap on the field size q^n.
pub const DEFAULT_FIELD_CAP: u64 = 1 << 27;

/// The arithmetic frame for one auxiliary prime q.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclotomicSetup {
    pub p: u64,
    pub q: u64,
    /// Multiplicative order of q modulo p.
    pub n: u64,
    /// (p - 1) / n
    pub e: u64,
    /// (q^n - 1) / p
    #[serde(with = "crate::serde_big::biguint")]
    pub f: BigUint,
    /// Primitive root modulo p.
    pub g: u64,
}

impl CyclotomicSetup {
    /// Setup with the least primitive root modulo p.
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if p <= 3 || !nt::is_prime(p) {
            return Err(Error::InvalidSetup(format!("p={p} must be a prime > 3")));
        }
        let g = nt::least_primitive_root(p)?;
        Self::with_primitive_root(p, q, g)
    }

    pub fn with_primitive_root(p: u64, q: u64, g: u64) -> Result<Self> {
        let setup = Self::for_index(p, q, g)?;
        if setup.n < 2 {
            return Err(Error::InvalidSetup(format!("q={q} = 1 mod p={p}")));
        }
        Ok(setup)
    }

    /// Like `with_primitive_root` but also accepts q = 1 mod p (n = 1).
    /// Such a frame supports indices of cyclotomic units, not periods.
    pub fn for_index(p: u64, q: u64, g: u64) -> Result<Self> {
        if p <= 3 || !nt::is_prime(p) {
            return Err(Error::InvalidSetup(format!("p={p} must be a prime > 3")));
        }
        if !nt::is_prime(q) || q == p || q >= 1 << 32 {
            return Err(Error::InvalidSetup(format!("q={q} must be a prime below 2^32 different from p={p}")));
        }
        if !nt::is_primitive_root(g, p) {
            return Err(Error::InvalidSetup(format!("g={g} is not a primitive root modulo {p}")));
        }
        let n = nt::multiplicative_order(q, p)?;
        let qn = BigUint::from(q).pow(n as u32);
        let f = (&qn - 1u32) / p;
        let setup = Self { p, q, n, e: (p - 1) / n, f, g };
        setup.check()?;
        Ok(setup)
    }

    /// q^n
    pub fn field_size(&self) -> BigUint {
        BigUint::from(self.q).pow(self.n as u32)
    }

    /// Re-checks every divisibility relation of the frame.
    pub fn check(&self) -> Result<()> {
        let qn = self.field_size();
        let bad = |msg: &str| Err(Error::InvalidSetup(msg.to_string()));
        if nt::pow_mod(self.q, self.n, self.p) != 1 {
            return bad("q^n != 1 mod p");
        }
        if nt::multiplicative_order(self.q, self.p)? != self.n {
            return bad("n is not the order of q mod p");
        }
        if (self.p - 1) % self.n != 0 || self.e * self.n != self.p - 1 {
            return bad("n must divide p - 1 with e n = p - 1");
        }
        if &self.f * self.p != &qn - 1u32 {
            return bad("p f != q^n - 1");
        }
        if self.n >= 2 && !((&qn - 1u32) % (self.p * (self.q - 1))).is_zero() {
            return bad("p (q - 1) does not divide q^n - 1");
        }
        if !nt::is_primitive_root(self.g, self.p) {
            return bad("g is not a primitive root");
        }
        Ok(())
    }
}

/// An element of F_{q^n}: n coefficients in [0, q), lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement(pub Vec<u64>);

impl FieldElement {
    pub fn coeffs(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Element whose coefficients are the base-q digits of `index`.
    fn from_index(index: u64, q: u64, n: usize) -> Self {
        let mut v = index;
        let mut c = vec![0; n];
        for slot in c.iter_mut() {
            *slot = v % q;
            v /= q;
        }
        Self(c)
    }
}

/// Polynomial arithmetic over F_q modulo a monic polynomial.
#[derive(Debug, Clone)]
struct PolyRing {
    q: u64,
    /// Monic modulus, lowest degree first, length n + 1.
    modulus: Vec<u64>,
}

impl PolyRing {
    fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let n = self.degree();
        let q = self.q;
        let mut r = vec![0u64; 2 * n];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                r[i + j] = (r[i + j] + x * y) % q;
            }
        }
        for k in (n..2 * n).rev() {
            let c = r[k];
            if c == 0 {
                continue;
            }
            r[k] = 0;
            for j in 0..n {
                let t = c * self.modulus[j] % q;
                r[k - n + j] = (r[k - n + j] + q - t) % q;
            }
        }
        r.truncate(n);
        r
    }

    fn one(&self) -> Vec<u64> {
        let mut v = vec![0; self.degree()];
        v[0] = 1;
        v
    }

    fn pow(&self, base: &[u64], mut exp: u64) -> Vec<u64> {
        let mut acc = self.one();
        let mut b = base.to_vec();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            exp >>= 1;
            if exp > 0 {
                b = self.mul(&b, &b);
            }
        }
        acc
    }

    fn x(&self) -> Vec<u64> {
        let mut v = vec![0; self.degree()];
        if v.len() > 1 {
            v[1] = 1;
        } else {
            // degree-1 modulus x + c: x = -c
            v[0] = (self.q - self.modulus[0]) % self.q;
        }
        v
    }

    /// Rabin's irreducibility test.
    fn is_irreducible(&self) -> Result<bool> {
        let n = self.degree();
        if n == 1 {
            return Ok(true);
        }
        if self.modulus[0] == 0 {
            return Ok(false);
        }
        let x = self.x();
        // frob[i] = x^{q^i} mod m
        let mut frob = vec![x.clone()];
        for i in 1..=n {
            let next = self.pow(&frob[i - 1], self.q);
            frob.push(next);
        }
        if frob[n] != x {
            return Ok(false);
        }
        for (l, _) in nt::factorize(n as u64)? {
            let h = &frob[n / l as usize];
            let mut diff = h.clone();
            diff[1] = (diff[1] + self.q - 1) % self.q;
            if poly_gcd_degree(&trim(diff), &self.modulus, self.q) != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

/// Degree of gcd(a, b) over F_q; a zero polynomial has gcd equal to the other operand.
fn poly_gcd_degree(a: &[u64], b: &[u64], q: u64) -> usize {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        // a mod b
        let lead_inv = nt::inv_mod(*b.last().unwrap(), q).expect("q prime");
        while a.len() >= b.len() {
            let c = a.last().unwrap() * lead_inv % q;
            let shift = a.len() - b.len();
            for (j, &bj) in b.iter().enumerate() {
                a[shift + j] = (a[shift + j] + q - c * bj % q) % q;
            }
            a = trim(a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// The residue field F = Z[zeta_p]/Q realized canonically as F_q[x]/(modulus).
#[derive(Debug, Clone, Serialize)]
pub struct FieldContext {
    pub p: u64,
    pub q: u64,
    pub n: u64,
    /// Monic, lowest degree first, length n + 1.
    pub modulus: Vec<u64>,
    pub alpha: FieldElement,
    pub zeta: FieldElement,
    /// T(x^i) for i < n.
    pub basis_traces: Vec<u64>,
    /// q^n - 1
    #[serde(skip)]
    pub order: u64,
    /// (q^n - 1) / p
    #[serde(skip)]
    pub f: u64,
    #[serde(skip)]
    ring: PolyRing,
}

/// Builds the canonical field for `setup`, refusing fields larger than `cap`.
pub fn build_field(setup: &CyclotomicSetup, cap: u64) -> Result<FieldContext> {
    let (q, n) = (setup.q, setup.n as usize);
    let size = (q as u128)
        .checked_pow(n as u32)
        .ok_or(Error::FieldTooLarge { size: u128::MAX, cap })?;
    if size > cap as u128 {
        return Err(Error::FieldTooLarge { size, cap });
    }
    let size = size as u64;
    let order = size - 1;

    let mut ring = None;
    for index in 0..size {
        let low = FieldElement::from_index(index, q, n);
        if low.0[0] == 0 {
            continue;
        }
        let mut modulus = low.0;
        modulus.push(1);
        let candidate = PolyRing { q, modulus };
        if candidate.is_irreducible()? {
            ring = Some(candidate);
            break;
        }
    }
    let ring = ring.ok_or_else(|| Error::InternalInvariant(format!("no irreducible polynomial of degree {n} over F_{q}")))?;

    let order_factors = nt::factorize(order)?;
    let one = ring.one();
    let mut alpha = None;
    for index in 1..size {
        let cand = FieldElement::from_index(index, q, n);
        if order_factors.iter().all(|&(l, _)| ring.pow(&cand.0, order / l) != one) {
            alpha = Some(cand);
            break;
        }
    }
    let alpha = alpha.ok_or_else(|| Error::InternalInvariant("no primitive element found".into()))?;

    let f = order / setup.p;
    let zeta = FieldElement(ring.pow(&alpha.0, f));
    let mut ctx = FieldContext {
        p: setup.p,
        q,
        n: setup.n,
        modulus: ring.modulus.clone(),
        alpha,
        zeta,
        basis_traces: Vec::new(),
        order,
        f,
        ring,
    };
    let mut traces = Vec::with_capacity(n);
    let mut monomial = ctx.one();
    for _ in 0..n {
        traces.push(ctx.full_trace(&monomial)?);
        monomial = ctx.mul(&monomial, &ctx.x_element());
    }
    ctx.basis_traces = traces;
    ctx.check()?;
    Ok(ctx)
}

impl FieldContext {
    pub fn one(&self) -> FieldElement {
        FieldElement(self.ring.one())
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(vec![0; self.n as usize])
    }

    /// The class of x itself.
    pub fn x_element(&self) -> FieldElement {
        FieldElement(self.ring.x())
    }

    /// Constant element c (reduced mod q).
    pub fn constant(&self, c: u64) -> FieldElement {
        let mut v = vec![0; self.n as usize];
        v[0] = c % self.q;
        FieldElement(v)
    }

    /// Validates length and reduction of a caller-supplied element.
    pub fn element(&self, coeffs: Vec<u64>) -> Result<FieldElement> {
        if coeffs.len() != self.n as usize || coeffs.iter().any(|&c| c >= self.q) {
            return Err(Error::InvalidInput(format!(
                "field element must have {} coefficients in [0, {})",
                self.n, self.q
            )));
        }
        Ok(FieldElement(coeffs))
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement(self.ring.mul(&a.0, &b.0))
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement(a.0.iter().zip(&b.0).map(|(x, y)| (x + y) % self.q).collect())
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement(a.0.iter().zip(&b.0).map(|(x, y)| (x + self.q - y) % self.q).collect())
    }

    pub fn scale(&self, c: u64, a: &FieldElement) -> FieldElement {
        let c = c % self.q;
        FieldElement(a.0.iter().map(|x| x * c % self.q).collect())
    }

    pub fn pow_u64(&self, x: &FieldElement, exponent: u64) -> FieldElement {
        if x.is_zero() {
            return if exponent == 0 { self.one() } else { self.zero() };
        }
        FieldElement(self.ring.pow(&x.0, exponent % self.order))
    }

    /// x^exponent; for nonzero x the exponent is reduced mod q^n - 1 first.
    pub fn pow(&self, x: &FieldElement, exponent: &BigUint) -> FieldElement {
        if x.is_zero() {
            return if exponent.is_zero() { self.one() } else { self.zero() };
        }
        let reduced = (exponent % self.order).to_u64().expect("reduced below q^n");
        FieldElement(self.ring.pow(&x.0, reduced))
    }

    /// T(x) as the F_q-linear combination of the precomputed basis traces.
    pub fn trace(&self, x: &FieldElement) -> u64 {
        self.trace_coeffs(&x.0)
    }

    #[inline]
    pub(crate) fn trace_coeffs(&self, c: &[u64]) -> u64 {
        let mut acc = 0u64;
        for (ci, ti) in c.iter().zip(&self.basis_traces) {
            acc = (acc + ci * ti) % self.q;
        }
        acc
    }

    /// Sum of the Frobenius conjugates x + x^q + ... + x^{q^{n-1}}, computed directly.
    pub fn full_trace(&self, x: &FieldElement) -> Result<u64> {
        let mut acc = self.zero();
        let mut conj = x.clone();
        for _ in 0..self.n {
            acc = self.add(&acc, &conj);
            conj = self.pow_u64(&conj, self.q);
        }
        if acc.0[1..].iter().any(|&c| c != 0) {
            return Err(Error::InternalInvariant("trace is not in F_q".into()));
        }
        Ok(acc.0[0])
    }

    /// k in [0, p) with y = zeta^k.
    pub fn dlog_order_p(&self, y: &FieldElement) -> Result<u64> {
        if y.is_zero() {
            return Err(Error::InvalidInput("dlog of zero".into()));
        }
        if self.pow_u64(y, self.p) != self.one() {
            return Err(Error::NotInSubgroup);
        }
        let mut cur = self.one();
        for k in 0..self.p {
            if &cur == y {
                return Ok(k);
            }
            cur = self.mul(&cur, &self.zeta);
        }
        Err(Error::NotInSubgroup)
    }

    /// dst = alpha * src, using only shifts by x (cheap when alpha has low degree).
    #[inline]
    pub(crate) fn mul_alpha_into(&self, src: &[u64], dst: &mut [u64], shifted: &mut [u64]) {
        let q = self.q;
        let a0 = self.alpha.0[0];
        for (d, s) in dst.iter_mut().zip(src) {
            *d = a0 * s % q;
        }
        let deg = self.alpha.0.iter().rposition(|&c| c != 0).unwrap_or(0);
        if deg == 0 {
            return;
        }
        shifted.copy_from_slice(src);
        let n = src.len();
        for j in 1..=deg {
            let top = shifted[n - 1];
            for i in (1..n).rev() {
                shifted[i] = shifted[i - 1];
            }
            shifted[0] = 0;
            if top != 0 {
                for i in 0..n {
                    shifted[i] = (shifted[i] + q - top * self.modulus[i] % q) % q;
                }
            }
            let aj = self.alpha.0[j];
            if aj != 0 {
                for (d, s) in dst.iter_mut().zip(shifted.iter()) {
                    *d = (*d + aj * s) % q;
                }
            }
        }
    }

    /// Re-checks the defining properties of alpha and zeta.
    pub fn check(&self) -> Result<()> {
        let one = self.one();
        if self.pow_u64(&self.alpha, self.order) != one {
            return Err(Error::InternalInvariant("alpha^(q^n-1) != 1".into()));
        }
        for (l, _) in nt::factorize(self.order)? {
            if self.ring.pow(&self.alpha.0, self.order / l) == one.0 {
                return Err(Error::InternalInvariant(format!("alpha is not primitive (l={l})")));
            }
        }
        if self.pow_u64(&self.zeta, self.p) != one || self.zeta == one {
            return Err(Error::InternalInvariant("zeta is not a primitive p-th root of unity".into()));
        }
        Ok(())
    }

    /// Exponent as a BigUint convenience.
    pub fn pow_big(&self, x: &FieldElement, exponent: u64) -> FieldElement {
        self.pow(x, &BigUint::from(exponent))
    }

    pub fn is_one(&self, x: &FieldElement) -> bool {
        x.0[0] == 1 && x.0[1..].iter().all(|&c| c == 0)
    }
}
