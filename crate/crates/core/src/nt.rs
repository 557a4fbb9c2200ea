//! Elementary number theory on machine words: modular powers, primality,
//! factoring, orders, primitive roots, sieving and quadratic residues.

use crate::error::{Error, Result};

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Nonnegative residue of a signed integer.
#[inline]
pub fn residue(a: i64, m: u64) -> u64 {
    a.rem_euclid(m as i64) as u64
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let qt = r0 / r1;
        (r0, r1) = (r1, r0 - qt * r1);
        (t0, t1) = (t1, t0 - qt * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin for the full u64 range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

const TRIAL_LIMIT: u64 = 1_000_000;

fn pollard_rho(n: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    for c in 1..64u64 {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return Some(d);
        }
    }
    None
}

fn split_into(n: u64, out: &mut Vec<u64>) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    if is_prime(n) {
        out.push(n);
        return Ok(());
    }
    let d = pollard_rho(n).ok_or(Error::FactorizationFailure(n))?;
    split_into(d, out)?;
    split_into(n / d, out)
}

/// Prime factorization as ascending `(prime, exponent)` pairs.
///
/// Trial division up to 10^6, then Pollard rho on the cofactor. Fails loudly
/// rather than returning a partial factorization.
pub fn factorize(mut n: u64) -> Result<Vec<(u64, u32)>> {
    let mut primes = Vec::new();
    let mut d = 2u64;
    while d <= TRIAL_LIMIT && d * d <= n {
        while n % d == 0 {
            primes.push(d);
            n /= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        split_into(n, &mut primes)?;
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for pr in primes {
        match out.last_mut() {
            Some((last, k)) if *last == pr => *k += 1,
            _ => out.push((pr, 1)),
        }
    }
    Ok(out)
}

/// Least `k >= 1` with `a^k = 1 (mod m)`.
pub fn multiplicative_order(a: u64, m: u64) -> Result<u64> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("modulus {m} must be at least 2")));
    }
    let a = a % m;
    if gcd(a, m) != 1 {
        return Err(Error::NotCoprime { a, m });
    }
    // Carmichael-free route: order divides phi(m), computed from the factorization of m.
    let phi = factorize(m)?
        .into_iter()
        .fold(1u64, |acc, (pr, k)| acc * (pr - 1) * pr.pow(k - 1));
    let mut ord = phi;
    for (pr, _) in factorize(phi)? {
        while ord % pr == 0 && pow_mod(a, ord / pr, m) == 1 {
            ord /= pr;
        }
    }
    Ok(ord)
}

pub fn is_primitive_root(g: u64, p: u64) -> bool {
    g % p != 0 && multiplicative_order(g, p).is_ok_and(|o| o == p - 1)
}

/// Least primitive root modulo an odd prime.
pub fn least_primitive_root(p: u64) -> Result<u64> {
    let factors = factorize(p - 1)?;
    (2..p)
        .find(|&g| factors.iter().all(|&(l, _)| pow_mod(g, (p - 1) / l, p) != 1))
        .ok_or_else(|| Error::InvalidInput(format!("{p} has no primitive root")))
}

/// All primes `<= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Legendre symbol `(a/p)` for an odd prime `p`, by Euler's criterion.
pub fn legendre(a: i64, p: u64) -> i32 {
    let r = pow_mod(residue(a, p), (p - 1) / 2, p);
    match r {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// Kronecker symbol `(a/q)` for a prime `q`; agrees with the Legendre symbol
/// for odd `q` and uses the mod-8 rule at `q = 2`.
pub fn kronecker(a: i64, q: u64) -> i32 {
    if q == 2 {
        match a.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        }
    } else {
        legendre(a, q)
    }
}

/// A square root of `a` modulo an odd prime `p` (Tonelli-Shanks).
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let z = (2..p).find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1)?;
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Exact binomial coefficient; intended for the small arguments that occur in
/// the index congruences.
pub fn binomial(n: u64, k: u64) -> num_bigint::BigInt {
    use num_bigint::BigInt;
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
