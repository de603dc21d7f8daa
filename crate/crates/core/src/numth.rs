//! Exact integer and rational kernel: Kronecker symbols, 64-bit
//! factorization, Bernoulli numbers, modular powers and square roots.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::budget::Budget;
use crate::error::{Error, Result};

/// Exact rational with a positive, coprime denominator.
pub type Rational = BigRational;

/// Trial division runs up to this bound before Pollard rho takes over.
const TRIAL_BOUND: u64 = 100_000;

const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

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

/// `base` reduced into `[0, m)` first, so negative bases work.
pub fn pow_mod_signed(base: i64, exp: u64, m: u64) -> u64 {
    pow_mod(base.rem_euclid(m as i64) as u64, exp, m)
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i64, m: u64) -> Option<u64> {
    let m_i = m as i128;
    let (g, x, _) = ext_gcd(a.rem_euclid(m as i64) as i128, m_i);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m_i) as u64)
}

/// Returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

pub fn isqrt(n: u64) -> u64 {
    isqrt_u128(n as u128) as u64
}

pub fn is_square_u128(n: u128) -> Option<u128> {
    let r = isqrt_u128(n);
    (r * r == n).then_some(r)
}

/// Exact square root of a nonnegative big integer, if it is a square.
pub fn big_square_root(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Deterministic Miller-Rabin over the full 64-bit range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &MR_WITNESSES {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Sieve of Eratosthenes, primes `<= n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
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

/// Complete factorization of a nonzero integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub sign: i8,
    /// `(prime, exponent)` ascending by prime.
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> i128 {
        let mag: i128 = self
            .factors
            .iter()
            .map(|&(q, e)| (q as i128).pow(e))
            .product();
        self.sign as i128 * mag
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(q, _)| q)
    }

    /// All positive divisors, unsorted.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(q, e) in &self.factors {
            let len = divs.len();
            let mut qp = 1u64;
            for _ in 0..e {
                qp *= q;
                for i in 0..len {
                    divs.push(divs[i] * qp);
                }
            }
        }
        divs
    }
}

fn pollard_brent(n: u64, c: u64, max_iter: u64) -> Option<u64> {
    let f = |x: u64| (mul_mod(x, x, n) + c) % n;
    let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
    let m = 128u64;
    let mut g = 1u64;
    let mut x = y;
    let mut ys = y;
    let mut spent = 0u64;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += m;
        }
        r *= 2;
        spent += r;
        if spent > max_iter {
            return None;
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

fn split_composite(n: u64, budget: &Budget, out: &mut Vec<u64>) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    if is_prime(n) {
        out.push(n);
        return Ok(());
    }
    if let Some(r) = is_square_u128(n as u128) {
        let r = r as u64;
        split_composite(r, budget, out)?;
        return split_composite(r, budget, out);
    }
    // fixed seed sequence keeps the search deterministic
    for c in 1..=16u64 {
        if let Some(d) = pollard_brent(n, c, budget.factor_rho_iterations) {
            split_composite(d, budget, out)?;
            return split_composite(n / d, budget, out);
        }
    }
    Err(Error::budget(format!("pollard rho could not split {n}")))
}

pub fn factorize(n: i64) -> Result<Factorization> {
    factorize_with(n, &Budget::default())
}

pub fn factorize_with(n: i64, budget: &Budget) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::precondition("cannot factor 0"));
    }
    let sign = if n < 0 { -1 } else { 1 };
    let mut m = n.unsigned_abs();
    let mut primes = Vec::new();
    let mut q = 2u64;
    while q <= TRIAL_BOUND && q * q <= m {
        while m % q == 0 {
            primes.push(q);
            m /= q;
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if m > 1 {
        if m < q * q || q <= TRIAL_BOUND {
            primes.push(m);
        } else {
            split_composite(m, budget, &mut primes)?;
        }
    }
    primes.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    Ok(Factorization { sign, factors })
}

/// Writes `n = d0 * m^2` with `d0` squarefree and of the same sign as `n`.
pub fn squarefree_decompose(n: i64) -> Result<(i64, u64)> {
    let f = factorize(n)?;
    let mut d0: i64 = f.sign as i64;
    let mut m: u64 = 1;
    for &(q, e) in &f.factors {
        if e % 2 == 1 {
            d0 *= q as i64;
        }
        m *= q.pow(e / 2);
    }
    Ok((d0, m))
}

pub fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    match factorize(n as i64) {
        Ok(f) => f.factors.iter().all(|&(_, e)| e == 1),
        Err(_) => false,
    }
}

/// Kronecker symbol `(a/n)`, the multiplicative extension of Jacobi.
pub fn kronecker(a: i64, n: i64) -> i8 {
    const TAB2: [i8; 8] = [0, 1, 0, -1, 0, -1, 0, 1];
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut a = a as i128;
    let mut b = n as i128;
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let mut v = 0;
    while b % 2 == 0 {
        v += 1;
        b /= 2;
    }
    let mut k: i8 = if v % 2 == 0 { 1 } else { TAB2[(a & 7) as usize] };
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    loop {
        if a == 0 {
            return if b > 1 { 0 } else { k };
        }
        v = 0;
        while a % 2 == 0 {
            v += 1;
            a /= 2;
        }
        if v % 2 == 1 {
            k *= TAB2[(b & 7) as usize];
        }
        // two's complement makes this test right for negative a too
        if a & b & 2 != 0 {
            k = -k;
        }
        let r = a.abs();
        a = b % r;
        b = r;
    }
}

/// Square root of `a` modulo an odd prime `p` (Tonelli-Shanks).
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
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
    let mut q = p - 1;
    let mut s = 0;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
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

/// Root of `d` modulo `p^k` lifted from a root modulo `p`; `p` odd,
/// `p` not dividing `d`.
pub fn sqrt_mod_prime_power(d: &BigInt, p: u64, k: u32) -> Option<BigInt> {
    let pb = BigInt::from(p);
    let d_mod_p = d.mod_floor(&pb).to_u64()?;
    let r0 = sqrt_mod_prime(d_mod_p, p)?;
    if r0 == 0 {
        return None;
    }
    let mut r = BigInt::from(r0);
    let mut modulus = pb.clone();
    for _ in 1..k {
        // lift r from modulus to modulus*p: r' = r - (r^2 - d)/(2r)
        let next = &modulus * &pb;
        let two_r_inv = (BigInt::from(2) * &r).modinv(&next)?;
        r = (&r - (&r * &r - d) * two_r_inv).mod_floor(&next);
        modulus = next;
    }
    Some(r)
}

/// The smaller of the two square roots of `d` modulo `p^2`.
pub fn hensel_sqrt_mod_p2(d: i64, p: u64) -> Result<u64> {
    if kronecker(d, p as i64) != 1 {
        return Err(Error::NotSplit { d, p });
    }
    let p2 = p * p;
    let r = sqrt_mod_prime_power(&BigInt::from(d), p, 2)
        .and_then(|r| r.to_u64())
        .ok_or(Error::NotSplit { d, p })?;
    Ok(r.min(p2 - r))
}

fn bernoulli_cache() -> &'static RwLock<Vec<Rational>> {
    static CACHE: OnceLock<RwLock<Vec<Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(vec![Rational::one()]))
}

/// Exact `B_n` with `B_1 = -1/2`.
pub fn bernoulli(n: u64) -> Result<Rational> {
    bernoulli_with(n, &Budget::default())
}

pub fn bernoulli_with(n: u64, budget: &Budget) -> Result<Rational> {
    if n > budget.bernoulli_max_n {
        return Err(Error::budget(format!(
            "bernoulli index {n} > {}",
            budget.bernoulli_max_n
        )));
    }
    let n = n as usize;
    {
        let cache = bernoulli_cache().read().expect("bernoulli cache poisoned");
        if n < cache.len() {
            return Ok(cache[n].clone());
        }
    }
    let mut cache = bernoulli_cache().write().expect("bernoulli cache poisoned");
    while cache.len() <= n {
        let m = cache.len();
        let value = if m > 1 && m % 2 == 1 {
            Rational::zero()
        } else {
            // sum_{k<m} C(m+1, k) B_k + (m+1) B_m = 0
            let mut sum = Rational::zero();
            let mut binom = BigInt::one();
            for (k, bk) in cache.iter().enumerate() {
                if !bk.is_zero() {
                    sum += bk * &binom;
                }
                binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
            }
            -sum / BigInt::from(m + 1)
        };
        cache.push(value);
    }
    Ok(cache[n].clone())
}

/// Reduces an exact rational modulo `m`; `None` if its denominator is not
/// invertible there.
pub fn rational_mod(q: &Rational, m: u64) -> Option<u64> {
    let mb = BigInt::from(m);
    let den = q.denom().mod_floor(&mb).to_i64()?;
    let inv = inv_mod(den, m)?;
    let num = q.numer().mod_floor(&mb).to_u64()?;
    Some(mul_mod(num, inv, m))
}

/// `p`-adic valuation of a nonzero big integer.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while n.is_multiple_of(&pb) {
        n /= &pb;
        v += 1;
    }
    v
}

pub fn mobius(n: u64) -> i8 {
    if n == 1 {
        return 1;
    }
    let f = factorize(n as i64).expect("mobius argument within 64 bits");
    if f.factors.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.factors.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `sigma_k(n)`, the sum of k-th powers of divisors.
pub fn sigma(k: u32, n: u64) -> BigInt {
    let f = factorize(n as i64).expect("sigma argument within 64 bits");
    f.divisors()
        .into_iter()
        .map(|d| BigInt::from(d).pow(k))
        .sum()
}
