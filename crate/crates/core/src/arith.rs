//! Exact integer and rational arithmetic: modular inverses, CRT, factorization,
//! divisor counts, p-adic valuations, and canonical reduced fractions.
//!
//! All arithmetic is checked 128-bit; anything that could wrap returns
//! [`ArithError::Overflow`] instead of silently corrupting exact results.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ArithError {
    #[error("arguments not coprime: gcd({a}, {m}) > 1")]
    NotCoprime { a: i128, m: i128 },
    #[error("moduli not pairwise coprime")]
    NonCoprimeModuli,
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("{0}")]
    OutOfRange(&'static str),
}

pub type Result<T> = std::result::Result<T, ArithError>;

pub fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended Euclid: returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b)`, `g >= 0`.
pub fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut x0, mut x1) = (1i128, 0i128);
    let (mut y0, mut y1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    if r0 < 0 {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

/// Inverse of `a` modulo `m`, in `[0, m)`.
pub fn mod_inverse(a: i128, m: i128) -> Result<i128> {
    assert!(m >= 1, "modulus must be positive");
    if m == 1 {
        return Ok(0);
    }
    let (g, x, _) = egcd(a.rem_euclid(m), m);
    if g != 1 {
        return Err(ArithError::NotCoprime { a, m });
    }
    Ok(x.rem_euclid(m))
}

/// Combines congruences `r ≡ r_i (mod m_i)` for pairwise coprime moduli.
/// Returns `(r, M)` with `M = ∏ m_i` and `0 <= r < M`.
pub fn crt_combine(residues: &[(i128, i128)]) -> Result<(i128, i128)> {
    let mut r: i128 = 0;
    let mut modulus: i128 = 1;
    for &(ri, mi) in residues {
        assert!(mi >= 1, "moduli must be positive");
        let g = gcd_i128(modulus, mi);
        if g != 1 {
            // Pairwise coprimality is required even when the congruences happen
            // to be compatible.
            return Err(ArithError::NonCoprimeModuli);
        }
        // Solve r' ≡ r (mod modulus), r' ≡ ri (mod mi).
        let diff = (ri - r).rem_euclid(mi);
        let k = diff
            .checked_mul(mod_inverse(modulus, mi)?)
            .ok_or(ArithError::Overflow("crt_combine"))?
            .rem_euclid(mi);
        r = modulus
            .checked_mul(k)
            .and_then(|t| t.checked_add(r))
            .ok_or(ArithError::Overflow("crt_combine"))?;
        modulus = modulus
            .checked_mul(mi)
            .ok_or(ArithError::Overflow("crt_combine"))?;
    }
    Ok((r.rem_euclid(modulus), modulus))
}

/// Ordered prime-power decomposition; the empty list represents 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeFactorization {
    pub factors: Vec<(u64, u32)>,
}

impl PrimeFactorization {
    pub fn value(&self) -> u128 {
        self.factors
            .iter()
            .map(|&(p, e)| (p as u128).pow(e))
            .product()
    }

    pub fn divisor_count(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| (e + 1) as u64).product()
    }
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, valid for all `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    // n odd composite, not a prime power of a tiny prime.
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod_u64(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Exact prime factorization. Supported range is 64 bits; larger inputs are
/// rejected rather than truncated.
pub fn factorize(n: u128) -> Result<PrimeFactorization> {
    if n == 0 {
        return Err(ArithError::OutOfRange("factorize requires n >= 1"));
    }
    if n > u64::MAX as u128 {
        return Err(ArithError::Overflow("factorize supports n < 2^64"));
    }
    let mut n = n as u64;
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        if n == 1 {
            break;
        }
        if n.is_multiple_of(p) {
            let mut e = 0u32;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    // Remaining part has no prime factor below 50; split recursively.
    let mut stack = vec![n];
    let mut rest: Vec<u64> = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            rest.push(m);
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    rest.sort_unstable();
    let mut i = 0;
    while i < rest.len() {
        let p = rest[i];
        let mut e = 0u32;
        while i < rest.len() && rest[i] == p {
            e += 1;
            i += 1;
        }
        factors.push((p, e));
    }
    factors.sort_unstable_by_key(|&(p, _)| p);
    Ok(PrimeFactorization { factors })
}

/// τ(n), the number of divisors.
pub fn divisor_count(n: u128) -> Result<u64> {
    Ok(factorize(n)?.divisor_count())
}

/// `max_{q <= x} τ(q)` via a smallest-prime-factor sieve.
pub fn max_divisor_count(x: u64) -> Result<u64> {
    if x == 0 {
        return Err(ArithError::OutOfRange("max_divisor_count requires x >= 1"));
    }
    if x > 50_000_000 {
        return Err(ArithError::OutOfRange("max_divisor_count sieve cap is 5e7"));
    }
    let x = x as usize;
    let mut spf = vec![0u32; x + 1];
    let mut primes: Vec<u32> = Vec::new();
    let mut tau = vec![0u32; x + 1];
    // ppow[i] = exponent of spf[i] in i, built alongside the linear sieve.
    let mut ppow = vec![0u32; x + 1];
    tau[1] = 1;
    let mut best = 1u64;
    for i in 2..=x {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
            tau[i] = 2;
            ppow[i] = 1;
        }
        for &p in &primes {
            let p = p as usize;
            if p > spf[i] as usize || i * p > x {
                break;
            }
            let ip = i * p;
            spf[ip] = p as u32;
            if spf[i] as usize == p {
                ppow[ip] = ppow[i] + 1;
                tau[ip] = tau[i] / (ppow[i] + 1) * (ppow[ip] + 1);
            } else {
                ppow[ip] = 1;
                tau[ip] = tau[i] * 2;
            }
        }
        best = best.max(tau[i] as u64);
    }
    Ok(best)
}

/// Largest `e` with `p^e | n`; requires `n != 0` and `p` prime.
pub fn p_adic_valuation(n: i128, p: u64) -> Result<u32> {
    if n == 0 {
        return Err(ArithError::OutOfRange("p_adic_valuation requires n != 0"));
    }
    debug_assert!(is_prime(p), "p must be prime");
    let p = p as i128;
    let mut n = n.abs();
    let mut e = 0u32;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    Ok(e)
}

/// Floor of the square root, exact for the full u128 range.
pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    // Newton correction: the float seed is within a few ulps.
    while x.checked_mul(x).is_none_or(|s| s > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|s| s <= n) {
        x += 1;
    }
    x
}

/// Returns `Some(r)` with `r*r == n` when `n` is a perfect square.
pub fn exact_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let r = isqrt_u128(n as u128) as i128;
    (r * r == n).then_some(r)
}

/// Canonical reduced fraction: `gcd(|num|, den) = 1`, `den >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ReducedFraction {
    num: i128,
    den: i128,
}

impl ReducedFraction {
    pub fn new(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(ArithError::OutOfRange("zero denominator"));
        }
        let sign = if den < 0 { -1 } else { 1 };
        let (num, den) = (num * sign, den * sign);
        let g = gcd_i128(num, den).max(1);
        Ok(ReducedFraction {
            num: num / g,
            den: den / g,
        })
    }

    pub fn zero() -> Self {
        ReducedFraction { num: 0, den: 1 }
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    pub fn denominator(&self) -> i128 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `(self + other) mod 1`, reduced, in `[0, 1)`.
    pub fn add_mod1(&self, other: &ReducedFraction) -> Result<Self> {
        let den = self
            .den
            .checked_mul(other.den)
            .ok_or(ArithError::Overflow("add_mod1"))?;
        let num = self
            .num
            .checked_mul(other.den)
            .and_then(|a| other.num.checked_mul(self.den).and_then(|b| a.checked_add(b)))
            .ok_or(ArithError::Overflow("add_mod1"))?;
        ReducedFraction::new(num.rem_euclid(den), den)
    }
}

impl PartialOrd for ReducedFraction {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ReducedFraction {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl std::fmt::Display for ReducedFraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Exact rational value of a finite f64 (every finite double is a dyadic
/// rational). Fails only when the value needs more than 100 doubling steps or
/// overflows i128.
pub fn f64_to_fraction(x: f64) -> Result<ReducedFraction> {
    if !x.is_finite() {
        return Err(ArithError::OutOfRange("non-finite value"));
    }
    let mut num = x;
    let mut den: i128 = 1;
    let mut steps = 0;
    while num.fract() != 0.0 {
        num *= 2.0;
        den *= 2;
        steps += 1;
        if steps > 100 {
            return Err(ArithError::Overflow("f64_to_fraction"));
        }
    }
    if num.abs() >= 1.7e38 {
        return Err(ArithError::Overflow("f64_to_fraction"));
    }
    ReducedFraction::new(num as i128, den)
}

/// Continued-fraction convergents of `num/den` (`den >= 1`), in order of
/// increasing denominator. Every convergent `a/q` satisfies
/// `|num/den - a/q| < 1/q^2`.
pub fn convergents(num: i128, den: i128) -> Vec<(i128, i128)> {
    assert!(den >= 1);
    let (mut a, mut b) = (num, den);
    let (mut p0, mut p1) = (0i128, 1i128);
    let (mut q0, mut q1) = (1i128, 0i128);
    let mut out = Vec::new();
    while b != 0 {
        let k = a.div_euclid(b);
        (a, b) = (b, a - k * b);
        let p2 = k * p1 + p0;
        let q2 = k * q1 + q0;
        (p0, p1) = (p1, p2);
        (q0, q1) = (q1, q2);
        out.push((p1, q1));
    }
    out
}
