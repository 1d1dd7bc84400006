//! Small integer helpers. Inputs are desk-scale, so trial division is enough.

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// All positive divisors in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Euler's totient.
pub fn phi(n: u64) -> u64 {
    prime_factors(n)
        .into_iter()
        .fold(n, |acc, r| acc / r * (r - 1))
}

/// Decomposes `q = p^e` with `p` prime.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    let p = *prime_factors(q).first()?;
    if prime_factors(q).len() != 1 {
        return None;
    }
    let mut e = 0;
    let mut r = q;
    while r > 1 {
        r /= p;
        e += 1;
    }
    Some((p, e))
}
