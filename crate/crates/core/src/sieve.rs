//! Prime sieving and elementary multiplicative functions.
//!
//! Everything downstream that iterates over primes (Euler products, ideal
//! enumeration, the torsion bound search) goes through this module.

/// Segment length used by the segmented sieves, in integers.
pub const SEGMENT_LEN: u64 = 1 << 18;

fn simple_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Integer square root, exact for every `u64`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// All primes `p <= limit`, in increasing order, by a segmented sieve of
/// Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let root = isqrt(limit);
    let base = simple_sieve(root);
    if limit <= SEGMENT_LEN {
        return simple_sieve(limit);
    }
    let mut primes = base.clone();
    let mut lo = root + 1;
    let mut marks = vec![false; SEGMENT_LEN as usize];
    while lo <= limit {
        let hi = (lo + SEGMENT_LEN - 1).min(limit);
        let len = (hi - lo + 1) as usize;
        marks[..len].iter_mut().for_each(|m| *m = false);
        for &p in &base {
            if p * p > hi {
                break;
            }
            let mut m = (lo.div_ceil(p) * p).max(p * p);
            while m <= hi {
                marks[(m - lo) as usize] = true;
                m += p;
            }
        }
        primes.extend(
            marks[..len]
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| lo + i as u64),
        );
        lo = hi + 1;
    }
    primes
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
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

/// Deterministic Miller-Rabin primality test, valid on the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
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

/// Prime factorization by trial division, as `(p, e)` pairs with `p`
/// increasing. `factorize(1)` is empty.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n > 0, "cannot factor 0");
    let mut out = Vec::new();
    let mut push = |n: &mut u64, p: u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(&mut n, 2);
    push(&mut n, 3);
    let mut p = 5;
    while p * p <= n {
        push(&mut n, p);
        push(&mut n, p + 2);
        p += 6;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Classical Euler totient.
pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Smallest-prime-factor table on `0..=limit` (entries 0 and 1 are 0).
pub fn smallest_prime_factors(limit: u64) -> Vec<u32> {
    assert!(limit < u32::MAX as u64, "spf table limited to u32 range");
    let n = limit as usize;
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Factor `n` using a table from [`smallest_prime_factors`].
pub fn factor_with_spf(mut n: u64, spf: &[u32]) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    while n > 1 {
        let p = spf[n as usize] as u64;
        n /= p;
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Totients of every integer in `[lo, hi)`, computed with the sieving primes
/// `base` (which must contain every prime up to `sqrt(hi)`).
pub fn phi_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let len = (hi - lo) as usize;
    let mut phi: Vec<u64> = (lo..hi).collect();
    let mut rest: Vec<u64> = (lo..hi).collect();
    for &p in base {
        if p * p >= hi {
            break;
        }
        let mut m = (lo.div_ceil(p) * p).max(p);
        while m < hi {
            let i = (m - lo) as usize;
            phi[i] = phi[i] / p * (p - 1);
            while rest[i].is_multiple_of(p) {
                rest[i] /= p;
            }
            m += p;
        }
    }
    for i in 0..len {
        if rest[i] > 1 {
            phi[i] = phi[i] / rest[i] * (rest[i] - 1);
        }
    }
    if lo == 0 && len > 0 {
        phi[0] = 0;
    }
    phi
}
