//! Modular arithmetic over Z_p and discrete logarithms in Z_p^*.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Moduli below this bound use a full lookup table for discrete logs.
pub const DLOG_TABLE_LIMIT: u64 = 1 << 20;

#[inline]
pub fn mul_mod(x: u64, y: u64, m: u64) -> u64 {
    ((x as u128 * y as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(x: u64, y: u64, m: u64) -> u64 {
    ((x as u128 + y as u128) % m as u128) as u64
}

#[inline]
pub fn sub_mod(x: u64, y: u64, m: u64) -> u64 {
    let (x, y) = (x % m, y % m);
    if x >= y {
        x - y
    } else {
        m - (y - x)
    }
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

/// Inverse of `x` modulo the prime `p` (Fermat).
pub fn inv_mod(x: u64, p: u64) -> u64 {
    debug_assert!(x % p != 0);
    pow_mod(x, p - 2, p)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % small == 0 {
            return n == small;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
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

/// Prime factorization by trial division, as (prime, exponent) pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// All positive divisors of `n`, sorted.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (prime, exp) in factorize(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..exp {
            pk *= prime;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Multiplicative order of `x` mod the prime `p`.
pub fn multiplicative_order(x: u64, p: u64) -> u64 {
    let x = x % p;
    assert!(x != 0, "zero has no multiplicative order");
    let mut order = p - 1;
    for (prime, _) in factorize(p - 1) {
        while order % prime == 0 && pow_mod(x, order / prime, p) == 1 {
            order /= prime;
        }
    }
    order
}

/// Smallest generator of Z_p^*.
pub fn primitive_root(p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p == 2 {
        return Ok(1);
    }
    let factors = factorize(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&(r, _)| pow_mod(g, (p - 1) / r, p) != 1))
        .ok_or(Error::NotPrime(p))
}

/// Discrete logarithm to a fixed base in Z_p^*.
///
/// Below [`DLOG_TABLE_LIMIT`] every residue is tabulated; above it a
/// baby-step giant-step table of size ~sqrt(order) is used.
#[derive(Debug, Clone)]
pub struct DiscreteLog {
    p: u64,
    base: u64,
    order: u64,
    backend: Backend,
}

#[derive(Debug, Clone)]
enum Backend {
    /// table[x] = log(x) + 1, zero when x is outside the subgroup.
    Table(Vec<u32>),
    BabyGiant {
        step: u64,
        baby: HashMap<u64, u64>,
        giant: u64,
    },
}

impl DiscreteLog {
    pub fn new(base: u64, p: u64) -> Self {
        let order = multiplicative_order(base, p);
        let backend = if p < DLOG_TABLE_LIMIT {
            let mut table = vec![0u32; p as usize];
            let mut x = 1u64;
            for e in 0..order {
                table[x as usize] = (e + 1) as u32;
                x = mul_mod(x, base, p);
            }
            Backend::Table(table)
        } else {
            let step = (order as f64).sqrt().ceil() as u64;
            let mut baby = HashMap::with_capacity(step as usize);
            let mut x = 1u64;
            for j in 0..step {
                baby.entry(x).or_insert(j);
                x = mul_mod(x, base, p);
            }
            let giant = inv_mod(pow_mod(base, step, p), p);
            Backend::BabyGiant { step, baby, giant }
        };
        DiscreteLog {
            p,
            base,
            order,
            backend,
        }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Exponent `t` in `[0, order)` with `base^t = x mod p`.
    pub fn log(&self, x: u64) -> Result<u64> {
        let x = x % self.p;
        let missing = Error::NotInSubgroup {
            x,
            base: self.base,
            p: self.p,
        };
        if x == 0 {
            return Err(missing);
        }
        match &self.backend {
            Backend::Table(table) => match table[x as usize] {
                0 => Err(missing),
                e => Ok(e as u64 - 1),
            },
            Backend::BabyGiant { step, baby, giant } => {
                let mut gamma = x;
                for i in 0..=*step {
                    if let Some(j) = baby.get(&gamma) {
                        return Ok((i * step + j) % self.order);
                    }
                    gamma = mul_mod(gamma, *giant, self.p);
                }
                Err(missing)
            }
        }
    }
}

/// One-shot discrete log; builds a solver for the base each call.
pub fn discrete_log(x: u64, base: u64, p: u64) -> Result<u64> {
    DiscreteLog::new(base, p).log(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_small() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(10007));
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
    }

    #[test]
    fn divisors_of_28() {
        assert_eq!(divisors(28), vec![1, 2, 4, 7, 14, 28]);
        assert_eq!(factorize(102), vec![(2, 1), (3, 1), (17, 1)]);
    }

    #[test]
    fn orders_and_roots() {
        assert_eq!(primitive_root(7).unwrap(), 3);
        assert_eq!(primitive_root(23).unwrap(), 5);
        assert_eq!(multiplicative_order(2, 7), 3);
        assert_eq!(multiplicative_order(6, 7), 2);
        assert!(primitive_root(21).is_err());
    }

    #[test]
    fn dlog_examples() {
        let g = primitive_root(7).unwrap();
        assert_eq!(discrete_log(1, g, 7).unwrap(), 0);
        assert_eq!(discrete_log(2, 3, 7).unwrap(), 2);
        // 3 is not a power of 2 mod 7
        assert!(discrete_log(3, 2, 7).is_err());
    }

    #[test]
    fn dlog_large_prime_by_repowering() {
        let p = 10007;
        let g = primitive_root(p).unwrap();
        let dl = DiscreteLog::new(g, p);
        for x in [1u64, 2, 17, 5000, 9999, 10006] {
            let t = dl.log(x).unwrap();
            assert!(t < p - 1);
            assert_eq!(pow_mod(g, t, p), x);
        }
    }

    #[test]
    fn baby_giant_backend_matches_powering() {
        let p = 1_048_583; // first prime above the table limit
        assert!(p > DLOG_TABLE_LIMIT && is_prime(p));
        let g = primitive_root(p).unwrap();
        let dl = DiscreteLog::new(g, p);
        assert!(matches!(dl.backend, Backend::BabyGiant { .. }));
        for x in [1u64, 2, 3, 123_456, p - 1] {
            let t = dl.log(x).unwrap();
            assert_eq!(pow_mod(g, t, p), x);
        }
        // order-q subgroup: non-members are rejected
        let a = pow_mod(g, 2, p);
        let sub = DiscreteLog::new(a, p);
        assert!(sub.log(g).is_err());
        assert_eq!(pow_mod(a, sub.log(4).unwrap(), p), 4);
    }
}
