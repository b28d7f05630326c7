//! Exact integer primitives: Kronecker symbols, deterministic primality,
//! square-free decomposition, square roots modulo primes, CRT and
//! arithmetic in `Z[sqrt d] / M`.

mod crt;
mod quad_ring;

pub use crt::{crt_combine, Congruence, CrtPlan};
pub use quad_ring::{quad_ring_pow, QuadRingElement};

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// Kronecker symbol `(a | n)`.
///
/// Completely multiplicative in both arguments and zero exactly when
/// `gcd(a, n) > 1`. For `n = 0` the symbol is 1 when `a = +-1` and 0 otherwise.
pub fn kronecker(a: i64, n: i64) -> i8 {
    let mut a = a as i128;
    let mut n = n as i128;
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut k: i8 = 1;
    let v = n.trailing_zeros();
    n >>= v;
    if v % 2 == 1 {
        // (a | 2) depends on a mod 8
        k = match a.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
    }
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -k;
        }
    }
    a = a.rem_euclid(n);
    k * jacobi(a as u128, n as u128)
}

/// Jacobi symbol for `0 <= a < n`, `n` odd.
fn jacobi(mut a: u128, mut n: u128) -> i8 {
    debug_assert!(n % 2 == 1);
    let mut k = 1i8;
    while a != 0 {
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            k = -k;
        }
        if a % 4 == 3 && n % 4 == 3 {
            k = -k;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        k
    } else {
        0
    }
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality for every `u64`.
///
/// Miller-Rabin with the first twelve primes as witnesses is exact below
/// 3.3 * 10^24, which covers the whole `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL_PRIMES {
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

/// Primality for arbitrary-precision input; errors outside the `u64` range.
pub fn is_prime_big(n: &BigInt) -> Result<bool> {
    if n.sign() == num_bigint::Sign::Minus {
        return Ok(false);
    }
    let small = n
        .to_u64()
        .ok_or_else(|| Error::UnsupportedRange(n.to_string()))?;
    Ok(is_prime(small))
}

/// All primes `<= n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::with_capacity(n / 10 + 8);
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

/// Primes in the closed interval `[lo, hi]`.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..=hi).filter(|&n| is_prime(n)).collect()
}

/// `n = kernel * root^2` with `kernel` square-free and carrying the sign of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquarefreeParts {
    pub kernel: i64,
    pub root: u64,
}

/// Trial-division bound used by [`squarefree_decompose`].
///
/// `(2^21)^3 = 2^63`, so every `i64` is decided exactly.
pub const DEFAULT_TRIAL_BOUND: u64 = 1 << 21;

/// Square-free decomposition with the default trial-division bound.
pub fn squarefree_decompose(n: i64) -> Result<SquarefreeParts> {
    squarefree_decompose_with_bound(n, DEFAULT_TRIAL_BOUND)
}

/// Square-free decomposition by trial division up to `bound`.
///
/// After removing all primes `<= bound` the cofactor has only prime factors
/// `> bound`. A cofactor below `(bound + 1)^3` therefore has at most two
/// prime factors and hides a square only if it is a perfect square. Larger
/// cofactors are reported as [`Error::FactorBound`].
pub fn squarefree_decompose_with_bound(n: i64, bound: u64) -> Result<SquarefreeParts> {
    if n == 0 {
        return Err(Error::Zero("squarefree_decompose"));
    }
    let mut rem = n.unsigned_abs();
    let mut kernel: u64 = 1;
    let mut root: u64 = 1;
    let mut p: u64 = 2;
    while p <= bound && p.saturating_mul(p) <= rem {
        if rem % p == 0 {
            let mut e = 0u32;
            while rem % p == 0 {
                rem /= p;
                e += 1;
            }
            if e % 2 == 1 {
                kernel *= p;
            }
            root *= p.pow(e / 2);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rem > 1 {
        if p.saturating_mul(p) > rem {
            kernel *= rem;
        } else {
            let b = bound as u128 + 1;
            if (rem as u128) >= b * b * b {
                return Err(Error::FactorBound {
                    n,
                    cofactor: rem,
                    bound,
                });
            }
            let r = rem.sqrt();
            if r * r == rem {
                root *= r;
            } else {
                kernel *= rem;
            }
        }
    }
    let kernel = kernel as i64;
    Ok(SquarefreeParts {
        kernel: if n < 0 { -kernel } else { kernel },
        root,
    })
}

/// Whether `n` is square-free (`0` is not).
pub fn is_squarefree(n: i64) -> Result<bool> {
    if n == 0 {
        return Ok(false);
    }
    Ok(squarefree_decompose(n)?.root == 1)
}

pub fn is_perfect_square(n: u64) -> bool {
    let r = n.sqrt();
    r * r == n
}

/// Square root of `a` modulo an odd prime `p` (Tonelli-Shanks).
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
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

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
