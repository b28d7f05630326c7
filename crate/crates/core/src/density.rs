//! Densities of primes `p` with `p^2 + c` square-free.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, kronecker, primes_up_to, sqrt_mod_prime};
use crate::classnum::isqrt;
use crate::error::{Error, Result};

/// `#{n mod q^2 : gcd(n, q) = 1, n^2 + c = 0 (mod q^2)}` by enumeration.
pub fn rho_prime_enumerated(c: i64, q: u64) -> u32 {
    let q2 = (q * q) as i128;
    (0..q2)
        .filter(|n| n % q as i128 != 0 && (n * n + c as i128).rem_euclid(q2) == 0)
        .count() as u32
}

/// `rho'(q^2)` for `f = x^2 + c` at an odd prime `q`: 0 if `q | c`,
/// otherwise `1 + (-c | q)`.
pub fn rho_prime(c: i64, q: u64) -> Result<u32> {
    if q % 2 == 0 || !is_prime(q) {
        return Err(Error::NotOddPrime(q));
    }
    if c.rem_euclid(q as i64) == 0 {
        return Ok(0);
    }
    Ok((1 + kronecker(-c, q as i64)) as u32)
}

/// Lower-bound constants quoted for `c = 1, -2, 2, 4`.
pub fn paper_constant(c: i64) -> Option<f64> {
    match c {
        1 | 4 => Some(0.834),
        -2 => Some(0.931),
        2 => Some(0.920),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaperComparison {
    pub value: f64,
    /// The certified lower end `product - tail` is at least `value`.
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub c: i64,
    pub cutoff: u64,
    pub product_value: f64,
    /// Primes `q <= cutoff` in the partial product.
    pub terms_used: usize,
    /// The full product lies in `[product_value - tail_bound, product_value]`.
    pub tail_bound: f64,
    pub empirical_x: Option<u64>,
    pub empirical_ratio: Option<f64>,
    pub paper_constant: Option<PaperComparison>,
}

impl DensityReport {
    pub fn with_empirical(mut self, x: u64) -> Result<Self> {
        let e = empirical_density(self.c, x)?;
        self.empirical_x = Some(x);
        self.empirical_ratio = Some(e.ratio);
        Ok(self)
    }
}

/// `prod_{q <= cutoff} (1 - rho'(q^2)/phi(q^2))`, with `q = 2` enumerated.
///
/// Beyond the cutoff each factor is at least `1 - 2/(q(q-1))` and
/// `sum_{n > N} 2/(n(n-1)) = 2/N`, so the tail multiplies the partial
/// product by something in `[1 - 2/cutoff, 1]`.
pub fn euler_density(c: i64, cutoff: u64) -> Result<DensityReport> {
    if cutoff < 100 {
        return Err(Error::Precondition(format!("cutoff {cutoff} is below 100")));
    }
    let primes = primes_up_to(cutoff);
    let mut product = 1.0f64;
    for &q in &primes {
        let rho = if q == 2 {
            rho_prime_enumerated(c, 2)
        } else {
            rho_prime(c, q)?
        };
        product *= 1.0 - rho as f64 / (q * (q - 1)) as f64;
    }
    let tail_bound = product * 2.0 / cutoff as f64;
    Ok(DensityReport {
        c,
        cutoff,
        product_value: product,
        terms_used: primes.len(),
        tail_bound,
        empirical_x: None,
        empirical_ratio: None,
        paper_constant: paper_constant(c).map(|value| PaperComparison {
            value,
            agrees: product - tail_bound >= value,
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductEstimate {
    pub value: f64,
    pub terms: u64,
    /// The infinite product lies in `[value - tail_bound, value]`.
    pub tail_bound: f64,
}

/// `prod_{k=1}^{K} (1 - 2/(4k(4k+1)))`; the remaining terms sum to less
/// than `sum_{k > K} 1/(8k^2) < 1/(8K)`.
pub fn paper_lowerbound_product(terms: u64) -> Result<ProductEstimate> {
    if terms == 0 {
        return Err(Error::Precondition("at least one term is required".into()));
    }
    let mut value = 1.0f64;
    for k in 1..=terms {
        let k = k as f64;
        value *= 1.0 - 2.0 / (4.0 * k * (4.0 * k + 1.0));
    }
    Ok(ProductEstimate {
        value,
        terms,
        tail_bound: value / (8.0 * terms as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDensity {
    pub c: i64,
    pub x: u64,
    pub squarefree_count: usize,
    pub prime_count: usize,
    pub ratio: f64,
}

/// Roots of `n^2 = -c (mod q^2)` in `[0, q^2)`.
fn roots_mod_square(c: i64, q: u64) -> Vec<u64> {
    let q2 = q * q;
    if (2 * c).rem_euclid(q as i64) == 0 {
        return (0..q2)
            .filter(|&n| (n as i128 * n as i128 + c as i128).rem_euclid(q2 as i128) == 0)
            .collect();
    }
    let Some(r) = sqrt_mod_prime((-c).rem_euclid(q as i64) as u64, q) else {
        return Vec::new();
    };
    // Hensel: r' = r - (r^2 + c) / (2r) mod q^2
    let (r, m) = (r as i128, q2 as i128);
    let inv = mod_inverse(2 * r, m);
    let lifted = (r - (r * r + c as i128) * inv).rem_euclid(m);
    vec![lifted as u64, (m - lifted) as u64]
}

fn mod_inverse(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1, mut s0, mut s1) = (a.rem_euclid(m), m, 1i128, 0i128);
    while r1 != 0 {
        let t = r0 / r1;
        (r0, r1) = (r1, r0 - t * r1);
        (s0, s1) = (s1, s0 - t * s1);
    }
    s0.rem_euclid(m)
}

/// Share of primes `p <= x` with `p^2 + c` square-free, by sieving with the
/// roots of `n^2 + c` modulo `q^2`.
pub fn empirical_density(c: i64, x: u64) -> Result<EmpiricalDensity> {
    if x < 1000 {
        return Err(Error::Precondition(format!("X = {x} is below 1000")));
    }
    let qmax = isqrt(x * x + c.unsigned_abs());
    let marks: Vec<u64> = primes_up_to(qmax)
        .par_iter()
        .flat_map_iter(|&q| {
            let q2 = q * q;
            roots_mod_square(c, q)
                .into_iter()
                .flat_map(move |r| (r..=x).step_by(q2 as usize))
        })
        .collect();
    let mut square_divisible = vec![false; x as usize + 1];
    for n in marks {
        square_divisible[n as usize] = true;
    }
    let primes = primes_up_to(x);
    let squarefree_count = primes.iter().filter(|&&p| !square_divisible[p as usize]).count();
    Ok(EmpiricalDensity {
        c,
        x,
        squarefree_count,
        prime_count: primes.len(),
        ratio: squarefree_count as f64 / primes.len() as f64,
    })
}

/// `max(0, sum delta_i - (n - 1))`.
pub fn intersection_lower_bound(deltas: &[f64]) -> Result<f64> {
    if let Some(d) = deltas.iter().find(|d| !(0.0..=1.0).contains(*d)) {
        return Err(Error::Precondition(format!("density {d} is outside [0, 1]")));
    }
    let n = deltas.len() as f64;
    Ok((deltas.iter().sum::<f64>() - (n - 1.0)).max(0.0))
}

/// Successive bounds for `A_1`, `A_1 & A_2`, `A_1 & A_2 & A_3`, ...
pub fn bonferroni_chain(deltas: &[f64]) -> Result<Vec<f64>> {
    (1..=deltas.len())
        .map(|n| intersection_lower_bound(&deltas[..n]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_squarefree;
    use proptest::prelude::*;

    #[test]
    fn rho_examples() {
        assert_eq!(rho_prime(1, 5), Ok(2));
        assert_eq!(rho_prime(1, 3), Ok(0));
        assert_eq!(rho_prime(2, 3), Ok(2));
        assert_eq!(rho_prime_enumerated(1, 5), 2);
        assert_eq!(rho_prime_enumerated(2, 3), 2);
        assert_eq!(rho_prime(2, 2), Err(Error::NotOddPrime(2)));
        assert_eq!(rho_prime(2, 9), Err(Error::NotOddPrime(9)));
        for c in [1, -2, 2, 4] {
            assert_eq!(rho_prime_enumerated(c, 2), 0);
        }
        assert_eq!(rho_prime_enumerated(-1, 2), 2);
    }

    #[test]
    fn rho_routes_agree() {
        for q in primes_up_to(500).into_iter().skip(1) {
            for c in [-2, 1, 2, 4] {
                assert_eq!(rho_prime(c, q), Ok(rho_prime_enumerated(c, q)), "c={c} q={q}");
            }
        }
    }

    #[test]
    fn square_roots_lift() {
        for q in primes_up_to(60) {
            for c in -30i64..=30 {
                let q2 = (q * q) as i64;
                let mut want: Vec<u64> = (0..q2)
                    .filter(|n| (n * n + c).rem_euclid(q2) == 0)
                    .map(|n| n as u64)
                    .collect();
                let mut got = roots_mod_square(c, q);
                want.sort();
                got.sort();
                got.dedup();
                assert_eq!(got, want, "c={c} q={q}");
            }
        }
    }

    #[test]
    fn lowerbound_product_examples() {
        let e = paper_lowerbound_product(1).unwrap();
        assert!((e.value - 0.9).abs() < 1e-15);
        let e = paper_lowerbound_product(2).unwrap();
        assert!((e.value - 0.875).abs() < 1e-15);
        let e = paper_lowerbound_product(100_000).unwrap();
        assert!((e.value - 0.83463).abs() < 1e-5, "{}", e.value);
        assert!(e.tail_bound < 2e-6);
        assert!(paper_lowerbound_product(0).is_err());
    }

    #[test]
    fn euler_products() {
        let r = euler_density(-2, 100_000).unwrap();
        assert!(r.product_value >= 0.931);
        assert!((r.product_value - 0.934588).abs() < 1e-6, "{}", r.product_value);
        assert!(r.paper_constant.unwrap().agrees);

        let r = euler_density(2, 100_000).unwrap();
        assert!((r.product_value - 0.641983).abs() < 1e-6, "{}", r.product_value);
        assert!(!r.paper_constant.unwrap().agrees);

        // q = 5, 13, 17, ... only, and above the k-indexed lower bound
        let one = euler_density(1, 100_000).unwrap();
        let four = euler_density(4, 100_000).unwrap();
        assert!((one.product_value - four.product_value).abs() < 1e-12);
        assert!((one.product_value - 0.873961).abs() < 1e-6, "{}", one.product_value);
        assert!(one.product_value > paper_lowerbound_product(100_000).unwrap().value);

        assert!(euler_density(1, 99).is_err());
        assert_eq!(euler_density(3, 100).unwrap().paper_constant, None);
    }

    #[test]
    fn euler_products_bracket_higher_cutoffs() {
        for c in [-2i64, 1, 2, 4, 7] {
            let mut previous: Option<DensityReport> = None;
            for cutoff in [100u64, 1_000, 10_000, 100_000] {
                let r = euler_density(c, cutoff).unwrap();
                if let Some(prev) = &previous {
                    assert!(r.product_value <= prev.product_value);
                    assert!(r.product_value >= prev.product_value - prev.tail_bound);
                }
                previous = Some(r);
            }
        }
    }

    #[test]
    fn sieve_matches_direct_factorisation() {
        for c in [-2i64, 1, 2, 4, -4, -9, 12] {
            let e = empirical_density(c, 3000).unwrap();
            let primes = primes_up_to(3000);
            let direct = primes
                .iter()
                .filter(|&&p| {
                    let v = (p * p) as i64 + c;
                    v != 0 && is_squarefree(v).unwrap()
                })
                .count();
            assert_eq!(e.squarefree_count, direct, "c={c}");
            assert_eq!(e.prime_count, primes.len());
        }
        assert!(empirical_density(1, 999).is_err());
    }

    #[test]
    fn empirical_tracks_euler_product() {
        for c in [1i64, 2, -2] {
            let e = empirical_density(c, 100_000).unwrap();
            let r = euler_density(c, 100_000).unwrap();
            assert!((e.ratio - r.product_value).abs() < 0.01, "c={c}: {} vs {}", e.ratio, r.product_value);
        }
    }

    #[test]
    fn bonferroni_examples() {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(intersection_lower_bound(&[0.834, 0.931]).unwrap(), 0.765));
        assert!(close(intersection_lower_bound(&[0.765, 0.920]).unwrap(), 0.685));
        assert!(close(intersection_lower_bound(&[1.0, 0.3]).unwrap(), 0.3));
        assert_eq!(intersection_lower_bound(&[0.2, 0.3]), Ok(0.0));
        assert!(intersection_lower_bound(&[1.2]).is_err());
        let chain = bonferroni_chain(&[0.834, 0.931, 0.920, 0.834]).unwrap();
        assert!(close(chain[1], 0.765) && close(chain[2], 0.685) && close(chain[3], 0.519));
    }

    proptest! {
        #[test]
        fn rho_routes_agree_for_any_c(c in -1000i64..1000, i in 1usize..60) {
            let q = primes_up_to(300)[i];
            prop_assert_eq!(rho_prime(c, q), Ok(rho_prime_enumerated(c, q)));
        }

        #[test]
        fn bonferroni_never_exceeds_smallest(ds in prop::collection::vec(0.0f64..=1.0, 1..6)) {
            let b = intersection_lower_bound(&ds).unwrap();
            prop_assert!(b >= 0.0);
            prop_assert!(ds.iter().all(|&d| b <= d + 1e-12));
        }
    }
}
