//! Primes `p` for which every `p - r_i` has a prescribed square divisor.
//!
//! The moduli are chosen pairwise coprime and coprime to the shifts, the
//! congruences `p = r_i (mod m_i^2)` are merged by CRT, and the resulting
//! progression `l + kD` is scanned with a primality test.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::arith::{crt_combine, gcd_u64, is_prime, CrtPlan};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shift {
    pub r: i64,
    pub m: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub p: u64,
    pub shifts: Vec<Shift>,
    pub plan: CrtPlan,
    /// Progression terms tested, including the hit.
    pub scan_steps: u64,
}

impl SearchResult {
    /// `p` is prime and `m_i^2` divides `p - r_i` for every shift.
    pub fn verify(&self) -> bool {
        is_prime(self.p)
            && self.shifts.iter().all(|s| {
                let diff = self.p as i128 - s.r as i128;
                diff > 0 && diff % (s.m as i128 * s.m as i128) == 0
            })
    }

    /// Largest `A` with `m_i >= (log p)^A`, per shift.
    pub fn log_exponents(&self) -> Vec<f64> {
        let ll = (self.p as f64).ln().ln();
        self.shifts.iter().map(|s| (s.m as f64).ln() / ll).collect()
    }

    /// Whether every `m_i` exceeds `(log p)^a`.
    pub fn exceeds_log_power(&self, a: f64) -> bool {
        let bound = (self.p as f64).ln().powf(a);
        self.shifts.iter().all(|s| s.m as f64 > bound)
    }
}

/// The lexicographically smallest `s` pairwise-coprime integers in
/// `[lo, hi]` that are coprime to every `r_i`. Values below 2 are skipped.
pub fn admissible_moduli(rs: &[i64], s: usize, window: (u64, u64)) -> Result<Vec<u64>> {
    let (lo, hi) = window;
    let candidates: Vec<u64> = (lo.max(2)..=hi)
        .filter(|&m| rs.iter().all(|&r| gcd_u64(m, r.unsigned_abs()) == 1))
        .collect();
    let mut chosen = Vec::with_capacity(s);
    if extend(&candidates, 0, s, &mut chosen) {
        Ok(chosen)
    } else {
        Err(Error::InfeasibleWindow { lo, hi, count: s })
    }
}

fn extend(candidates: &[u64], from: usize, s: usize, chosen: &mut Vec<u64>) -> bool {
    if chosen.len() == s {
        return true;
    }
    if candidates.len() - from < s - chosen.len() {
        return false;
    }
    for i in from..candidates.len() {
        let m = candidates[i];
        if chosen.iter().all(|&c| gcd_u64(c, m) == 1) {
            chosen.push(m);
            if extend(candidates, i + 1, s, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Smallest prime `p <= limit` with `p = r_i (mod m_i^2)` and `p > r_i` for
/// all `i`.
pub fn find_prime_square_divisors(rs: &[i64], moduli: &[u64], limit: u64) -> Result<SearchResult> {
    if rs.len() != moduli.len() {
        return Err(Error::Precondition(format!(
            "{} shifts but {} moduli",
            rs.len(),
            moduli.len()
        )));
    }
    if let Some(i) = moduli.iter().position(|&m| m == 0) {
        return Err(Error::Precondition(format!("modulus at position {i} is zero")));
    }
    let pairs: Vec<(BigInt, BigInt)> = rs
        .iter()
        .zip(moduli)
        .map(|(&r, &m)| (BigInt::from(r), BigInt::from(m) * m))
        .collect();
    let plan = crt_combine(&pairs)?;
    let exhausted = |steps| Error::Exhausted {
        limit,
        residue: plan.residue.to_string(),
        modulus: plan.modulus.to_string(),
        steps,
    };

    let (Some(l), Some(d)) = (plan.residue.to_u64(), plan.modulus.to_u64()) else {
        return Err(exhausted(0));
    };
    // the smallest term exceeding every r_i
    let floor = rs.iter().copied().max().unwrap_or(0).max(1) as u64;
    let mut term = if l > floor { l } else { l + ((floor - l) / d + 1) * d };
    // a shared factor leaves at most one prime in the progression
    let g = gcd_u64(l, d);
    let ceiling = if g > 1 { limit.min(g) } else { limit };

    let mut steps = 0;
    while term <= ceiling {
        steps += 1;
        if is_prime(term) {
            return Ok(SearchResult {
                p: term,
                shifts: rs.iter().zip(moduli).map(|(&r, &m)| Shift { r, m }).collect(),
                plan,
                scan_steps: steps,
            });
        }
        term = match term.checked_add(d) {
            Some(t) => t,
            None => break,
        };
    }
    Err(exhausted(steps))
}

/// Brute-force reference: first prime above every shift satisfying all
/// congruences.
#[cfg(test)]
pub(crate) fn naive_search(rs: &[i64], moduli: &[u64], limit: u64) -> Option<u64> {
    let floor = rs.iter().copied().max().unwrap_or(0);
    (2..=limit).find(|&p| {
        p as i64 > floor
            && rs.iter().zip(moduli).all(|(&r, &m)| {
                let diff = p as i64 - r;
                diff > 0 && diff.rem_euclid((m * m) as i64) == 0
            })
            && is_prime(p)
    })
}
