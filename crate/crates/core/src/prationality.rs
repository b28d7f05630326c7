//! The generalized-Fibonacci local test and p-rationality verdicts for
//! real, imaginary and multiquadratic fields.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{gcd_u64, is_prime, quad_ring_pow, sqrt_mod_prime, squarefree_decompose, QuadRingElement};
use crate::classnum::{class_number_certificate, ClassNumberCertificate};
use crate::error::{Error, Result};
use crate::field::{is_ramified, make_field, require_odd_prime, residual_degree, FieldDescriptor};
use crate::precision::Precision;
use crate::unit::{fundamental_unit_with, FundamentalUnit};

/// `F_q mod p^2` for `q = p^f`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibonacciResidue {
    pub field: FieldDescriptor,
    pub p: u64,
    pub f: u8,
    pub q: u64,
    pub residue: u64,
}

/// `(U_n, U_{n+1})` of the Lucas sequence for `x^2 - P x + Q`, reduced mod `m`.
pub fn lucas_u_pair(p: &BigInt, q: &BigInt, n: u64, m: &BigInt) -> (BigInt, BigInt) {
    // [[P, -Q], [1, 0]]^n = [[U_{n+1}, -Q U_n], [U_n, -Q U_{n-1}]]
    type Mat = [[BigInt; 2]; 2];
    let mul = |x: &Mat, y: &Mat| -> Mat {
        let e = |i: usize, j: usize| (&x[i][0] * &y[0][j] + &x[i][1] * &y[1][j]).mod_floor(m);
        [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
    };
    let mut acc: Mat = [[BigInt::one(), BigInt::zero()], [BigInt::zero(), BigInt::one()]];
    let mut base: Mat = [
        [p.mod_floor(m), (-q).mod_floor(m)],
        [BigInt::one().mod_floor(m), BigInt::zero()],
    ];
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(&acc, &base);
        }
        base = mul(&base, &base);
        e >>= 1;
    }
    (acc[1][0].clone(), acc[0][0].clone())
}

/// `V_n = 2 U_{n+1} - P U_n` reduced mod `m`.
pub fn lucas_v(p: &BigInt, q: &BigInt, n: u64, m: &BigInt) -> BigInt {
    let (u, u_next) = lucas_u_pair(p, q, n, m);
    let v: BigInt = u_next * 2 - p * u;
    v.mod_floor(m)
}

/// `F_n mod p^2` for a unit of the given trace and norm; `n` must be odd
/// when the norm is -1.
///
/// Norm +1: `F_n = U_n(T, 1)`. Norm -1: `F_n = V_n(T, -1) / T`, computed
/// modulo `T p^2` and divided exactly, since `epsilon - epsilon^{-1}` need
/// not be invertible mod `p^2`.
pub fn fibonacci_mod_p2(trace: &BigInt, norm: i8, n: u64, p: u64) -> Result<u64> {
    let p2 = BigInt::from(p) * p;
    let residue = match norm {
        1 => lucas_u_pair(trace, &BigInt::one(), n, &p2).0,
        -1 => {
            if n % 2 == 0 {
                return Err(Error::Internal(format!(
                    "F_{n} for a norm -1 unit needs an odd index"
                )));
            }
            if trace.is_zero() {
                return Err(Error::Internal("unit with zero trace".into()));
            }
            let modulus = trace * &p2;
            let v = lucas_v(trace, &BigInt::from(-1), n, &modulus);
            let (quot, rem) = v.div_rem(trace);
            if !rem.is_zero() {
                return Err(Error::Internal(format!(
                    "V_{n} is not divisible by the trace {trace}"
                )));
            }
            quot.mod_floor(&p2)
        }
        other => return Err(Error::Internal(format!("unit norm {other}"))),
    };
    residue
        .to_u64()
        .ok_or_else(|| Error::Internal("residue exceeds u64".into()))
}

fn unit_trace(unit: &FundamentalUnit) -> Result<BigInt> {
    let twice = &unit.t * 2u32;
    let sigma = BigInt::from(unit.sigma);
    if !twice.is_multiple_of(&sigma) {
        return Err(Error::Internal(format!(
            "trace 2t/sigma is not integral for t = {}, sigma = {}",
            unit.t, unit.sigma
        )));
    }
    Ok(twice / sigma)
}

/// `F_q mod p^2` for the fundamental unit of a real field, `q = p^f`.
pub fn generalized_fibonacci_mod(field: &FieldDescriptor, p: u64) -> Result<FibonacciResidue> {
    let unit = fundamental_unit_with(field, Precision::default())?;
    fibonacci_for_unit(field, &unit, p)
}

fn fibonacci_for_unit(field: &FieldDescriptor, unit: &FundamentalUnit, p: u64) -> Result<FibonacciResidue> {
    field.require_real()?;
    let f = residual_degree(field, p)?;
    let q = p
        .checked_pow(f as u32)
        .ok_or_else(|| Error::UnsupportedRange(format!("{p}^{f}")))?;
    let residue = fibonacci_mod_p2(&unit_trace(unit)?, unit.norm, q, p)?;
    Ok(FibonacciResidue {
        field: *field,
        p,
        f,
        q,
        residue,
    })
}

/// Whether `F_q = 1 (mod p^2)` is equivalent to the local `p`-th power
/// condition for this unit.
///
/// `F_q - 1 = (y - 1)(x + 1/(x y)) / (x - 1/x)` with `x = epsilon`,
/// `y = epsilon^{q-1}`, so the congruence decides `y = 1 (mod P^2)` only when
/// `epsilon - epsilon^{-1}` and `epsilon + epsilon^{-1}` are units at `p`.
/// Their norms are `T^2` and `4 d u^2 / sigma^2` up to sign, giving the
/// condition `p` divides neither the trace nor `u`.
pub fn fibonacci_criterion_applies(unit: &FundamentalUnit, p: u64) -> bool {
    let trace = (&unit.t * 2u32) / unit.sigma as u32;
    !(trace % p).is_zero() && !(&unit.u % p).is_zero()
}

/// `epsilon^{q-1} = 1 (mod P^2)` evaluated directly: in `Z[sqrt d] / p^2`
/// when `p` is inert, and in `Z / p^2` through a lifted square root of `d`
/// when `p` splits.
pub fn unit_is_local_pth_power_direct(field: &FieldDescriptor, p: u64) -> Result<bool> {
    let unit = fundamental_unit_with(field, Precision::default())?;
    direct_local_test(field, &unit, p)
}

fn direct_local_test(field: &FieldDescriptor, unit: &FundamentalUnit, p: u64) -> Result<bool> {
    field.require_real()?;
    let f = residual_degree(field, p)?;
    let d = field.radicand();
    let p2 = BigInt::from(p) * p;
    let sigma_inv = BigInt::from(unit.sigma).extended_gcd(&p2).x.mod_floor(&p2);
    let t = (&unit.t * &sigma_inv).mod_floor(&p2);
    let u = (&unit.u * &sigma_inv).mod_floor(&p2);
    if f == 2 {
        let eps = QuadRingElement::new(t, u, d, p2);
        return Ok(quad_ring_pow(&eps, &BigInt::from(p * p - 1)).is_one());
    }
    let root = sqrt_mod_prime_square(d, p)?;
    let image = (t + u * root).mod_floor(&p2);
    Ok(image.modpow(&BigInt::from(p - 1), &p2).is_one())
}

/// A square root of `d` modulo `p^2` for `p` odd, `(d | p) = 1`.
fn sqrt_mod_prime_square(d: i64, p: u64) -> Result<BigInt> {
    let p2 = BigInt::from(p) * p;
    let residue = d.rem_euclid(p as i64) as u64;
    let r = sqrt_mod_prime(residue, p)
        .ok_or_else(|| Error::Internal(format!("{d} is not a square mod {p}")))?;
    // Hensel: r' = r - (r^2 - d) / (2r)
    let r = BigInt::from(r);
    let two_r_inv = (&r * 2u32).extended_gcd(&p2).x;
    let lifted = (&r - (&r * &r - d) * two_r_inv).mod_floor(&p2);
    Ok(lifted)
}

/// Whether the fundamental unit is a `p`-th power in the completion at an
/// unramified `p`.
///
/// Decided by `F_q = 1 (mod p^2)` when [`fibonacci_criterion_applies`],
/// otherwise by the direct computation.
pub fn unit_is_local_pth_power(field: &FieldDescriptor, p: u64) -> Result<bool> {
    let unit = fundamental_unit_with(field, Precision::default())?;
    Ok(local_power_decision(field, &unit, p)?.0)
}

/// `(is_pth_power, fibonacci residue, criterion applies)`
fn local_power_decision(field: &FieldDescriptor, unit: &FundamentalUnit, p: u64) -> Result<(bool, FibonacciResidue, bool)> {
    let residue = fibonacci_for_unit(field, unit, p)?;
    if fibonacci_criterion_applies(unit, p) {
        Ok((residue.residue == 1, residue, true))
    } else {
        Ok((direct_local_test(field, unit, p)?, residue, false))
    }
}

/// Local `p`-th power test at a ramified prime `p >= 5`.
///
/// With `pi = sqrt d` a uniformizer and `e = 2 < p - 1`, the `p`-th powers
/// among principal units are exactly `1 + pi^3 O`. `epsilon` is a `p`-th power
/// iff `epsilon^{p-1}` is, i.e. iff `epsilon^{p-1} = A + B sqrt d` has
/// `A = 1 (mod p^2)` and `B = 0 (mod p)`.
pub fn unit_is_local_pth_power_ramified(field: &FieldDescriptor, p: u64) -> Result<bool> {
    field.require_real()?;
    require_odd_prime(p)?;
    if p < 5 {
        return Err(Error::Precondition(format!(
            "ramified local test needs p >= 5, got {p}"
        )));
    }
    if field.radicand() % p as i64 != 0 {
        return Err(Error::Precondition(format!(
            "{p} does not ramify in Q(sqrt {})",
            field.radicand()
        )));
    }
    let unit = fundamental_unit_with(field, Precision::default())?;
    let p2 = BigInt::from(p) * p;
    let sigma_inv = BigInt::from(unit.sigma)
        .extended_gcd(&p2)
        .x
        .mod_floor(&p2);
    let eps = QuadRingElement::new(&unit.t * &sigma_inv, &unit.u * &sigma_inv, field.radicand(), p2.clone());
    let power = quad_ring_pow(&eps, &BigInt::from(p - 1));
    Ok(power.a().is_one() && (power.b() % p).is_zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Rational,
    NotRational,
    Unknown,
    Unsupported,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Rational => "rational",
            Outcome::NotRational => "not-rational",
            Outcome::Unknown => "unknown",
            Outcome::Unsupported => "unsupported",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    ClassNumber {
        certificate: ClassNumberCertificate,
        p_divides_h: bool,
    },
    Fibonacci {
        residue: FibonacciResidue,
        is_one: bool,
    },
    DirectLocalPower {
        radicand: i64,
        p: u64,
        is_pth_power: bool,
    },
    RamifiedLocalPower {
        radicand: i64,
        p: u64,
        is_pth_power: bool,
    },
    Ramified {
        radicand: i64,
        p: u64,
    },
    Subfield {
        radicand: i64,
        outcome: Outcome,
    },
    Advisory {
        note: String,
    },
    Premise {
        note: String,
    },
    Unsupported {
        note: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PRationalityVerdict {
    pub p: u64,
    pub radicands: Vec<i64>,
    pub outcome: Outcome,
    pub reasons: Vec<Evidence>,
}

impl PRationalityVerdict {
    fn unsupported(p: u64, radicands: Vec<i64>, note: String) -> Self {
        Self {
            p,
            radicands,
            outcome: Outcome::Unsupported,
            reasons: vec![Evidence::Unsupported { note }],
        }
    }

    pub fn class_numbers(&self) -> impl Iterator<Item = &ClassNumberCertificate> {
        self.reasons.iter().filter_map(|e| match e {
            Evidence::ClassNumber { certificate, .. } => Some(certificate),
            _ => None,
        })
    }

    pub fn fibonacci(&self) -> Option<&FibonacciResidue> {
        self.reasons.iter().find_map(|e| match e {
            Evidence::Fibonacci { residue, .. } => Some(residue),
            _ => None,
        })
    }
}

const P3_ADVISORY: &str =
    "p = 3: the real criterion is applied for odd p; the quadratic-field criterion it rests on is stated for p >= 5";

/// Real field, unramified odd `p`: rational iff `p` does not divide `h` and
/// the fundamental unit is not a local `p`-th power (see [`unit_is_local_pth_power`]).
pub fn is_p_rational_real(field: &FieldDescriptor, p: u64) -> Result<PRationalityVerdict> {
    is_p_rational_real_with(field, p, Precision::default())
}

pub fn is_p_rational_real_with(field: &FieldDescriptor, p: u64, prec: Precision) -> Result<PRationalityVerdict> {
    field.require_real()?;
    let d = field.radicand();
    if p % 2 == 0 || !is_prime(p) {
        return Ok(PRationalityVerdict::unsupported(p, vec![d], format!("{p} is not an odd prime")));
    }
    if is_ramified(field, p) {
        return Ok(PRationalityVerdict {
            p,
            radicands: vec![d],
            outcome: Outcome::Unsupported,
            reasons: vec![Evidence::Ramified { radicand: d, p }],
        });
    }
    let certificate = class_number_certificate(field, prec)?;
    let unit = fundamental_unit_with(field, prec)?;
    let (is_pth_power, residue, applies) = local_power_decision(field, &unit, p)?;
    let p_divides_h = certificate.h % p == 0;
    let is_one = residue.residue == 1;
    let mut reasons = vec![
        Evidence::ClassNumber {
            certificate,
            p_divides_h,
        },
        Evidence::Fibonacci { residue, is_one },
    ];
    if !applies {
        reasons.push(Evidence::DirectLocalPower {
            radicand: d,
            p,
            is_pth_power,
        });
        if is_one != is_pth_power {
            reasons.push(Evidence::Advisory {
                note: format!(
                    "F_q = 1 (mod p^2) disagrees with the direct test because {p} divides the trace or u of the unit; the direct test decides"
                ),
            });
        }
    }
    if p == 3 {
        reasons.push(Evidence::Advisory {
            note: P3_ADVISORY.into(),
        });
    }
    Ok(PRationalityVerdict {
        p,
        radicands: vec![d],
        outcome: if !p_divides_h && !is_pth_power {
            Outcome::Rational
        } else {
            Outcome::NotRational
        },
        reasons,
    })
}

/// Imaginary field, prime `p >= 5`: rational when `p` does not divide `h`,
/// unknown otherwise. Never returns not-rational.
pub fn is_p_rational_imaginary(field: &FieldDescriptor, p: u64) -> Result<PRationalityVerdict> {
    field.require_imaginary()?;
    let d = field.radicand();
    if p < 5 || !is_prime(p) {
        return Ok(PRationalityVerdict::unsupported(
            p,
            vec![d],
            format!("imaginary criterion needs a prime p >= 5, got {p}"),
        ));
    }
    let certificate = class_number_certificate(field, Precision::default())?;
    let p_divides_h = certificate.h % p == 0;
    let mut reasons = vec![Evidence::ClassNumber {
        certificate,
        p_divides_h,
    }];
    if p_divides_h {
        reasons.push(Evidence::Advisory {
            note: "p divides h: deciding requires the anti-cyclotomic criterion, which is not implemented".into(),
        });
    }
    Ok(PRationalityVerdict {
        p,
        radicands: vec![d],
        outcome: if p_divides_h {
            Outcome::Unknown
        } else {
            Outcome::Rational
        },
        reasons,
    })
}

/// Dispatches on the field's signature.
pub fn is_p_rational(field: &FieldDescriptor, p: u64, prec: Precision) -> Result<PRationalityVerdict> {
    if field.is_real() {
        is_p_rational_real_with(field, p, prec)
    } else {
        is_p_rational_imaginary(field, p)
    }
}

fn kernel_product(a: i64, b: i64) -> Result<i64> {
    let g = gcd_u64(a.unsigned_abs(), b.unsigned_abs()) as i64;
    (a / g)
        .checked_mul(b / g)
        .ok_or_else(|| Error::UnsupportedRange(format!("kernel of {a} * {b}")))
}

/// Radicands of every quadratic subfield of `Q(sqrt r_1, ..., sqrt r_t)`:
/// the square-free kernels of all nonempty subset products.
pub fn quadratic_subfield_radicands(radicands: &[i64]) -> Result<BTreeSet<i64>> {
    if radicands.is_empty() {
        return Err(Error::Degenerate("no radicands".into()));
    }
    if radicands.len() > 20 {
        return Err(Error::UnsupportedRange(format!("{} generators", radicands.len())));
    }
    let kernels = radicands
        .iter()
        .map(|&r| Ok(squarefree_decompose(r)?.kernel))
        .collect::<Result<Vec<_>>>()?;
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << kernels.len()) {
        let mut k = 1i64;
        for (i, &r) in kernels.iter().enumerate() {
            if mask & (1 << i) != 0 {
                k = kernel_product(k, r)?;
            }
        }
        if k == 1 {
            return Err(Error::Degenerate(format!(
                "subset {mask:#b} of {radicands:?} multiplies to a square"
            )));
        }
        if !out.insert(k) {
            return Err(Error::Degenerate(format!(
                "two subsets of {radicands:?} share the kernel {k}"
            )));
        }
    }
    Ok(out)
}

fn checked(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b)
        .ok_or_else(|| Error::UnsupportedRange(format!("{a} * {b}")))
}

/// `K_alpha = Q(sqrt(n(n+2)), sqrt(n(n-2)))` with `n = alpha p`, checked
/// through its three real quadratic subfields.
///
/// `p` ramifies in the two subfields whose radicand contains `n`; those use
/// the ramified local test, the third the unramified real verdict.
pub fn check_k_alpha(p: u64, alpha: u64) -> Result<PRationalityVerdict> {
    check_k_alpha_with(p, alpha, Precision::default())
}

pub fn check_k_alpha_with(p: u64, alpha: u64, prec: Precision) -> Result<PRationalityVerdict> {
    if p <= 3 || !is_prime(p) {
        return Ok(PRationalityVerdict::unsupported(p, vec![], format!("K_alpha needs a prime p > 3, got {p}")));
    }
    if alpha == 0 || gcd_u64(alpha, p) != 1 {
        return Ok(PRationalityVerdict::unsupported(
            p,
            vec![],
            format!("alpha = {alpha} must be positive and coprime to p"),
        ));
    }
    let n = i64::try_from(alpha.checked_mul(p).unwrap_or(u64::MAX))
        .map_err(|_| Error::UnsupportedRange(format!("{alpha} * {p}")))?;
    let subfields = quadratic_subfield_radicands(&[checked(n, n + 2)?, checked(n, n - 2)?])?;
    let mut reasons = Vec::new();
    let mut radicands = Vec::new();
    let mut all_rational = true;
    for d in subfields {
        let field = make_field(d)?;
        radicands.push(d);
        let outcome = if is_ramified(&field, p) {
            let certificate = class_number_certificate(&field, prec)?;
            let p_divides_h = certificate.h % p == 0;
            let is_pth_power = unit_is_local_pth_power_ramified(&field, p)?;
            reasons.push(Evidence::ClassNumber {
                certificate,
                p_divides_h,
            });
            reasons.push(Evidence::RamifiedLocalPower {
                radicand: d,
                p,
                is_pth_power,
            });
            if p_divides_h || is_pth_power {
                Outcome::NotRational
            } else {
                Outcome::Rational
            }
        } else {
            let verdict = is_p_rational_real_with(&field, p, prec)?;
            reasons.extend(verdict.reasons);
            verdict.outcome
        };
        all_rational &= outcome == Outcome::Rational;
        reasons.push(Evidence::Subfield { radicand: d, outcome });
    }
    Ok(PRationalityVerdict {
        p,
        radicands,
        outcome: if all_rational {
            Outcome::Rational
        } else {
            Outcome::NotRational
        },
        reasons,
    })
}

/// `F_alpha = Q(sqrt(p(p+2)), sqrt(p(p-2)), sqrt(-alpha))`: the four
/// imaginary quadratic subfields are checked for `p` not dividing `h`; the
/// real biquadratic part is taken as p-rational (recorded as a premise).
pub fn check_f_alpha(p: u64, alpha: u64) -> Result<PRationalityVerdict> {
    if p < 5 || !is_prime(p) {
        return Ok(PRationalityVerdict::unsupported(p, vec![], format!("F_alpha needs a prime p >= 5, got {p}")));
    }
    if alpha == 0 {
        return Ok(PRationalityVerdict::unsupported(p, vec![], "alpha must be positive".into()));
    }
    let pi = p as i64;
    let a = i64::try_from(alpha).map_err(|_| Error::UnsupportedRange(alpha.to_string()))?;
    let candidates = [
        -a,
        -checked(checked(pi, a)?, pi + 2)?,
        -checked(checked(pi, a)?, pi - 2)?,
        -checked(a, checked(pi - 2, pi + 2)?)?,
    ];
    let subfields: BTreeSet<i64> = candidates
        .iter()
        .map(|&r| Ok(squarefree_decompose(r)?.kernel))
        .collect::<Result<_>>()?;

    let mut reasons = vec![Evidence::Premise {
        note: format!(
            "Q(sqrt({}), sqrt({})) is taken as {p}-rational for every prime p (cited result, not recomputed)",
            pi * (pi + 2),
            pi * (pi - 2)
        ),
    }];
    let mut radicands = Vec::new();
    let mut all_rational = true;
    for d in subfields.into_iter().rev() {
        let verdict = is_p_rational_imaginary(&make_field(d)?, p)?;
        radicands.push(d);
        all_rational &= verdict.outcome == Outcome::Rational;
        reasons.extend(verdict.reasons);
        reasons.push(Evidence::Subfield {
            radicand: d,
            outcome: verdict.outcome,
        });
    }
    Ok(PRationalityVerdict {
        p,
        radicands,
        outcome: if all_rational {
            Outcome::Rational
        } else {
            Outcome::Unknown
        },
        reasons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{is_squarefree, primes_up_to};

    fn k(d: i64) -> FieldDescriptor {
        make_field(d).unwrap()
    }

    /// Exact `F_n` as a rational integer by the linear recurrence.
    fn exact_fibonacci(trace: i64, norm: i8, n: u64) -> BigInt {
        let t = BigInt::from(trace);
        if norm == 1 {
            let (mut a, mut b) = (BigInt::zero(), BigInt::one());
            for _ in 0..n {
                let c = &t * &b - &a;
                a = std::mem::replace(&mut b, c);
            }
            a
        } else {
            let (mut a, mut b) = (BigInt::from(2), t.clone());
            for _ in 0..n {
                let c = &t * &b + &a;
                a = std::mem::replace(&mut b, c);
            }
            a / &t
        }
    }

    #[test]
    fn fibonacci_examples() {
        let r = generalized_fibonacci_mod(&k(10), 3).unwrap();
        assert_eq!((r.f, r.q, r.residue), (1, 3, 3));
        assert_eq!(exact_fibonacci(6, -1, 3), BigInt::from(39));
        assert_eq!(fibonacci_mod_p2(&BigInt::from(6), -1, 1, 3), Ok(1));
        assert_eq!(fibonacci_mod_p2(&BigInt::from(4), 1, 1, 7), Ok(1));
        for p in [5u64, 13, 17] {
            let d = (p * p + 1) as i64;
            let r = generalized_fibonacci_mod(&k(d), p).unwrap();
            assert_eq!(r.residue, p);
            // exact (epsilon^p - epsilon^-p) / 2p with trace 2p, norm -1
            let exact = exact_fibonacci(2 * p as i64, -1, p);
            assert_eq!(exact % (p * p), BigInt::from(p));
        }
        assert!(matches!(
            generalized_fibonacci_mod(&k(10), 5),
            Err(Error::Ramified { .. })
        ));
    }

    #[test]
    fn inert_branch_uses_q_equal_p_squared() {
        // 2 is inert at 3 in Q(sqrt 2)
        let r = generalized_fibonacci_mod(&k(2), 3).unwrap();
        assert_eq!((r.f, r.q), (2, 9));
        assert_eq!(BigInt::from(r.residue), exact_fibonacci(2, -1, 9) % 9);
    }

    #[test]
    fn local_power_examples() {
        assert_eq!(unit_is_local_pth_power(&k(10), 3), Ok(false));
        assert_eq!(unit_is_local_pth_power(&k(2), 7), Ok(false));
        assert_eq!(residual_degree(&k(2), 7), Ok(1));
    }

    #[test]
    fn lucas_routes_agree_with_exact_recurrence() {
        for trace in 1i64..=40 {
            for norm in [1i8, -1] {
                if norm == 1 && trace < 3 {
                    continue;
                }
                for n in 1u64..=30 {
                    if norm == -1 && n % 2 == 0 {
                        continue;
                    }
                    for p in [3u64, 5, 7, 11, 13] {
                        let fast = fibonacci_mod_p2(&BigInt::from(trace), norm, n, p).unwrap();
                        let slow = exact_fibonacci(trace, norm, n) % (p * p);
                        assert_eq!(BigInt::from(fast), slow, "T={trace} N={norm} n={n} p={p}");
                    }
                }
            }
        }
    }

    /// Independent route: `epsilon^{q-1} = 1 (mod P^2)` evaluated in
    /// `Z[sqrt d] / p^2` (inert) or in `Z / p^2` through a Hensel-lifted
    /// square root of `d` (split). Agrees with the Fibonacci criterion when
    /// `epsilon - epsilon^{-1}` is a unit at `p`.
    fn local_power_by_ring(d: i64, unit: &FundamentalUnit, p: u64) -> bool {
        let p2 = BigInt::from(p * p);
        let sigma_inv = BigInt::from(unit.sigma).extended_gcd(&p2).x.mod_floor(&p2);
        let t = (&unit.t * &sigma_inv).mod_floor(&p2);
        let u = (&unit.u * &sigma_inv).mod_floor(&p2);
        if crate::arith::kronecker(d, p as i64) == -1 {
            let eps = QuadRingElement::new(t, u, d, p2);
            quad_ring_pow(&eps, &BigInt::from(p * p - 1)).is_one()
        } else {
            let pp = (p * p) as i64;
            let s = (0..pp).find(|s| (s * s - d).rem_euclid(pp) == 0).unwrap();
            let e = (t + u * s).mod_floor(&p2);
            e.modpow(&BigInt::from(p - 1), &p2).is_one()
        }
    }

    #[test]
    fn local_decision_matches_ring_route() {
        let mut degenerate = 0;
        for d in 2..=300i64 {
            if !is_squarefree(d).unwrap() {
                continue;
            }
            let field = k(d);
            let unit = fundamental_unit_with(&field, Precision::default()).unwrap();
            for p in primes_up_to(60).into_iter().skip(1) {
                if is_ramified(&field, p) {
                    continue;
                }
                let truth = local_power_by_ring(d, &unit, p);
                assert_eq!(unit_is_local_pth_power(&field, p), Ok(truth), "d={d} p={p}");
                assert_eq!(direct_local_test(&field, &unit, p), Ok(truth), "d={d} p={p}");
                if fibonacci_criterion_applies(&unit, p) {
                    let fib = fibonacci_for_unit(&field, &unit, p).unwrap().residue == 1;
                    assert_eq!(fib, truth, "d={d} p={p}");
                } else {
                    degenerate += 1;
                }
            }
        }
        assert!(degenerate > 0);
    }

    #[test]
    fn fibonacci_congruence_misleads_when_p_divides_trace() {
        // epsilon = (5 + sqrt 21)/2 maps to 8 mod 25 and 8^4 = 21
        let field = k(21);
        assert_eq!(generalized_fibonacci_mod(&field, 5).unwrap().residue, 1);
        assert_eq!(unit_is_local_pth_power(&field, 5), Ok(false));
        let v = is_p_rational_real(&field, 5).unwrap();
        assert_eq!(v.outcome, Outcome::Rational);
        assert!(v.reasons.iter().any(|e| matches!(e, Evidence::DirectLocalPower { is_pth_power: false, .. })));
    }

    #[test]
    fn verdict_examples() {
        let v = is_p_rational_real(&k(10), 3).unwrap();
        assert_eq!(v.outcome, Outcome::Rational);
        assert_eq!(v.class_numbers().next().unwrap().h, 2);
        assert_eq!(v.fibonacci().unwrap().residue, 3);
        assert!(v.reasons.iter().any(|e| matches!(e, Evidence::Advisory { .. })));

        assert_eq!(is_p_rational_real(&k(290), 17).unwrap().outcome, Outcome::Rational);
        let v = is_p_rational_real(&k(10), 5).unwrap();
        assert_eq!(v.outcome, Outcome::Unsupported);
        assert!(matches!(v.reasons[0], Evidence::Ramified { .. }));

        assert_eq!(is_p_rational_imaginary(&k(-22), 23).unwrap().outcome, Outcome::Rational);
        assert_eq!(is_p_rational_imaginary(&k(-3), 7).unwrap().outcome, Outcome::Rational);
        assert_eq!(is_p_rational_imaginary(&k(-47), 5).unwrap().outcome, Outcome::Unknown);
        assert_eq!(is_p_rational_imaginary(&k(-47), 3).unwrap().outcome, Outcome::Unsupported);
        assert!(is_p_rational_imaginary(&k(47), 5).is_err());
    }

    #[test]
    fn real_verdict_certificate_reverifies() {
        for d in [2i64, 3, 6, 7, 10, 11, 13, 79, 229, 290] {
            for p in [3u64, 5, 7, 11, 13] {
                let v = is_p_rational_real(&k(d), p).unwrap();
                if v.outcome == Outcome::Rational {
                    assert!(v.class_numbers().all(|c| c.h % p != 0));
                    assert!(!unit_is_local_pth_power(&k(d), p).unwrap());
                }
                assert_eq!(v, is_p_rational_real(&k(d), p).unwrap());
            }
        }
    }

    #[test]
    fn subfield_examples() {
        let s = |v: &[i64]| quadratic_subfield_radicands(v).unwrap().into_iter().collect::<Vec<_>>();
        assert_eq!(s(&[15, 35]), vec![15, 21, 35]);
        assert_eq!(s(&[-1, 3]), vec![-3, -1, 3]);
        assert_eq!(s(&[10, 26]), vec![10, 26, 65]);
        assert_eq!(s(&[2, 3, 5]).len(), 7);
        assert!(matches!(quadratic_subfield_radicands(&[2, 8]), Err(Error::Degenerate(_))));
        assert!(matches!(quadratic_subfield_radicands(&[6, 10, 15]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn k_alpha_small_case_is_rational() {
        let v = check_k_alpha(5, 1).unwrap();
        assert_eq!(v.radicands, vec![15, 21, 35]);
        assert_eq!(v.outcome, Outcome::Rational);
        let hs: Vec<u64> = v.class_numbers().map(|c| c.h).collect();
        assert_eq!(hs, vec![2, 1, 2]);
    }

    #[test]
    fn k_alpha_rejects_bad_parameters() {
        assert_eq!(check_k_alpha(3, 1).unwrap().outcome, Outcome::Unsupported);
        assert_eq!(check_k_alpha(5, 10).unwrap().outcome, Outcome::Unsupported);
        assert_eq!(check_f_alpha(3, 1).unwrap().outcome, Outcome::Unsupported);
    }

    #[test]
    fn f_alpha_small_case_is_rational() {
        let v = check_f_alpha(7, 1).unwrap();
        assert_eq!(v.radicands, vec![-1, -5, -7, -35]);
        assert_eq!(v.outcome, Outcome::Rational);
        let hs: Vec<u64> = v.class_numbers().map(|c| c.h).collect();
        assert_eq!(hs, vec![1, 2, 1, 2]);
        assert!(matches!(v.reasons[0], Evidence::Premise { .. }));
    }

    #[test]
    fn f_alpha_deduplicates_subfields() {
        // alpha = 21 = (p - 2)(p + 2) at p = 5 collapses -alpha(p-2)(p+2) to -1
        let v = check_f_alpha(5, 21).unwrap();
        let unique: BTreeSet<_> = v.radicands.iter().collect();
        assert_eq!(unique.len(), v.radicands.len());
        assert!(v.radicands.contains(&-1));
    }

    #[test]
    fn negative_controls_are_not_rational() {
        // smallest residue-1 pairs with an applicable criterion, from a sweep
        // over d <= 200, p <= 100
        for (d, p) in [(2i64, 13u64), (2, 31), (6, 7), (23, 7), (29, 11)] {
            let v = is_p_rational_real(&k(d), p).unwrap();
            assert_eq!(v.fibonacci().unwrap().residue, 1, "d={d} p={p}");
            assert_eq!(v.outcome, Outcome::NotRational, "d={d} p={p}");
        }
    }

    #[test]
    fn k_alpha_fixtures() {
        let v = check_k_alpha(5, 17).unwrap();
        assert_eq!(v.outcome, Outcome::NotRational);
        assert_eq!(v.radicands, vec![7055, 7221, 7395]);
        let hs: Vec<u64> = v.class_numbers().map(|c| c.h).collect();
        assert_eq!(hs, vec![12, 10, 16]);
        assert!(v.reasons.contains(&Evidence::Subfield {
            radicand: 7221,
            outcome: Outcome::NotRational
        }));

        let v = check_k_alpha(7, 2).unwrap();
        assert_eq!(v.outcome, Outcome::Rational);
        assert_eq!(v.radicands, vec![3, 14, 42]);

        let v = check_f_alpha(5, 1).unwrap();
        assert_eq!(v.outcome, Outcome::Rational);
        assert_eq!(v.radicands, vec![-1, -15, -21, -35]);
        let hs: Vec<u64> = v.class_numbers().map(|c| c.h).collect();
        assert_eq!(hs, vec![1, 2, 4, 2]);
    }
}
