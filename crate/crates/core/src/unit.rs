//! Fundamental units of real quadratic fields via continued fractions.

use astro_float::BigFloat;
use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldDescriptor;
use crate::precision::{Ctx, Precision};

/// `epsilon = (t + u sqrt d) / sigma`, the smallest unit `> 1` of the maximal order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalUnit {
    pub t: BigInt,
    pub u: BigInt,
    pub sigma: u8,
    pub norm: i8,
    /// `ln(epsilon)`
    pub regulator: f64,
}

impl FundamentalUnit {
    /// Trace `epsilon + conj(epsilon) = 2t / sigma`.
    pub fn trace(&self) -> BigInt {
        (&self.t * 2u32) / self.sigma as u32
    }

    /// `(t^2 - d u^2) / sigma^2 == norm`, checked exactly.
    pub fn satisfies_norm_equation(&self, d: i64) -> bool {
        let lhs = &self.t * &self.t - &self.u * &self.u * d;
        let sigma2 = BigInt::from(self.sigma as i64 * self.sigma as i64);
        lhs == sigma2 * self.norm as i64
    }
}

/// Continued-fraction expansion of `(P0 + sqrt d) / Q0`, scanned convergent
/// by convergent until one gives an element of norm +-1.
///
/// Every unit `x + y omega` has `x / y` among the convergents of `omega`,
/// and convergent denominators grow, so the first hit is the fundamental unit.
pub fn fundamental_unit(field: &FieldDescriptor) -> Result<FundamentalUnit> {
    fundamental_unit_with(field, Precision::default())
}

pub fn fundamental_unit_with(field: &FieldDescriptor, prec: Precision) -> Result<FundamentalUnit> {
    field.require_real()?;
    let d = field.radicand();
    let (t, u, sigma, norm) = unit_coordinates(d)?;
    let mut ctx = Ctx::new(prec);
    let reg = regulator_hp(&t, &u, sigma, d, &mut ctx);
    Ok(FundamentalUnit {
        regulator: ctx.to_f64(&reg),
        t,
        u,
        sigma,
        norm,
    })
}

fn unit_coordinates(d: i64) -> Result<(BigInt, BigInt, u8, i8)> {
    let half_integral = d.rem_euclid(4) == 1;
    let (mut p, mut q): (i64, i64) = if half_integral { (1, 2) } else { (0, 1) };
    let root = (d as u64).sqrt() as i64;

    let (mut a_prev, mut a_cur) = (BigInt::zero(), BigInt::one());
    let (mut b_prev, mut b_cur) = (BigInt::one(), BigInt::zero());

    // the period of sqrt(d) is O(sqrt(d) log d)
    let max_steps = 64 + 4 * (root as u64 + 1) * (64 - (d as u64).leading_zeros() as u64);
    for _ in 0..max_steps {
        if q <= 0 {
            return Err(Error::Internal(format!(
                "non-positive denominator in continued fraction of sqrt({d})"
            )));
        }
        let a = Integer::div_floor(&(p + root), &q);
        let a_next = &a_cur * a + &a_prev;
        let b_next = &b_cur * a + &b_prev;
        a_prev = std::mem::replace(&mut a_cur, a_next);
        b_prev = std::mem::replace(&mut b_cur, b_next);

        let (t, u, scale) = if half_integral {
            (&a_cur * 2 - &b_cur, b_cur.clone(), 4)
        } else {
            (a_cur.clone(), b_cur.clone(), 1)
        };
        let n = &t * &t - &u * &u * d;
        if n == BigInt::from(scale) || n == BigInt::from(-scale) {
            let norm = if n > BigInt::zero() { 1 } else { -1 };
            if half_integral && t.is_even() && u.is_even() {
                return Ok((t / 2, u / 2, 1, norm));
            }
            let sigma = if half_integral { 2 } else { 1 };
            return Ok((t, u, sigma, norm));
        }

        p = a * q - p;
        q = (d - p * p) / q;
    }
    Err(Error::Internal(format!(
        "continued fraction of Q(sqrt {d}) did not close within {max_steps} steps"
    )))
}

pub(crate) fn regulator_hp(t: &BigInt, u: &BigInt, sigma: u8, d: i64, ctx: &mut Ctx) -> BigFloat {
    let tf = ctx.big(t);
    let uf = ctx.big(u);
    let root = ctx.sqrt(&ctx.int(d));
    let eps = ctx.div(&ctx.add(&tf, &ctx.mul(&uf, &root)), &ctx.int(sigma as i64));
    ctx.ln(&eps)
}

/// Natural logarithm of the fundamental unit.
pub fn regulator(field: &FieldDescriptor) -> Result<f64> {
    Ok(fundamental_unit(field)?.regulator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_squarefree;
    use crate::field::make_field;
    use crate::arith::primes_up_to;

    fn unit(d: i64) -> FundamentalUnit {
        fundamental_unit(&make_field(d).unwrap()).unwrap()
    }

    fn coords(u: &FundamentalUnit) -> (i64, i64, u8, i8) {
        (
            u.t.clone().try_into().unwrap(),
            u.u.clone().try_into().unwrap(),
            u.sigma,
            u.norm,
        )
    }

    #[test]
    fn examples() {
        assert_eq!(coords(&unit(10)), (3, 1, 1, -1));
        assert_eq!(coords(&unit(5)), (1, 1, 2, -1));
        assert_eq!(coords(&unit(3)), (2, 1, 1, 1));
        assert_eq!(coords(&unit(2)), (1, 1, 1, -1));
        assert_eq!(coords(&unit(17)), (4, 1, 1, -1));
        assert_eq!(coords(&unit(13)), (3, 1, 2, -1));
        assert_eq!(coords(&unit(21)), (5, 1, 2, 1));
    }

    #[test]
    fn large_period() {
        // classic: x^2 - 61 y^2 = -1 has fundamental solution (29718, 3805)
        // but the maximal order of Q(sqrt 61) has the smaller (39 + 5 sqrt 61)/2
        assert_eq!(coords(&unit(61)), (39, 5, 2, -1));
        let u = unit(94);
        assert_eq!(coords(&u), (2143295, 221064, 1, 1));
    }

    #[test]
    fn regulator_examples() {
        let r = |d| regulator(&make_field(d).unwrap()).unwrap();
        assert!((r(10) - (3.0f64 + 10f64.sqrt()).ln()).abs() < 1e-12);
        assert!((r(10) - 1.81845).abs() < 1e-5);
        assert!((r(5) - 0.48121).abs() < 1e-5);
        assert!((r(2) - 0.88137).abs() < 1e-5);
        assert!(regulator(&make_field(-5).unwrap()).is_err());
    }

    #[test]
    fn p_squared_plus_one_family_has_the_obvious_unit() {
        for p in primes_up_to(2000).into_iter().skip(1) {
            let d = (p * p + 1) as i64;
            if is_squarefree(d).unwrap() {
                assert_eq!(coords(&unit(d)), (p as i64, 1, 1, -1), "p = {p}");
            }
        }
    }

    #[test]
    fn units_satisfy_norm_equation_and_regulator_floor() {
        for d in 2..=10_000i64 {
            if !is_squarefree(d).unwrap() {
                continue;
            }
            let u = unit(d);
            assert!(u.satisfies_norm_equation(d), "d = {d}");
            assert!(u.sigma == 1 || d % 4 == 1);
            assert!(u.regulator >= 0.4812, "d = {d}");
        }
    }

    /// Smallest unit by scanning u upward: for each u, the only candidate t
    /// is the integer nearest sqrt(d u^2 +- sigma^2).
    fn brute_unit(d: i64) -> (i64, i64, u8) {
        let sigmas: &[i64] = if d % 4 == 1 { &[2, 1] } else { &[1] };
        let mut best: Option<(f64, i64, i64, u8)> = None;
        for &sigma in sigmas {
            for u in 1..2_000_000i64 {
                let du2 = d as i128 * (u as i128) * (u as i128);
                let found = [-1i128, 1].iter().find_map(|&s| {
                    let target = du2 + s * (sigma * sigma) as i128;
                    if target < 0 {
                        return None;
                    }
                    let t = (target as u128).sqrt() as i128;
                    (t * t == target).then_some(t as i64)
                });
                if let Some(t) = found {
                    let value = (t as f64 + u as f64 * (d as f64).sqrt()) / sigma as f64;
                    if best.map_or(true, |b| value < b.0) {
                        best = Some((value, t, u, sigma as u8));
                    }
                    break;
                }
            }
        }
        let (_, t, u, sigma) = best.unwrap();
        if sigma == 2 && t % 2 == 0 && u % 2 == 0 {
            (t / 2, u / 2, 1)
        } else {
            (t, u, sigma)
        }
    }

    #[test]
    fn minimality_by_bounded_scan() {
        for d in 2..=500i64 {
            if !is_squarefree(d).unwrap() {
                continue;
            }
            let u = unit(d);
            let (Ok(t), Ok(uu)) = (i64::try_from(u.t.clone()), i64::try_from(u.u.clone())) else {
                continue;
            };
            if uu > 1_000_000 {
                continue;
            }
            let s = u.sigma;
            assert_eq!(brute_unit(d), (t, uu, s), "d = {d}");
        }
    }
}
