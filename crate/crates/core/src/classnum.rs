//! Class numbers of quadratic fields and the upper bounds used to certify
//! `h < p`.
//!
//! Imaginary fields have two independent exact routes: counting reduced
//! forms and the finite Dirichlet character sum. Real fields go through the
//! log-sine form of the analytic class number formula, evaluated at high
//! precision and rounded with an integrality check.

use astro_float::BigFloat;
use num_integer::{Integer, Roots};
use serde::{Deserialize, Serialize};

use crate::arith::kronecker;
use crate::error::{Error, Result};
use crate::field::FieldDescriptor;
use crate::precision::{Ctx, Precision};
use crate::unit::{fundamental_unit_with, regulator_hp};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Maximum distance of the analytic value from the integer it rounds to.
pub const INTEGRALITY_TOLERANCE: f64 = 0.01;

/// `2 + gamma - ln(pi)`.
pub fn kappa2() -> f64 {
    2.0 + EULER_GAMMA - std::f64::consts::PI.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ReducedForms,
    DirichletSum,
    AnalyticReal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassNumberCertificate {
    pub field: FieldDescriptor,
    pub h: u64,
    pub method: Method,
    /// Louboutin bound (imaginary) or Le bound (real).
    pub bound: Option<f64>,
    /// `L(1, chi)` used for a real field.
    pub l_value: Option<f64>,
}

/// Number of reduced primitive forms `(a, b, c)` of discriminant `d_K < 0`.
pub fn h_imaginary_forms(field: &FieldDescriptor) -> Result<u64> {
    field.require_imaginary()?;
    let disc = field.discriminant();
    let abs = disc.unsigned_abs();
    let mut h = 0u64;
    let mut b = (abs % 2) as u64;
    while 3 * b * b <= abs {
        let n = (b * b + abs) / 4;
        let mut a = b.max(1);
        while a * a <= n {
            if n % a == 0 {
                let c = n / a;
                if a.gcd(&b).gcd(&c) == 1 {
                    h += if b == 0 || a == b || a == c { 1 } else { 2 };
                }
            }
            a += 1;
        }
        b += 2;
    }
    Ok(h)
}

/// `h = -(1/|d|) sum_{a=1}^{|d|-1} (d|a) a`, exact in integers.
pub fn h_imaginary_analytic(field: &FieldDescriptor) -> Result<u64> {
    field.require_imaginary()?;
    let disc = field.discriminant();
    if disc == -3 || disc == -4 {
        return Ok(1);
    }
    let abs = disc.unsigned_abs() as i64;
    let sum: i128 = (1..abs)
        .map(|a| kronecker(disc, a) as i128 * a as i128)
        .sum();
    let (q, r) = (-sum).div_rem(&(abs as i128));
    if r != 0 || q <= 0 {
        return Err(Error::Internal(format!(
            "character sum {sum} for discriminant {disc} is not a positive multiple of {abs}"
        )));
    }
    Ok(q as u64)
}

/// `sum_{1 <= a < D/2} (D|a) ln sin(pi a / D)` for `D > 0`.
///
/// The sines come from rotating `e^{i pi / D}` so only two transcendental
/// calls are made; the sum is taken as the log of a ratio of two products.
fn half_log_sine_sum(disc: i64, ctx: &mut Ctx) -> BigFloat {
    let pi = ctx.pi();
    let theta = ctx.div(&pi, &ctx.int(disc));
    let (c1, s1) = (ctx.cos(&theta), ctx.sin(&theta));
    let (mut c, mut s) = (c1.clone(), s1.clone());
    let mut plus = ctx.int(1);
    let mut minus = ctx.int(1);
    for a in 1..=(disc - 1) / 2 {
        match kronecker(disc, a) {
            1 => plus = ctx.mul(&plus, &s),
            -1 => minus = ctx.mul(&minus, &s),
            _ => {}
        }
        let next_c = ctx.sub(&ctx.mul(&c, &c1), &ctx.mul(&s, &s1));
        let next_s = ctx.add(&ctx.mul(&s, &c1), &ctx.mul(&c, &s1));
        c = next_c;
        s = next_s;
    }
    let ratio = ctx.div(&plus, &minus);
    ctx.ln(&ratio)
}

/// Analytic class number of a real field with its intermediate values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealClassNumber {
    pub h: u64,
    /// Value before rounding.
    pub raw: f64,
    pub l_value: f64,
    pub regulator: f64,
    pub bits: usize,
}

impl RealClassNumber {
    pub fn residual(&self) -> f64 {
        (self.raw - self.h as f64).abs()
    }
}

fn real_class_number_at(field: &FieldDescriptor, prec: Precision) -> Result<RealClassNumber> {
    let unit = fundamental_unit_with(field, prec)?;
    let mut ctx = Ctx::new(prec);
    let disc = field.discriminant();
    let half = half_log_sine_sum(disc, &mut ctx);
    let reg = regulator_hp(&unit.t, &unit.u, unit.sigma, field.radicand(), &mut ctx);
    // h = sqrt(D) L / (2R) with L = -2 half / sqrt(D)
    let raw = ctx.div(&half, &reg).neg();
    let root = ctx.sqrt(&ctx.int(disc));
    let l = ctx.div(&ctx.mul(&half, &ctx.int(-2)), &root);
    let raw = ctx.to_f64(&raw);
    let rounded = raw.round();
    Ok(RealClassNumber {
        h: if rounded >= 1.0 { rounded as u64 } else { 0 },
        raw,
        l_value: ctx.to_f64(&l),
        regulator: unit.regulator,
        bits: prec.bits(),
    })
}

/// Analytic class number with one automatic precision escalation.
pub fn real_class_number(field: &FieldDescriptor, prec: Precision) -> Result<RealClassNumber> {
    field.require_real()?;
    let first = real_class_number_at(field, prec)?;
    if first.h >= 1 && first.residual() < INTEGRALITY_TOLERANCE {
        return Ok(first);
    }
    let second = real_class_number_at(field, prec.escalated())?;
    if second.h >= 1 && second.residual() < INTEGRALITY_TOLERANCE {
        return Ok(second);
    }
    Err(Error::Precision {
        discriminant: field.discriminant(),
        bits: second.bits,
        value: second.raw.to_string(),
        tolerance: INTEGRALITY_TOLERANCE,
    })
}

pub fn h_real_analytic(field: &FieldDescriptor) -> Result<u64> {
    Ok(real_class_number(field, Precision::default())?.h)
}

/// `L(1, chi_D) = -(1/sqrt D) sum_{a=1}^{D-1} (D|a) ln sin(pi a / D)` for a real field.
pub fn l_value(field: &FieldDescriptor, prec: Precision) -> Result<f64> {
    field.require_real()?;
    let mut ctx = Ctx::new(prec);
    let disc = field.discriminant();
    let half = half_log_sine_sum(disc, &mut ctx);
    let root = ctx.sqrt(&ctx.int(disc));
    let l = ctx.div(&ctx.mul(&half, &ctx.int(-2)), &root);
    Ok(ctx.to_f64(&l))
}

/// Class number with the default method for the field's signature and the
/// matching upper bound.
pub fn class_number_certificate(field: &FieldDescriptor, prec: Precision) -> Result<ClassNumberCertificate> {
    if field.is_real() {
        let real = real_class_number(field, prec)?;
        Ok(ClassNumberCertificate {
            field: *field,
            h: real.h,
            method: Method::AnalyticReal,
            bound: Some(le_bound(field)?),
            l_value: Some(real.l_value),
        })
    } else {
        Ok(ClassNumberCertificate {
            field: *field,
            h: h_imaginary_forms(field)?,
            method: Method::ReducedForms,
            bound: Some(louboutin_bound(field)?),
            l_value: None,
        })
    }
}

/// Louboutin: `h <= omega sqrt|d| / (4 pi) * (ln|d| + 3/2)`.
pub fn louboutin_bound(field: &FieldDescriptor) -> Result<f64> {
    field.require_imaginary()?;
    let abs = field.discriminant().unsigned_abs() as f64;
    Ok(field.omega() as f64 * abs.sqrt() / (4.0 * std::f64::consts::PI) * (abs.ln() + 1.5))
}

/// Le: `h <= sqrt(d_K) / 2` for real fields.
pub fn le_bound(field: &FieldDescriptor) -> Result<f64> {
    field.require_real()?;
    Ok((field.discriminant() as f64).sqrt() / 2.0)
}

/// `L(1, chi) <= (ln d_K + kappa2) / 4`, valid when 2 ramifies.
pub fn l_upper_bound(field: &FieldDescriptor) -> Result<f64> {
    field.require_real()?;
    let disc = field.discriminant();
    if disc % 2 != 0 {
        return Err(Error::Precondition(format!(
            "L(1, chi) bound needs an even discriminant (2 ramified), got {disc}"
        )));
    }
    Ok(((disc as f64).ln() + kappa2()) / 4.0)
}

/// Sufficient condition for `h(Q(sqrt(p^2 + 1))) < p`:
/// `ln(4(p^2+1)) / ln(16p^4 + 8p^2 + 1) + 1 / ln(2p^2 + 1 + 2p sqrt(p^2+1)) < 1`.
pub fn real_inequality_check(p: u64) -> bool {
    inequality_bracket(p) < 1.0
}

/// Left-hand side of [`real_inequality_check`].
pub fn inequality_bracket(p: u64) -> f64 {
    let p = p as f64;
    let p2 = p * p;
    let first = (4.0 * (p2 + 1.0)).ln() / (16.0 * p2 * p2 + 8.0 * p2 + 1.0).ln();
    let second = 1.0 / (2.0 * p2 + 1.0 + 2.0 * p * (p2 + 1.0).sqrt()).ln();
    first + second
}

/// Integer square root helper for callers sizing sweeps.
pub fn isqrt(n: u64) -> u64 {
    n.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    fn k(d: i64) -> FieldDescriptor {
        make_field(d).unwrap()
    }

    #[test]
    fn forms_examples() {
        assert_eq!(h_imaginary_forms(&k(-22)), Ok(2));
        assert_eq!(h_imaginary_forms(&k(-21)), Ok(4));
        assert_eq!(h_imaginary_forms(&k(-1)), Ok(1));
        assert_eq!(h_imaginary_forms(&k(-3)), Ok(1));
        assert_eq!(h_imaginary_forms(&k(-5)), Ok(2));
        assert_eq!(h_imaginary_forms(&k(-47)), Ok(5));
        assert_eq!(h_imaginary_forms(&k(-163)), Ok(1));
        assert!(h_imaginary_forms(&k(10)).is_err());
    }

    #[test]
    fn analytic_examples() {
        assert_eq!(h_imaginary_analytic(&k(-22)), Ok(2));
        assert_eq!(h_imaginary_analytic(&k(-42)), Ok(4));
        assert_eq!(h_imaginary_analytic(&k(-7)), Ok(1));
        assert_eq!(h_imaginary_analytic(&k(-3)), Ok(1));
        assert_eq!(h_imaginary_analytic(&k(-1)), Ok(1));
    }

    #[test]
    fn forms_and_character_sum_agree_on_small_discriminants() {
        for n in 1..=2500i64 {
            let Ok(f) = make_field(-n) else { continue };
            if f.radicand() != -n {
                continue;
            }
            assert_eq!(h_imaginary_forms(&f), h_imaginary_analytic(&f), "d = {}", -n);
        }
    }

    #[test]
    fn real_examples() {
        let r = real_class_number(&k(10), Precision::default()).unwrap();
        assert_eq!(r.h, 2);
        assert!((r.l_value - 1.150_087).abs() < 1e-6, "{}", r.l_value);
        assert_eq!(h_real_analytic(&k(5)), Ok(1));
        assert_eq!(h_real_analytic(&k(2)), Ok(1));
        assert_eq!(h_real_analytic(&k(79)), Ok(3));
        assert_eq!(h_real_analytic(&k(229)), Ok(3));
        assert_eq!(h_real_analytic(&k(15)), Ok(2));
        assert_eq!(h_real_analytic(&k(35)), Ok(2));
        assert_eq!(h_real_analytic(&k(21)), Ok(1));
        assert!(h_real_analytic(&k(-5)).is_err());
    }

    #[test]
    fn real_residual_is_small() {
        for d in [3i64, 6, 7, 11, 13, 14, 19, 23, 290, 1370] {
            let r = real_class_number(&k(d), Precision::default()).unwrap();
            assert!(r.residual() < 1e-9, "d = {d}: {r:?}");
        }
    }

    #[test]
    fn bound_examples() {
        assert!((louboutin_bound(&k(-22)).unwrap() - 8.924).abs() < 1e-3);
        let expected = 6.0 * 3f64.sqrt() / (4.0 * std::f64::consts::PI) * (3f64.ln() + 1.5);
        assert!((louboutin_bound(&k(-3)).unwrap() - expected).abs() < 1e-12);
        assert!((louboutin_bound(&k(-3)).unwrap() - 2.14904).abs() < 1e-5);
        assert!((le_bound(&k(10)).unwrap() - 3.162).abs() < 1e-3);
        assert!((le_bound(&k(5)).unwrap() - 1.118).abs() < 1e-3);
        assert!((kappa2() - 1.432_49).abs() < 1e-5);
        assert!((l_upper_bound(&k(10)).unwrap() - 1.280_34).abs() < 1e-5);
        assert!((l_upper_bound(&k(290)).unwrap() - 2.122_17).abs() < 1e-5);
        assert!(matches!(l_upper_bound(&k(5)), Err(Error::Precondition(_))));
        assert!(louboutin_bound(&k(10)).is_err());
        assert!(le_bound(&k(-10)).is_err());
    }

    #[test]
    fn inequality_examples() {
        assert!((inequality_bracket(3) - 0.786).abs() < 1e-3);
        assert!(real_inequality_check(3));
        assert!(real_inequality_check(17));
    }
}
