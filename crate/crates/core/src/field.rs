//! Quadratic field descriptors and the splitting behaviour of odd primes.

use serde::{Deserialize, Serialize};

use crate::arith::{is_perfect_square, is_prime, kronecker, squarefree_decompose};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signature {
    Real,
    Imaginary,
}

/// `Q(sqrt d)` for a square-free radicand `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldDescriptor {
    radicand: i64,
    discriminant: i64,
    signature: Signature,
    omega: u8,
}

impl FieldDescriptor {
    pub fn radicand(&self) -> i64 {
        self.radicand
    }

    /// Fundamental discriminant: `d` if `d = 1 (mod 4)`, else `4d`.
    pub fn discriminant(&self) -> i64 {
        self.discriminant
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    /// Number of roots of unity in the field.
    pub fn omega(&self) -> u8 {
        self.omega
    }

    pub fn is_real(&self) -> bool {
        self.signature == Signature::Real
    }

    pub(crate) fn require_real(&self) -> Result<()> {
        if self.is_real() {
            Ok(())
        } else {
            Err(Error::Signature {
                expected: "real",
                d: self.radicand,
            })
        }
    }

    pub(crate) fn require_imaginary(&self) -> Result<()> {
        if self.is_real() {
            Err(Error::Signature {
                expected: "imaginary",
                d: self.radicand,
            })
        } else {
            Ok(())
        }
    }
}

/// Builds `Q(sqrt n)`, reducing `n` to its square-free kernel first.
pub fn make_field(n: i64) -> Result<FieldDescriptor> {
    if n == 0 || (n > 0 && is_perfect_square(n as u64)) {
        return Err(Error::InvalidRadicand(n));
    }
    let d = squarefree_decompose(n)?.kernel;
    let discriminant = if d.rem_euclid(4) == 1 {
        d
    } else {
        d.checked_mul(4)
            .ok_or_else(|| Error::UnsupportedRange(format!("discriminant of Q(sqrt {d})")))?
    };
    let omega = match discriminant {
        -3 => 6,
        -4 => 4,
        _ => 2,
    };
    Ok(FieldDescriptor {
        radicand: d,
        discriminant,
        signature: if d > 0 {
            Signature::Real
        } else {
            Signature::Imaginary
        },
        omega,
    })
}

pub(crate) fn require_odd_prime(p: u64) -> Result<()> {
    if p % 2 == 1 && is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotOddPrime(p))
    }
}

/// Residual degree of an unramified odd prime: 1 if split, 2 if inert.
pub fn residual_degree(field: &FieldDescriptor, p: u64) -> Result<u8> {
    require_odd_prime(p)?;
    match kronecker(field.discriminant, p as i64) {
        1 => Ok(1),
        -1 => Ok(2),
        _ => Err(Error::Ramified {
            p,
            d: field.radicand,
        }),
    }
}

/// Whether `p` divides the discriminant.
pub fn is_ramified(field: &FieldDescriptor, p: u64) -> bool {
    field.discriminant.unsigned_abs() % p == 0
}
