use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

/// Residue `a + b sqrt(d)` in `Z[sqrt d] / M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadRingElement {
    a: BigInt,
    b: BigInt,
    d: i64,
    modulus: BigInt,
}

impl QuadRingElement {
    /// Builds a reduced element. Panics when `modulus < 2`.
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, d: i64, modulus: impl Into<BigInt>) -> Self {
        let modulus = modulus.into();
        assert!(modulus >= BigInt::from(2), "modulus must be at least 2");
        Self {
            a: a.into().mod_floor(&modulus),
            b: b.into().mod_floor(&modulus),
            d,
            modulus,
        }
    }

    pub fn one(d: i64, modulus: impl Into<BigInt>) -> Self {
        Self::new(1, 0, d, modulus)
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn radicand(&self) -> i64 {
        self.d
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    /// `(a1 + b1 sqrt d)(a2 + b2 sqrt d) = (a1 a2 + d b1 b2) + (a1 b2 + a2 b1) sqrt d`.
    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.d, other.d);
        debug_assert_eq!(self.modulus, other.modulus);
        let a = &self.a * &other.a + &self.b * &other.b * self.d;
        let b = &self.a * &other.b + &other.a * &self.b;
        Self {
            a: a.mod_floor(&self.modulus),
            b: b.mod_floor(&self.modulus),
            d: self.d,
            modulus: self.modulus.clone(),
        }
    }
}

/// `base^e` by square-and-multiply.
pub fn quad_ring_pow(base: &QuadRingElement, e: &BigInt) -> QuadRingElement {
    let mut acc = QuadRingElement::one(base.d, base.modulus.clone());
    let bits = e.bits();
    for i in (0..bits).rev() {
        acc = acc.mul(&acc);
        if e.bit(i) {
            acc = acc.mul(base);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let x = QuadRingElement::new(3, 1, 10, 1000);
        let cube = quad_ring_pow(&x, &3.into());
        assert_eq!((cube.a().clone(), cube.b().clone()), (117.into(), 37.into()));
        assert!(quad_ring_pow(&x, &0.into()).is_one());
        let y = QuadRingElement::new(3, 1, 10, 7);
        assert_eq!(quad_ring_pow(&y, &1.into()), y);
    }

    #[test]
    fn negative_inputs_reduce_into_range() {
        let x = QuadRingElement::new(-3, -11, -5, 7);
        assert_eq!((x.a().clone(), x.b().clone()), (4.into(), 3.into()));
    }

    proptest! {
        #[test]
        fn pow_matches_repeated_multiplication(a in 0i64..10_000, b in 0i64..10_000, d in -50i64..50, m in 2i64..100_000, e in 0u32..=64) {
            let x = QuadRingElement::new(a, b, d, m);
            let mut naive = QuadRingElement::one(d, m);
            for _ in 0..e {
                naive = naive.mul(&x);
            }
            let fast = quad_ring_pow(&x, &BigInt::from(e));
            prop_assert!(fast.a() < fast.modulus() && fast.b() < fast.modulus());
            prop_assert_eq!(fast, naive);
        }
    }
}
