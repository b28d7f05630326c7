//! Working precision for the analytic evaluations, backed by `astro-float`.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;

/// Binary working precision for analytic sums and logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    bits: usize,
}

impl Precision {
    pub const DEFAULT_BITS: usize = 96;
    pub const MIN_BITS: usize = 64;
    pub const ENV_VAR: &'static str = "PRK_PRECISION_BITS";

    pub fn new(bits: usize) -> Self {
        Self {
            bits: bits.max(Self::MIN_BITS),
        }
    }

    /// Reads `PRK_PRECISION_BITS`, falling back to the default on absence or garbage.
    pub fn from_env() -> Self {
        std::env::var(Self::ENV_VAR)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(Self::new)
            .unwrap_or_default()
    }

    pub fn bits(self) -> usize {
        self.bits
    }

    pub fn escalated(self) -> Self {
        Self::new(self.bits * 2)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self::new(Self::DEFAULT_BITS)
    }
}

/// A precision plus the constant cache astro-float needs for `ln` and `pi`.
pub(crate) struct Ctx {
    pub p: usize,
    pub rm: RoundingMode,
    pub cc: Consts,
}

impl Ctx {
    pub fn new(prec: Precision) -> Self {
        Self {
            p: prec.bits(),
            rm: RoundingMode::ToEven,
            cc: Consts::new().expect("astro-float constant cache"),
        }
    }

    pub fn int(&self, v: i64) -> BigFloat {
        BigFloat::from_i64(v, self.p)
    }

    pub fn big(&mut self, v: &BigInt) -> BigFloat {
        BigFloat::parse(&v.to_string(), Radix::Dec, self.p, self.rm, &mut self.cc)
    }

    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, self.rm)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, self.rm)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, self.rm)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, self.rm)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, self.rm)
    }

    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.p, self.rm)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.p, self.rm, &mut self.cc)
    }

    pub fn sin(&mut self, a: &BigFloat) -> BigFloat {
        a.sin(self.p, self.rm, &mut self.cc)
    }

    pub fn cos(&mut self, a: &BigFloat) -> BigFloat {
        a.cos(self.p, self.rm, &mut self.cc)
    }

    pub fn to_f64(&mut self, a: &BigFloat) -> f64 {
        a.format(Radix::Dec, self.rm, &mut self.cc)
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(f64::NAN)
    }
}
