use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Congruence {
    pub residue: BigInt,
    pub modulus: BigInt,
}

/// Solution of a system of congruences with pairwise-coprime moduli.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrtPlan {
    pub congruences: Vec<Congruence>,
    /// Combined residue, `0 <= residue < modulus`.
    pub residue: BigInt,
    /// Product of the moduli.
    pub modulus: BigInt,
}

impl CrtPlan {
    /// Re-checks every congruence by direct remainder.
    pub fn verify(&self) -> bool {
        self.congruences
            .iter()
            .all(|c| (&self.residue - &c.residue).mod_floor(&c.modulus).is_zero())
    }
}

/// Combines `x = r_i (mod m_i)` into a single residue modulo `prod m_i`.
pub fn crt_combine(pairs: &[(BigInt, BigInt)]) -> Result<CrtPlan> {
    for (i, (_, m)) in pairs.iter().enumerate() {
        if !m.is_positive() {
            return Err(Error::Precondition(format!(
                "modulus at position {i} must be positive, got {m}"
            )));
        }
    }
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            if !pairs[i].1.gcd(&pairs[j].1).is_one() {
                return Err(Error::InvalidModuli {
                    i,
                    j,
                    first: pairs[i].1.to_string(),
                    second: pairs[j].1.to_string(),
                });
            }
        }
    }

    let mut residue = BigInt::zero();
    let mut modulus = BigInt::one();
    for (r, m) in pairs {
        // x = residue + modulus * k with modulus * k = r - residue (mod m)
        let ext = modulus.extended_gcd(m);
        let inv = ext.x.mod_floor(m);
        let k = ((r - &residue) * inv).mod_floor(m);
        residue += &modulus * k;
        modulus *= m;
        residue = residue.mod_floor(&modulus);
    }

    Ok(CrtPlan {
        congruences: pairs
            .iter()
            .map(|(r, m)| Congruence {
                residue: r.clone(),
                modulus: m.clone(),
            })
            .collect(),
        residue,
        modulus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairs(v: &[(i64, i64)]) -> Vec<(BigInt, BigInt)> {
        v.iter().map(|&(r, m)| (r.into(), m.into())).collect()
    }

    fn exhaustive(v: &[(i64, i64)]) -> i64 {
        let d: i64 = v.iter().map(|p| p.1).product();
        (0..d)
            .find(|x| v.iter().all(|&(r, m)| (x - r).rem_euclid(m) == 0))
            .unwrap()
    }

    #[test]
    fn examples() {
        for v in [&[(1, 4), (2, 9)][..], &[(0, 25)], &[(1, 4), (1, 9)]] {
            let plan = crt_combine(&pairs(v)).unwrap();
            assert_eq!(plan.residue, exhaustive(v).into());
            assert!(plan.verify());
        }
        let plan = crt_combine(&pairs(&[(1, 4), (2, 9)])).unwrap();
        assert_eq!(plan.residue, 29.into());
        assert_eq!(plan.modulus, 36.into());
    }

    #[test]
    fn negative_residues_are_normalised() {
        let plan = crt_combine(&pairs(&[(-1, 4), (-2, 25)])).unwrap();
        assert_eq!(plan.residue, exhaustive(&[(-1, 4), (-2, 25)]).into());
    }

    #[test]
    fn non_coprime_moduli_name_the_pair() {
        let err = crt_combine(&pairs(&[(1, 4), (2, 9), (0, 6)])).unwrap_err();
        assert_eq!(
            err,
            Error::InvalidModuli {
                i: 0,
                j: 2,
                first: "4".into(),
                second: "6".into()
            }
        );
    }

    proptest! {
        #[test]
        fn combined_residue_satisfies_every_congruence(
            raw in proptest::collection::vec((any::<i32>(), 2u32..200), 1..6)
        ) {
            let mut chosen: Vec<(BigInt, BigInt)> = Vec::new();
            for (r, m) in raw {
                let m = BigInt::from(m);
                if chosen.iter().all(|(_, other)| other.gcd(&m).is_one()) {
                    chosen.push((BigInt::from(r), m));
                }
            }
            let plan = crt_combine(&chosen).unwrap();
            prop_assert!(plan.residue >= BigInt::zero() && plan.residue < plan.modulus);
            for (r, m) in &chosen {
                prop_assert!((&plan.residue - r).mod_floor(m).is_zero());
            }
        }
    }
}
