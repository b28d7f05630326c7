//! Consecutive-field scans over ranges of primes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{primes_between, squarefree_decompose};
use crate::classnum::{h_imaginary_forms, louboutin_bound};
use crate::error::{Error, Result};
use crate::field::make_field;
use crate::precision::Precision;
use crate::prationality::{is_p_rational_real_with, Outcome, PRationalityVerdict};

/// Which radicands `-(p - j)` or `-p(p - j)` a scan walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "shifted")]
    Shifted,
    #[serde(rename = "pmul")]
    PMultiplied,
}

impl Variant {
    pub fn radicand(self, p: u64, j: u64) -> i64 {
        let shifted = p as i64 - j as i64;
        match self {
            Variant::Shifted => -shifted,
            Variant::PMultiplied => -(p as i64) * shifted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImaginaryEntry {
    pub j: u64,
    pub radicand: i64,
    pub kernel: i64,
    pub h: u64,
    pub louboutin_bound: f64,
    pub p_divides_h: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImaginaryRow {
    pub p: u64,
    pub entries: Vec<ImaginaryEntry>,
    /// No computed entry has `p | h`.
    pub simultaneous: bool,
    pub notes: Vec<String>,
}

impl ImaginaryRow {
    pub fn class_numbers(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.h).collect()
    }
}

fn imaginary_row(p: u64, k: u64, variant: Variant) -> Result<ImaginaryRow> {
    let mut entries = Vec::with_capacity(k as usize);
    let mut notes = Vec::new();
    for j in 1..=k {
        if j >= p {
            notes.push(format!("j = {j} skipped: radicand {} is not negative", variant.radicand(p, j)));
            continue;
        }
        let radicand = variant.radicand(p, j);
        let kernel = squarefree_decompose(radicand)?.kernel;
        let field = make_field(kernel)?;
        let h = h_imaginary_forms(&field)?;
        entries.push(ImaginaryEntry {
            j,
            radicand,
            kernel,
            h,
            louboutin_bound: louboutin_bound(&field)?,
            p_divides_h: h % p == 0,
        });
    }
    Ok(ImaginaryRow {
        p,
        simultaneous: entries.iter().all(|e| !e.p_divides_h),
        entries,
        notes,
    })
}

/// Class numbers of `Q(sqrt(r_j))`, `j = 1..k`, for every prime
/// `from <= p <= to`, in ascending order of `p`.
pub fn scan_consecutive_imaginary(k: u64, variant: Variant, from: u64, to: u64) -> Result<Vec<ImaginaryRow>> {
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    if from < 5 {
        return Err(Error::Precondition(format!("scan starts at {from}; primes must be at least 5")));
    }
    primes_between(from, to)
        .into_par_iter()
        .map(|p| imaginary_row(p, k, variant))
        .collect()
}

/// Offsets `c` of the real family `p^2 + c`.
pub const REAL_FAMILY: [i64; 4] = [1, -2, 2, 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub offset: i64,
    pub value: i64,
    pub squarefree: bool,
    pub verdict: Option<PRationalityVerdict>,
}

impl FamilyMember {
    pub fn h(&self) -> Option<u64> {
        self.verdict.as_ref()?.class_numbers().next().map(|c| c.h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealFamilyRow {
    pub p: u64,
    pub members: Vec<FamilyMember>,
    pub all_squarefree: bool,
    /// Every member is `p`-rational; absent unless all are square-free.
    pub simultaneous: Option<bool>,
}

fn real_row(p: u64, prec: Precision) -> Result<RealFamilyRow> {
    let square = (p * p) as i64;
    let mut members = REAL_FAMILY
        .iter()
        .map(|&offset| {
            let value = square + offset;
            Ok(FamilyMember {
                offset,
                value,
                squarefree: squarefree_decompose(value)?.root == 1,
                verdict: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_squarefree = members.iter().all(|m| m.squarefree);
    let mut simultaneous = None;
    if all_squarefree {
        for m in &mut members {
            m.verdict = Some(is_p_rational_real_with(&make_field(m.value)?, p, prec)?);
        }
        simultaneous = Some(
            members
                .iter()
                .all(|m| m.verdict.as_ref().is_some_and(|v| v.outcome == Outcome::Rational)),
        );
    }
    Ok(RealFamilyRow {
        p,
        members,
        all_squarefree,
        simultaneous,
    })
}

/// Square-free flags for `p^2 + 1, p^2 - 2, p^2 + 2, p^2 + 4` over odd
/// primes in `[from, to]`, with verdicts where all four are square-free.
pub fn scan_real_family(from: u64, to: u64) -> Result<Vec<RealFamilyRow>> {
    scan_real_family_with(from, to, Precision::default())
}

pub fn scan_real_family_with(from: u64, to: u64, prec: Precision) -> Result<Vec<RealFamilyRow>> {
    primes_between(from.max(3), to)
        .into_par_iter()
        .map(|p| real_row(p, prec))
        .collect()
}
