//! Exact natural-density estimation at finite prefixes.
//!
//! The density of `B` is the limit of `|B ∩ [1, N]| / N`. At a finite prefix
//! we keep the exact ratio at `N` and at `⌊N/2⌋` and classify with a
//! three-valued verdict: a set is reported `Zero` or `Positive` only when the
//! prefix evidence is clear, otherwise `Inconclusive`.

use std::fmt;

use num_rational::Ratio;
use num_traits::Zero as _;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seq::IndexPredicate;

pub type IndexSet = IndexPredicate;
pub type Fraction = Ratio<u64>;

pub fn fraction_string(r: &Fraction) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn ser_fraction<S: Serializer>(
    r: &Fraction,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fraction_string(r))
}

/// Verdict threshold `τ`, `0 < τ < 1/5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Tau(#[serde(serialize_with = "ser_fraction")] Fraction);

impl Tau {
    pub fn new(tau: Fraction) -> Result<Self> {
        if tau.is_zero() || tau >= Ratio::new(1, 5) {
            return Err(Error::InvalidInput(format!(
                "tau must lie in (0, 1/5), got {}",
                fraction_string(&tau)
            )));
        }
        Ok(Tau(tau))
    }

    pub fn value(&self) -> Fraction {
        self.0
    }
}

impl Default for Tau {
    fn default() -> Self {
        Tau(Ratio::new(1, 100))
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fraction_string(&self.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DensityEstimate {
    pub count: u64,
    pub n: u64,
    #[serde(serialize_with = "ser_fraction")]
    pub value: Fraction,
    pub count_half: u64,
    pub n_half: u64,
    #[serde(serialize_with = "ser_fraction")]
    pub value_half: Fraction,
    #[serde(serialize_with = "ser_fraction")]
    pub stability_gap: Fraction,
}

impl DensityEstimate {
    /// From exact counts at `n` and at `⌊n/2⌋`.
    pub fn from_counts(count: u64, count_half: u64, n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "density estimate needs N >= 2, got {n}"
            )));
        }
        let n_half = n / 2;
        if count > n || count_half > n_half || count_half > count {
            return Err(Error::InvalidInput(format!(
                "inconsistent counts {count_half}/{n_half}, {count}/{n}"
            )));
        }
        let value = Ratio::new(count, n);
        let value_half = Ratio::new(count_half, n_half);
        let stability_gap = if value >= value_half {
            value - value_half
        } else {
            value_half - value
        };
        Ok(DensityEstimate {
            count,
            n,
            value,
            count_half,
            n_half,
            value_half,
            stability_gap,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityClass {
    Zero,
    Positive,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DensityVerdict {
    pub verdict: DensityClass,
    pub tau: Tau,
    pub evidence: DensityEstimate,
}

pub fn prefix_count(set: &IndexSet, n: u64) -> u64 {
    set.count_upto(n)
}

pub fn density_estimate(set: &IndexSet, n: u64) -> Result<DensityEstimate> {
    DensityEstimate::from_counts(set.count_upto(n), set.count_upto(n / 2), n)
}

/// `Zero` when the ratio is at most `τ` and has not grown by more than `τ/10`
/// since the half prefix; `Positive` when it is at least `5τ` and moved by at
/// most `τ`; `Inconclusive` otherwise.
pub fn density_verdict(est: &DensityEstimate, tau: Tau) -> DensityVerdict {
    let t = tau.value();
    let zero = est.value <= t && est.value <= est.value_half + t / 10;
    let positive = est.value >= t * 5 && est.stability_gap <= t;
    let verdict = if zero {
        DensityClass::Zero
    } else if positive {
        DensityClass::Positive
    } else {
        DensityClass::Inconclusive
    };
    DensityVerdict {
        verdict,
        tau,
        evidence: *est,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau100() -> Tau {
        Tau::new(Ratio::new(1, 100)).unwrap()
    }

    #[test]
    fn prefix_count_examples() {
        assert_eq!(prefix_count(&IndexPredicate::PerfectSquare, 10_000), 100);
        assert_eq!(prefix_count(&IndexPredicate::Even, 10), 5);
        let set = IndexPredicate::And(vec![
            IndexPredicate::Even,
            IndexPredicate::not(IndexPredicate::PerfectSquare),
        ]);
        assert_eq!(prefix_count(&set, 10), 4);
    }

    #[test]
    fn estimate_examples() {
        let e = density_estimate(&IndexPredicate::PerfectSquare, 1_000_000).unwrap();
        assert_eq!(e.value, Ratio::new(1, 1000));
        let e = density_estimate(&IndexPredicate::Odd, 1_000_000).unwrap();
        assert_eq!(e.value, Ratio::new(1, 2));
        assert_eq!(e.stability_gap, Ratio::zero());
        let e = density_estimate(&IndexPredicate::explicit(vec![1, 2, 3]).unwrap(), 100).unwrap();
        assert_eq!(e.value, Ratio::new(3, 100));
        assert!(density_estimate(&IndexPredicate::All, 1).is_err());
    }

    #[test]
    fn verdict_examples() {
        let sq = density_estimate(&IndexPredicate::PerfectSquare, 100_000).unwrap();
        assert_eq!(sq.count, 316);
        assert_eq!(density_verdict(&sq, tau100()).verdict, DensityClass::Zero);
        let ev = density_estimate(&IndexPredicate::Even, 100_000).unwrap();
        assert_eq!(
            density_verdict(&ev, tau100()).verdict,
            DensityClass::Positive
        );

        // value exactly 3τ with gap above τ: all 3000 members in the second half
        let late: Vec<u64> = (97_001..=100_000).collect();
        let e = density_estimate(&IndexPredicate::explicit(late).unwrap(), 100_000).unwrap();
        assert_eq!(e.value, Ratio::new(3, 100));
        assert!(e.stability_gap > tau100().value());
        assert_eq!(
            density_verdict(&e, tau100()).verdict,
            DensityClass::Inconclusive
        );
    }

    #[test]
    fn first_half_sets_are_not_zero() {
        // members only in the first half: ratio is falling but still large
        let early: Vec<u64> = (1..=40_000).collect();
        let e = density_estimate(&IndexPredicate::explicit(early).unwrap(), 100_000).unwrap();
        assert_eq!(
            density_verdict(&e, tau100()).verdict,
            DensityClass::Inconclusive
        );
    }

    #[test]
    fn growing_sparse_set_is_not_zero() {
        // value under τ but rising quickly between the two prefixes
        let late: Vec<u64> = (99_500..=100_000).collect();
        let e = density_estimate(&IndexPredicate::explicit(late).unwrap(), 100_000).unwrap();
        assert!(e.value <= tau100().value());
        assert_eq!(
            density_verdict(&e, tau100()).verdict,
            DensityClass::Inconclusive
        );
    }

    #[test]
    fn tau_range() {
        assert!(Tau::new(Ratio::new(0, 1)).is_err());
        assert!(Tau::new(Ratio::new(1, 5)).is_err());
        assert!(Tau::new(Ratio::new(19, 100)).is_ok());
    }

    #[test]
    fn squares_zero_from_ten_thousand() {
        for n in [10_000u64, 20_000, 50_000, 100_000, 1_000_000] {
            let e = density_estimate(&IndexPredicate::PerfectSquare, n).unwrap();
            assert_eq!(
                density_verdict(&e, tau100()).verdict,
                DensityClass::Zero,
                "N={n}"
            );
        }
    }
}
