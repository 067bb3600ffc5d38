//! Verdict engines for (rough) statistical convergence and its relatives.
//!
//! Every engine works on a finite prefix `1..=N` and truncates "for every
//! ε > 0" to a finite decreasing [`EpsSchedule`], so a `Yes` is always
//! relative to the schedule, `N` and `τ` it was computed with.

mod bounded;
mod limit_set;

pub use bounded::{
    stat_bounded, stat_cauchy, stat_cluster_points, BoundedVerdict, CauchyPair, CauchyVerdict,
    ClusterPoint, ClusterReport, ClusterVerdict,
};
pub use limit_set::{
    rough_limit_set, stat_limit_set, ClosedInterval, Grid, GridPoint, LimitSetEstimate,
};

use serde::Serialize;

use crate::density::{
    density_verdict, DensityClass, DensityEstimate, DensityVerdict, IndexSet, Tau,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::pm::{PartialMetricSpace, RealPoint};
use crate::seq::{IndexPredicate, SequenceSpec};
use crate::CMP_TOL;

/// Strictly decreasing positive tolerances standing in for "every ε > 0".
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EpsSchedule(Vec<f64>);

impl EpsSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("schedule must be nonempty".into()));
        }
        if values.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidInput(
                "schedule values must be positive".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidInput(
                "schedule must be strictly decreasing".into(),
            ));
        }
        Ok(EpsSchedule(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn smallest(&self) -> f64 {
        *self.0.last().unwrap()
    }

    pub fn largest(&self) -> f64 {
        self.0[0]
    }
}

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule(vec![1.0, 0.5, 0.1, 0.05, 0.01])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    RoughStat,
    Stat,
    Rough,
    StatCauchy,
    StatBounded,
}

/// Density evidence at one level: a tolerance `ε`, or a bound `M` for
/// boundedness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelEvidence {
    pub level: f64,
    pub density: DensityVerdict,
}

/// Tail-supremum evidence for classical rough convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEvidence {
    pub window_start: u64,
    pub window_end: u64,
    pub first_half_sup: f64,
    pub second_half_sup: f64,
    pub tail_sup: f64,
    /// Window indices with value at or above `yes_bound`.
    pub window_exceedances: u64,
    /// `r + smallest ε`: the sup must stay strictly below this for `Yes`.
    pub yes_bound: f64,
    /// `r + largest ε`: both half sups above this give `No`.
    pub no_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceVerdict {
    pub verdict: Verdict,
    pub mode: Mode,
    pub levels: Vec<LevelEvidence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailEvidence>,
}

impl ConvergenceVerdict {
    /// The level with the largest density, the most damaging evidence.
    pub fn worst_level(&self) -> Option<&LevelEvidence> {
        self.levels
            .iter()
            .fold(None, |best: Option<&LevelEvidence>, e| match best {
                Some(b) if b.density.evidence.value >= e.density.evidence.value => Some(b),
                _ => Some(e),
            })
    }
}

/// `Yes` when every level is `Zero`, `No` when some level is `Positive`.
pub(crate) fn all_zero(levels: &[LevelEvidence]) -> Verdict {
    if levels
        .iter()
        .all(|e| e.density.verdict == DensityClass::Zero)
    {
        Verdict::Yes
    } else if levels
        .iter()
        .any(|e| e.density.verdict == DensityClass::Positive)
    {
        Verdict::No
    } else {
        Verdict::Inconclusive
    }
}

fn check_n(n: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "prefix length must be at least 2, got {n}"
        )));
    }
    Ok(())
}

fn check_r(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!(
            "roughness must be nonnegative, got {r}"
        )));
    }
    Ok(())
}

/// For each threshold `t`, the exact number of `k` in `1..=n/2` and in
/// `1..=n` with `f(k) >= t - δ`.
pub(crate) fn threshold_counts<F>(n: u64, thresholds: &[f64], f: F) -> Result<Vec<(u64, u64)>>
where
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    let half = n / 2;
    let width = thresholds.len();
    let acc = exec::fold_range(
        1..=n,
        Ok(vec![(0u64, 0u64); width]),
        |acc: Result<Vec<(u64, u64)>>, k| {
            let mut acc = acc?;
            let v = f(k)?;
            for (slot, &t) in acc.iter_mut().zip(thresholds) {
                if v >= t - CMP_TOL {
                    slot.1 += 1;
                    if k <= half {
                        slot.0 += 1;
                    }
                }
            }
            Ok(acc)
        },
        |a, b| {
            let (mut a, b) = (a?, b?);
            for (x, y) in a.iter_mut().zip(b) {
                x.0 += y.0;
                x.1 += y.1;
            }
            Ok(a)
        },
    )?;
    Ok(acc)
}

pub(crate) fn levels_from_counts(
    levels: &[f64],
    counts: &[(u64, u64)],
    n: u64,
    tau: Tau,
) -> Result<Vec<LevelEvidence>> {
    levels
        .iter()
        .zip(counts)
        .map(|(&level, &(half, full))| {
            let est = DensityEstimate::from_counts(full, half, n)?;
            Ok(LevelEvidence {
                level,
                density: density_verdict(&est, tau),
            })
        })
        .collect()
}

/// A function of the index with domain checks on the sequence values.
pub(crate) fn deviation_fn<'a>(
    space: &'a PartialMetricSpace,
    seq: &'a SequenceSpec,
    x: f64,
) -> impl Fn(u64) -> Result<f64> + Sync + Send + 'a {
    move |k| {
        let v = seq.value(k)?;
        space.check(v)?;
        Ok(space.deviation(v, x))
    }
}

/// `{n <= N : |p(x_n, x) - p(x, x)| >= r + ε}` as an explicit index list.
pub fn exceedance_indices(
    space: &PartialMetricSpace,
    seq: &SequenceSpec,
    x: RealPoint,
    r: f64,
    eps: f64,
    n: u64,
) -> Result<IndexSet> {
    check_r(r)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "ε must be positive, got {eps}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("prefix length must be positive".into()));
    }
    space.check(x.value())?;
    let dev = deviation_fn(space, seq, x.value());
    let threshold = r + eps;
    let mut out = Vec::new();
    for k in 1..=n {
        if dev(k)? >= threshold - CMP_TOL {
            out.push(k);
        }
    }
    Ok(IndexPredicate::Explicit(out.into()))
}

/// r-statistical convergence of `seq` to `x`: for each scheduled ε, the
/// exceedance set at `r + ε` must have density zero. With `r = 0` this is
/// plain statistical convergence.
pub fn rough_stat_convergent(
    space: &PartialMetricSpace,
    seq: &SequenceSpec,
    x: RealPoint,
    r: f64,
    schedule: &EpsSchedule,
    n: u64,
    tau: Tau,
) -> Result<ConvergenceVerdict> {
    check_r(r)?;
    check_n(n)?;
    space.check(x.value())?;
    let thresholds: Vec<f64> = schedule.values().iter().map(|e| r + e).collect();
    let counts = threshold_counts(n, &thresholds, deviation_fn(space, seq, x.value()))?;
    let levels = levels_from_counts(schedule.values(), &counts, n, tau)?;
    Ok(ConvergenceVerdict {
        verdict: all_zero(&levels),
        mode: if r == 0.0 {
            Mode::Stat
        } else {
            Mode::RoughStat
        },
        levels,
        tail: None,
    })
}

pub fn stat_convergent(
    space: &PartialMetricSpace,
    seq: &SequenceSpec,
    x: RealPoint,
    schedule: &EpsSchedule,
    n: u64,
    tau: Tau,
) -> Result<ConvergenceVerdict> {
    rough_stat_convergent(space, seq, x, 0.0, schedule, n, tau)
}

/// Fraction `f` of the prefix that is discarded before the tail window
/// `[⌈N·f⌉, N]`, `0 < f < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TailFraction(f64);

impl TailFraction {
    pub fn new(f: f64) -> Result<Self> {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidInput(format!(
                "tail fraction must lie in (0, 1), got {f}"
            )));
        }
        Ok(TailFraction(f))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for TailFraction {
    fn default() -> Self {
        TailFraction(0.5)
    }
}

/// Tail-sup test of `limsup f(n) <= r` on the window `[⌈N·f⌉, N]`.
///
/// `Yes` needs the window sup strictly below `r + ε_min` and the later half of
/// the window not exceeding the earlier half by more than `ε_min / 10`. `No`
/// needs both halves above `r + ε_max`.
pub(crate) fn tail_verdict<F>(
    f: F,
    r: f64,
    schedule: &EpsSchedule,
    n: u64,
    tail: TailFraction,
) -> Result<(Verdict, TailEvidence)>
where
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    check_r(r)?;
    let start = ((n as f64 * tail.value()).ceil() as u64).max(1);
    if n < 2 || start >= n {
        return Err(Error::InvalidInput(format!(
            "tail window [{start}, {n}] needs at least two indices"
        )));
    }
    let mid = start + (n - start).div_ceil(2);
    let yes_bound = r + schedule.smallest();
    let no_bound = r + schedule.largest();
    // (sup, count of values >= yes_bound) over a window half
    let scan = |lo: u64, hi: u64| {
        exec::fold_range(
            lo..=hi,
            Ok((f64::NEG_INFINITY, 0u64)),
            |acc: Result<(f64, u64)>, k| {
                let (m, c) = acc?;
                let v = f(k)?;
                Ok((m.max(v), c + (v >= yes_bound - CMP_TOL) as u64))
            },
            |a, b| {
                let (a, b) = (a?, b?);
                Ok((a.0.max(b.0), a.1 + b.1))
            },
        )
    };
    let (first, c1) = scan(start, mid - 1)?;
    let (second, c2) = scan(mid, n)?;
    let tail_sup = first.max(second);
    let verdict = if tail_sup < yes_bound - CMP_TOL && second <= first + schedule.smallest() / 10.0
    {
        Verdict::Yes
    } else if first > no_bound + CMP_TOL && second > no_bound + CMP_TOL {
        Verdict::No
    } else {
        Verdict::Inconclusive
    };
    Ok((
        verdict,
        TailEvidence {
            window_start: start,
            window_end: n,
            first_half_sup: first,
            second_half_sup: second,
            tail_sup,
            window_exceedances: c1 + c2,
            yes_bound,
            no_bound,
        },
    ))
}

/// Classical rough convergence (`limsup |p(x_n, x) - p(x, x)| <= r`), judged
/// on the tail window.
pub fn rough_convergent(
    space: &PartialMetricSpace,
    seq: &SequenceSpec,
    x: RealPoint,
    r: f64,
    schedule: &EpsSchedule,
    n: u64,
    tail: TailFraction,
) -> Result<ConvergenceVerdict> {
    space.check(x.value())?;
    let (verdict, evidence) =
        tail_verdict(deviation_fn(space, seq, x.value()), r, schedule, n, tail)?;
    Ok(ConvergenceVerdict {
        verdict,
        mode: Mode::Rough,
        levels: Vec::new(),
        tail: Some(evidence),
    })
}
