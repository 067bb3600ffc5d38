use serde::Serialize;

use super::{
    all_zero, levels_from_counts, threshold_counts, ConvergenceVerdict, EpsSchedule, LevelEvidence,
    Mode, Verdict,
};
use crate::density::{density_verdict, DensityClass, DensityEstimate, Tau};
use crate::error::{Error, Result};
use crate::exec;
use crate::pm::{PartialMetricSpace, RealPoint};
use crate::seq::SequenceSpec;

fn check_n(n: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "prefix length must be at least 2, got {n}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedVerdict {
    /// One level per bound `M`, density of `{n : p(x_n, u) >= M}`.
    pub result: ConvergenceVerdict,
    pub witness_m: Option<f64>,
}

/// Statistical boundedness around a fixed `u`: the smallest `M` on the grid
/// with `d({n : p(x_n, u) >= M}) = 0`.
pub fn stat_bounded(
    space: &PartialMetricSpace,
    seq: &SequenceSpec,
    u: RealPoint,
    m_grid: &[f64],
    n: u64,
    tau: Tau,
) -> Result<BoundedVerdict> {
    check_n(n)?;
    if m_grid.is_empty() || m_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "M grid must be nonempty and increasing".into(),
        ));
    }
    if m_grid[0] <= 0.0 {
        return Err(Error::InvalidInput("bounds M must be positive".into()));
    }
    space.check(u.value())?;
    let u = u.value();
    let counts = threshold_counts(n, m_grid, |k| {
        let v = seq.value(k)?;
        space.check(v)?;
        Ok(space.eval_raw(v, u))
    })?;
    let levels = levels_from_counts(m_grid, &counts, n, tau)?;
    let witness = levels
        .iter()
        .find(|e| e.density.verdict == DensityClass::Zero)
        .map(|e| e.level);
    let verdict = if witness.is_some() {
        Verdict::Yes
    } else if levels.last().unwrap().density.verdict == DensityClass::Positive {
        Verdict::No
    } else {
        Verdict::Inconclusive
    };
    Ok(BoundedVerdict {
        result: ConvergenceVerdict {
            verdict,
            mode: Mode::StatBounded,
            levels,
            tail: None,
        },
        witness_m: witness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyPair {
    pub m: u64,
    pub l: f64,
    pub verdict: Verdict,
    pub levels: Vec<LevelEvidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyVerdict {
    pub verdict: Verdict,
    pub mode: Mode,
    pub witness: Option<(u64, f64)>,
    pub pairs: Vec<CauchyPair>,
}

/// Statistical Cauchy test by bounded search over `(m, l)`: a pair works when
/// `{n : |p(x_n, x_m) - l| >= ε}` has density zero at every scheduled ε.
pub fn stat_cauchy(
    space: &PartialMetricSpace,
    seq: &SequenceSpec,
    m_candidates: &[u64],
    l_grid: &[f64],
    schedule: &EpsSchedule,
    n: u64,
    tau: Tau,
) -> Result<CauchyVerdict> {
    check_n(n)?;
    if m_candidates.is_empty() || l_grid.is_empty() {
        return Err(Error::InvalidInput(
            "Cauchy search needs candidates for m and l".into(),
        ));
    }
    if m_candidates.contains(&0) {
        return Err(Error::InvalidInput("sequence indices start at 1".into()));
    }
    if l_grid.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::InvalidInput("l must be nonnegative".into()));
    }
    let combos: Vec<(u64, f64)> = m_candidates
        .iter()
        .flat_map(|&m| l_grid.iter().map(move |&l| (m, l)))
        .collect();
    let pairs = exec::map(&combos, |&(m, l)| -> Result<CauchyPair> {
        let xm = seq.value(m)?;
        space.check(xm)?;
        let counts = threshold_counts(n, schedule.values(), |k| {
            let v = seq.value(k)?;
            space.check(v)?;
            Ok((space.eval_raw(v, xm) - l).abs())
        })?;
        let levels = levels_from_counts(schedule.values(), &counts, n, tau)?;
        Ok(CauchyPair {
            m,
            l,
            verdict: all_zero(&levels),
            levels,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let witness = pairs
        .iter()
        .find(|p| p.verdict == Verdict::Yes)
        .map(|p| (p.m, p.l));
    let verdict = if witness.is_some() {
        Verdict::Yes
    } else if pairs.iter().all(|p| p.verdict == Verdict::No) {
        Verdict::No
    } else {
        Verdict::Inconclusive
    };
    Ok(CauchyVerdict {
        verdict,
        mode: Mode::StatCauchy,
        witness,
        pairs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterVerdict {
    Cluster,
    NotCluster,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterPoint {
    pub c: f64,
    pub verdict: ClusterVerdict,
    /// Density of the near set `{n : |p(x_n, c) - p(c, c)| < ε}` per ε.
    pub levels: Vec<LevelEvidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub points: Vec<ClusterPoint>,
}

impl ClusterReport {
    pub fn verdict_at(&self, c: f64) -> Option<ClusterVerdict> {
        self.points.iter().find(|p| p.c == c).map(|p| p.verdict)
    }
}

/// Statistical cluster points on a grid. A point is a cluster point when its
/// near set has `Positive` density at every scheduled ε, and is ruled out as
/// soon as one ε gives `Zero`.
pub fn stat_cluster_points(
    space: &PartialMetricSpace,
    seq: &SequenceSpec,
    points: &[f64],
    schedule: &EpsSchedule,
    n: u64,
    tau: Tau,
) -> Result<ClusterReport> {
    check_n(n)?;
    if points.is_empty() {
        return Err(Error::InvalidInput(
            "cluster scan needs candidate points".into(),
        ));
    }
    let out = exec::map(points, |&c| -> Result<ClusterPoint> {
        space.check(c)?;
        // near set at ε is the complement of the exceedance set at ε
        let far = threshold_counts(n, schedule.values(), |k| {
            let v = seq.value(k)?;
            space.check(v)?;
            Ok(space.deviation(v, c))
        })?;
        let levels = schedule
            .values()
            .iter()
            .zip(&far)
            .map(|(&eps, &(half, full))| {
                let est = DensityEstimate::from_counts(n - full, n / 2 - half, n)?;
                Ok(LevelEvidence {
                    level: eps,
                    density: density_verdict(&est, tau),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let verdict = if levels
            .iter()
            .all(|e| e.density.verdict == DensityClass::Positive)
        {
            ClusterVerdict::Cluster
        } else if levels
            .iter()
            .any(|e| e.density.verdict == DensityClass::Zero)
        {
            ClusterVerdict::NotCluster
        } else {
            ClusterVerdict::Inconclusive
        };
        Ok(ClusterPoint { c, verdict, levels })
    });
    Ok(ClusterReport {
        points: out.into_iter().collect::<Result<Vec<_>>>()?,
    })
}
