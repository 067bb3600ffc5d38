use serde::Serialize;

use super::{
    rough_convergent, rough_stat_convergent, ConvergenceVerdict, EpsSchedule, TailFraction, Verdict,
};
use crate::decimal::{to_f64, Rational};
use crate::density::Tau;
use crate::error::{Error, Result};
use crate::exec;
use crate::pm::{PartialMetricSpace, RealPoint};
use crate::seq::SequenceSpec;

/// Arithmetic grid `lo, lo + step, ...` up to `hi`, held exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    lo: Rational,
    hi: Rational,
    step: Rational,
}

impl Grid {
    pub fn new(lo: Rational, hi: Rational, step: Rational) -> Result<Self> {
        if step <= Rational::from_integer(0) {
            return Err(Error::InvalidInput("grid step must be positive".into()));
        }
        if hi < lo {
            return Err(Error::InvalidInput(
                "grid upper end is below its lower end".into(),
            ));
        }
        let grid = Grid { lo, hi, step };
        if grid.len() < 2 {
            return Err(Error::InvalidInput("grid needs at least two points".into()));
        }
        Ok(grid)
    }

    pub fn lo(&self) -> Rational {
        self.lo
    }

    pub fn hi(&self) -> Rational {
        self.hi
    }

    pub fn step(&self) -> Rational {
        self.step
    }

    pub fn len(&self) -> usize {
        (((self.hi - self.lo) / self.step).floor().to_integer() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Exact grid points; each float is the nearest double to its rational.
    pub fn exact_points(&self) -> Vec<Rational> {
        (0..self.len() as i64)
            .map(|i| self.lo + self.step * i)
            .collect()
    }

    pub fn points(&self) -> Vec<f64> {
        self.exact_points().iter().map(to_f64).collect()
    }

    /// The same range at half the step.
    pub fn refined(&self) -> Grid {
        Grid {
            lo: self.lo,
            hi: self.hi,
            step: self.step / 2,
        }
    }
}

impl Serialize for Grid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Grid", 3)?;
        st.serialize_field("lo", &to_f64(&self.lo))?;
        st.serialize_field("hi", &to_f64(&self.hi))?;
        st.serialize_field("step", &to_f64(&self.step))?;
        st.end()
    }
}

/// Serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedInterval {
    pub lo: f64,
    pub hi: f64,
}

impl Serialize for ClosedInterval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

impl ClosedInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub x: f64,
    pub membership: ConvergenceVerdict,
}

/// Grid estimate of a limit set. `intervals` are the maximal runs of
/// consecutive `Yes` points; any `No` or `Inconclusive` point ends a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitSetEstimate {
    pub r: f64,
    pub points: Vec<GridPoint>,
    pub intervals: Vec<ClosedInterval>,
    pub inconclusive: Vec<f64>,
    pub nonmembers: Vec<f64>,
}

impl LimitSetEstimate {
    /// Builds the estimate from candidate points in any order; points are
    /// sorted before runs are compressed.
    pub fn from_points(r: f64, mut points: Vec<GridPoint>) -> Self {
        points.sort_by(|a, b| a.x.total_cmp(&b.x));
        let mut intervals: Vec<ClosedInterval> = Vec::new();
        let mut open = false;
        for p in &points {
            if p.membership.verdict == Verdict::Yes {
                match intervals.last_mut() {
                    Some(iv) if open => iv.hi = p.x,
                    _ => intervals.push(ClosedInterval { lo: p.x, hi: p.x }),
                }
                open = true;
            } else {
                open = false;
            }
        }
        let pick = |v: Verdict| {
            points
                .iter()
                .filter(|p| p.membership.verdict == v)
                .map(|p| p.x)
                .collect::<Vec<_>>()
        };
        LimitSetEstimate {
            r,
            inconclusive: pick(Verdict::Inconclusive),
            nonmembers: pick(Verdict::No),
            intervals,
            points,
        }
    }

    pub fn members(&self) -> Vec<f64> {
        self.points
            .iter()
            .filter(|p| p.membership.verdict == Verdict::Yes)
            .map(|p| p.x)
            .collect()
    }

    pub fn verdict_at(&self, x: f64) -> Option<Verdict> {
        self.points
            .iter()
            .find(|p| p.x == x)
            .map(|p| p.membership.verdict)
    }

    /// `Yes` if some point is a member, `No` if every point is a nonmember.
    pub fn nonempty(&self) -> Verdict {
        if !self.intervals.is_empty() {
            Verdict::Yes
        } else if self.inconclusive.is_empty() {
            Verdict::No
        } else {
            Verdict::Inconclusive
        }
    }
}

fn scan<F>(points: &[f64], r: f64, engine: F) -> Result<LimitSetEstimate>
where
    F: Fn(RealPoint) -> Result<ConvergenceVerdict> + Sync + Send,
{
    let results = exec::map(points, |&x| {
        let membership = engine(RealPoint::new(x)?)?;
        Ok(GridPoint { x, membership })
    });
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(LimitSetEstimate::from_points(r, points))
}

/// Grid estimate of `st-LIM^r`: r-statistical convergence at every candidate.
#[allow(clippy::too_many_arguments)]
pub fn stat_limit_set(
    space: &PartialMetricSpace,
    seq: &SequenceSpec,
    r: f64,
    points: &[f64],
    schedule: &EpsSchedule,
    n: u64,
    tau: Tau,
) -> Result<LimitSetEstimate> {
    if points.is_empty() {
        return Err(Error::InvalidInput(
            "limit set needs candidate points".into(),
        ));
    }
    scan(points, r, |x| {
        rough_stat_convergent(space, seq, x, r, schedule, n, tau)
    })
}

/// Grid estimate of `LIM^r`, the classical rough limits.
pub fn rough_limit_set(
    space: &PartialMetricSpace,
    seq: &SequenceSpec,
    r: f64,
    points: &[f64],
    schedule: &EpsSchedule,
    n: u64,
    tail: TailFraction,
) -> Result<LimitSetEstimate> {
    if points.is_empty() {
        return Err(Error::InvalidInput(
            "limit set needs candidate points".into(),
        ));
    }
    scan(points, r, |x| {
        rough_convergent(space, seq, x, r, schedule, n, tail)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Mode;
    use crate::seq::{alternating, constant, example_sequence, reciprocal};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn fake(x: f64, v: Verdict) -> GridPoint {
        GridPoint {
            x,
            membership: ConvergenceVerdict {
                verdict: v,
                mode: Mode::RoughStat,
                levels: vec![],
                tail: None,
            },
        }
    }

    #[test]
    fn grid_points_are_exact() {
        let g = Grid::new(q(0, 1), q(5, 1), q(1, 20)).unwrap();
        assert_eq!(g.len(), 101);
        let pts = g.points();
        assert_eq!(pts[19], 0.95);
        assert_eq!(pts[100], 5.0);
        assert_eq!(g.refined().len(), 201);
        assert!(Grid::new(q(0, 1), q(1, 1), q(0, 1)).is_err());
        assert!(Grid::new(q(0, 1), q(1, 1), q(2, 1)).is_err());
    }

    #[test]
    fn run_compression() {
        use Verdict::*;
        let pts = vec![
            fake(3.0, Yes),
            fake(0.0, No),
            fake(1.0, Yes),
            fake(2.0, Yes),
            fake(4.0, Inconclusive),
            fake(5.0, Yes),
        ];
        let est = LimitSetEstimate::from_points(1.0, pts);
        assert_eq!(
            est.intervals,
            vec![
                ClosedInterval { lo: 1.0, hi: 3.0 },
                ClosedInterval { lo: 5.0, hi: 5.0 }
            ]
        );
        assert_eq!(est.inconclusive, vec![4.0]);
        assert_eq!(est.nonmembers, vec![0.0]);
        assert_eq!(est.nonempty(), Yes);
    }

    #[test]
    fn example_limit_set_quarter_grid() {
        let space = PartialMetricSpace::max_rplus();
        let pts = Grid::new(q(0, 1), q(5, 1), q(1, 4)).unwrap().points();
        let est = stat_limit_set(
            &space,
            &example_sequence(),
            1.0,
            &pts,
            &EpsSchedule::default(),
            100_000,
            Tau::default(),
        )
        .unwrap();
        assert_eq!(est.intervals, vec![ClosedInterval { lo: 1.0, hi: 5.0 }]);
        assert_eq!(est.nonmembers, vec![0.0, 0.25, 0.5, 0.75]);

        let rough = rough_limit_set(
            &space,
            &example_sequence(),
            1.0,
            &pts,
            &EpsSchedule::default(),
            100_000,
            TailFraction::default(),
        )
        .unwrap();
        assert!(rough.intervals.is_empty());
        assert_eq!(rough.nonmembers.len(), pts.len());
    }

    #[test]
    fn alternating_limit_set_is_origin() {
        let space = PartialMetricSpace::shifted_euclidean(1.0).unwrap();
        let pts = Grid::new(q(-2, 1), q(2, 1), q(1, 2)).unwrap().points();
        let est = stat_limit_set(
            &space,
            &alternating(1.0),
            1.0,
            &pts,
            &EpsSchedule::default(),
            100_000,
            Tau::default(),
        )
        .unwrap();
        assert_eq!(est.members(), vec![0.0]);
    }

    #[test]
    fn reciprocal_rough_limit_set() {
        let space = PartialMetricSpace::shifted_euclidean(1.0).unwrap();
        let pts = Grid::new(q(-2, 1), q(2, 1), q(1, 2)).unwrap().points();
        let est = rough_limit_set(
            &space,
            &reciprocal(1.0),
            1.0,
            &pts,
            &EpsSchedule::default(),
            10_000,
            TailFraction::default(),
        )
        .unwrap();
        assert_eq!(est.members(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn constant_sequence_limit_sets() {
        let space = PartialMetricSpace::max_rplus();
        let c = constant(2.0);
        let pts = [2.0];
        let est = stat_limit_set(
            &space,
            &c,
            0.0,
            &pts,
            &EpsSchedule::default(),
            1000,
            Tau::default(),
        )
        .unwrap();
        assert_eq!(est.members(), vec![2.0]);
        let est = rough_limit_set(
            &space,
            &c,
            0.0,
            &pts,
            &EpsSchedule::default(),
            1000,
            TailFraction::default(),
        )
        .unwrap();
        assert_eq!(est.members(), vec![2.0]);
    }

    #[test]
    fn grid_order_does_not_matter() {
        let space = PartialMetricSpace::max_rplus();
        let mut pts = Grid::new(q(0, 1), q(3, 1), q(1, 4)).unwrap().points();
        let s = example_sequence();
        let run = |pts: &[f64]| {
            stat_limit_set(
                &space,
                &s,
                1.0,
                pts,
                &EpsSchedule::default(),
                20_000,
                Tau::default(),
            )
            .unwrap()
        };
        let a = run(&pts);
        pts.reverse();
        pts.swap(1, 7);
        let b = run(&pts);
        assert_eq!(a, b);
    }
}
