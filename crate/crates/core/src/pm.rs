//! Partial metric spaces over real scalar points.
//!
//! A partial metric `p` may assign a nonzero self-distance `p(x, x)`. The two
//! built-in spaces are the max metric on the nonnegative reals and the
//! Euclidean distance shifted by a constant self-distance `a`.

use std::fmt;

use serde::Serialize;

use crate::decimal::{parse_rational, to_f64};
use crate::error::{Error, Result};
use crate::CMP_TOL;

/// A finite real point.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct RealPoint(f64);

impl RealPoint {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(RealPoint(value))
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for RealPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    /// `p(x, y) = max{x, y}` on `[0, inf)`.
    MaxRPlus,
    /// `p(x, y) = |x - y| + a` on the whole line.
    ShiftedEuclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialMetricSpace {
    kind: SpaceKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
}

impl PartialMetricSpace {
    pub const fn max_rplus() -> Self {
        PartialMetricSpace {
            kind: SpaceKind::MaxRPlus,
            a: None,
        }
    }

    pub fn shifted_euclidean(a: f64) -> Result<Self> {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::InvalidInput(format!(
                "self-distance must be finite and nonnegative, got {a}"
            )));
        }
        Ok(PartialMetricSpace {
            kind: SpaceKind::ShiftedEuclidean,
            a: Some(a),
        })
    }

    /// Builds a space from its descriptor: kind `max_rplus` or
    /// `shifted_euclidean`, the latter with an explicit decimal `a`.
    pub fn from_descriptor(kind: &str, a: Option<&str>) -> Result<Self> {
        match (kind.trim(), a) {
            ("max_rplus", None) => Ok(Self::max_rplus()),
            ("max_rplus", Some(_)) => Err(Error::InvalidInput(
                "max_rplus takes no parameter `a`".into(),
            )),
            ("shifted_euclidean", Some(a)) => Self::shifted_euclidean(to_f64(&parse_rational(a)?)),
            ("shifted_euclidean", None) => Err(Error::InvalidInput(
                "shifted_euclidean requires an explicit `a`".into(),
            )),
            (other, _) => Err(Error::InvalidInput(format!("unknown space `{other}`"))),
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    /// The constant self-distance, when the space has one.
    pub fn constant_self_distance(&self) -> Option<f64> {
        match self.kind {
            SpaceKind::MaxRPlus => None,
            SpaceKind::ShiftedEuclidean => self.a,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x.is_finite()
            && match self.kind {
                SpaceKind::MaxRPlus => x >= 0.0,
                SpaceKind::ShiftedEuclidean => true,
            }
    }

    pub(crate) fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else if !x.is_finite() {
            Err(Error::NonFinite)
        } else {
            Err(Error::Domain {
                space: self.to_string(),
                value: x,
            })
        }
    }

    /// Unchecked evaluation on raw values already known to be in the domain.
    #[inline]
    pub(crate) fn eval_raw(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            SpaceKind::MaxRPlus => x.max(y),
            SpaceKind::ShiftedEuclidean => (x - y).abs() + self.a.unwrap_or(0.0),
        }
    }

    /// `|p(x, c) - p(c, c)|`, the deviation used by every convergence notion.
    #[inline]
    pub(crate) fn deviation(&self, x: f64, c: f64) -> f64 {
        (self.eval_raw(x, c) - self.eval_raw(c, c)).abs()
    }
}

impl fmt::Display for PartialMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SpaceKind::MaxRPlus => f.write_str("max_rplus"),
            SpaceKind::ShiftedEuclidean => {
                write!(f, "shifted_euclidean(a={})", self.a.unwrap_or(0.0))
            }
        }
    }
}

pub fn pm_eval(space: &PartialMetricSpace, x: RealPoint, y: RealPoint) -> Result<f64> {
    space.check(x.0)?;
    space.check(y.0)?;
    Ok(space.eval_raw(x.0, y.0))
}

/// `p(center, y) <= p(center, center) + r`, up to the comparison tolerance.
pub fn closed_ball_contains(
    space: &PartialMetricSpace,
    center: RealPoint,
    r: f64,
    y: RealPoint,
) -> Result<bool> {
    if !(r >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "radius must be nonnegative, got {r}"
        )));
    }
    let self_dist = pm_eval(space, center, center)?;
    Ok(pm_eval(space, center, y)? <= self_dist + r + CMP_TOL)
}

/// Strict variant: `p(center, y) < p(center, center) + r`.
pub fn open_ball_contains(
    space: &PartialMetricSpace,
    center: RealPoint,
    r: f64,
    y: RealPoint,
) -> Result<bool> {
    if !(r >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "radius must be nonnegative, got {r}"
        )));
    }
    let self_dist = pm_eval(space, center, center)?;
    Ok(pm_eval(space, center, y)? < self_dist + r - CMP_TOL)
}

/// Supremum of `p(x, y)` over all ordered pairs, diagonal included.
pub fn set_diameter(space: &PartialMetricSpace, points: &[RealPoint]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidInput("diameter of an empty set".into()));
    }
    for p in points {
        space.check(p.0)?;
    }
    let diam = points
        .iter()
        .flat_map(|x| points.iter().map(move |y| space.eval_raw(x.0, y.0)))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(diam)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axiom {
    P1,
    P2,
    P3,
    P4,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub checked_triples: u64,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, axiom: Axiom) -> usize {
        self.violations.iter().filter(|v| v.axiom == axiom).count()
    }
}

/// Checks the four partial metric axioms of a built-in space on `sample`.
pub fn axiom_check(space: &PartialMetricSpace, sample: &[RealPoint]) -> Result<AxiomReport> {
    for p in sample {
        space.check(p.0)?;
    }
    let values: Vec<f64> = sample.iter().map(|p| p.0).collect();
    axiom_check_rule(|x, y| space.eval_raw(x, y), &values)
}

/// Checks the axioms for an arbitrary rule. NaN outputs count as p1
/// (nonnegativity) violations.
///
/// p1 and p3 run over ordered pairs, p2 over pairs of distinct points, p4 over
/// all ordered triples.
pub fn axiom_check_rule<F>(rule: F, sample: &[f64]) -> Result<AxiomReport>
where
    F: Fn(f64, f64) -> f64,
{
    if sample.is_empty() {
        return Err(Error::InvalidInput(
            "axiom check needs a nonempty sample".into(),
        ));
    }
    let mut violations = Vec::new();
    let mut push = |axiom, witness: &[f64], lhs, rhs| {
        violations.push(Violation {
            axiom,
            witness: witness.to_vec(),
            lhs,
            rhs,
        })
    };

    for &x in sample {
        for &y in sample {
            let (pxx, pxy, pyx, pyy) = (rule(x, x), rule(x, y), rule(y, x), rule(y, y));
            if pxx.is_nan() || pxx < 0.0 {
                push(Axiom::P1, &[x, x], 0.0, pxx);
            } else if pxy.is_nan() || pxx > pxy + CMP_TOL {
                push(Axiom::P1, &[x, y], pxx, pxy);
            }
            if x < y {
                if !(pxy - pyx).abs().le(&CMP_TOL) {
                    push(Axiom::P3, &[x, y], pxy, pyx);
                }
                let indistinct = (pxx - pxy).abs() <= CMP_TOL && (pyy - pxy).abs() <= CMP_TOL;
                if indistinct {
                    push(Axiom::P2, &[x, y], pxy, pxx);
                }
            }
        }
    }

    let mut triples = 0u64;
    for &x in sample {
        for &y in sample {
            for &z in sample {
                triples += 1;
                let lhs = rule(x, y);
                let rhs = rule(x, z) + rule(z, y) - rule(z, z);
                if !(lhs <= rhs + CMP_TOL) {
                    push(Axiom::P4, &[x, y, z], lhs, rhs);
                }
            }
        }
    }

    Ok(AxiomReport {
        checked_triples: triples,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: f64) -> RealPoint {
        RealPoint::new(v).unwrap()
    }

    fn pts(vs: &[f64]) -> Vec<RealPoint> {
        vs.iter().map(|&v| pt(v)).collect()
    }

    fn se1() -> PartialMetricSpace {
        PartialMetricSpace::shifted_euclidean(1.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        let m = PartialMetricSpace::max_rplus();
        assert_eq!(pm_eval(&m, pt(3.0), pt(5.0)).unwrap(), 5.0);
        assert_eq!(pm_eval(&m, pt(2.0), pt(2.0)).unwrap(), 2.0);
        assert_eq!(pm_eval(&se1(), pt(0.0), pt(0.0)).unwrap(), 1.0);
    }

    #[test]
    fn negative_point_rejected_by_max_space() {
        let m = PartialMetricSpace::max_rplus();
        assert!(matches!(
            pm_eval(&m, pt(-1.0), pt(2.0)),
            Err(Error::Domain { .. })
        ));
        assert!(RealPoint::new(f64::NAN).is_err());
        assert!(RealPoint::new(f64::INFINITY).is_err());
    }

    #[test]
    fn axioms_hold_for_builtins() {
        let m = PartialMetricSpace::max_rplus();
        let rep = axiom_check(&m, &pts(&[0.0, 1.0, 2.0, 3.0])).unwrap();
        assert!(rep.holds(), "{:?}", rep.violations);
        assert_eq!(rep.checked_triples, 64);
        let rep = axiom_check(&se1(), &pts(&[-1.0, 0.0, 2.0])).unwrap();
        assert!(rep.holds(), "{:?}", rep.violations);
    }

    #[test]
    fn min_rule_breaks_small_self_distances() {
        let rep = axiom_check_rule(f64::min, &[1.0, 2.0]).unwrap();
        let p1: Vec<_> = rep
            .violations
            .iter()
            .filter(|v| v.axiom == Axiom::P1)
            .collect();
        assert_eq!(p1.len(), 1);
        assert_eq!(p1[0].witness, vec![2.0, 1.0]);
        assert_eq!((p1[0].lhs, p1[0].rhs), (2.0, 1.0));
    }

    #[test]
    fn nan_rule_is_a_nonnegativity_violation() {
        let rep = axiom_check_rule(|_, _| f64::NAN, &[0.0]).unwrap();
        assert!(rep.count(Axiom::P1) >= 1);
        assert!(axiom_check_rule(f64::max, &[]).is_err());
    }

    #[test]
    fn ordinary_metric_violates_nothing_but_discrete_zero_violates_p2() {
        let rep = axiom_check_rule(|x, y| (x - y).abs(), &[0.0, 1.0, 5.0]).unwrap();
        assert!(rep.holds());
        let rep = axiom_check_rule(|_, _| 0.0, &[0.0, 1.0]).unwrap();
        assert_eq!(rep.count(Axiom::P2), 1);
    }

    #[test]
    fn balls() {
        let m = PartialMetricSpace::max_rplus();
        assert!(closed_ball_contains(&m, pt(2.0), 1.0, pt(3.0)).unwrap());
        assert!(!closed_ball_contains(&m, pt(2.0), 1.0, pt(3.5)).unwrap());
        assert!(!open_ball_contains(&m, pt(2.0), 1.0, pt(3.0)).unwrap());
        assert!(closed_ball_contains(&se1(), pt(0.0), 1.0, pt(-1.0)).unwrap());
        assert!(closed_ball_contains(&m, pt(2.0), -1.0, pt(2.0)).is_err());
    }

    #[test]
    fn diameters() {
        let m = PartialMetricSpace::max_rplus();
        assert_eq!(set_diameter(&m, &pts(&[1.0, 3.0])).unwrap(), 3.0);
        assert_eq!(set_diameter(&se1(), &pts(&[0.0])).unwrap(), 1.0);
        assert_eq!(set_diameter(&se1(), &pts(&[-1.0, 1.0])).unwrap(), 3.0);
        assert!(set_diameter(&m, &[]).is_err());
    }

    #[test]
    fn descriptors() {
        assert_eq!(
            PartialMetricSpace::from_descriptor("max_rplus", None).unwrap(),
            PartialMetricSpace::max_rplus()
        );
        assert_eq!(
            PartialMetricSpace::from_descriptor("shifted_euclidean", Some("1.5"))
                .unwrap()
                .constant_self_distance(),
            Some(1.5)
        );
        assert!(PartialMetricSpace::from_descriptor("shifted_euclidean", None).is_err());
        assert!(PartialMetricSpace::from_descriptor("taxicab", None).is_err());
        assert!(PartialMetricSpace::from_descriptor("shifted_euclidean", Some("-1")).is_err());
    }
}
