//! Empirical checks of the limit-set theorems.
//!
//! Each check evaluates a theorem's hypothesis and conclusion with the verdict
//! engines and reports one of four outcomes. A theorem is a conditional, so a
//! hypothesis that fails or cannot be established makes the check `Vacuous`;
//! only an established hypothesis with a refuted conclusion is a `Fail`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    rough_convergent, rough_stat_convergent, stat_bounded, stat_cluster_points, stat_convergent,
    stat_limit_set, tail_verdict, ClusterVerdict, EpsSchedule, Grid, LimitSetEstimate,
    TailFraction, Verdict,
};
use crate::decimal::Rational;
use crate::density::{density_estimate, Tau};
use crate::error::{Error, Result};
use crate::exec;
use crate::pm::{closed_ball_contains, set_diameter, PartialMetricSpace, RealPoint};
use crate::seq::{
    alternating, constant, example_sequence, linear, reciprocal, restrict_to_indices,
    IndexPredicate, Piece, SequenceSpec, ValueRule,
};
use crate::CMP_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoremId {
    T2_1,
    T2_2,
    T2_3,
    T2_4,
    T2_5,
    T2_6,
    T2_7,
    T2_8,
    T2_9,
    Cor2_1,
}

impl TheoremId {
    pub const ALL: [TheoremId; 10] = [
        TheoremId::T2_1,
        TheoremId::T2_2,
        TheoremId::T2_3,
        TheoremId::T2_4,
        TheoremId::T2_5,
        TheoremId::T2_6,
        TheoremId::T2_7,
        TheoremId::T2_8,
        TheoremId::T2_9,
        TheoremId::Cor2_1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::T2_1 => "2.1",
            TheoremId::T2_2 => "2.2",
            TheoremId::T2_3 => "2.3",
            TheoremId::T2_4 => "2.4",
            TheoremId::T2_5 => "2.5",
            TheoremId::T2_6 => "2.6",
            TheoremId::T2_7 => "2.7",
            TheoremId::T2_8 => "2.8",
            TheoremId::T2_9 => "2.9",
            TheoremId::Cor2_1 => "cor-2.1",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown theorem id `{s}`")))
    }
}

impl Serialize for TheoremId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

impl From<Verdict> for Status {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Yes => Status::Holds,
            Verdict::No => Status::Fails,
            Verdict::Inconclusive => Status::Inconclusive,
        }
    }
}

impl Status {
    /// Conjunction: fails if any part fails, holds if all hold.
    fn and(self, other: Status) -> Status {
        match (self, other) {
            (Status::Fails, _) | (_, Status::Fails) => Status::Fails,
            (Status::Holds, Status::Holds) => Status::Holds,
            _ => Status::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Vacuous,
    Fail,
    Inconclusive,
}

impl Outcome {
    pub fn from_statuses(hypothesis: Status, conclusion: Status) -> Outcome {
        match (hypothesis, conclusion) {
            (Status::Holds, Status::Holds) => Outcome::Pass,
            (Status::Holds, Status::Fails) => Outcome::Fail,
            (Status::Holds, Status::Inconclusive) => Outcome::Inconclusive,
            _ => Outcome::Vacuous,
        }
    }
}

/// Everything a check needs. Fields a check does not use are ignored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub label: String,
    pub space: PartialMetricSpace,
    pub sequence: SequenceSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence2: Option<SequenceSpec>,
    pub x: f64,
    pub r: f64,
    pub n: u64,
    pub schedule: EpsSchedule,
    pub tau: Tau,
    pub tail_fraction: TailFraction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<IndexPredicate>,
    pub u: f64,
    pub m_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    pub center: f64,
    pub self_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

pub const DEFAULT_N: u64 = 100_000;

pub fn default_m_grid() -> Vec<f64> {
    vec![1.0, 2.0, 5.0, 10.0, 100.0, 1000.0]
}

impl Instance {
    pub fn new(
        label: impl Into<String>,
        space: PartialMetricSpace,
        sequence: SequenceSpec,
    ) -> Self {
        Instance {
            label: label.into(),
            space,
            sequence,
            sequence2: None,
            x: 0.0,
            r: 0.0,
            n: DEFAULT_N,
            schedule: EpsSchedule::default(),
            tau: Tau::default(),
            tail_fraction: TailFraction::default(),
            grid: None,
            selection: None,
            u: 0.0,
            m_grid: default_m_grid(),
            r_grid: vec![0.0],
            center: 0.0,
            self_bound: 0.0,
            seed: None,
        }
    }

    pub fn x(mut self, x: f64) -> Self {
        self.x = x;
        self
    }

    pub fn r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn n(mut self, n: u64) -> Self {
        self.n = n;
        self
    }

    pub fn grid(mut self, lo: i64, hi: i64, step: (i64, i64)) -> Self {
        self.grid = Some(
            Grid::new(
                Rational::from_integer(lo),
                Rational::from_integer(hi),
                Rational::new(step.0, step.1),
            )
            .expect("valid grid"),
        );
        self
    }

    pub fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn sequence2(mut self, seq: SequenceSpec) -> Self {
        self.sequence2 = Some(seq);
        self
    }

    pub fn selection(mut self, sel: IndexPredicate) -> Self {
        self.selection = Some(sel);
        self
    }

    pub fn u(mut self, u: f64) -> Self {
        self.u = u;
        self
    }

    pub fn r_grid(mut self, rs: Vec<f64>) -> Self {
        self.r_grid = rs;
        self
    }

    pub fn center(mut self, c: f64) -> Self {
        self.center = c;
        self
    }

    pub fn self_bound(mut self, c: f64) -> Self {
        self.self_bound = c;
        self
    }

    fn grid_points(&self) -> Result<Vec<f64>> {
        self.grid
            .as_ref()
            .map(Grid::points)
            .ok_or_else(|| Error::InvalidInput(format!("instance `{}` needs a grid", self.label)))
    }

    fn second(&self) -> Result<&SequenceSpec> {
        self.sequence2.as_ref().ok_or_else(|| {
            Error::InvalidInput(format!("instance `{}` needs a second sequence", self.label))
        })
    }

    fn point(&self, v: f64) -> Result<RealPoint> {
        RealPoint::new(v)
    }

    fn limit_set(&self, seq: &SequenceSpec, r: f64, n: u64) -> Result<LimitSetEstimate> {
        stat_limit_set(
            &self.space,
            seq,
            r,
            &self.grid_points()?,
            &self.schedule,
            n,
            self.tau,
        )
    }

    /// Stable 64-bit FNV-1a hash of the serialized instance.
    pub fn hash(&self) -> u64 {
        let body = serde_json::to_vec(self).expect("instance serializes");
        body.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub theorem: TheoremId,
    pub instance: Instance,
    pub instance_hash: String,
    pub hypothesis_status: Status,
    pub conclusion_status: Status,
    pub outcome: Outcome,
    pub evidence: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(
        theorem: TheoremId,
        instance: &Instance,
        hypothesis: Status,
        conclusion: Status,
        evidence: Value,
        notes: Vec<String>,
    ) -> Self {
        CheckReport {
            theorem,
            instance: instance.clone(),
            instance_hash: format!("{:016x}", instance.hash()),
            hypothesis_status: hypothesis,
            conclusion_status: conclusion,
            outcome: Outcome::from_statuses(hypothesis, conclusion),
            evidence,
            notes,
        }
    }
}

fn verdict_json(v: Verdict) -> Value {
    serde_json::to_value(v).unwrap()
}

/// Every rough limit is a rough statistical limit.
pub fn check_rough_implies_rough_stat(inst: &Instance) -> Result<CheckReport> {
    let x = inst.point(inst.x)?;
    let rough = rough_convergent(
        &inst.space,
        &inst.sequence,
        x,
        inst.r,
        &inst.schedule,
        inst.n,
        inst.tail_fraction,
    )?;
    let rough_stat = rough_stat_convergent(
        &inst.space,
        &inst.sequence,
        x,
        inst.r,
        &inst.schedule,
        inst.n,
        inst.tau,
    )?;
    Ok(CheckReport::new(
        TheoremId::T2_1,
        inst,
        rough.verdict.into(),
        rough_stat.verdict.into(),
        json!({ "rough": rough, "rough_stat": rough_stat }),
        vec![],
    ))
}

/// With constant self-distance `a`, `diam(st-LIM^r) <= 2r + 2a`.
pub fn check_diam_bound(inst: &Instance) -> Result<CheckReport> {
    let Some(a) = constant_self_distance(inst)? else {
        return Ok(CheckReport::new(
            TheoremId::T2_2,
            inst,
            Status::Fails,
            Status::Inconclusive,
            json!({}),
            vec!["self-distance is not constant on the grid".into()],
        ));
    };
    let set = inst.limit_set(&inst.sequence, inst.r, inst.n)?;
    let members = set.members();
    let bound = 2.0 * inst.r + 2.0 * a;
    let mut notes = Vec::new();
    if !set.inconclusive.is_empty() {
        notes.push(format!(
            "{} inconclusive grid points excluded",
            set.inconclusive.len()
        ));
    }
    if members.is_empty() {
        notes.push("estimated limit set is empty".into());
        return Ok(CheckReport::new(
            TheoremId::T2_2,
            inst,
            Status::Fails,
            Status::Inconclusive,
            json!({ "limit_set": set.intervals, "bound": bound }),
            notes,
        ));
    }
    let pts: Vec<RealPoint> = members
        .iter()
        .map(|&m| RealPoint::new(m))
        .collect::<Result<_>>()?;
    let diameter = set_diameter(&inst.space, &pts)?;
    let conclusion = if diameter <= bound + CMP_TOL {
        Status::Holds
    } else {
        Status::Fails
    };
    Ok(CheckReport::new(
        TheoremId::T2_2,
        inst,
        Status::Holds,
        conclusion,
        json!({ "limit_set": set.intervals, "diameter": diameter, "bound": bound, "self_distance": a }),
        notes,
    ))
}

/// `Some(a)` if the space has constant self-distance `a`: declared by the
/// space, or observed on every grid point.
fn constant_self_distance(inst: &Instance) -> Result<Option<f64>> {
    if let Some(a) = inst.space.constant_self_distance() {
        return Ok(Some(a));
    }
    let pts = inst.grid_points()?;
    let selfs: Vec<f64> = pts.iter().map(|&p| inst.space.eval_raw(p, p)).collect();
    let first = selfs[0];
    Ok(selfs
        .iter()
        .all(|s| (s - first).abs() <= CMP_TOL)
        .then_some(first))
}

/// A statistical limit `x` puts every equal-self-distance point of the closed
/// ball `B̄_r(x)` into `st-LIM^r`.
pub fn check_ball_inclusion(inst: &Instance) -> Result<CheckReport> {
    let x = inst.point(inst.x)?;
    let stat = stat_convergent(
        &inst.space,
        &inst.sequence,
        x,
        &inst.schedule,
        inst.n,
        inst.tau,
    )?;
    let self_x = inst.space.eval_raw(inst.x, inst.x);
    let mut qualified = Vec::new();
    for y in inst.grid_points()? {
        let yp = RealPoint::new(y)?;
        if closed_ball_contains(&inst.space, x, inst.r, yp)?
            && (inst.space.eval_raw(y, y) - self_x).abs() <= CMP_TOL
        {
            qualified.push(y);
        }
    }
    let (conclusion, set_json) = if qualified.is_empty() {
        (Status::Holds, json!(null))
    } else {
        let set = stat_limit_set(
            &inst.space,
            &inst.sequence,
            inst.r,
            &qualified,
            &inst.schedule,
            inst.n,
            inst.tau,
        )?;
        let status = if !set.nonmembers.is_empty() {
            Status::Fails
        } else if !set.inconclusive.is_empty() {
            Status::Inconclusive
        } else {
            Status::Holds
        };
        let j = json!({ "members": set.members(), "nonmembers": set.nonmembers, "inconclusive": set.inconclusive });
        (status, j)
    };
    Ok(CheckReport::new(
        TheoremId::T2_3,
        inst,
        stat.verdict.into(),
        conclusion,
        json!({ "stat_convergence": stat, "qualified": qualified, "membership": set_json }),
        vec![],
    ))
}

/// Run endpoints of the estimated set together with the inward direction
/// (`+1` for a left end, `-1` for a right end). Singleton runs have no inward
/// side.
fn run_endpoints(set: &LimitSetEstimate) -> Vec<(f64, f64)> {
    let mut ends = Vec::new();
    for iv in &set.intervals {
        if iv.lo < iv.hi {
            ends.push((iv.lo, 1.0));
            ends.push((iv.hi, -1.0));
        }
    }
    ends
}

fn step_f64(inst: &Instance) -> Result<f64> {
    let g = inst
        .grid
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("instance `{}` needs a grid", inst.label)))?;
    Ok(crate::decimal::to_f64(&g.step()))
}

/// Limits of members are members: for every run endpoint `e`, the points
/// `e ± step/2^k` approaching from inside the run are evaluated; when they are
/// all members, `e` must be a member.
pub fn check_limit_point_membership(inst: &Instance) -> Result<CheckReport> {
    let set = inst.limit_set(&inst.sequence, inst.r, inst.n)?;
    let step = step_f64(inst)?;
    let ends = run_endpoints(&set);
    let mut hyp = if set.members().is_empty() {
        Status::Fails
    } else {
        Status::Inconclusive
    };
    let mut conclusion = Status::Holds;
    let mut records = Vec::new();
    for (e, dir) in ends {
        let approach: Vec<f64> = (1..=4)
            .map(|k| e + dir * step / f64::from(1u32 << k))
            .collect();
        let mut all = approach.clone();
        all.push(e);
        let est = stat_limit_set(
            &inst.space,
            &inst.sequence,
            inst.r,
            &all,
            &inst.schedule,
            inst.n,
            inst.tau,
        )?;
        let approach_ok = approach
            .iter()
            .all(|&p| est.verdict_at(p) == Some(Verdict::Yes));
        let at_e = est.verdict_at(e).unwrap_or(Verdict::Inconclusive);
        if approach_ok {
            hyp = Status::Holds;
            conclusion = conclusion.and(at_e.into());
        }
        records.push(json!({ "endpoint": e, "approach": approach, "approach_members": approach_ok, "endpoint_verdict": verdict_json(at_e) }));
    }
    let notes = if records.is_empty() && hyp != Status::Fails {
        vec!["only singleton runs: no member sequence approaches an endpoint".to_string()]
    } else {
        vec![]
    };
    Ok(CheckReport::new(
        TheoremId::T2_4,
        inst,
        hyp,
        conclusion,
        json!({ "limit_set": set.intervals, "endpoints": records }),
        notes,
    ))
}

/// Closedness at refined resolution: for every maximal run the endpoint and
/// its half-step inward neighbour stay members (or inconclusive), never `No`.
/// The boundary toward the adjacent nonmember is bracketed by bisection and
/// recorded.
pub fn check_limit_set_closed(inst: &Instance) -> Result<CheckReport> {
    let set = inst.limit_set(&inst.sequence, inst.r, inst.n)?;
    let step = step_f64(inst)?;
    let hyp = match set.nonempty() {
        Verdict::Yes => Status::Holds,
        Verdict::No => Status::Fails,
        Verdict::Inconclusive => Status::Inconclusive,
    };
    let engine = |p: f64| -> Result<Verdict> {
        Ok(rough_stat_convergent(
            &inst.space,
            &inst.sequence,
            RealPoint::new(p)?,
            inst.r,
            &inst.schedule,
            inst.n,
            inst.tau,
        )?
        .verdict)
    };
    let mut conclusion = Status::Holds;
    let mut records = Vec::new();
    for iv in &set.intervals {
        for (e, dir) in [(iv.lo, 1.0), (iv.hi, -1.0)] {
            let mut probes = vec![e];
            if iv.lo < iv.hi {
                probes.push(e + dir * step / 2.0);
            }
            let verdicts = exec::map(&probes, |&p| engine(p))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            if verdicts.contains(&Verdict::No) {
                conclusion = Status::Fails;
            }
            // bisect toward the outside neighbour when it is a grid nonmember
            let outside = e - dir * step;
            let mut bracket = None;
            if set.verdict_at(outside) == Some(Verdict::No) && inst.space.contains(outside) {
                let (mut inside, mut out) = (e, outside);
                for _ in 0..4 {
                    let mid = 0.5 * (inside + out);
                    match engine(mid)? {
                        Verdict::Yes => inside = mid,
                        Verdict::No => out = mid,
                        Verdict::Inconclusive => break,
                    }
                }
                bracket = Some([inside.min(out), inside.max(out)]);
            }
            records.push(json!({
                "endpoint": e,
                "probes": probes,
                "verdicts": verdicts,
                "boundary_bracket": bracket,
            }));
        }
    }
    Ok(CheckReport::new(
        TheoremId::Cor2_1,
        inst,
        hyp,
        conclusion,
        json!({ "limit_set": set.intervals, "refined_step": step / 2.0, "endpoints": records }),
        vec![],
    ))
}

/// With constant self-distance: statistically bounded iff `st-LIM^r` is
/// nonempty for some `r` on the search grid.
pub fn check_stat_bounded_iff_nonempty(inst: &Instance) -> Result<CheckReport> {
    if inst.space.constant_self_distance().is_none() {
        return Ok(CheckReport::new(
            TheoremId::T2_5,
            inst,
            Status::Fails,
            Status::Inconclusive,
            json!({}),
            vec!["space has no constant self-distance".into()],
        ));
    }
    let bounded = stat_bounded(
        &inst.space,
        &inst.sequence,
        inst.point(inst.u)?,
        &inst.m_grid,
        inst.n,
        inst.tau,
    )?;
    let mut per_r = Vec::new();
    let mut any = Verdict::No;
    for &r in &inst.r_grid {
        let set = inst.limit_set(&inst.sequence, r, inst.n)?;
        let ne = set.nonempty();
        any = match (any, ne) {
            (Verdict::Yes, _) | (_, Verdict::Yes) => Verdict::Yes,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::No,
        };
        per_r.push(json!({ "r": r, "nonempty": verdict_json(ne), "intervals": set.intervals }));
    }
    let decided = |v: Verdict| v != Verdict::Inconclusive;
    let hyp = if decided(bounded.result.verdict) && decided(any) {
        Status::Holds
    } else {
        Status::Inconclusive
    };
    let agree = (bounded.result.verdict == Verdict::Yes) == (any == Verdict::Yes);
    let conclusion = match hyp {
        Status::Holds if agree => Status::Holds,
        Status::Holds => Status::Fails,
        _ => Status::Inconclusive,
    };
    let forward = if bounded.result.verdict == Verdict::Yes {
        Outcome::from_statuses(Status::Holds, any.into())
    } else {
        Outcome::Vacuous
    };
    let backward = if any == Verdict::Yes {
        Outcome::from_statuses(Status::Holds, bounded.result.verdict.into())
    } else {
        Outcome::Vacuous
    };
    Ok(CheckReport::new(
        TheoremId::T2_5,
        inst,
        hyp,
        conclusion,
        json!({
            "bounded": verdict_json(bounded.result.verdict),
            "witness_m": bounded.witness_m,
            "nonempty_for_some_r": verdict_json(any),
            "per_r": per_r,
            "forward": forward,
            "backward": backward,
        }),
        vec!["existence of r is searched on the r grid only".into()],
    ))
}

/// A density-one subsequence keeps every rough statistical limit.
pub fn check_density_one_subsequence(inst: &Instance) -> Result<CheckReport> {
    let sel = inst.selection.as_ref().ok_or_else(|| {
        Error::InvalidInput(format!("instance `{}` needs a selection", inst.label))
    })?;
    let est = density_estimate(sel, inst.n)?;
    let tau = inst.tau.value();
    let one = num_rational::Ratio::from_integer(1);
    let density_one = est.value + tau >= one && est.stability_gap <= tau;
    let clearly_not_one = est.value + tau * 5 < one;
    let hyp = if density_one {
        Status::Holds
    } else if clearly_not_one {
        Status::Fails
    } else {
        Status::Inconclusive
    };
    let sel_json = json!({ "selection": sel, "density": est });
    if hyp != Status::Holds {
        return Ok(CheckReport::new(
            TheoremId::T2_6,
            inst,
            hyp,
            Status::Inconclusive,
            sel_json,
            vec!["selection density is not compatible with 1".into()],
        ));
    }
    let full = inst.limit_set(&inst.sequence, inst.r, inst.n)?;
    let sub = restrict_to_indices(&inst.sequence, sel, inst.n)?;
    let sub_n = sub.horizon().unwrap_or(inst.n);
    let members = full.members();
    let mut notes = Vec::new();
    let conclusion = if members.is_empty() {
        notes.push("full-sequence limit set is empty on the grid".into());
        Status::Holds
    } else {
        let sub_set = stat_limit_set(
            &inst.space,
            &sub,
            inst.r,
            &members,
            &inst.schedule,
            sub_n,
            inst.tau,
        )?;
        if !sub_set.inconclusive.is_empty() {
            notes.push(format!(
                "{} members inconclusive for the subsequence: {:?}",
                sub_set.inconclusive.len(),
                sub_set.inconclusive
            ));
        }
        if sub_set.nonmembers.is_empty() {
            Status::Holds
        } else {
            notes.push(format!("members lost: {:?}", sub_set.nonmembers));
            Status::Fails
        }
    };
    Ok(CheckReport::new(
        TheoremId::T2_6,
        inst,
        hyp,
        conclusion,
        json!({ "selection": sel_json, "subsequence_terms": sub_n, "full_members": full.intervals }),
        notes,
    ))
}

/// Tail convergence of `k -> g(k)` to 0.
fn tends_to_zero<F>(inst: &Instance, g: F) -> Result<(Verdict, Value)>
where
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    let (v, ev) = tail_verdict(
        |k| Ok(g(k)?.abs()),
        0.0,
        &inst.schedule,
        inst.n,
        inst.tail_fraction,
    )?;
    Ok((v, serde_json::to_value(ev).unwrap()))
}

fn paired_fn<'a>(
    space: &'a PartialMetricSpace,
    a: &'a SequenceSpec,
    b: &'a SequenceSpec,
) -> impl Fn(u64) -> Result<f64> + Sync + Send + 'a {
    move |k| {
        let (u, v) = (a.value(k)?, b.value(k)?);
        space.check(u)?;
        space.check(v)?;
        Ok(space.eval_raw(u, v))
    }
}

struct Direction {
    hypothesis: Status,
    conclusion: Status,
    evidence: Value,
}

impl Direction {
    fn outcome(&self) -> Outcome {
        Outcome::from_statuses(self.hypothesis, self.conclusion)
    }
}

/// Combines the two directions of a transfer theorem: the report carries the
/// statuses of the direction that decides the outcome (fail, then pass, then
/// inconclusive, then vacuous).
fn combine(
    theorem: TheoremId,
    inst: &Instance,
    shared: Value,
    dirs: [Direction; 2],
    notes: Vec<String>,
) -> CheckReport {
    let rank = |o: Outcome| match o {
        Outcome::Fail => 0,
        Outcome::Pass => 1,
        Outcome::Inconclusive => 2,
        Outcome::Vacuous => 3,
    };
    let pick = dirs
        .iter()
        .min_by_key(|d| rank(d.outcome()))
        .expect("two directions");
    let evidence = json!({
        "shared": shared,
        "forward": { "hypothesis": pick_status(&dirs[0].hypothesis), "conclusion": pick_status(&dirs[0].conclusion), "outcome": dirs[0].outcome(), "evidence": dirs[0].evidence },
        "converse": { "hypothesis": pick_status(&dirs[1].hypothesis), "conclusion": pick_status(&dirs[1].conclusion), "outcome": dirs[1].outcome(), "evidence": dirs[1].evidence },
    });
    CheckReport::new(
        theorem,
        inst,
        pick.hypothesis,
        pick.conclusion,
        evidence,
        notes,
    )
}

fn pick_status(s: &Status) -> Value {
    serde_json::to_value(s).unwrap()
}

fn transfer(inst: &Instance, theorem: TheoremId) -> Result<CheckReport> {
    let xs = &inst.sequence;
    let ys = inst.second()?;
    let x = inst.point(inst.x)?;
    let space = &inst.space;
    let (paired, paired_ev) = tends_to_zero(inst, paired_fn(space, xs, ys))?;
    let with_bound = theorem == TheoremId::T2_8;
    let bound = inst.self_bound;
    let target_r = if with_bound { inst.r + bound } else { inst.r };

    let direction = |src: &SequenceSpec, dst: &SequenceSpec| -> Result<Direction> {
        let self_dist = paired_fn(space, src, src);
        let (self_status, self_ev) = if with_bound {
            let max = exec::fold_range(
                1..=inst.n,
                Ok(f64::NEG_INFINITY),
                |acc: Result<f64>, k| Ok(acc?.max(self_dist(k)?)),
                |a, b| Ok(a?.max(b?)),
            )?;
            let ok = if max <= bound + CMP_TOL {
                Status::Holds
            } else {
                Status::Fails
            };
            (ok, json!({ "max_self_distance": max, "bound": bound }))
        } else {
            let (v, ev) = tends_to_zero(inst, self_dist)?;
            (v.into(), ev)
        };
        let src_conv =
            rough_stat_convergent(space, src, x, inst.r, &inst.schedule, inst.n, inst.tau)?;
        let dst_conv =
            rough_stat_convergent(space, dst, x, target_r, &inst.schedule, inst.n, inst.tau)?;
        let hypothesis = Status::from(paired)
            .and(self_status)
            .and(src_conv.verdict.into());
        Ok(Direction {
            hypothesis,
            conclusion: dst_conv.verdict.into(),
            evidence: json!({
                "self_distance": self_ev,
                "self_distance_status": self_status,
                "source_convergence": verdict_json(src_conv.verdict),
                "target_convergence": dst_conv,
                "target_roughness": target_r,
            }),
        })
    };
    let forward = direction(xs, ys)?;
    let converse = direction(ys, xs)?;
    let mut notes = Vec::new();
    if with_bound {
        notes.push(
            "small self-distances give p(x_n, x_n) <= p(x_n, y_n), so a vanishing paired distance already forces vanishing self-distance; the weaker (r + c) conclusion is checked as stated"
                .into(),
        );
    }
    Ok(combine(
        theorem,
        inst,
        json!({ "paired_distance_to_zero": verdict_json(paired), "paired_tail": paired_ev }),
        [forward, converse],
        notes,
    ))
}

/// `p(x_n, y_n) -> 0` and `p(x_n, x_n) -> 0` transfer r-statistical limits
/// from `x_n` to `y_n` (and conversely).
pub fn check_asymptotic_pair_transfer(inst: &Instance) -> Result<CheckReport> {
    transfer(inst, TheoremId::T2_7)
}

/// With `p(x_n, x_n) <= c`, an r-statistical limit of `x_n` is an
/// `(r + c)`-statistical limit of `y_n` (and conversely with the bound on `y_n`).
pub fn check_bounded_self_distance_transfer(inst: &Instance) -> Result<CheckReport> {
    transfer(inst, TheoremId::T2_8)
}

/// With constant self-distance, a statistical cluster point `c` confines
/// `st-LIM^r` to the closed ball `B̄_r(c)`.
pub fn check_cluster_ball_containment(inst: &Instance) -> Result<CheckReport> {
    if inst.space.constant_self_distance().is_none() {
        return Ok(CheckReport::new(
            TheoremId::T2_9,
            inst,
            Status::Fails,
            Status::Inconclusive,
            json!({}),
            vec!["space has no constant self-distance".into()],
        ));
    }
    let cluster = stat_cluster_points(
        &inst.space,
        &inst.sequence,
        &[inst.center],
        &inst.schedule,
        inst.n,
        inst.tau,
    )?;
    let hyp = match cluster.points[0].verdict {
        ClusterVerdict::Cluster => Status::Holds,
        ClusterVerdict::NotCluster => Status::Fails,
        ClusterVerdict::Inconclusive => Status::Inconclusive,
    };
    let set = inst.limit_set(&inst.sequence, inst.r, inst.n)?;
    let c = inst.point(inst.center)?;
    let mut outside = Vec::new();
    for m in set.members() {
        if !closed_ball_contains(&inst.space, c, inst.r, RealPoint::new(m)?)? {
            outside.push(m);
        }
    }
    let conclusion = if outside.is_empty() {
        Status::Holds
    } else {
        Status::Fails
    };
    let notes = vec!["cluster point read as statistical cluster point".to_string()];
    Ok(CheckReport::new(
        TheoremId::T2_9,
        inst,
        hyp,
        conclusion,
        json!({ "cluster": cluster.points[0], "limit_set": set.intervals, "outside_ball": outside }),
        notes,
    ))
}

pub fn run_check(theorem: TheoremId, inst: &Instance) -> Result<CheckReport> {
    match theorem {
        TheoremId::T2_1 => check_rough_implies_rough_stat(inst),
        TheoremId::T2_2 => check_diam_bound(inst),
        TheoremId::T2_3 => check_ball_inclusion(inst),
        TheoremId::T2_4 => check_limit_point_membership(inst),
        TheoremId::T2_5 => check_stat_bounded_iff_nonempty(inst),
        TheoremId::T2_6 => check_density_one_subsequence(inst),
        TheoremId::T2_7 => check_asymptotic_pair_transfer(inst),
        TheoremId::T2_8 => check_bounded_self_distance_transfer(inst),
        TheoremId::T2_9 => check_cluster_ball_containment(inst),
        TheoremId::Cor2_1 => check_limit_set_closed(inst),
    }
}

fn se(a: f64) -> PartialMetricSpace {
    PartialMetricSpace::shifted_euclidean(a).expect("valid self-distance")
}

const MAX: PartialMetricSpace = PartialMetricSpace::max_rplus();

/// The canonical instance for each theorem, as run by the suite.
pub fn default_instance(theorem: TheoremId) -> Instance {
    match theorem {
        TheoremId::T2_1 => Instance::new("reciprocal-to-zero", se(1.0), reciprocal(1.0)).n(10_000),
        TheoremId::T2_2 => Instance::new("alternating-diameter", se(1.0), alternating(1.0))
            .r(1.0)
            .grid(-3, 3, (1, 4)),
        TheoremId::T2_3 => Instance::new("reciprocal-ball", se(1.0), reciprocal(1.0))
            .r(1.0)
            .grid(-2, 2, (1, 4)),
        TheoremId::T2_4 | TheoremId::Cor2_1 => {
            Instance::new("example-limit-set", MAX, example_sequence())
                .r(1.0)
                .grid(0, 5, (1, 4))
        }
        TheoremId::T2_5 => Instance::new("alternating-bounded", se(1.0), alternating(1.0))
            .r_grid(vec![0.0, 1.0, 2.0])
            .grid(-3, 3, (1, 4)),
        TheoremId::T2_6 => Instance::new("example-drop-squares", MAX, example_sequence())
            .r(1.0)
            .grid(0, 5, (1, 4))
            .selection(IndexPredicate::not(IndexPredicate::PerfectSquare)),
        TheoremId::T2_7 => {
            Instance::new("reciprocal-pair", MAX, reciprocal(1.0)).sequence2(reciprocal(0.5))
        }
        TheoremId::T2_8 => Instance::new("reciprocal-pair-bounded", MAX, reciprocal(1.0))
            .sequence2(reciprocal(0.5))
            .self_bound(1.0),
        TheoremId::T2_9 => Instance::new("alternating-cluster-plus-one", se(1.0), alternating(1.0))
            .r(1.0)
            .center(1.0)
            .grid(-3, 3, (1, 4)),
    }
}

/// All listed built-in instances per theorem, including the vacuous ones.
pub fn catalog() -> Vec<(TheoremId, Instance)> {
    use TheoremId::*;
    let mut out: Vec<(TheoremId, Instance)> = TheoremId::ALL
        .into_iter()
        .map(|t| (t, default_instance(t)))
        .collect();
    out.extend([
        (
            T2_1,
            Instance::new("example-not-rough", MAX, example_sequence())
                .x(2.0)
                .r(1.0),
        ),
        (
            T2_1,
            Instance::new("constant", se(1.0), constant(2.0))
                .x(2.0)
                .n(10_000),
        ),
        (
            T2_2,
            Instance::new("reciprocal-diameter", se(1.0), reciprocal(1.0))
                .r(1.0)
                .grid(-3, 3, (1, 4)),
        ),
        (
            T2_2,
            Instance::new("example-nonconstant", MAX, example_sequence())
                .r(1.0)
                .grid(0, 5, (1, 4)),
        ),
        (
            T2_3,
            Instance::new("example-ball", MAX, example_sequence())
                .x(2.0)
                .r(1.0)
                .grid(0, 5, (1, 4)),
        ),
        (
            T2_3,
            Instance::new("constant-ball", MAX, constant(2.0))
                .x(2.0)
                .n(10_000)
                .grid(2, 3, (1, 1)),
        ),
        (
            Cor2_1,
            Instance::new("reciprocal-closed", se(1.0), reciprocal(1.0))
                .r(1.0)
                .grid(-2, 2, (1, 4)),
        ),
        (
            Cor2_1,
            Instance::new("constant-closed", se(1.0), constant(0.0))
                .n(10_000)
                .grid(-1, 1, (1, 4)),
        ),
        (
            T2_5,
            Instance::new("linear-unbounded", se(1.0), linear())
                .r_grid(vec![0.0, 1.0, 2.0, 5.0])
                .grid(-10, 10, (1, 2)),
        ),
        (
            T2_5,
            Instance::new("constant-bounded", se(1.0), constant(0.0)).grid(-1, 1, (1, 4)),
        ),
        (
            T2_6,
            Instance::new("example-even-selection", MAX, example_sequence())
                .r(1.0)
                .grid(0, 5, (1, 4))
                .selection(IndexPredicate::Even),
        ),
        (
            T2_6,
            Instance::new("constant-drop-squares", MAX, constant(1.0))
                .x(1.0)
                .grid(0, 2, (1, 4))
                .selection(IndexPredicate::not(IndexPredicate::PerfectSquare)),
        ),
        (
            T2_7,
            Instance::new("example-self-pair", MAX, example_sequence())
                .sequence2(example_sequence())
                .x(2.0)
                .r(1.0),
        ),
        (
            T2_7,
            Instance::new("zero-pair", MAX, constant(0.0)).sequence2(constant(0.0)),
        ),
        (
            T2_8,
            Instance::new("zero-pair-bounded", MAX, constant(0.0)).sequence2(constant(0.0)),
        ),
        (
            T2_8,
            Instance::new("example-self-pair-bounded", MAX, example_sequence())
                .sequence2(example_sequence())
                .x(2.0)
                .r(1.0)
                .self_bound(2.0),
        ),
        (
            T2_9,
            Instance::new("alternating-cluster-minus-one", se(1.0), alternating(1.0))
                .r(1.0)
                .center(-1.0)
                .grid(-3, 3, (1, 4)),
        ),
        (
            T2_9,
            Instance::new("alternating-not-cluster", se(1.0), alternating(1.0))
                .r(1.0)
                .center(0.0)
                .grid(-3, 3, (1, 4)),
        ),
    ]);
    out
}

/// Runs the default instance of every theorem, with `n` and `tau` overriding
/// the instance values where given. Reports are sorted by theorem id, then
/// instance hash.
pub fn run_suite(n: Option<u64>, tau: Option<Tau>) -> Result<Vec<CheckReport>> {
    let jobs: Vec<(TheoremId, Instance)> = TheoremId::ALL
        .into_iter()
        .map(|t| {
            let mut inst = default_instance(t);
            if let Some(n) = n {
                inst.n = n;
            }
            if let Some(tau) = tau {
                inst.tau = tau;
            }
            (t, inst)
        })
        .collect();
    let mut reports = exec::map(&jobs, |(t, inst)| run_check(*t, inst))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    sort_reports(&mut reports);
    Ok(reports)
}

pub fn sort_reports(reports: &mut [CheckReport]) {
    reports.sort_by(|a, b| {
        a.theorem
            .cmp(&b.theorem)
            .then_with(|| a.instance_hash.cmp(&b.instance_hash))
    });
}

/// A seeded random instance on a constant self-distance space with a bounded
/// piecewise sequence.
pub fn random_instance(seed: u64, n: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = *[0.5, 1.0, 1.5, 2.0].choose(&mut rng).unwrap();
    let quarter = |rng: &mut ChaCha8Rng, lo: i32, hi: i32| f64::from(rng.gen_range(lo..=hi)) / 4.0;

    let mut pieces = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        let predicate = match rng.gen_range(0..5) {
            0 => IndexPredicate::PerfectSquare,
            1 => IndexPredicate::Even,
            2 => IndexPredicate::Odd,
            3 => {
                let m = rng.gen_range(2..=6);
                IndexPredicate::Residue {
                    m,
                    r: rng.gen_range(0..m as i64),
                }
            }
            _ => IndexPredicate::And(vec![
                IndexPredicate::PerfectSquare,
                IndexPredicate::Residue {
                    m: 2,
                    r: rng.gen_range(0..2),
                },
            ]),
        };
        pieces.push(Piece {
            predicate,
            rule: random_rule(&mut rng, &quarter),
        });
    }
    pieces.push(Piece {
        predicate: IndexPredicate::All,
        rule: random_rule(&mut rng, &quarter),
    });
    let seq = SequenceSpec::piecewise(format!("random-{seed}"), pieces).expect("covering pieces");

    let mut inst = Instance::new(format!("random-{seed}"), se(a), seq)
        .x(quarter(&mut rng, -12, 12))
        .r(*[0.0, 0.5, 1.0, 2.0].choose(&mut rng).unwrap())
        .n(n)
        .grid(-3, 3, (1, 4))
        .selection(IndexPredicate::not(IndexPredicate::PerfectSquare));
    inst.seed = Some(seed);
    inst
}

fn random_rule(
    rng: &mut ChaCha8Rng,
    quarter: &impl Fn(&mut ChaCha8Rng, i32, i32) -> f64,
) -> ValueRule {
    match rng.gen_range(0..3) {
        0 => ValueRule::Const(quarter(rng, -12, 12)),
        1 => ValueRule::AlternatingSign {
            amplitude: quarter(rng, 1, 8),
        },
        _ => ValueRule::ReciprocalN {
            scale: *[-1.0, 1.0, 2.0].choose(rng).unwrap(),
        },
    }
}
