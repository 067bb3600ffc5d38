//! Experiment execution and report rendering.

use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::analysis::{
    rough_convergent, rough_limit_set, rough_stat_convergent, stat_bounded, stat_cauchy,
    stat_cluster_points, stat_limit_set, CauchyVerdict, ClusterReport, ConvergenceVerdict,
    EpsSchedule, LevelEvidence, LimitSetEstimate, Verdict,
};
use crate::config::{ExperimentConfig, RunMode};
use crate::decimal::{round12, to_f64};
use crate::density::{fraction_string, Fraction, Tau};
use crate::error::{Error, Result};
use crate::exec;
use crate::pm::{PartialMetricSpace, RealPoint, SpaceKind};
use crate::seq::{example_sequence, SequenceSpec};
use crate::theorems::{
    random_instance, run_check, run_suite, sort_reports, CheckReport, Outcome, TheoremId,
};

/// Prefix length for random suite instances unless `n` is set.
pub const RANDOM_N: u64 = 10_000;

/// Theorems exercised on random instances.
pub const RANDOM_THEOREMS: [TheoremId; 4] = [
    TheoremId::T2_1,
    TheoremId::T2_2,
    TheoremId::T2_3,
    TheoremId::T2_6,
];

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Top-level keys `config`, `results`, `discrepancies`, `version`.
    pub body: Value,
    pub csv: String,
    pub any_fail: bool,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.any_fail {
            2
        } else {
            0
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.body).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Rounds every non-integer number to 12 significant digits.
pub fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n
                .as_f64()
                .and_then(|x| serde_json::Number::from_f64(round12(x)))
            {
                *n = x;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_numbers),
        Value::Object(o) => o.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("engine output serializes")
}

struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Table { writer }
    }

    fn row(&mut self, fields: Vec<String>) {
        self.writer.write_record(&fields).expect("in-memory write");
    }

    fn finish(self) -> String {
        String::from_utf8(self.writer.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

fn num(v: f64) -> String {
    let v = round12(v);
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

fn verdict_str<T: Serialize>(v: &T) -> String {
    match to_value(v) {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

/// `(eps, density)` of the level with the largest density; for tail evidence
/// the share of the window at or above `r + smallest ε`.
fn worst(m: &ConvergenceVerdict, smallest_eps: f64) -> (Option<f64>, Fraction) {
    if let Some(t) = &m.tail {
        let len = t.window_end - t.window_start + 1;
        return (Some(smallest_eps), Ratio::new(t.window_exceedances, len));
    }
    match m.worst_level() {
        Some(e) => (Some(e.level), e.density.evidence.value),
        None => (None, Ratio::new(0, 1)),
    }
}

fn limit_set_csv(est: &LimitSetEstimate, smallest_eps: f64) -> String {
    let mut t = Table::new(&[
        "candidate",
        "verdict",
        "worst_eps",
        "worst_density_num",
        "worst_density_den",
    ]);
    for p in &est.points {
        let (eps, d) = worst(&p.membership, smallest_eps);
        t.row(vec![
            num(p.x),
            verdict_str(&p.membership.verdict),
            eps.map(num).unwrap_or_default(),
            d.numer().to_string(),
            d.denom().to_string(),
        ]);
    }
    t.finish()
}

fn levels_csv(v: &ConvergenceVerdict, level_name: &str) -> String {
    let mut t = Table::new(&[
        level_name,
        "density_class",
        "count",
        "n",
        "density_num",
        "density_den",
    ]);
    for e in &v.levels {
        let d = &e.density;
        t.row(vec![
            num(e.level),
            verdict_str(&d.verdict),
            d.evidence.count.to_string(),
            d.evidence.n.to_string(),
            d.evidence.value.numer().to_string(),
            d.evidence.value.denom().to_string(),
        ]);
    }
    t.finish()
}

fn tail_csv(v: &ConvergenceVerdict) -> String {
    let mut t = Table::new(&[
        "verdict",
        "window_start",
        "window_end",
        "first_half_sup",
        "second_half_sup",
        "tail_sup",
        "window_exceedances",
    ]);
    if let Some(e) = &v.tail {
        t.row(vec![
            verdict_str(&v.verdict),
            e.window_start.to_string(),
            e.window_end.to_string(),
            num(e.first_half_sup),
            num(e.second_half_sup),
            num(e.tail_sup),
            e.window_exceedances.to_string(),
        ]);
    }
    t.finish()
}

fn cauchy_csv(v: &CauchyVerdict) -> String {
    let mut t = Table::new(&[
        "m",
        "l",
        "verdict",
        "worst_eps",
        "worst_density_num",
        "worst_density_den",
    ]);
    for p in &v.pairs {
        let w = p
            .levels
            .iter()
            .fold(None, |b: Option<&LevelEvidence>, e| match b {
                Some(b) if b.density.evidence.value >= e.density.evidence.value => Some(b),
                _ => Some(e),
            });
        let (eps, d) = w.map_or((None, Ratio::new(0, 1)), |e| {
            (Some(e.level), e.density.evidence.value)
        });
        t.row(vec![
            p.m.to_string(),
            num(p.l),
            verdict_str(&p.verdict),
            eps.map(num).unwrap_or_default(),
            d.numer().to_string(),
            d.denom().to_string(),
        ]);
    }
    t.finish()
}

fn clusters_csv(c: &ClusterReport) -> String {
    let mut t = Table::new(&[
        "candidate",
        "verdict",
        "sparsest_eps",
        "near_density_num",
        "near_density_den",
    ]);
    for p in &c.points {
        let w = p
            .levels
            .iter()
            .fold(None, |b: Option<&LevelEvidence>, e| match b {
                Some(b) if b.density.evidence.value <= e.density.evidence.value => Some(b),
                _ => Some(e),
            });
        let (eps, d) = w.map_or((None, Ratio::new(0, 1)), |e| {
            (Some(e.level), e.density.evidence.value)
        });
        t.row(vec![
            num(p.c),
            verdict_str(&p.verdict),
            eps.map(num).unwrap_or_default(),
            d.numer().to_string(),
            d.denom().to_string(),
        ]);
    }
    t.finish()
}

fn checks_csv(reports: &[CheckReport]) -> String {
    let mut t = Table::new(&[
        "theorem",
        "label",
        "instance_hash",
        "hypothesis",
        "conclusion",
        "outcome",
    ]);
    for r in reports {
        t.row(vec![
            r.theorem.to_string(),
            r.instance.label.clone(),
            r.instance_hash.clone(),
            verdict_str(&r.hypothesis_status),
            verdict_str(&r.conclusion_status),
            verdict_str(&r.outcome),
        ]);
    }
    t.finish()
}

fn summary(reports: &[CheckReport]) -> Value {
    let count = |o: Outcome| reports.iter().filter(|r| r.outcome == o).count();
    json!({
        "checks": reports.len(),
        "pass": count(Outcome::Pass),
        "fail": count(Outcome::Fail),
        "inconclusive": count(Outcome::Inconclusive),
        "vacuous": count(Outcome::Vacuous),
    })
}

fn is_example_sequence(seq: &SequenceSpec) -> bool {
    seq.pieces().is_some() && seq.pieces() == example_sequence().pieces()
}

/// The point-0 finding for the built-in example at `r = 1`: the published
/// limit set contains 0, but the exceedance set at `r + 1/2` has density
/// about 1/2.
pub fn point_zero_finding(schedule: &EpsSchedule, n: u64, tau: Tau) -> Result<Option<Value>> {
    let space = PartialMetricSpace::max_rplus();
    let seq = example_sequence();
    let zero = RealPoint::new(0.0)?;
    let at_half = rough_stat_convergent(
        &space,
        &seq,
        zero,
        1.0,
        &EpsSchedule::new(vec![0.5])?,
        n,
        tau,
    )?;
    let full = rough_stat_convergent(&space, &seq, zero, 1.0, schedule, n, tau)?;
    if full.verdict == Verdict::Yes {
        return Ok(None);
    }
    let e = &at_half.levels[0].density.evidence;
    Ok(Some(json!({
        "id": "example-2.1-point-0",
        "sequence": seq.descriptor(),
        "space": space.to_string(),
        "r": 1.0,
        "point": 0.0,
        "claimed_set": "{0} ∪ [1, ∞)",
        "claimed_verdict": "yes",
        "measured_verdict": full.verdict,
        "eps": 0.5,
        "exceedance_count": e.count,
        "n": e.n,
        "exceedance_density": fraction_string(&e.value),
        "finding": "|p(x_n, 0) - p(0, 0)| = 2 on every even non-square index, so the set exceeding r + ε has density near 1/2 for every ε < 1",
    })))
}

fn wants_point_zero(cfg: &ExperimentConfig) -> bool {
    match cfg.mode {
        RunMode::Suite => true,
        _ => {
            matches!(
                cfg.space.as_ref().map(PartialMetricSpace::kind),
                Some(SpaceKind::MaxRPlus)
            ) && cfg.sequence.as_ref().is_some_and(is_example_sequence)
                && cfg.r == Ratio::from_integer(1)
        }
    }
}

fn suite_reports(cfg: &ExperimentConfig) -> Result<Vec<CheckReport>> {
    let n = cfg.is_explicit("n").then_some(cfg.n);
    let tau = cfg.is_explicit("tau").then_some(cfg.tau);
    let mut reports = run_suite(n, tau)?;
    if cfg.random > 0 {
        let base = cfg.seed.unwrap_or(0);
        let rn = n.unwrap_or(RANDOM_N);
        let jobs: Vec<(TheoremId, u64)> = (0..cfg.random)
            .flat_map(|i| {
                RANDOM_THEOREMS
                    .into_iter()
                    .map(move |t| (t, base.wrapping_add(i)))
            })
            .collect();
        let extra = exec::map(&jobs, |&(t, seed)| {
            let mut inst = random_instance(seed, rn);
            if let Some(tau) = tau {
                inst.tau = tau;
            }
            run_check(t, &inst)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        reports.extend(extra);
        sort_reports(&mut reports);
    }
    Ok(reports)
}

/// Runs the configured experiment. Any engine error aborts the whole run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let schedule = cfg.eps_schedule();
    let x = || RealPoint::new(to_f64(&cfg.x));
    let r = to_f64(&cfg.r);
    let points = cfg.grid.points();
    let need = |o: Option<&PartialMetricSpace>| {
        o.cloned()
            .ok_or_else(|| Error::InvalidInput("config needs a space".into()))
    };

    let mut any_fail = false;
    let (results, csv) = if cfg.mode == RunMode::Suite {
        let reports = suite_reports(cfg)?;
        any_fail = reports.iter().any(|r| r.outcome == Outcome::Fail);
        let csv = checks_csv(&reports);
        (
            json!({ "summary": summary(&reports), "reports": reports }),
            csv,
        )
    } else {
        let space = need(cfg.space.as_ref())?;
        let seq = cfg
            .sequence
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("config needs a sequence".into()))?;
        match cfg.mode {
            RunMode::RoughStat => {
                let v = rough_stat_convergent(&space, seq, x()?, r, &schedule, cfg.n, cfg.tau)?;
                let csv = levels_csv(&v, "eps");
                (to_value(&v), csv)
            }
            RunMode::Rough => {
                let v = rough_convergent(&space, seq, x()?, r, &schedule, cfg.n, cfg.tail())?;
                let csv = tail_csv(&v);
                (to_value(&v), csv)
            }
            RunMode::LimitSet => {
                let est = stat_limit_set(&space, seq, r, &points, &schedule, cfg.n, cfg.tau)?;
                let csv = limit_set_csv(&est, schedule.smallest());
                (to_value(&est), csv)
            }
            RunMode::RoughLimitSet => {
                let est = rough_limit_set(&space, seq, r, &points, &schedule, cfg.n, cfg.tail())?;
                let csv = limit_set_csv(&est, schedule.smallest());
                (to_value(&est), csv)
            }
            RunMode::Bounded => {
                let m: Vec<f64> = cfg.m_grid.iter().map(to_f64).collect();
                let v = stat_bounded(
                    &space,
                    seq,
                    RealPoint::new(to_f64(&cfg.u))?,
                    &m,
                    cfg.n,
                    cfg.tau,
                )?;
                let csv = levels_csv(&v.result, "m");
                (to_value(&v), csv)
            }
            RunMode::Cauchy => {
                let l: Vec<f64> = cfg.l_grid.iter().map(to_f64).collect();
                let v = stat_cauchy(
                    &space,
                    seq,
                    &cfg.m_candidates,
                    &l,
                    &schedule,
                    cfg.n,
                    cfg.tau,
                )?;
                let csv = cauchy_csv(&v);
                (to_value(&v), csv)
            }
            RunMode::Clusters => {
                let v = stat_cluster_points(&space, seq, &points, &schedule, cfg.n, cfg.tau)?;
                let csv = clusters_csv(&v);
                (to_value(&v), csv)
            }
            RunMode::Theorem(t) => {
                let rep = run_check(t, &cfg.instance())?;
                any_fail = rep.outcome == Outcome::Fail;
                let csv = checks_csv(std::slice::from_ref(&rep));
                (to_value(&rep), csv)
            }
            RunMode::Suite => unreachable!(),
        }
    };

    let mut discrepancies = Vec::new();
    if wants_point_zero(cfg) {
        let (n, tau) = if cfg.mode == RunMode::Suite {
            (
                if cfg.is_explicit("n") {
                    cfg.n
                } else {
                    crate::theorems::DEFAULT_N
                },
                cfg.tau,
            )
        } else {
            (cfg.n, cfg.tau)
        };
        if let Some(f) = point_zero_finding(&schedule, n, tau)? {
            discrepancies.push(f);
        }
    }

    let mut body = Map::new();
    body.insert("config".into(), cfg.to_json());
    body.insert("results".into(), results);
    body.insert("discrepancies".into(), Value::Array(discrepancies));
    body.insert("version".into(), Value::String(crate::VERSION.into()));
    let mut body = Value::Object(body);
    round_numbers(&mut body);
    Ok(Report {
        body,
        csv,
        any_fail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn run(text: &str) -> Report {
        run_experiment(&parse_config(text).unwrap()).unwrap()
    }

    #[test]
    fn example_limit_set_report() {
        let rep =
            run("space = max_rplus\nsequence = example_2_1\nmode = limit_set\nr = 1\nn = 20000\n");
        let res = &rep.body["results"];
        assert_eq!(res["intervals"], json!([[1.0, 5.0]]));
        assert!(res["nonmembers"].as_array().unwrap().contains(&json!(0.0)));
        let d = &rep.body["discrepancies"][0];
        assert_eq!(d["id"], "example-2.1-point-0");
        assert_eq!(d["measured_verdict"], "no");
        assert_eq!(rep.exit_code(), 0);
        let mut keys: Vec<&String> = rep.body.as_object().unwrap().keys().collect();
        keys.sort();
        assert_eq!(keys, ["config", "discrepancies", "results", "version"]);
        let csv = rep.csv.lines().collect::<Vec<_>>();
        assert_eq!(
            csv[0],
            "candidate,verdict,worst_eps,worst_density_num,worst_density_den"
        );
        assert_eq!(csv.len(), 102);
        assert!(csv[1].starts_with("0.0,no,"), "{}", csv[1]);
    }

    #[test]
    fn theorem_2_2_alternating() {
        let rep = run(
            "space = shifted_euclidean\na = 1\nsequence = alternating:1\nmode = theorem:2.2\n\
             r = 1\ngrid_lo = -3\ngrid_hi = 3\nstep = 0.25\nn = 20000\n",
        );
        assert_eq!(rep.body["results"]["outcome"], "pass");
        assert!(rep.body["discrepancies"].as_array().unwrap().is_empty());
    }

    #[test]
    fn densities_agree_between_json_and_csv() {
        let rep = run("space = max_rplus\nsequence = example_2_1\nmode = rough_stat\nx = 0\nr = 1\nn = 1000\n");
        let levels = rep.body["results"]["levels"].as_array().unwrap();
        for (row, lvl) in rep.csv.lines().skip(1).zip(levels) {
            let f: Vec<&str> = row.split(',').collect();
            let json_value = lvl["density"]["evidence"]["value"].as_str().unwrap();
            let csv_value = format!("{}/{}", f[4], f[5]);
            assert_eq!(json_value, csv_value);
        }
    }

    #[test]
    fn exit_codes() {
        let mut rep = run("mode = suite\nn = 2000\n");
        assert_eq!(rep.exit_code(), 0);
        rep.any_fail = true;
        assert_eq!(rep.exit_code(), 2);
    }

    #[test]
    fn round_numbers_keeps_integers() {
        let mut v = json!({"a": 0.1 + 0.2, "b": 3, "c": [1.0 / 3.0]});
        round_numbers(&mut v);
        assert_eq!(v, json!({"a": 0.3, "b": 3, "c": [0.333333333333]}));
    }
}
