//! Line-oriented experiment configuration.
//!
//! One `key = value` per line, `#` starts a comment. Numbers are exact
//! decimals or `p/q` fractions; lists are comma separated. Parsing reports
//! every problem it finds, each tagged with its line.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::Signed;
use serde_json::{json, Value};

use crate::analysis::{EpsSchedule, Grid, TailFraction};
use crate::decimal::{parse_rational, to_f64, Rational};
use crate::density::{Fraction, Tau};
use crate::pm::PartialMetricSpace;
use crate::seq::{parse_predicate, parse_sequence, IndexPredicate, SequenceSpec};
use crate::theorems::{default_m_grid, Instance, TheoremId, DEFAULT_N};

/// Every accepted key with its `--help` description.
pub const KEYS: &[(&str, &str)] = &[
    ("label", "free-form run label (default `experiment`)"),
    ("space", "max_rplus | shifted_euclidean (required except in suite mode)"),
    ("a", "self-distance of shifted_euclidean; required for that space"),
    ("sequence", "example_2_1 | constant:c | reciprocal[:s] | alternating:amp | linear | pieces: pred -> rule; ..."),
    ("sequence2", "second sequence for theorem:2.7 and theorem:2.8"),
    ("mode", "rough_stat | rough | limit_set | rough_limit_set | bounded | cauchy | clusters | theorem:<id> | suite"),
    ("x", "candidate limit (default 0)"),
    ("r", "roughness degree, >= 0 (default 0)"),
    ("n", "prefix length N (default 100000)"),
    ("tau", "density threshold, 0 < tau < 1/5 (default 1/100)"),
    ("schedule", "strictly decreasing positive eps list (default 1, 0.5, 0.1, 0.05, 0.01)"),
    ("grid_lo", "candidate grid lower end (default 0)"),
    ("grid_hi", "candidate grid upper end (default 5)"),
    ("step", "candidate grid step, > 0 (default 0.05)"),
    ("tail_fraction", "rough tail window starts at ceil(N * f) (default 0.5)"),
    ("m_grid", "increasing bounds M for boundedness (default 1, 2, 5, 10, 100, 1000)"),
    ("r_grid", "roughness degrees searched by theorem:2.5 (default 0)"),
    ("m_candidates", "anchor indices m for the Cauchy search (default 1)"),
    ("l_grid", "offsets l for the Cauchy search (default 0)"),
    ("selection", "index predicate for theorem:2.6, e.g. not(square)"),
    ("u", "centre for boundedness (default 0)"),
    ("center", "cluster point c for theorem:2.9 (default 0)"),
    ("self_bound", "bound C on p(y_n, y_n) for theorem:2.8 (default 0)"),
    ("seed", "seed for random instances"),
    ("random", "number of seeded random instances added in suite mode (default 0)"),
];

/// `--help` text listing every key.
pub fn key_help() -> String {
    let mut out = String::from("Config keys (one `key = value` per line, `#` comments):\n");
    for (k, d) in KEYS {
        out.push_str(&format!("  {k:<14} {d}\n"));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    RoughStat,
    Rough,
    LimitSet,
    RoughLimitSet,
    Bounded,
    Cauchy,
    Clusters,
    Theorem(TheoremId),
    Suite,
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunMode::RoughStat => f.write_str("rough_stat"),
            RunMode::Rough => f.write_str("rough"),
            RunMode::LimitSet => f.write_str("limit_set"),
            RunMode::RoughLimitSet => f.write_str("rough_limit_set"),
            RunMode::Bounded => f.write_str("bounded"),
            RunMode::Cauchy => f.write_str("cauchy"),
            RunMode::Clusters => f.write_str("clusters"),
            RunMode::Theorem(t) => write!(f, "theorem:{t}"),
            RunMode::Suite => f.write_str("suite"),
        }
    }
}

fn parse_mode(s: &str) -> Result<RunMode, String> {
    Ok(match s {
        "rough_stat" => RunMode::RoughStat,
        "rough" => RunMode::Rough,
        "limit_set" => RunMode::LimitSet,
        "rough_limit_set" => RunMode::RoughLimitSet,
        "bounded" => RunMode::Bounded,
        "cauchy" => RunMode::Cauchy,
        "clusters" => RunMode::Clusters,
        "suite" => RunMode::Suite,
        _ => match s.strip_prefix("theorem:") {
            Some(id) => RunMode::Theorem(id.trim().parse().map_err(|e| format!("{e}"))?),
            None => return Err(format!("unknown mode `{s}`")),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based; 0 for problems not tied to a line (missing keys).
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

/// A validated experiment. Numeric parameters keep their exact values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub label: String,
    pub space: Option<PartialMetricSpace>,
    pub sequence: Option<SequenceSpec>,
    pub sequence2: Option<SequenceSpec>,
    pub mode: RunMode,
    pub x: Rational,
    pub r: Rational,
    pub n: u64,
    pub tau: Tau,
    pub schedule: Vec<Rational>,
    pub grid: Grid,
    pub tail_fraction: Rational,
    pub m_grid: Vec<Rational>,
    pub r_grid: Vec<Rational>,
    pub m_candidates: Vec<u64>,
    pub l_grid: Vec<Rational>,
    pub selection: Option<IndexPredicate>,
    pub u: Rational,
    pub center: Rational,
    pub self_bound: Rational,
    pub seed: Option<u64>,
    pub random: u64,
    /// Keys that appeared in the document.
    pub explicit: Vec<String>,
}

fn int(v: i64) -> Rational {
    Rational::from_integer(v)
}

fn default_schedule() -> Vec<Rational> {
    vec![
        int(1),
        Ratio::new(1, 2),
        Ratio::new(1, 10),
        Ratio::new(1, 20),
        Ratio::new(1, 100),
    ]
}

impl ExperimentConfig {
    fn defaults(mode: RunMode) -> Self {
        ExperimentConfig {
            label: "experiment".into(),
            space: None,
            sequence: None,
            sequence2: None,
            mode,
            x: int(0),
            r: int(0),
            n: DEFAULT_N,
            tau: Tau::default(),
            schedule: default_schedule(),
            grid: Grid::new(int(0), int(5), Ratio::new(1, 20)).expect("default grid"),
            tail_fraction: Ratio::new(1, 2),
            m_grid: default_m_grid()
                .into_iter()
                .map(|m| int(m as i64))
                .collect(),
            r_grid: vec![int(0)],
            m_candidates: vec![1],
            l_grid: vec![int(0)],
            selection: None,
            u: int(0),
            center: int(0),
            self_bound: int(0),
            seed: None,
            random: 0,
            explicit: Vec::new(),
        }
    }

    /// A suite run; `None` keeps each default instance's own value.
    pub fn suite(n: Option<u64>, tau: Option<Tau>, seed: Option<u64>, random: u64) -> Self {
        let mut cfg = ExperimentConfig::defaults(RunMode::Suite);
        cfg.label = "suite".into();
        if let Some(n) = n {
            cfg.n = n;
            cfg.explicit.push("n".into());
        }
        if let Some(tau) = tau {
            cfg.tau = tau;
            cfg.explicit.push("tau".into());
        }
        cfg.seed = seed;
        cfg.random = random;
        cfg
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.iter().any(|k| k == key)
    }

    pub fn eps_schedule(&self) -> EpsSchedule {
        EpsSchedule::new(self.schedule.iter().map(to_f64).collect()).expect("validated schedule")
    }

    pub fn tail(&self) -> TailFraction {
        TailFraction::new(to_f64(&self.tail_fraction)).expect("validated tail fraction")
    }

    /// The theorem-check instance described by this config. Needs a space
    /// and a sequence, which every non-suite config has.
    pub fn instance(&self) -> Instance {
        let mut inst = Instance::new(
            self.label.clone(),
            self.space.expect("validated space"),
            self.sequence.clone().expect("validated sequence"),
        )
        .x(to_f64(&self.x))
        .r(to_f64(&self.r))
        .n(self.n)
        .with_grid(self.grid.clone())
        .u(to_f64(&self.u))
        .r_grid(self.r_grid.iter().map(to_f64).collect())
        .center(to_f64(&self.center))
        .self_bound(to_f64(&self.self_bound));
        inst.schedule = self.eps_schedule();
        inst.tau = self.tau;
        inst.tail_fraction = self.tail();
        inst.m_grid = self.m_grid.iter().map(to_f64).collect();
        inst.sequence2 = self.sequence2.clone();
        inst.selection = self.selection.clone();
        inst.seed = self.seed;
        inst
    }

    /// Resolved configuration as echoed in reports.
    pub fn to_json(&self) -> Value {
        let f = |r: &Rational| to_f64(r);
        let fs = |v: &[Rational]| v.iter().map(to_f64).collect::<Vec<_>>();
        json!({
            "label": self.label,
            "mode": self.mode.to_string(),
            "space": self.space.as_ref().map(|s| s.to_string()),
            "sequence": self.sequence.as_ref().map(SequenceSpec::descriptor),
            "sequence2": self.sequence2.as_ref().map(SequenceSpec::descriptor),
            "x": f(&self.x),
            "r": f(&self.r),
            "n": self.n,
            "tau": self.tau.to_string(),
            "schedule": fs(&self.schedule),
            "grid": self.grid,
            "tail_fraction": f(&self.tail_fraction),
            "m_grid": fs(&self.m_grid),
            "r_grid": fs(&self.r_grid),
            "m_candidates": self.m_candidates,
            "l_grid": fs(&self.l_grid),
            "selection": self.selection.as_ref().map(|p| p.to_string()),
            "u": f(&self.u),
            "center": f(&self.center),
            "self_bound": f(&self.self_bound),
            "seed": self.seed,
            "random": self.random,
        })
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Parser {
    entries: BTreeMap<String, Entry>,
    errors: Vec<ConfigError>,
}

impl Parser {
    fn err(&mut self, line: usize, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            message: message.into(),
        });
    }

    /// Runs `parse` on the value of `key` if present, recording any error.
    fn get<T>(&mut self, key: &str, parse: impl FnOnce(&str) -> Result<T, String>) -> Option<T> {
        let (line, value) = {
            let e = self.entries.get(key)?;
            (e.line, e.value.clone())
        };
        match parse(&value) {
            Ok(v) => Some(v),
            Err(m) => {
                self.err(line, format!("{key}: {m}"));
                None
            }
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.line)
    }
}

fn decimal(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn decimal_list(s: &str) -> Result<Vec<Rational>, String> {
    let items: Vec<&str> = s.split(',').map(str::trim).collect();
    if items.iter().any(|i| i.is_empty()) {
        return Err(format!("malformed list `{s}`"));
    }
    items.into_iter().map(decimal).collect()
}

fn integer(s: &str) -> Result<u64, String> {
    let r = decimal(s)?;
    if !r.is_integer() || r.is_negative() {
        return Err(format!("expected a nonnegative integer, got `{s}`"));
    }
    Ok(r.to_integer() as u64)
}

fn nonnegative(r: Rational) -> Result<Rational, String> {
    if r.is_negative() {
        Err("must be nonnegative".into())
    } else {
        Ok(r)
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let mut p = Parser {
        entries: BTreeMap::new(),
        errors: Vec::new(),
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            p.err(line, format!("expected `key = value`, got `{content}`"));
            continue;
        };
        let key = key.trim();
        if !KEYS.iter().any(|(k, _)| *k == key) {
            p.err(line, format!("unknown key `{key}`"));
            continue;
        }
        if let Some(prev) = p.entries.get(key) {
            let first = prev.line;
            p.err(
                line,
                format!("duplicate key `{key}` (first set on line {first})"),
            );
            continue;
        }
        p.entries.insert(
            key.to_string(),
            Entry {
                line,
                value: value.trim().to_string(),
            },
        );
    }

    let mode = match p.get("mode", parse_mode) {
        Some(m) => m,
        None => {
            if !p.entries.contains_key("mode") {
                p.err(0, "missing required key `mode`");
            }
            RunMode::Suite
        }
    };
    let mut cfg = ExperimentConfig::defaults(mode);
    cfg.explicit = p.entries.keys().cloned().collect();

    if let Some(l) = p.get("label", |s| Ok(s.to_string())) {
        cfg.label = l;
    }

    // space
    let a_text = p.entries.get("a").map(|e| e.value.clone());
    if let Some(a) = &a_text {
        p.get("a", |_| decimal(a).map(|_| ()));
    }
    cfg.space = p.get("space", |s| {
        let a = a_text.as_deref().filter(|a| parse_rational(a).is_ok());
        if s == "shifted_euclidean" && a_text.is_some() && a.is_none() {
            // malformed `a` already reported
            return Err("needs a valid `a`".into());
        }
        PartialMetricSpace::from_descriptor(s, a).map_err(|e| e.to_string())
    });

    cfg.sequence = p.get("sequence", |s| parse_sequence(s).map_err(|e| e.to_string()));
    cfg.sequence2 = p.get("sequence2", |s| {
        parse_sequence(s).map_err(|e| e.to_string())
    });
    cfg.selection = p.get("selection", |s| {
        parse_predicate(s).map_err(|e| e.to_string())
    });

    if let Some(v) = p.get("x", decimal) {
        cfg.x = v;
    }
    if let Some(v) = p.get("r", |s| decimal(s).and_then(nonnegative)) {
        cfg.r = v;
    }
    if let Some(v) = p.get("u", decimal) {
        cfg.u = v;
    }
    if let Some(v) = p.get("center", decimal) {
        cfg.center = v;
    }
    if let Some(v) = p.get("self_bound", |s| decimal(s).and_then(nonnegative)) {
        cfg.self_bound = v;
    }
    if let Some(v) = p.get("n", |s| {
        integer(s).and_then(|n| {
            if n >= 2 {
                Ok(n)
            } else {
                Err("N must be at least 2".into())
            }
        })
    }) {
        cfg.n = v;
    }
    if let Some(v) = p.get("tau", |s| {
        let r = decimal(s)?;
        if !r.is_positive() {
            return Err("tau must be positive".into());
        }
        let q = Fraction::new(*r.numer() as u64, *r.denom() as u64);
        Tau::new(q).map_err(|e| e.to_string())
    }) {
        cfg.tau = v;
    }
    if let Some(v) = p.get("schedule", |s| {
        let v = decimal_list(s)?;
        if v.iter().any(|e| !e.is_positive()) {
            return Err("schedule values must be positive".into());
        }
        if v.windows(2).any(|w| w[0] <= w[1]) {
            return Err("schedule must be strictly decreasing".into());
        }
        Ok(v)
    }) {
        cfg.schedule = v;
    }
    if let Some(v) = p.get("tail_fraction", |s| {
        let f = decimal(s)?;
        if f.is_positive() && f < int(1) {
            Ok(f)
        } else {
            Err("tail_fraction must lie strictly between 0 and 1".into())
        }
    }) {
        cfg.tail_fraction = v;
    }

    // grid: report each bad part on its own line, then the combination
    let lo = p.get("grid_lo", decimal);
    let hi = p.get("grid_hi", decimal);
    let step = p.get("step", |s| {
        let v = decimal(s)?;
        if v.is_positive() {
            Ok(v)
        } else {
            Err("grid step must be positive".into())
        }
    });
    let parts_ok = [
        ("grid_lo", lo.is_some()),
        ("grid_hi", hi.is_some()),
        ("step", step.is_some()),
    ]
    .iter()
    .all(|(k, ok)| *ok || !p.entries.contains_key(*k));
    if parts_ok {
        let lo = lo.unwrap_or(cfg.grid.lo());
        let hi = hi.unwrap_or(cfg.grid.hi());
        let step = step.unwrap_or(cfg.grid.step());
        match Grid::new(lo, hi, step) {
            Ok(g) => cfg.grid = g,
            Err(e) => {
                let line = ["grid_hi", "grid_lo", "step"]
                    .iter()
                    .map(|k| p.line_of(k))
                    .max()
                    .unwrap_or(0);
                p.err(line, format!("grid: {e}"));
            }
        }
    }

    if let Some(v) = p.get("m_grid", |s| {
        let v = decimal_list(s)?;
        if v.iter().any(|m| !m.is_positive()) || v.windows(2).any(|w| w[0] >= w[1]) {
            return Err("M grid must be positive and strictly increasing".into());
        }
        Ok(v)
    }) {
        cfg.m_grid = v;
    }
    if let Some(v) = p.get("r_grid", |s| {
        decimal_list(s)?.into_iter().map(nonnegative).collect()
    }) {
        cfg.r_grid = v;
    }
    if let Some(v) = p.get("l_grid", |s| {
        decimal_list(s)?.into_iter().map(nonnegative).collect()
    }) {
        cfg.l_grid = v;
    }
    if let Some(v) = p.get("m_candidates", |s| {
        let v = s
            .split(',')
            .map(|i| integer(i.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        if v.is_empty() || v.contains(&0) {
            return Err("indices start at 1".into());
        }
        Ok(v)
    }) {
        cfg.m_candidates = v;
    }
    if let Some(v) = p.get("seed", integer) {
        cfg.seed = Some(v);
    }
    if let Some(v) = p.get("random", integer) {
        cfg.random = v;
    }

    // mode-specific requirements
    if mode != RunMode::Suite {
        for key in ["space", "sequence"] {
            if !p.entries.contains_key(key) {
                p.err(0, format!("mode {mode} requires `{key}`"));
            }
        }
    }
    if let RunMode::Theorem(t) = mode {
        let need = match t {
            TheoremId::T2_7 | TheoremId::T2_8 => Some("sequence2"),
            TheoremId::T2_6 => Some("selection"),
            _ => None,
        };
        if let Some(key) = need {
            if !p.entries.contains_key(key) {
                p.err(0, format!("mode {mode} requires `{key}`"));
            }
        }
    }

    if p.errors.is_empty() {
        Ok(cfg)
    } else {
        p.errors.sort_by_key(|e| e.line);
        Err(p.errors)
    }
}
