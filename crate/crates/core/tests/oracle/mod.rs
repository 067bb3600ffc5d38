//! Brute-force reference implementations for the verdict engines.
//!
//! Nothing here calls into the library's engines. Sequences, metrics and the
//! density rule are re-derived from their definitions and evaluated by plain
//! loops with exact integer comparisons.

#![allow(dead_code)]

pub mod harness;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Space {
    Max,
    Shifted(f64),
}

impl Space {
    pub fn p(self, x: f64, y: f64) -> f64 {
        match self {
            Space::Max => {
                if x > y {
                    x
                } else {
                    y
                }
            }
            Space::Shifted(a) => (x - y).abs() + a,
        }
    }

    pub fn dev(self, v: f64, c: f64) -> f64 {
        (self.p(v, c) - self.p(c, c)).abs()
    }

    pub fn descriptor(self) -> (String, Option<String>) {
        match self {
            Space::Max => ("max_rplus".into(), None),
            Space::Shifted(a) => ("shifted_euclidean".into(), Some(format!("{a}"))),
        }
    }
}

fn square(n: u64) -> bool {
    let mut k = 0u64;
    while k * k < n {
        k += 1;
    }
    k * k == n
}

fn root(n: u64) -> u64 {
    let mut k = 0u64;
    while (k + 1) * (k + 1) <= n {
        k += 1;
    }
    k
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pred {
    Square,
    Even,
    Odd,
    Mod(u64, u64),
    NotSquare,
    All,
}

impl Pred {
    pub fn holds(&self, n: u64) -> bool {
        match *self {
            Pred::Square => square(n),
            Pred::Even => n.is_multiple_of(2),
            Pred::Odd => n % 2 == 1,
            Pred::Mod(m, r) => n % m == r,
            Pred::NotSquare => !square(n),
            Pred::All => true,
        }
    }

    pub fn text(&self) -> String {
        match self {
            Pred::Square => "square".into(),
            Pred::Even => "even".into(),
            Pred::Odd => "odd".into(),
            Pred::Mod(m, r) => format!("mod({m}, {r})"),
            Pred::NotSquare => "not(square)".into(),
            Pred::All => "all".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    Const(f64),
    Root,
    Affine(f64, f64),
    Recip(f64),
    Alt(f64),
}

impl Rule {
    pub fn at(&self, n: u64) -> f64 {
        match *self {
            Rule::Const(c) => c,
            Rule::Root => root(n) as f64,
            Rule::Affine(s, i) => s * n as f64 + i,
            Rule::Recip(s) => s / n as f64,
            Rule::Alt(a) => {
                if n % 2 == 1 {
                    -a
                } else {
                    a
                }
            }
        }
    }

    pub fn text(&self) -> String {
        match self {
            Rule::Const(c) => format!("const({c})"),
            Rule::Root => "sqrt".into(),
            Rule::Affine(s, i) => format!("affine({s}, {i})"),
            Rule::Recip(s) => format!("reciprocal({s})"),
            Rule::Alt(a) => format!("alternating({a})"),
        }
    }
}

/// First matching piece wins; the last piece is always `All`.
#[derive(Debug, Clone, PartialEq)]
pub struct Seq(pub Vec<(Pred, Rule)>);

impl Seq {
    pub fn at(&self, n: u64) -> f64 {
        self.0
            .iter()
            .find(|(p, _)| p.holds(n))
            .map(|(_, r)| r.at(n))
            .expect("covering pieces")
    }

    pub fn text(&self) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(p, r)| format!("{} -> {}", p.text(), r.text()))
            .collect();
        format!("pieces: {}", parts.join("; "))
    }

    pub fn example() -> Seq {
        Seq(vec![
            (Pred::Square, Rule::Root),
            (Pred::Even, Rule::Const(2.0)),
            (Pred::Odd, Rule::Const(0.0)),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Zero,
    Positive,
    Unsure,
}

/// The density rule with `τ = tp/tq`, compared by cross-multiplication.
pub fn classify(count: u64, count_half: u64, n: u64, tp: u64, tq: u64) -> Class {
    let (c, ch, n, nh, tp, tq) = (
        count as u128,
        count_half as u128,
        n as u128,
        (n / 2) as u128,
        tp as u128,
        tq as u128,
    );
    // value <= τ
    let small = c * tq <= tp * n;
    // value <= value_half + τ/10  <=>  10·tq·c·nh <= 10·tq·ch·n + tp·n·nh
    let settled = 10 * tq * c * nh <= 10 * tq * ch * n + tp * n * nh;
    // value >= 5τ
    let large = c * tq >= 5 * tp * n;
    // |value - value_half| <= τ
    let gap = (c * nh).abs_diff(ch * n);
    let stable = gap * tq <= tp * n * nh;
    if small && settled {
        Class::Zero
    } else if large && stable {
        Class::Positive
    } else {
        Class::Unsure
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum V {
    Yes,
    No,
    Unsure,
}

pub struct Setup {
    pub space: Space,
    pub seq: Seq,
    pub n: u64,
    pub schedule: Vec<f64>,
    pub tau: (u64, u64),
    values: Vec<f64>,
}

impl Setup {
    pub fn new(space: Space, seq: Seq, n: u64, schedule: Vec<f64>, tau: (u64, u64)) -> Self {
        let values = (1..=n).map(|k| seq.at(k)).collect();
        Setup {
            space,
            seq,
            n,
            schedule,
            tau,
            values,
        }
    }

    fn at(&self, k: u64) -> f64 {
        self.values[(k - 1) as usize]
    }

    /// Counts of `f(k) >= t - TOL` over `1..=n` and `1..=n/2`.
    fn counts(&self, t: f64, f: impl Fn(f64) -> f64) -> (u64, u64) {
        let mut full = 0;
        let mut half = 0;
        for k in 1..=self.n {
            if f(self.at(k)) >= t - TOL {
                full += 1;
                if k <= self.n / 2 {
                    half += 1;
                }
            }
        }
        (full, half)
    }

    fn class(&self, full: u64, half: u64) -> Class {
        classify(full, half, self.n, self.tau.0, self.tau.1)
    }

    fn all_zero(classes: &[Class]) -> V {
        if classes.iter().all(|c| *c == Class::Zero) {
            V::Yes
        } else if classes.contains(&Class::Positive) {
            V::No
        } else {
            V::Unsure
        }
    }

    pub fn rough_stat(&self, x: f64, r: f64) -> V {
        let classes: Vec<Class> = self
            .schedule
            .iter()
            .map(|&e| {
                let (f, h) = self.counts(r + e, |v| self.space.dev(v, x));
                self.class(f, h)
            })
            .collect();
        Self::all_zero(&classes)
    }

    /// Tail window `[⌈n·fp/fq⌉, n]` split into two halves.
    pub fn rough(&self, x: f64, r: f64, frac: (u64, u64)) -> V {
        let start = ((self.n * frac.0).div_ceil(frac.1)).max(1);
        let mid = start + (self.n - start).div_ceil(2);
        let sup = |lo: u64, hi: u64| {
            (lo..=hi)
                .map(|k| self.space.dev(self.at(k), x))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let first = sup(start, mid - 1);
        let second = sup(mid, self.n);
        let e_min = *self.schedule.last().unwrap();
        let e_max = self.schedule[0];
        if first.max(second) < r + e_min - TOL && second <= first + e_min / 10.0 {
            V::Yes
        } else if first > r + e_max + TOL && second > r + e_max + TOL {
            V::No
        } else {
            V::Unsure
        }
    }

    /// `Cluster` = `Yes`: near set `dev < ε - TOL` positive at every ε.
    pub fn cluster(&self, c: f64) -> V {
        let classes: Vec<Class> = self
            .schedule
            .iter()
            .map(|&e| {
                let mut full = 0;
                let mut half = 0;
                for k in 1..=self.n {
                    if self.space.dev(self.at(k), c) < e - TOL {
                        full += 1;
                        if k <= self.n / 2 {
                            half += 1;
                        }
                    }
                }
                self.class(full, half)
            })
            .collect();
        if classes.iter().all(|c| *c == Class::Positive) {
            V::Yes
        } else if classes.contains(&Class::Zero) {
            V::No
        } else {
            V::Unsure
        }
    }

    /// Smallest `M` with `{n : p(x_n, u) >= M}` of density zero.
    pub fn bounded(&self, u: f64, ms: &[f64]) -> (V, Option<f64>) {
        let classes: Vec<Class> = ms
            .iter()
            .map(|&m| {
                let (f, h) = self.counts(m, |v| self.space.p(v, u));
                self.class(f, h)
            })
            .collect();
        match classes.iter().position(|c| *c == Class::Zero) {
            Some(i) => (V::Yes, Some(ms[i])),
            None if *classes.last().unwrap() == Class::Positive => (V::No, None),
            None => (V::Unsure, None),
        }
    }

    /// First `(m, l)` in candidate order whose offsets vanish statistically.
    pub fn cauchy(&self, ms: &[u64], ls: &[f64]) -> (V, Option<(u64, f64)>) {
        let mut verdicts = Vec::new();
        for &m in ms {
            let xm = self.at(m);
            for &l in ls {
                let classes: Vec<Class> = self
                    .schedule
                    .iter()
                    .map(|&e| {
                        let (f, h) = self.counts(e, |v| (self.space.p(v, xm) - l).abs());
                        self.class(f, h)
                    })
                    .collect();
                let v = Self::all_zero(&classes);
                if v == V::Yes {
                    return (V::Yes, Some((m, l)));
                }
                verdicts.push(v);
            }
        }
        if verdicts.iter().all(|v| *v == V::No) {
            (V::No, None)
        } else {
            (V::Unsure, None)
        }
    }
}

/// A random covering piece list. Values stay nonnegative when `nonneg`.
pub fn random_seq(rng: &mut ChaCha8Rng, nonneg: bool) -> Seq {
    let quarter = |rng: &mut ChaCha8Rng, lo: i32, hi: i32| f64::from(rng.gen_range(lo..=hi)) / 4.0;
    let value_rule = |rng: &mut ChaCha8Rng| -> Rule {
        match rng.gen_range(0..4) {
            0 => Rule::Const(if nonneg {
                quarter(rng, 0, 16)
            } else {
                quarter(rng, -12, 12)
            }),
            1 if !nonneg => Rule::Alt(quarter(rng, 1, 8)),
            1 => Rule::Affine(0.0, quarter(rng, 0, 8)),
            2 => Rule::Recip(f64::from(rng.gen_range(1..=3))),
            _ if rng.gen_bool(0.3) => Rule::Affine(1.0, 0.0),
            _ => Rule::Affine(0.0, quarter(rng, 0, 12)),
        }
    };
    let mut pieces = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        let pred = match rng.gen_range(0..5) {
            0 => Pred::Square,
            1 => Pred::Even,
            2 => Pred::Odd,
            3 => {
                let m = rng.gen_range(2..=5);
                Pred::Mod(m, rng.gen_range(0..m))
            }
            _ => Pred::NotSquare,
        };
        let rule = if pred == Pred::Square && rng.gen_bool(0.5) {
            Rule::Root
        } else {
            value_rule(rng)
        };
        pieces.push((pred, rule));
    }
    pieces.push((Pred::All, value_rule(rng)));
    Seq(pieces)
}
