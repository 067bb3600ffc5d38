//! Declarative sequence definitions.
//!
//! A sequence is an ordered list of `(index predicate, value rule)` pieces; the
//! first piece whose predicate matches `n` produces `x_n`. Specs are closed
//! form, so any prefix length is reachable without storing the values.

use std::fmt;
use std::sync::Arc;

use crate::decimal::{parse_rational, to_f64};
use crate::error::{Error, Result};
use crate::exec;
use crate::pm::RealPoint;

/// Exact integer square root.
#[inline]
pub fn isqrt(n: u64) -> u64 {
    n.isqrt()
}

#[inline]
pub fn is_square(n: u64) -> bool {
    let k = isqrt(n);
    k * k == n
}

/// A total, deterministic membership test over the positive integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexPredicate {
    PerfectSquare,
    Even,
    Odd,
    /// `n ≡ r (mod m)`.
    Residue {
        m: u64,
        r: i64,
    },
    All,
    Not(Box<IndexPredicate>),
    And(Vec<IndexPredicate>),
    Or(Vec<IndexPredicate>),
    /// Strictly increasing list of members.
    Explicit(Arc<[u64]>),
}

impl IndexPredicate {
    pub fn residue(m: u64, r: i64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput(
                "residue modulus must be positive".into(),
            ));
        }
        Ok(IndexPredicate::Residue { m, r })
    }

    pub fn explicit(members: Vec<u64>) -> Result<Self> {
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "explicit index list must be strictly increasing".into(),
            ));
        }
        if members.first() == Some(&0) {
            return Err(Error::InvalidInput("indices start at 1".into()));
        }
        Ok(IndexPredicate::Explicit(members.into()))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: IndexPredicate) -> Self {
        IndexPredicate::Not(Box::new(inner))
    }

    pub fn contains(&self, n: u64) -> bool {
        use IndexPredicate::*;
        match self {
            PerfectSquare => is_square(n),
            Even => n.is_multiple_of(2),
            Odd => n % 2 == 1,
            Residue { m, r } => n % m == r.rem_euclid(*m as i64) as u64,
            All => true,
            Not(p) => !p.contains(n),
            And(ps) => ps.iter().all(|p| p.contains(n)),
            Or(ps) => ps.iter().any(|p| p.contains(n)),
            Explicit(list) => list.binary_search(&n).is_ok(),
        }
    }

    /// Exact `|{k in set : 1 <= k <= n}|`.
    pub fn count_upto(&self, n: u64) -> u64 {
        use IndexPredicate::*;
        match self {
            PerfectSquare => isqrt(n),
            Even => n / 2,
            Odd => n.div_ceil(2),
            Residue { m, r } => {
                let class = r.rem_euclid(*m as i64) as u64;
                // members are class, class + m, ... with class 0 meaning m
                let first = if class == 0 { *m } else { class };
                if n < first {
                    0
                } else {
                    (n - first) / m + 1
                }
            }
            All => n,
            Not(p) => n - p.count_upto(n),
            Explicit(list) => list.partition_point(|&k| k <= n) as u64,
            And(_) | Or(_) => exec::count_range(1..=n, |k| self.contains(k)),
        }
    }

    /// Members up to `horizon`, in increasing order.
    pub fn members_upto(&self, horizon: u64) -> Vec<u64> {
        match self {
            IndexPredicate::Explicit(list) => {
                list[..list.partition_point(|&k| k <= horizon)].to_vec()
            }
            _ => (1..=horizon).filter(|&k| self.contains(k)).collect(),
        }
    }

    fn implies_square(&self) -> bool {
        match self {
            IndexPredicate::PerfectSquare => true,
            IndexPredicate::And(ps) => ps.iter().any(|p| p.implies_square()),
            IndexPredicate::Explicit(list) => list.iter().all(|&k| is_square(k)),
            _ => false,
        }
    }
}

impl serde::Serialize for IndexPredicate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for IndexPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use IndexPredicate::*;
        let list = |f: &mut fmt::Formatter<'_>, name: &str, ps: &[IndexPredicate]| {
            write!(f, "{name}(")?;
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{p}")?;
            }
            f.write_str(")")
        };
        match self {
            PerfectSquare => f.write_str("square"),
            Even => f.write_str("even"),
            Odd => f.write_str("odd"),
            Residue { m, r } => write!(f, "mod({m}, {r})"),
            All => f.write_str("all"),
            Not(p) => write!(f, "not({p})"),
            And(ps) => list(f, "and", ps),
            Or(ps) => list(f, "or", ps),
            Explicit(ks) => {
                f.write_str("explicit(")?;
                for (i, k) in ks.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueRule {
    Const(f64),
    /// `k` at `n = k²`.
    SqrtIndex,
    AffineInN {
        slope: f64,
        intercept: f64,
    },
    /// `scale / n`.
    ReciprocalN {
        scale: f64,
    },
    /// `(-1)^n * amplitude`.
    AlternatingSign {
        amplitude: f64,
    },
}

impl ValueRule {
    #[inline]
    fn eval(&self, n: u64) -> f64 {
        match *self {
            ValueRule::Const(c) => c,
            ValueRule::SqrtIndex => isqrt(n) as f64,
            ValueRule::AffineInN { slope, intercept } => slope * n as f64 + intercept,
            ValueRule::ReciprocalN { scale } => scale / n as f64,
            ValueRule::AlternatingSign { amplitude } => {
                if n.is_multiple_of(2) {
                    amplitude
                } else {
                    -amplitude
                }
            }
        }
    }

    /// Whether the rule's values stay in a bounded set.
    pub fn is_bounded(&self) -> bool {
        match *self {
            ValueRule::SqrtIndex => false,
            ValueRule::AffineInN { slope, .. } => slope == 0.0,
            _ => true,
        }
    }
}

impl fmt::Display for ValueRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ValueRule::Const(c) => write!(f, "const({c})"),
            ValueRule::SqrtIndex => f.write_str("sqrt"),
            ValueRule::AffineInN { slope, intercept } => write!(f, "affine({slope}, {intercept})"),
            ValueRule::ReciprocalN { scale } => write!(f, "reciprocal({scale})"),
            ValueRule::AlternatingSign { amplitude } => write!(f, "alternating({amplitude})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub predicate: IndexPredicate,
    pub rule: ValueRule,
}

#[derive(Debug, Clone, PartialEq)]
enum Body {
    Pieces(Vec<Piece>),
    Subsequence {
        base: Box<SequenceSpec>,
        selection: IndexPredicate,
        indices: Arc<[u64]>,
    },
}

/// A named, closed-form sequence `n -> x_n`, `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    name: String,
    body: Body,
}

impl SequenceSpec {
    /// Builds a piecewise spec. The pieces must cover every index: the last
    /// predicate is `All`, or the top-level predicates include a complementary
    /// pair (`Even`/`Odd`, or `P`/`Not(P)`).
    pub fn piecewise(name: impl Into<String>, pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidInput(
                "a sequence needs at least one piece".into(),
            ));
        }
        for piece in &pieces {
            if piece.rule == ValueRule::SqrtIndex && !piece.predicate.implies_square() {
                return Err(Error::InvalidInput(format!(
                    "sqrt rule needs a perfect-square predicate, got `{}`",
                    piece.predicate
                )));
            }
            if let ValueRule::Const(c)
            | ValueRule::AlternatingSign { amplitude: c }
            | ValueRule::ReciprocalN { scale: c } = piece.rule
            {
                if !c.is_finite() {
                    return Err(Error::NonFinite);
                }
            }
        }
        let preds: Vec<&IndexPredicate> = pieces.iter().map(|p| &p.predicate).collect();
        let covered = *preds.last().unwrap() == &IndexPredicate::All
            || (preds.contains(&&IndexPredicate::Even) && preds.contains(&&IndexPredicate::Odd))
            || preds.iter().any(|p| match p {
                IndexPredicate::Not(inner) => preds.contains(&inner.as_ref()),
                _ => false,
            });
        if !covered {
            return Err(Error::InvalidInput(
                "pieces do not cover every index (end with `all` or include a complementary pair)"
                    .into(),
            ));
        }
        Ok(SequenceSpec {
            name: name.into(),
            body: Body::Pieces(pieces),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pieces(&self) -> Option<&[Piece]> {
        match &self.body {
            Body::Pieces(p) => Some(p),
            Body::Subsequence { .. } => None,
        }
    }

    /// Number of terms available, `None` for unbounded specs.
    pub fn horizon(&self) -> Option<u64> {
        match &self.body {
            Body::Pieces(_) => None,
            Body::Subsequence { indices, .. } => Some(indices.len() as u64),
        }
    }

    /// Whether every piece's values stay in a bounded set.
    pub fn is_bounded(&self) -> bool {
        match &self.body {
            Body::Pieces(pieces) => pieces.iter().all(|p| p.rule.is_bounded()),
            Body::Subsequence { base, .. } => base.is_bounded(),
        }
    }

    #[inline]
    pub(crate) fn value(&self, n: u64) -> Result<f64> {
        match &self.body {
            Body::Pieces(pieces) => pieces
                .iter()
                .find(|p| p.predicate.contains(n))
                .map(|p| p.rule.eval(n))
                .ok_or_else(|| Error::Incomplete {
                    name: self.name.clone(),
                    n,
                }),
            Body::Subsequence { base, indices, .. } => match indices.get((n - 1) as usize) {
                Some(&orig) => base.value(orig),
                None => Err(Error::BeyondHorizon {
                    name: self.name.clone(),
                    len: indices.len() as u64,
                    k: n,
                }),
            },
        }
    }

    /// Canonical descriptor text, parseable by [`parse_sequence`].
    pub fn descriptor(&self) -> String {
        match &self.body {
            Body::Pieces(pieces) => {
                let parts: Vec<String> = pieces
                    .iter()
                    .map(|p| format!("{} -> {}", p.predicate, p.rule))
                    .collect();
                format!("pieces: {}", parts.join("; "))
            }
            Body::Subsequence {
                base, selection, ..
            } => format!("subsequence of [{}] at {}", base.descriptor(), selection),
        }
    }
}

impl serde::Serialize for SequenceSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SequenceSpec", 2)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("descriptor", &self.descriptor())?;
        st.end()
    }
}

pub fn seq_eval(spec: &SequenceSpec, n: u64) -> Result<RealPoint> {
    if n == 0 {
        return Err(Error::InvalidInput("sequence indices start at 1".into()));
    }
    RealPoint::new(spec.value(n)?)
}

/// The subsequence `k -> x_{n_k}` where `n_k` is the k-th member of `sel`,
/// materialized up to `horizon`.
pub fn restrict_to_indices(
    spec: &SequenceSpec,
    sel: &IndexPredicate,
    horizon: u64,
) -> Result<SequenceSpec> {
    let mut indices = sel.members_upto(horizon);
    if let Some(len) = spec.horizon() {
        indices.truncate(indices.partition_point(|&k| k <= len));
    }
    if indices.is_empty() {
        return Err(Error::DegenerateSelection { horizon });
    }
    Ok(SequenceSpec {
        name: format!("{}|{}", spec.name, sel),
        body: Body::Subsequence {
            base: Box::new(spec.clone()),
            selection: sel.clone(),
            indices: indices.into(),
        },
    })
}

fn piece(predicate: IndexPredicate, rule: ValueRule) -> Piece {
    Piece { predicate, rule }
}

/// `x_n = k` at `n = k²`, `2` at other even `n`, `0` at other odd `n`.
pub fn example_sequence() -> SequenceSpec {
    SequenceSpec::piecewise(
        "example-2.1",
        vec![
            piece(IndexPredicate::PerfectSquare, ValueRule::SqrtIndex),
            piece(IndexPredicate::Even, ValueRule::Const(2.0)),
            piece(IndexPredicate::Odd, ValueRule::Const(0.0)),
        ],
    )
    .expect("built-in spec is valid")
}

pub fn constant(c: f64) -> SequenceSpec {
    SequenceSpec {
        name: format!("constant:{c}"),
        body: Body::Pieces(vec![piece(IndexPredicate::All, ValueRule::Const(c))]),
    }
}

/// `x_n = scale / n`.
pub fn reciprocal(scale: f64) -> SequenceSpec {
    let name = if scale == 1.0 {
        "reciprocal".to_string()
    } else {
        format!("reciprocal:{scale}")
    };
    SequenceSpec {
        name,
        body: Body::Pieces(vec![piece(
            IndexPredicate::All,
            ValueRule::ReciprocalN { scale },
        )]),
    }
}

pub fn alternating(amplitude: f64) -> SequenceSpec {
    SequenceSpec {
        name: format!("alternating:{amplitude}"),
        body: Body::Pieces(vec![piece(
            IndexPredicate::All,
            ValueRule::AlternatingSign { amplitude },
        )]),
    }
}

/// `x_n = n`.
pub fn linear() -> SequenceSpec {
    SequenceSpec {
        name: "linear".into(),
        body: Body::Pieces(vec![piece(
            IndexPredicate::All,
            ValueRule::AffineInN {
                slope: 1.0,
                intercept: 0.0,
            },
        )]),
    }
}

// ---------------------------------------------------------------------------
// Descriptor parsing

/// Parses a sequence descriptor: a built-in name (`example_2_1`,
/// `constant:c`, `reciprocal`, `reciprocal:s`, `alternating:amp`, `linear`)
/// or `pieces: <pred> -> <rule>; ...`.
pub fn parse_sequence(text: &str) -> Result<SequenceSpec> {
    let s = text.trim();
    let num = |v: &str| parse_rational(v).map(|r| to_f64(&r));
    if let Some(body) = s.strip_prefix("pieces:") {
        let mut pieces = Vec::new();
        for part in body.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (pred, rule) = part
                .split_once("->")
                .ok_or_else(|| Error::Parse(format!("piece `{part}` is missing `->`")))?;
            pieces.push(Piece {
                predicate: parse_predicate(pred)?,
                rule: parse_rule(rule)?,
            });
        }
        return SequenceSpec::piecewise("custom", pieces);
    }
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (s, None),
    };
    match (name, arg) {
        ("example_2_1", None) => Ok(example_sequence()),
        ("constant", Some(c)) => Ok(constant(num(c)?)),
        ("reciprocal", None) => Ok(reciprocal(1.0)),
        ("reciprocal", Some(scale)) => Ok(reciprocal(num(scale)?)),
        ("alternating", Some(a)) => Ok(alternating(num(a)?)),
        ("linear", None) => Ok(linear()),
        _ => Err(Error::Parse(format!("unknown sequence `{s}`"))),
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        self.pos += len;
        &self.src[start..start + len]
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "expected `{c}` at offset {} in `{}`",
                self.pos, self.src
            )))
        }
    }

    fn atom(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest.find([',', ')']).unwrap_or(rest.len());
        self.pos += len;
        let a = self.src[start..start + len].trim();
        if a.is_empty() {
            return Err(Error::Parse(format!("missing argument in `{}`", self.src)));
        }
        Ok(a)
    }

    fn args(&mut self) -> Result<Vec<&'a str>> {
        self.expect('(')?;
        let mut out = Vec::new();
        if self.eat(')') {
            return Ok(out);
        }
        loop {
            out.push(self.atom()?);
            if self.eat(')') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn finish(&mut self) -> Result<()> {
        self.skip_ws();
        if self.pos == self.src.len() {
            Ok(())
        } else {
            Err(Error::Parse(format!(
                "trailing input `{}`",
                &self.src[self.pos..]
            )))
        }
    }
}

pub fn parse_predicate(text: &str) -> Result<IndexPredicate> {
    let mut cur = Cursor { src: text, pos: 0 };
    let p = predicate(&mut cur)?;
    cur.finish()?;
    Ok(p)
}

fn predicate(cur: &mut Cursor<'_>) -> Result<IndexPredicate> {
    let int = |a: &str| -> Result<i64> {
        a.parse()
            .map_err(|_| Error::Parse(format!("expected an integer, got `{a}`")))
    };
    let name = cur.ident();
    Ok(match name {
        "square" => IndexPredicate::PerfectSquare,
        "even" => IndexPredicate::Even,
        "odd" => IndexPredicate::Odd,
        "all" => IndexPredicate::All,
        "mod" => {
            let args = cur.args()?;
            if args.len() != 2 {
                return Err(Error::Parse("mod takes (modulus, residue)".into()));
            }
            let m = int(args[0])?;
            if m <= 0 {
                return Err(Error::Parse("residue modulus must be positive".into()));
            }
            IndexPredicate::residue(m as u64, int(args[1])?)?
        }
        "explicit" => {
            let ks = cur
                .args()?
                .into_iter()
                .map(|a| {
                    a.parse::<u64>()
                        .map_err(|_| Error::Parse(format!("bad index `{a}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            IndexPredicate::explicit(ks)?
        }
        "not" | "and" | "or" => {
            cur.expect('(')?;
            let mut inner = vec![predicate(cur)?];
            while cur.eat(',') {
                inner.push(predicate(cur)?);
            }
            cur.expect(')')?;
            match name {
                "not" if inner.len() == 1 => IndexPredicate::not(inner.pop().unwrap()),
                "not" => return Err(Error::Parse("not takes one predicate".into())),
                "and" => IndexPredicate::And(inner),
                _ => IndexPredicate::Or(inner),
            }
        }
        other => return Err(Error::Parse(format!("unknown predicate `{other}`"))),
    })
}

pub fn parse_rule(text: &str) -> Result<ValueRule> {
    let mut cur = Cursor { src: text, pos: 0 };
    let name = cur.ident();
    let num = |a: &str| parse_rational(a).map(|r| to_f64(&r));
    let rule = match name {
        "sqrt" => ValueRule::SqrtIndex,
        "reciprocal" if cur.src[cur.pos..].trim().is_empty() => {
            ValueRule::ReciprocalN { scale: 1.0 }
        }
        _ => {
            let args = cur.args()?;
            match (name, args.as_slice()) {
                ("const", [c]) => ValueRule::Const(num(c)?),
                ("affine", [s, b]) => ValueRule::AffineInN {
                    slope: num(s)?,
                    intercept: num(b)?,
                },
                ("reciprocal", [s]) => ValueRule::ReciprocalN { scale: num(s)? },
                ("alternating", [a]) => ValueRule::AlternatingSign { amplitude: num(a)? },
                _ => {
                    return Err(Error::Parse(format!(
                        "unknown value rule `{}`",
                        text.trim()
                    )))
                }
            }
        }
    };
    cur.finish()?;
    Ok(rule)
}
