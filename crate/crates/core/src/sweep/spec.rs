//! Experiment configuration.
//!
//! A spec is TOML with flat keys. List-valued keys accept a TOML array or a
//! string such as `"2,3,5"`, `"2..101"` (inclusive) or `"1..100:9"` (stepped).
//! Every key may also be given as a string, which is how CLI flags are merged.

use std::fmt::Write as _;
use std::path::PathBuf;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::walk::Coin;

pub const KNOWN_KEYS: &[&str] = &[
    "kind",
    "p",
    "time",
    "noise",
    "n_range",
    "sample_frac",
    "epsilon",
    "mode",
    "seed",
    "format",
    "out",
    "start_coin",
    "start_position",
];

pub const DEFAULT_SAMPLE_FRAC: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    OverlapDim,
    OverlapTime,
    Keyrate,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::OverlapDim => "overlap-dim",
            SweepKind::OverlapTime => "overlap-time",
            SweepKind::Keyrate => "keyrate",
        }
    }

    pub fn is_overlap(self) -> bool {
        matches!(self, SweepKind::OverlapDim | SweepKind::OverlapTime)
    }
}

/// Walk time for each position count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TimeMode {
    /// `T = P`.
    EqualP,
    Fixed(usize),
    List(Vec<usize>),
}

impl TimeMode {
    pub fn steps_for(&self, positions: usize) -> Vec<usize> {
        match self {
            TimeMode::EqualP => vec![positions],
            TimeMode::Fixed(t) => vec![*t],
            TimeMode::List(ts) => ts.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateMode {
    /// `w(q) = Q`.
    Deterministic,
    /// `w(q) ~ Binomial(m, Q) / m`.
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Geometric range `start, start*factor, ...` up to `stop`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NRange {
    pub start: u64,
    pub stop: u64,
    pub factor: f64,
}

impl NRange {
    pub fn values(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut k = 0;
        loop {
            let value = (self.start as f64 * self.factor.powi(k)).round();
            if value > self.stop as f64 * (1.0 + 1e-12) {
                break;
            }
            out.push(value as u64);
            k += 1;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub positions: Vec<usize>,
    pub time: TimeMode,
    pub noise: Vec<f64>,
    pub n_range: NRange,
    /// `m / N`.
    pub sample_frac: f64,
    pub epsilon: f64,
    pub mode: RateMode,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub start_coin: Coin,
    pub start_position: usize,
}

impl SweepSpec {
    /// Defaults for a kind, before any keys are applied.
    pub fn defaults(kind: SweepKind) -> Self {
        let (positions, time) = match kind {
            SweepKind::OverlapDim => ((2..=101).collect(), TimeMode::EqualP),
            SweepKind::OverlapTime => (vec![101], TimeMode::List((1..=100).collect())),
            SweepKind::Keyrate => (vec![3, 5, 11, 21, 51], TimeMode::EqualP),
        };
        Self {
            kind,
            positions,
            time,
            noise: vec![0.0, 0.15, 0.2],
            n_range: NRange {
                start: 1_000,
                stop: 10_000_000,
                factor: 10.0,
            },
            sample_frac: DEFAULT_SAMPLE_FRAC,
            epsilon: DEFAULT_EPSILON,
            mode: RateMode::Deterministic,
            seed: 0,
            format: Format::Csv,
            out: None,
            start_coin: Coin::Zero,
            start_position: 0,
        }
    }

    /// Canonical `(key, value)` pairs, values in config syntax. `out` is listed only when set.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let time = match &self.time {
            TimeMode::EqualP => "\"equal-p\"".to_string(),
            TimeMode::Fixed(t) => t.to_string(),
            TimeMode::List(ts) => format!("\"{}\"", join(ts.iter().map(usize::to_string))),
        };
        let mode = match self.mode {
            RateMode::Deterministic => "deterministic",
            RateMode::MonteCarlo => "montecarlo",
        };
        let mut entries = vec![
            ("kind", format!("\"{}\"", self.kind.as_str())),
            ("p", format!("\"{}\"", join(self.positions.iter().map(usize::to_string)))),
            ("time", time),
            ("noise", format!("\"{}\"", join(self.noise.iter().map(|q| format!("{q:?}"))))),
            (
                "n_range",
                format!(
                    "\"{}:{}:{:?}\"",
                    self.n_range.start, self.n_range.stop, self.n_range.factor
                ),
            ),
            ("sample_frac", format!("{:?}", self.sample_frac)),
            ("epsilon", format!("{:?}", self.epsilon)),
            ("mode", format!("\"{mode}\"")),
            ("seed", self.seed.to_string()),
            ("format", format!("\"{}\"", self.format.as_str())),
        ];
        if let Some(out) = &self.out {
            entries.push(("out", Value::String(out.display().to_string()).to_string()));
        }
        entries.push(("start_coin", self.start_coin.index().to_string()));
        entries.push(("start_position", self.start_position.to_string()));
        entries
    }

    /// Canonical TOML; `parse_spec(&spec.to_toml())` returns `spec`.
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        for (key, value) in self.entries() {
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    pub fn n_values(&self) -> Vec<u64> {
        self.n_range.values()
    }
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(",")
}

/// Parses TOML text into a validated spec with all defaults filled.
pub fn parse_spec(source: &str) -> Result<SweepSpec> {
    let table: Table = source
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<config>", e.message().to_string()))?;
    spec_from_table(&table)
}

/// Parses `source` (possibly empty), then lets `overrides` replace or add
/// keys. Override values are strings in the same syntax the config accepts.
/// `default_kind` fills `kind` when neither side sets it.
pub fn parse_spec_with_overrides(
    source: &str,
    overrides: &[(&str, String)],
    default_kind: Option<SweepKind>,
) -> Result<SweepSpec> {
    let mut table: Table = source
        .parse()
        .map_err(|e: toml::de::Error| Error::config("<config>", e.message().to_string()))?;
    for (key, value) in overrides {
        table.insert((*key).to_string(), toml::Value::String(value.clone()));
    }
    if let Some(kind) = default_kind {
        table
            .entry("kind")
            .or_insert_with(|| toml::Value::String(kind.as_str().to_string()));
    }
    spec_from_table(&table)
}

/// Builds a spec from already-parsed keys. `kind` is required.
pub fn spec_from_table(table: &Table) -> Result<SweepSpec> {
    if let Some(key) = table.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(Error::config(key.as_str(), "unknown key"));
    }
    let kind = match table.get("kind") {
        None => return Err(Error::config("kind", "missing required key")),
        Some(v) => match as_str("kind", v)? {
            "overlap-dim" => SweepKind::OverlapDim,
            "overlap-time" => SweepKind::OverlapTime,
            "keyrate" => SweepKind::Keyrate,
            other => {
                return Err(Error::config(
                    "kind",
                    format!("expected overlap-dim, overlap-time or keyrate, got `{other}`"),
                ))
            }
        },
    };
    let mut spec = SweepSpec::defaults(kind);

    if let Some(v) = table.get("p") {
        spec.positions = as_index_list("p", v)?;
    }
    if let Some(v) = table.get("time") {
        spec.time = as_time("time", v)?;
    }
    if let Some(v) = table.get("noise") {
        spec.noise = as_float_list("noise", v)?;
    }
    if let Some(v) = table.get("n_range") {
        spec.n_range = as_n_range("n_range", v)?;
    }
    if let Some(v) = table.get("sample_frac") {
        spec.sample_frac = as_float("sample_frac", v)?;
    }
    if let Some(v) = table.get("epsilon") {
        spec.epsilon = as_float("epsilon", v)?;
    }
    if let Some(v) = table.get("mode") {
        spec.mode = match as_str("mode", v)? {
            "deterministic" => RateMode::Deterministic,
            "montecarlo" => RateMode::MonteCarlo,
            other => {
                return Err(Error::config(
                    "mode",
                    format!("expected deterministic or montecarlo, got `{other}`"),
                ))
            }
        };
    }
    if let Some(v) = table.get("seed") {
        spec.seed = as_integer("seed", v)?;
    }
    if let Some(v) = table.get("format") {
        spec.format = match as_str("format", v)? {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(Error::config("format", format!("expected csv or json, got `{other}`"))),
        };
    }
    if let Some(v) = table.get("out") {
        spec.out = Some(PathBuf::from(as_str("out", v)?));
    }
    if let Some(v) = table.get("start_coin") {
        let coin = as_integer("start_coin", v)?;
        spec.start_coin = u8::try_from(coin)
            .ok()
            .and_then(|c| Coin::try_from(c).ok())
            .ok_or_else(|| Error::config("start_coin", format!("expected 0 or 1, got {coin}")))?;
    }
    if let Some(v) = table.get("start_position") {
        spec.start_position = as_integer("start_position", v)? as usize;
    }

    validate(&spec)?;
    Ok(spec)
}

/// Checks the spec invariants, naming the offending key.
pub fn validate(spec: &SweepSpec) -> Result<()> {
    if spec.positions.is_empty() {
        return Err(Error::config("p", "empty list"));
    }
    if let Some(p) = spec.positions.iter().find(|&&p| p < 2) {
        return Err(Error::config("p", format!("cycle needs P >= 2, got {p}")));
    }
    if let TimeMode::List(ts) = &spec.time {
        if ts.is_empty() {
            return Err(Error::config("time", "empty list"));
        }
    }
    if spec.noise.is_empty() {
        return Err(Error::config("noise", "empty list"));
    }
    if let Some(q) = spec.noise.iter().find(|q| !(0.0..=0.5).contains(*q)) {
        return Err(Error::config("noise", format!("Q must lie in [0, 0.5], got {q}")));
    }
    let NRange { start, stop, factor } = spec.n_range;
    if start < 2 || start >= stop {
        return Err(Error::config(
            "n_range",
            format!("need 2 <= start < stop, got {start}:{stop}"),
        ));
    }
    if !(factor > 1.0 && factor.is_finite()) {
        return Err(Error::config("n_range", format!("factor must exceed 1, got {factor}")));
    }
    let ns = spec.n_range.values();
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("n_range", "values are not strictly increasing after rounding"));
    }
    if !(spec.sample_frac > 0.0 && spec.sample_frac < 1.0) {
        return Err(Error::config(
            "sample_frac",
            format!("must lie in (0, 1), got {}", spec.sample_frac),
        ));
    }
    if !(spec.epsilon > 0.0 && spec.epsilon < 1.0) {
        return Err(Error::config("epsilon", format!("must lie in (0, 1), got {}", spec.epsilon)));
    }
    let smallest = *spec.positions.iter().min().expect("non-empty");
    if spec.start_position >= smallest {
        return Err(Error::config(
            "start_position",
            format!("must be below the smallest P ({smallest}), got {}", spec.start_position),
        ));
    }
    Ok(())
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::config(key, format!("expected a string, got {}", v.type_str())))
}

fn as_float(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::config(key, format!("`{s}` is not a number"))),
        other => Err(Error::config(key, format!("expected a number, got {}", other.type_str()))),
    }
}

fn as_integer(key: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::config(key, format!("`{s}` is not a non-negative integer"))),
        other => Err(Error::config(
            key,
            format!("expected a non-negative integer, got {other}"),
        )),
    }
}

fn as_index_list(key: &str, v: &Value) -> Result<Vec<usize>> {
    match v {
        Value::Integer(_) => Ok(vec![as_integer(key, v)? as usize]),
        Value::Array(items) => items
            .iter()
            .map(|item| as_integer(key, item).map(|x| x as usize))
            .collect(),
        Value::String(s) => parse_index_list(s).map_err(|m| Error::config(key, m)),
        other => Err(Error::config(key, format!("expected a list, got {}", other.type_str()))),
    }
}

fn as_float_list(key: &str, v: &Value) -> Result<Vec<f64>> {
    match v {
        Value::Float(_) | Value::Integer(_) => Ok(vec![as_float(key, v)?]),
        Value::Array(items) => items.iter().map(|item| as_float(key, item)).collect(),
        Value::String(s) => s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| Error::config(key, format!("`{t}` is not a number")))
            })
            .collect(),
        other => Err(Error::config(key, format!("expected a list, got {}", other.type_str()))),
    }
}

fn as_time(key: &str, v: &Value) -> Result<TimeMode> {
    match v {
        Value::Integer(_) => Ok(TimeMode::Fixed(as_integer(key, v)? as usize)),
        Value::Array(_) => Ok(TimeMode::List(as_index_list(key, v)?)),
        Value::String(s) => {
            let s = s.trim();
            if s == "equal-p" {
                Ok(TimeMode::EqualP)
            } else if let Ok(t) = s.parse::<usize>() {
                Ok(TimeMode::Fixed(t))
            } else {
                parse_index_list(s)
                    .map(TimeMode::List)
                    .map_err(|m| Error::config(key, m))
            }
        }
        other => Err(Error::config(key, format!("expected equal-p, an integer or a list, got {other}"))),
    }
}

fn as_n_range(key: &str, v: &Value) -> Result<NRange> {
    let s = as_str(key, v)?;
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [start, stop, factor] = parts.as_slice() else {
        return Err(Error::config(key, format!("expected start:stop:factor, got `{s}`")));
    };
    let bad = |what: &str| Error::config(key, format!("invalid {what} in `{s}`"));
    Ok(NRange {
        start: parse_count(start).ok_or_else(|| bad("start"))?,
        stop: parse_count(stop).ok_or_else(|| bad("stop"))?,
        factor: factor.parse().map_err(|_| bad("factor"))?,
    })
}

/// Integer counts, also written in scientific notation such as `1e7`.
fn parse_count(s: &str) -> Option<u64> {
    if let Ok(n) = s.parse::<u64>() {
        return Some(n);
    }
    let f: f64 = s.parse().ok()?;
    (f >= 0.0 && f.fract() == 0.0 && f < u64::MAX as f64).then_some(f as u64)
}

/// `"2,3,5"`, `"2..101"`, `"1..100:9"`, or a comma-separated mix.
pub fn parse_index_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((lo, rest)) = item.split_once("..") {
            let (hi, step) = match rest.split_once(':') {
                Some((hi, step)) => (hi, step),
                None => (rest, "1"),
            };
            let num = |t: &str| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("`{item}` is not a range a..b[:step]"))
            };
            let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
            if step == 0 || lo > hi {
                return Err(format!("empty or unbounded range `{item}`"));
            }
            out.extend((lo..=hi).step_by(step));
        } else {
            out.push(
                item.parse()
                    .map_err(|_| format!("`{item}` is not a non-negative integer"))?,
            );
        }
    }
    Ok(out)
}
