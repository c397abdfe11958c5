//! Run configuration: a flat document of dotted keys, e.g.
//!
//! ```toml
//! task = "fig2"
//! profile.shape = "gaussian"
//! k0 = [0.5, 1.0, 2.5, 5.0, 10.0]
//! phi.start = 0.0
//! phi.stop = 3.141592653589793
//! phi.n = 101
//! grid.n = 401
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};
use toml::Value;

use crate::copropagating::DEFAULT_COEFF_TOL;
use crate::error::{Error, Result};
use crate::numerics::{GridSpec, ProfileSpec, Rule, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Coeffs,
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Validate,
}

impl Task {
    pub const ALL: [Task; 6] = [
        Task::Coeffs,
        Task::Fig1,
        Task::Fig2,
        Task::Fig3,
        Task::Fig4,
        Task::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Coeffs => "coeffs",
            Task::Fig1 => "fig1",
            Task::Fig2 => "fig2",
            Task::Fig3 => "fig3",
            Task::Fig4 => "fig4",
            Task::Validate => "validate",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown task {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            _ => Err(Error::param(format!("unknown output format {s:?}"))),
        }
    }
}

/// A sample axis: explicit values or `n` evenly spaced points from `start`
/// to `stop` inclusive.
#[derive(Clone, Debug, PartialEq)]
pub enum Samples {
    List(Vec<f64>),
    Range { start: f64, stop: f64, n: usize },
}

impl Samples {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Samples::List(ref v) => v.clone(),
            Samples::Range { start, n: 1, .. } => vec![start],
            Samples::Range { start, stop, n } => {
                let h = (stop - start) / (n - 1) as f64;
                (0..n)
                    .map(|k| {
                        if k + 1 == n {
                            stop
                        } else {
                            start + k as f64 * h
                        }
                    })
                    .collect()
            }
        }
    }

    fn check(&self, key: &str) -> Result<()> {
        let ok = match self {
            Samples::List(v) => !v.is_empty() && v.iter().all(|x| x.is_finite()),
            Samples::Range { start, stop, n } => *n >= 1 && start.is_finite() && stop.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "{key}: sample set must be non-empty and finite"
            )))
        }
    }
}

/// Parses `a,b,c` lists and `start:stop:n` ranges. Each number may carry a
/// factor of π: `pi`, `pi/4`, `3pi/4`, `0.5pi`.
impl FromStr for Samples {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, stop, n] => Ok(Samples::Range {
                start: parse_number(start)?,
                stop: parse_number(stop)?,
                n: n.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad sample count in {s:?}")))?,
            }),
            [list] => Ok(Samples::List(
                list.split(',').map(parse_number).collect::<Result<_>>()?,
            )),
            _ => Err(Error::Config(format!(
                "expected a list a,b,c or a range start:stop:n, got {s:?}"
            ))),
        }
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Config(format!("cannot read {s:?} as a number"));
    let Some(p) = s.find("pi") else {
        return s.parse().map_err(|_| bad());
    };
    let factor = match &s[..p] {
        "" => 1.0,
        f => f.trim_end_matches('*').parse::<f64>().map_err(|_| bad())?,
    };
    let divisor = match &s[p + 2..] {
        "" => 1.0,
        d => d
            .strip_prefix('/')
            .ok_or_else(bad)?
            .parse::<f64>()
            .map_err(|_| bad())?,
    };
    Ok(factor * std::f64::consts::PI / divisor)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeadOnConfig {
    pub separation: f64,
    pub relative_velocity: f64,
    pub times: Option<Samples>,
    pub n_max: usize,
}

impl Default for HeadOnConfig {
    fn default() -> Self {
        HeadOnConfig {
            separation: 10.0,
            relative_velocity: 1e4,
            times: None,
            n_max: 40,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub profile: ProfileSpec,
    pub k0: Option<Samples>,
    pub phi: Option<Samples>,
    /// C1 values of the phase curves.
    pub c1: Option<Samples>,
    pub headon: HeadOnConfig,
    pub grid: GridSpec,
    pub coeff_tolerance: f64,
    pub threads: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(task: Task) -> Self {
        RunConfig {
            task,
            profile: ProfileSpec::default(),
            k0: None,
            phi: None,
            c1: None,
            headon: HeadOnConfig::default(),
            grid: GridSpec::default(),
            coeff_tolerance: DEFAULT_COEFF_TOL,
            threads: None,
            format: Format::Csv,
            out: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut keys = BTreeMap::new();
        flatten("", table, &mut keys);
        let mut r = Reader { keys };

        let task = r
            .string("task")?
            .ok_or_else(|| Error::Config("missing key `task`".into()))?
            .parse()?;
        let mut c = RunConfig::new(task);
        if let Some(s) = r.string("profile.shape")? {
            c.profile.shape = s
                .parse::<Shape>()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        r.float("profile.sigma", &mut c.profile.sigma)?;
        r.float("profile.width", &mut c.profile.width)?;
        c.k0 = r.samples("k0")?;
        c.phi = r.samples("phi")?;
        c.c1 = r.samples("c1")?;
        r.float("headon.separation", &mut c.headon.separation)?;
        r.float("headon.v_r", &mut c.headon.relative_velocity)?;
        c.headon.times = r.samples("headon.times")?;
        r.count("headon.n_max", &mut c.headon.n_max)?;
        r.float("grid.lower", &mut c.grid.lower)?;
        r.float("grid.upper", &mut c.grid.upper)?;
        r.count("grid.n", &mut c.grid.n)?;
        if let Some(s) = r.string("grid.rule")? {
            c.grid.rule = s
                .parse::<Rule>()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        r.float("grid.tail_tolerance", &mut c.grid.tail_tolerance)?;
        r.float("tolerance.coeff", &mut c.coeff_tolerance)?;
        let mut threads = 0;
        if r.count("threads", &mut threads)? {
            c.threads = Some(threads);
        }
        if let Some(s) = r.string("output.format")? {
            c.format = s.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
        }
        c.out = r.string("output.path")?.map(PathBuf::from);
        if let Some(k) = r.keys.keys().next() {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
        c.check()?;
        Ok(c)
    }

    pub fn check(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("profile.sigma", self.profile.sigma)?;
        positive("profile.width", self.profile.width)?;
        positive("headon.separation", self.headon.separation)?;
        positive("grid.tail_tolerance", self.grid.tail_tolerance)?;
        positive("tolerance.coeff", self.coeff_tolerance)?;
        if !(self.headon.relative_velocity != 0.0 && self.headon.relative_velocity.is_finite()) {
            return Err(Error::Config(
                "headon.v_r must be finite and nonzero".into(),
            ));
        }
        if self.headon.n_max < 1 {
            return Err(Error::Config("headon.n_max must be at least 1".into()));
        }
        if !(self.grid.lower < self.grid.upper) || self.grid.n < 2 {
            return Err(Error::Config("grid needs lower < upper and n >= 2".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        for (key, s) in [
            ("k0", &self.k0),
            ("phi", &self.phi),
            ("c1", &self.c1),
            ("headon.times", &self.headon.times),
        ] {
            if let Some(s) = s {
                s.check(key)?;
            }
        }
        Ok(())
    }

    /// The configuration as a flat document that [`RunConfig::parse`] reads
    /// back unchanged.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        line("task", quote(self.task.name()));
        line("profile.shape", quote(&self.profile.shape.to_string()));
        line("profile.sigma", float(self.profile.sigma));
        line("profile.width", float(self.profile.width));
        let mut samples = |key: &str, s: &Option<Samples>| match s {
            None => {}
            Some(Samples::List(v)) => {
                let items: Vec<String> = v.iter().map(|x| float(*x)).collect();
                line(key, format!("[{}]", items.join(", ")));
            }
            Some(Samples::Range { start, stop, n }) => {
                line(&format!("{key}.start"), float(*start));
                line(&format!("{key}.stop"), float(*stop));
                line(&format!("{key}.n"), n.to_string());
            }
        };
        samples("k0", &self.k0);
        samples("phi", &self.phi);
        samples("c1", &self.c1);
        samples("headon.times", &self.headon.times);
        let mut line = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        line("headon.separation", float(self.headon.separation));
        line("headon.v_r", float(self.headon.relative_velocity));
        line("headon.n_max", self.headon.n_max.to_string());
        line("grid.lower", float(self.grid.lower));
        line("grid.upper", float(self.grid.upper));
        line("grid.n", self.grid.n.to_string());
        line("grid.rule", quote(&self.grid.rule.to_string()));
        line("grid.tail_tolerance", float(self.grid.tail_tolerance));
        line("tolerance.coeff", float(self.coeff_tolerance));
        if let Some(t) = self.threads {
            line("threads", t.to_string());
        }
        line("output.format", quote(self.format.name()));
        if let Some(p) = &self.out {
            line("output.path", quote(&p.to_string_lossy()));
        }
        out
    }

    /// SHA-256 of the emitted document, hex encoded. The output path and
    /// thread count are left out since they do not change the numbers.
    pub fn hash(&self) -> String {
        let key = RunConfig {
            out: None,
            threads: None,
            ..self.clone()
        };
        hex::encode(Sha256::digest(key.emit().as_bytes()))
    }
}

fn quote(s: &str) -> String {
    Value::String(s.to_string()).to_string()
}

fn float(x: f64) -> String {
    // Debug prints the shortest representation that reads back exactly
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'i', 'N']) {
        s
    } else {
        format!("{s}.0")
    }
}

fn flatten(prefix: &str, table: toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            v => {
                out.insert(key, v);
            }
        }
    }
}

struct Reader {
    keys: BTreeMap<String, Value>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.keys.remove(key)
    }

    fn wrong(key: &str, what: &str, v: &Value) -> Error {
        Error::Config(format!("{key}: expected {what}, got {v}"))
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(Self::wrong(key, "a string", &v)),
        }
    }

    fn number(key: &str, v: Value) -> Result<f64> {
        match v {
            Value::Float(x) => Ok(x),
            Value::Integer(i) => Ok(i as f64),
            v => Err(Self::wrong(key, "a number", &v)),
        }
    }

    fn float(&mut self, key: &str, slot: &mut f64) -> Result<bool> {
        match self.take(key) {
            None => Ok(false),
            Some(v) => {
                *slot = Self::number(key, v)?;
                Ok(true)
            }
        }
    }

    fn count(&mut self, key: &str, slot: &mut usize) -> Result<bool> {
        match self.take(key) {
            None => Ok(false),
            Some(Value::Integer(i)) if i >= 0 => {
                *slot = i as usize;
                Ok(true)
            }
            Some(v) => Err(Self::wrong(key, "a non-negative integer", &v)),
        }
    }

    fn samples(&mut self, key: &str) -> Result<Option<Samples>> {
        if let Some(v) = self.take(key) {
            return match v {
                Value::Array(items) => Ok(Some(Samples::List(
                    items
                        .into_iter()
                        .map(|x| Self::number(key, x))
                        .collect::<Result<_>>()?,
                ))),
                Value::String(s) => s.parse().map(Some),
                v => Ok(Some(Samples::List(vec![Self::number(key, v)?]))),
            };
        }
        let (mut start, mut stop, mut n) = (0.0, 0.0, 0);
        let found = [
            self.float(&format!("{key}.start"), &mut start)?,
            self.float(&format!("{key}.stop"), &mut stop)?,
            self.count(&format!("{key}.n"), &mut n)?,
        ];
        match found {
            [false, false, false] => Ok(None),
            [true, true, true] => Ok(Some(Samples::Range { start, stop, n })),
            _ => Err(Error::Config(format!(
                "{key}: a range needs start, stop and n"
            ))),
        }
    }
}
