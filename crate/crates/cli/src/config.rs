//! Experiment configuration: per-command parameter schemas, the key-value
//! config file format and validation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Bound,
    Wegner,
    Toda,
    TodaTight,
    KrylovSu2,
    KrylovLanczos,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Bound,
        Command::Wegner,
        Command::Toda,
        Command::TodaTight,
        Command::KrylovSu2,
        Command::KrylovLanczos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Bound => "bound",
            Command::Wegner => "wegner",
            Command::Toda => "toda",
            Command::TodaTight => "toda-tight",
            Command::KrylovSu2 => "krylov-su2",
            Command::KrylovLanczos => "krylov-lanczos",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn about(self) -> &'static str {
        match self {
            Command::Bound => "Speed-limit report (plain, refined, optimal) for one operator path",
            Command::Wegner => "Wegner flow on random tridiagonal Hamiltonians; several --n values run a sweep",
            Command::Toda => "Toda flow on random tridiagonal Hamiltonians; several --n values run a sweep",
            Command::TodaTight => "Toda flow from the closed-form family that saturates the speed limit",
            Command::KrylovSu2 => "Plain and trace-subtracted complexity speed limits on an SU(2) chain",
            Command::KrylovLanczos => "Lanczos chain and complexity growth for a random operator",
        }
    }

    pub fn schema(self) -> &'static [ParamSpec] {
        match self {
            Command::Bound => BOUND,
            Command::Wegner | Command::Toda => FLOW,
            Command::TodaTight => TODA_TIGHT,
            Command::KrylovSu2 => KRYLOV_SU2,
            Command::KrylovLanczos => KRYLOV_LANCZOS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    /// Unsigned integer `>= min`.
    UInt { min: u64 },
    /// Comma-separated unsigned integers, each `>= min`.
    UIntList { min: u64 },
    Float,
    PositiveFloat,
    Choice(&'static [&'static str]),
    Flag,
    Text,
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::UInt { min } => format!("integer >= {min}"),
            Kind::UIntList { min } => format!("comma-separated integers >= {min}"),
            Kind::Float => "real".into(),
            Kind::PositiveFloat => "real > 0".into(),
            Kind::Choice(c) => format!("one of {}", c.join("|")),
            Kind::Flag => "true|false".into(),
            Kind::Text => "text".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Presence {
    Required,
    Default(&'static str),
    Optional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    /// Snake-case key; the command-line flag is its kebab-case form.
    pub key: &'static str,
    pub kind: Kind,
    pub presence: Presence,
    pub help: &'static str,
}

const fn p(key: &'static str, kind: Kind, presence: Presence, help: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        kind,
        presence,
        help,
    }
}

use Kind::*;
use Presence::*;

const METRICS: &[&str] = &["hs", "gibbs", "kubo", "rho"];
const GRIDS: &[&str] = &["log", "uniform"];

static BOUND: &[ParamSpec] = &[
    p("h", Text, Optional, "Hamiltonian: operator file, or pauli-x|pauli-y|pauli-z"),
    p("a", Text, Optional, "initial operator: operator file, or pauli-x|pauli-y|pauli-z|identity"),
    p("dim", UInt { min: 2 }, Default("3"), "Hilbert dimension of random inputs"),
    p("seed", UInt { min: 0 }, Optional, "PRNG seed; required when h or a is random"),
    p("metric", Choice(METRICS), Default("hs"), "operator metric"),
    p("beta", PositiveFloat, Default("1"), "inverse temperature of gibbs and kubo metrics"),
    p("rho1", Text, Optional, "left density operator file of the rho metric"),
    p("rho2", Text, Optional, "right density operator file of the rho metric"),
    p("tau", PositiveFloat, Default("1"), "elapsed time of the path"),
    p("samples", UInt { min: 1 }, Default("200"), "grid intervals on [0, tau]"),
];

static FLOW: &[ParamSpec] = &[
    p("n", UIntList { min: 2 }, Required, "matrix size; several values run an N-sweep"),
    p("seed", UInt { min: 0 }, Required, "PRNG seed of the initial tridiagonal matrix"),
    p("l_max", PositiveFloat, Optional, "flow time; default 40 / (smallest level spacing)^2"),
    p("samples", UInt { min: 3 }, Default("200"), "output samples"),
    p("grid", Choice(GRIDS), Default("log"), "sample spacing"),
    p("l_min", PositiveFloat, Default("1e-3"), "first nonzero sample of the log grid"),
    p("rtol", PositiveFloat, Default("1e-9"), "relative ODE tolerance"),
    p("atol", PositiveFloat, Default("1e-12"), "absolute ODE tolerance"),
    p("traceless", Flag, Default("false"), "subtract the mean of the diagonal"),
];

static TODA_TIGHT: &[ParamSpec] = &[
    p("n", UInt { min: 2 }, Required, "matrix size"),
    p("h1", PositiveFloat, Default("1"), "scale h1 of the family"),
    p("theta0", Float, Default("0"), "initial angle, in (-pi/2, pi/2)"),
    p("l_max", PositiveFloat, Optional, "flow time; default 8 l0 with l0 = (N - 1) / (4 h1)"),
    p("samples", UInt { min: 3 }, Default("201"), "uniform output samples"),
    p("rtol", PositiveFloat, Default("1e-9"), "relative ODE tolerance"),
    p("atol", PositiveFloat, Default("1e-12"), "absolute ODE tolerance"),
];

static KRYLOV_SU2: &[ParamSpec] = &[
    p("d", UInt { min: 2 }, Default("1000"), "Krylov dimension"),
    p("alpha", Float, Default("-1"), "algebra parameter alpha, must be negative"),
    p("samples", UInt { min: 2 }, Default("1000"), "time samples on [0, t_max)"),
    p("t_max", PositiveFloat, Optional, "end of the time window; default and maximum pi / sqrt|alpha|"),
    p("cross_check", Flag, Default("false"), "also evaluate the autocorrelation from the chain spectrum"),
];

static KRYLOV_LANCZOS: &[ParamSpec] = &[
    p("dim", UInt { min: 2 }, Default("4"), "Hilbert dimension"),
    p("seed", UInt { min: 0 }, Required, "PRNG seed of H and O_0"),
    p("t_max", PositiveFloat, Default("10"), "end of the time window"),
    p("samples", UInt { min: 2 }, Default("400"), "time samples on [0, t_max]"),
];

/// Keys accepted in a config file besides the command parameters.
pub const GLOBAL_KEYS: [&str; 3] = ["command", "output", "emit_svg"];

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    UInt(u64),
    UIntList(Vec<u64>),
    Float(f64),
    Text(String),
    Flag(bool),
}

/// Validated parameters, keyed by snake-case name.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    values: BTreeMap<&'static str, Value>,
    /// Canonical text of every set parameter, for metadata blocks.
    canonical: BTreeMap<&'static str, String>,
}

impl Params {
    pub fn uint(&self, key: &str) -> Option<u64> {
        match self.values.get(key) {
            Some(Value::UInt(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn usize(&self, key: &str) -> Option<usize> {
        self.uint(key).map(|v| v as usize)
    }

    pub fn uint_list(&self, key: &str) -> Option<&[u64]> {
        match self.values.get(key) {
            Some(Value::UIntList(v)) => Some(v),
            _ => None,
        }
    }

    pub fn float(&self, key: &str) -> Option<f64> {
        match self.values.get(key) {
            Some(Value::Float(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.values.get(key) {
            Some(Value::Text(v)) => Some(v),
            _ => None,
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        matches!(self.values.get(key), Some(Value::Flag(true)))
    }

    pub fn canonical(&self) -> &BTreeMap<&'static str, String> {
        &self.canonical
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub params: Params,
    pub output: PathBuf,
    pub emit_svg: bool,
}

/// Normalizes `--l-max`, `l-max` and `l_max` to `l_max`.
pub fn normalize_key(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('-', "_")
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = normalize_key(k);
        if key.is_empty() {
            return Err(CliError::Config(format!("config line {}: empty key", lineno + 1)));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("config line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_config_text(&text)
}

fn parse_value(spec: &ParamSpec, raw: &str) -> Result<(Value, String), String> {
    let raw = raw.trim();
    let uint = |s: &str, min: u64| -> Result<u64, String> {
        let v: u64 = s.trim().parse().map_err(|_| format!("'{s}' is not a non-negative integer"))?;
        if v < min {
            return Err(format!("{v} is below the minimum {min}"));
        }
        Ok(v)
    };
    let float = |s: &str| -> Result<f64, String> {
        let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
        if !v.is_finite() {
            return Err(format!("'{s}' is not finite"));
        }
        Ok(v)
    };
    match spec.kind {
        Kind::UInt { min } => {
            let v = uint(raw, min)?;
            Ok((Value::UInt(v), v.to_string()))
        }
        Kind::UIntList { min } => {
            let v = raw.split(',').map(|s| uint(s, min)).collect::<Result<Vec<_>, _>>()?;
            let text = v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
            Ok((Value::UIntList(v), text))
        }
        Kind::Float => {
            let v = float(raw)?;
            Ok((Value::Float(v), format!("{v:?}")))
        }
        Kind::PositiveFloat => {
            let v = float(raw)?;
            if v <= 0.0 {
                return Err(format!("{v} must be positive"));
            }
            Ok((Value::Float(v), format!("{v:?}")))
        }
        Kind::Choice(options) => {
            if options.contains(&raw) {
                Ok((Value::Text(raw.to_string()), raw.to_string()))
            } else {
                Err(format!("'{raw}' is not one of {}", options.join("|")))
            }
        }
        Kind::Flag => match raw {
            "true" | "1" | "yes" | "" => Ok((Value::Flag(true), "true".into())),
            "false" | "0" | "no" => Ok((Value::Flag(false), "false".into())),
            _ => Err(format!("'{raw}' is not true|false")),
        },
        Kind::Text => {
            if raw.is_empty() {
                Err("empty value".into())
            } else {
                Ok((Value::Text(raw.to_string()), raw.to_string()))
            }
        }
    }
}

/// Human-readable schema of `command`, appended to every config error.
pub fn schema_dump(command: Command) -> String {
    let mut out = format!("parameters of '{}':\n", command.name());
    for spec in command.schema() {
        let presence = match spec.presence {
            Presence::Required => "required".to_string(),
            Presence::Default(d) => format!("default {d}"),
            Presence::Optional => "optional".to_string(),
        };
        let _ = writeln!(
            out,
            "  --{:<12} {:<32} {:<14} {}",
            spec.key.replace('_', "-"),
            spec.kind.describe(),
            presence,
            spec.help
        );
    }
    out
}

fn config_error(command: Command, msg: String) -> CliError {
    CliError::Config(format!("{msg}\n\n{}", schema_dump(command)))
}

/// Validates raw key-value pairs against the schema of `command`. Unknown
/// keys, malformed values and missing required keys are all rejected before
/// any computation starts.
pub fn validate(command: Command, raw: &BTreeMap<String, String>) -> CliResult<Params> {
    let schema = command.schema();
    for key in raw.keys() {
        if !schema.iter().any(|s| s.key == key) {
            return Err(config_error(command, format!("unknown parameter '{}'", key.replace('_', "-"))));
        }
    }
    let mut values = BTreeMap::new();
    let mut canonical = BTreeMap::new();
    for spec in schema {
        let text = match (raw.get(spec.key), spec.presence) {
            (Some(v), _) => v.as_str(),
            (None, Presence::Default(d)) => d,
            (None, Presence::Optional) => continue,
            (None, Presence::Required) => {
                return Err(config_error(
                    command,
                    format!("missing required parameter --{}", spec.key.replace('_', "-")),
                ))
            }
        };
        let (value, canon) = parse_value(spec, text)
            .map_err(|e| config_error(command, format!("--{}: {e}", spec.key.replace('_', "-"))))?;
        values.insert(spec.key, value);
        canonical.insert(spec.key, canon);
    }
    Ok(Params { values, canonical })
}

/// Merges config-file entries with command-line values (the latter win)
/// and validates the result.
pub fn build(
    command: Command,
    file: Option<BTreeMap<String, String>>,
    cli: BTreeMap<String, String>,
    output: Option<PathBuf>,
    emit_svg: bool,
) -> CliResult<ExperimentConfig> {
    let mut merged = file.unwrap_or_default();
    if let Some(c) = merged.remove("command") {
        if c != command.name() {
            return Err(config_error(
                command,
                format!("config file is for '{c}' but the command is '{}'", command.name()),
            ));
        }
    }
    let file_output = merged.remove("output").map(PathBuf::from);
    let file_svg = match merged.remove("emit_svg") {
        Some(v) => match v.as_str() {
            "true" | "1" | "yes" => true,
            "false" | "0" | "no" => false,
            _ => return Err(config_error(command, format!("emit_svg: '{v}' is not true|false"))),
        },
        None => false,
    };
    merged.extend(cli);
    let params = validate(command, &merged)?;
    Ok(ExperimentConfig {
        command,
        params,
        output: output.or(file_output).unwrap_or_else(|| PathBuf::from("out")),
        emit_svg: emit_svg || file_svg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_and_lists() {
        let p = validate(Command::Wegner, &raw(&[("n", "3,10"), ("seed", "7")])).unwrap();
        assert_eq!(p.uint_list("n"), Some(&[3, 10][..]));
        assert_eq!(p.text("grid"), Some("log"));
        assert_eq!(p.float("l_max"), None);
        assert!(!p.flag("traceless"));
    }

    #[test]
    fn rejects_bad_input() {
        let e = validate(Command::Wegner, &raw(&[("n", "3")])).unwrap_err();
        assert!(e.to_string().contains("--seed"));
        assert!(e.to_string().contains("parameters of 'wegner'"));
        assert!(validate(Command::Wegner, &raw(&[("n", "1"), ("seed", "1")])).is_err());
        assert!(validate(Command::Wegner, &raw(&[("n", "3"), ("seed", "1"), ("bogus", "1")])).is_err());
        assert!(validate(Command::KrylovSu2, &raw(&[("t_max", "-1")])).is_err());
        assert!(validate(Command::Bound, &raw(&[("metric", "euclid")])).is_err());
    }

    #[test]
    fn config_file_format() {
        let m = parse_config_text("# comment\nl-max = 6 # trailing\n\nseed=7\n").unwrap();
        assert_eq!(m.get("l_max").map(String::as_str), Some("6"));
        assert_eq!(m.get("seed").map(String::as_str), Some("7"));
        assert!(parse_config_text("seed 7").is_err());
        assert!(parse_config_text("seed=1\nseed=2").is_err());
    }

    #[test]
    fn command_line_overrides_file() {
        let file = raw(&[("command", "toda"), ("n", "3"), ("seed", "1"), ("output", "x")]);
        let c = build(Command::Toda, Some(file), raw(&[("seed", "9")]), None, false).unwrap();
        assert_eq!(c.params.uint("seed"), Some(9));
        assert_eq!(c.output, PathBuf::from("x"));
        let file = raw(&[("command", "toda"), ("n", "3"), ("seed", "1")]);
        assert!(build(Command::Wegner, Some(file), BTreeMap::new(), None, false).is_err());
    }
}
