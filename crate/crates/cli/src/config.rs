//! INI-style `key = value` experiment configuration with line-numbered
//! diagnostics.  Grammar: sections `[penalty]`, `[approx]`, `[algorithm]`,
//! `[schedule]`, `[output]`; `#` starts a comment; unknown keys are errors.

use std::fmt;

use iprox::algorithms::{Order, SplitKind};
use iprox::approx::ApproxKind;
use iprox::penalties::Penalty;
use iprox::schedule::Schedule;
use serde::Serialize;

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError { line, message: message.into() }
}

#[derive(Debug, Clone, Serialize)]
pub struct PenaltySpec {
    pub name: String,
    pub dim: usize,
    pub params: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproxSpec {
    /// "exact" or one of "a".."f".
    pub kind: String,
    pub eps: f64,
    /// a/b: "random" | "adversarial"; c: "center" | "boundary";
    /// e: "center" | "steiner" | "boundary"; d: "bump" | "shrink".
    pub policy: String,
    pub samples: usize,
    pub shrink_n: f64,
    pub k_bound: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgorithmSpec {
    /// "ppa" | "fb" | "pr" | "dr".
    pub kind: String,
    pub order: String,
    /// Step size; 0 means "optimal for the smooth term".
    pub tau: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub x0: Vec<f64>,
    pub f_diag: Vec<f64>,
    pub f_center: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleSpec {
    pub kind: String,
    pub eps0: f64,
    pub gamma0: f64,
    pub ratio: f64,
    pub power: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputSpec {
    pub trace_csv: String,
    pub manifest_json: String,
    pub plot_svg: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub penalty: PenaltySpec,
    pub approx: ApproxSpec,
    pub algorithm: AlgorithmSpec,
    pub schedule: ScheduleSpec,
    pub output: OutputSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            penalty: PenaltySpec { name: "sq_l2".into(), dim: 2, params: vec![("gamma".into(), 1.0)] },
            approx: ApproxSpec {
                kind: "a".into(),
                eps: 0.05,
                policy: "adversarial".into(),
                samples: 10_000,
                shrink_n: 10.0,
                k_bound: 8.0,
                seed: 0,
            },
            algorithm: AlgorithmSpec {
                kind: "ppa".into(),
                order: "g_first".into(),
                tau: 0.0,
                lambda: 1.0,
                iterations: 400,
                x0: vec![3.0, -2.0],
                f_diag: vec![1.0, 2.0],
                f_center: vec![1.0, -0.5],
            },
            schedule: ScheduleSpec { kind: "constant".into(), eps0: 0.05, gamma0: 0.0, ratio: 0.6, power: 1.0 },
            output: OutputSpec {
                trace_csv: "trace.csv".into(),
                manifest_json: "manifest.json".into(),
                plot_svg: "trace.svg".into(),
            },
        }
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>().map_err(|_| err(line, format!("key `{key}`: expected a number, got `{v}`")))
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse::<usize>().map_err(|_| err(line, format!("key `{key}`: expected a nonnegative integer, got `{v}`")))
}

fn parse_vec(line: usize, key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|_| err(line, format!("key `{key}`: expected comma-separated numbers, got `{v}`")))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut penalty_params: Vec<(String, f64)> = Vec::new();
    let mut penalty_params_touched = false;
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| err(line_no, "unterminated section header"))?;
            match name {
                "penalty" | "approx" | "algorithm" | "schedule" | "output" => section = name.to_string(),
                other => return Err(err(line_no, format!("unknown section `[{other}]`"))),
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        match (section.as_str(), key) {
            ("penalty", "name") => cfg.penalty.name = value.to_string(),
            ("penalty", "dim") => cfg.penalty.dim = parse_usize(line_no, key, value)?,
            ("penalty", pkey) => {
                penalty_params.push((pkey.to_string(), parse_f64(line_no, pkey, value)?));
                penalty_params_touched = true;
            }
            ("approx", "kind") => {
                if value != "exact" && ApproxKind::from_name(value).is_none() {
                    return Err(err(line_no, format!("unknown approximation kind `{value}`")));
                }
                cfg.approx.kind = value.to_string();
            }
            ("approx", "eps") => {
                let e = parse_f64(line_no, key, value)?;
                if e < 0.0 {
                    return Err(err(line_no, format!("eps must be >= 0, got {e}")));
                }
                cfg.approx.eps = e;
            }
            ("approx", "policy") => cfg.approx.policy = value.to_string(),
            ("approx", "samples") => cfg.approx.samples = parse_usize(line_no, key, value)?,
            ("approx", "shrink_n") => cfg.approx.shrink_n = parse_f64(line_no, key, value)?,
            ("approx", "k_bound") => cfg.approx.k_bound = parse_f64(line_no, key, value)?,
            ("approx", "seed") => {
                cfg.approx.seed =
                    value.parse::<u64>().map_err(|_| err(line_no, format!("key `seed`: expected an integer, got `{value}`")))?
            }
            ("algorithm", "kind") => match value {
                "ppa" | "fb" | "pr" | "dr" => cfg.algorithm.kind = value.to_string(),
                other => return Err(err(line_no, format!("unknown algorithm `{other}`"))),
            },
            ("algorithm", "order") => match value {
                "g_first" | "f_first" => cfg.algorithm.order = value.to_string(),
                other => return Err(err(line_no, format!("unknown order `{other}` (g_first | f_first)"))),
            },
            ("algorithm", "tau") => {
                let t = parse_f64(line_no, key, value)?;
                if t < 0.0 {
                    return Err(err(line_no, format!("tau must be positive (or 0 for optimal), got {t}")));
                }
                cfg.algorithm.tau = t;
            }
            ("algorithm", "lambda") => {
                let l = parse_f64(line_no, key, value)?;
                if l <= 0.0 {
                    return Err(err(line_no, format!("lambda must be > 0, got {l}")));
                }
                cfg.algorithm.lambda = l;
            }
            ("algorithm", "iterations") => cfg.algorithm.iterations = parse_usize(line_no, key, value)?,
            ("algorithm", "x0") => cfg.algorithm.x0 = parse_vec(line_no, key, value)?,
            ("algorithm", "f_diag") => cfg.algorithm.f_diag = parse_vec(line_no, key, value)?,
            ("algorithm", "f_center") => cfg.algorithm.f_center = parse_vec(line_no, key, value)?,
            ("schedule", "kind") => match value {
                "constant" | "geometric" | "power" => cfg.schedule.kind = value.to_string(),
                other => return Err(err(line_no, format!("unknown schedule `{other}`"))),
            },
            ("schedule", "eps0") => cfg.schedule.eps0 = parse_f64(line_no, key, value)?,
            ("schedule", "gamma0") => cfg.schedule.gamma0 = parse_f64(line_no, key, value)?,
            ("schedule", "ratio") => {
                let r = parse_f64(line_no, key, value)?;
                if !(0.0 < r && r < 1.0) {
                    return Err(err(line_no, format!("ratio must lie in (0,1), got {r}")));
                }
                cfg.schedule.ratio = r;
            }
            ("schedule", "power") => cfg.schedule.power = parse_f64(line_no, key, value)?,
            ("output", "trace_csv") => cfg.output.trace_csv = value.to_string(),
            ("output", "manifest_json") => cfg.output.manifest_json = value.to_string(),
            ("output", "plot_svg") => cfg.output.plot_svg = value.to_string(),
            ("", k) => return Err(err(line_no, format!("key `{k}` before any section header"))),
            (s, k) => return Err(err(line_no, format!("unknown key `{k}` in section `[{s}]`"))),
        }
    }
    if penalty_params_touched {
        cfg.penalty.params = penalty_params;
    }
    // cross-field validation: the penalty must resolve against the catalog
    build_penalty(&cfg.penalty).map_err(|m| err(0, m))?;
    Ok(cfg)
}

pub fn build_penalty(spec: &PenaltySpec) -> Result<Penalty, String> {
    Penalty::from_name(&spec.name, &spec.params, spec.dim)
        .map_err(|e| format!("penalty `{}`: {e}", spec.name))
}

pub fn build_schedule(spec: &ScheduleSpec) -> Schedule {
    match spec.kind.as_str() {
        "geometric" => Schedule::geometric(spec.eps0, spec.gamma0, spec.ratio),
        "power" => Schedule::power(spec.eps0, spec.gamma0, spec.power),
        _ => Schedule::constant(spec.eps0, spec.gamma0),
    }
}

pub fn split_kind(name: &str) -> Option<SplitKind> {
    match name {
        "fb" => Some(SplitKind::FB),
        "pr" => Some(SplitKind::PR),
        "dr" => Some(SplitKind::DR),
        _ => None,
    }
}

pub fn order(name: &str) -> Order {
    if name == "f_first" {
        Order::FFirst
    } else {
        Order::GFirst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config("[penalty]\nname = l1\n").unwrap();
        assert_eq!(cfg.penalty.name, "l1");
        assert_eq!(cfg.algorithm.kind, "ppa");
        assert_eq!(cfg.schedule.kind, "constant");
    }

    #[test]
    fn unknown_kind_is_an_error() {
        let e = parse_config("[approx]\nkind = g\n").unwrap_err();
        assert!(e.message.contains("unknown approximation kind"), "{e}");
        assert_eq!(e.line, 2);
    }

    #[test]
    fn negative_eps_is_a_constraint_error() {
        let e = parse_config("[approx]\neps = -1\n").unwrap_err();
        assert!(e.message.contains(">= 0"), "{e}");
    }

    #[test]
    fn unknown_key_reports_line_and_section() {
        let e = parse_config("[schedule]\nfoo = 1\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("[schedule]"), "{e}");
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "# experiment\n[penalty]\nname = mcp  # firm threshold\nlam = 1.0\nb = 2.0\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.penalty.name, "mcp");
        assert_eq!(cfg.penalty.params, vec![("lam".into(), 1.0), ("b".into(), 2.0)]);
    }
}
