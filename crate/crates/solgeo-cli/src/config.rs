//! Experiment configuration: a single JSON document, schema-validated
//! with dotted field paths in every error.

use serde_json::Value;
use solgeo::error::SolError;
use solgeo::geometry::SolParams;
use solgeo::sim::Scheme;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dt: f64,
    pub t: f64,
    pub n: u64,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub dir: std::path::PathBuf,
    pub samples_csv: bool,
    pub path_csv: bool,
    pub decimation: u64,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: String,
    pub params: SolParams,
    pub run: RunConfig,
    pub scheme: Scheme,
    pub options: Value,
    pub output: OutputConfig,
}

fn lookup<'a>(root: &'a Value, path: &str) -> Option<&'a Value> {
    let mut cur = root;
    for part in path.split('.') {
        cur = cur.get(part)?;
    }
    Some(cur)
}

fn need_f64(root: &Value, path: &str) -> Result<f64, SolError> {
    match lookup(root, path) {
        None => Err(SolError::config(path, "missing")),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| SolError::config(path, "expected a number")),
    }
}

fn need_u64(root: &Value, path: &str) -> Result<u64, SolError> {
    match lookup(root, path) {
        None => Err(SolError::config(path, "missing")),
        Some(v) => v
            .as_u64()
            .ok_or_else(|| SolError::config(path, "expected a nonnegative integer")),
    }
}

pub fn opt_f64(root: &Value, path: &str, default: f64) -> Result<f64, SolError> {
    match lookup(root, path) {
        None => Ok(default),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| SolError::config(path, "expected a number")),
    }
}

pub fn opt_u64(root: &Value, path: &str, default: u64) -> Result<u64, SolError> {
    match lookup(root, path) {
        None => Ok(default),
        Some(v) => v
            .as_u64()
            .ok_or_else(|| SolError::config(path, "expected a nonnegative integer")),
    }
}

fn opt_bool(root: &Value, path: &str, default: bool) -> Result<bool, SolError> {
    match lookup(root, path) {
        None => Ok(default),
        Some(v) => v
            .as_bool()
            .ok_or_else(|| SolError::config(path, "expected a boolean")),
    }
}

const COMMANDS: [&str; 8] = [
    "simulate", "clt", "escape", "tails", "deviation", "boundary", "harmonic", "geometry",
];

/// CLI-provided overrides for fields of the JSON document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<std::path::PathBuf>,
}

pub fn parse(
    text: &str,
    command: &str,
    overrides: &Overrides,
    env_workers: Option<usize>,
) -> Result<ExperimentConfig, SolError> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| SolError::config("<document>", format!("invalid JSON: {e}")))?;
    if !root.is_object() {
        return Err(SolError::config("<document>", "expected a JSON object"));
    }
    if let Some(c) = lookup(&root, "command") {
        let c = c
            .as_str()
            .ok_or_else(|| SolError::config("command", "expected a string"))?;
        if c != command {
            return Err(SolError::config(
                "command",
                format!("config says `{c}` but the CLI subcommand is `{command}`"),
            ));
        }
    }
    if !COMMANDS.contains(&command) {
        return Err(SolError::config("command", format!("unknown command `{command}`")));
    }

    let params = SolParams::new(
        need_f64(&root, "params.p")?,
        need_f64(&root, "params.q")?,
        need_f64(&root, "params.a")?,
    )
    .map_err(|e| SolError::config("params", e.to_string()))?;

    let dt = need_f64(&root, "run.dt")?;
    let t = need_f64(&root, "run.T")?;
    let n = need_u64(&root, "run.N")?;
    let seed = overrides.seed.unwrap_or(need_u64(&root, "run.seed")?);
    let workers = overrides
        .workers
        .or_else(|| lookup(&root, "run.workers").and_then(|v| v.as_u64()).map(|v| v as usize))
        .or(env_workers)
        .unwrap_or(1)
        .max(1);
    if !(dt > 0.0) {
        return Err(SolError::config("run.dt", "must be > 0"));
    }
    if t < dt {
        return Err(SolError::config("run.T", "must be >= run.dt"));
    }
    if n == 0 {
        return Err(SolError::config("run.N", "must be >= 1"));
    }

    let scheme = match lookup(&root, "run.scheme").and_then(|v| v.as_str()) {
        None | Some("euler") => Scheme::Euler,
        Some("time-change") => Scheme::TimeChange,
        Some(other) => {
            return Err(SolError::config(
                "run.scheme",
                format!("expected `euler` or `time-change`, got `{other}`"),
            ))
        }
    };

    let out_dir = overrides
        .out
        .clone()
        .or_else(|| lookup(&root, "output.dir").and_then(|v| v.as_str()).map(Into::into))
        .unwrap_or_else(|| ".".into());

    Ok(ExperimentConfig {
        command: command.to_string(),
        params,
        run: RunConfig { dt, t, n, seed, workers },
        scheme,
        options: lookup(&root, "options").cloned().unwrap_or(Value::Null),
        output: OutputConfig {
            dir: out_dir,
            samples_csv: opt_bool(&root, "output.samples_csv", false)?,
            path_csv: opt_bool(&root, "output.path_csv", false)?,
            decimation: opt_u64(&root, "output.decimation", 1)?,
        },
    })
}
