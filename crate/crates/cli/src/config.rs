//! Strict JSON run configuration.
//!
//! One document per run: a required "schema_version", a required "command"
//! naming one of the five subcommands, and a parameter block stored under
//! that exact command string. Unknown keys anywhere are errors, and every
//! message names the offending field by its full path, so a mistyped
//! physics parameter fails loudly instead of silently using a default.

use std::path::PathBuf;

use num_complex::Complex64;
use serde_json::{Map, Value};

use qphonon_core::dynamics::{PulseProfile, QuadraticSign};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u64 = 1;

/// How the quadratic-term sign is chosen for first-order predictions:
/// resolved by the reference protocol, or pinned by the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignChoice {
    Auto,
    Negative,
    Positive,
}

/// Uniform output grid request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub t_final: f64,
    pub points: usize,
}

#[derive(Debug, Clone)]
pub struct AlgebraCheckConfig {
    pub n_values: Vec<u64>,
    pub dressed_pairs: Vec<(u64, u64)>,
    pub random_dressed_count: u64,
    pub random_dressed_max: (u64, u64),
    pub sign: SignChoice,
}

#[derive(Debug, Clone)]
pub struct EvolveConfig {
    pub n_total: u64,
    pub omega_e: f64,
    pub pulse: PulseProfile,
    pub grid: GridConfig,
    pub sign: SignChoice,
    pub steps_per_unit: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Ascending and distinct after parsing; the input order is free.
    pub n_values: Vec<u64>,
    pub omega_e: f64,
    pub pulse: PulseProfile,
    pub grid: GridConfig,
    pub sign: SignChoice,
    pub steps_per_unit: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DressedCheckConfig {
    pub n_total: u64,
    pub delta: u64,
    pub g: f64,
    pub omega_e: f64,
    pub omega_g: f64,
    pub omega_0: f64,
    pub grid: GridConfig,
    /// No "auto" here: the resolution protocol is a property of the
    /// two-mode reference drive, not of the dressed construction.
    pub sign: QuadraticSign,
    pub sign_explicit: bool,
    pub steps_per_unit: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RabiConfig {
    pub g: f64,
    pub omega_e: f64,
    pub omega_f: f64,
    pub n_total: u64,
    pub grid: GridConfig,
    pub sign: SignChoice,
    pub steps_per_unit: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum CommandConfig {
    AlgebraCheck(AlgebraCheckConfig),
    Evolve(EvolveConfig),
    Sweep(SweepConfig),
    DressedCheck(DressedCheckConfig),
    Rabi(RabiConfig),
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::AlgebraCheck(_) => "algebra-check",
            CommandConfig::Evolve(_) => "evolve",
            CommandConfig::Sweep(_) => "sweep",
            CommandConfig::DressedCheck(_) => "dressed-check",
            CommandConfig::Rabi(_) => "rabi",
        }
    }
}

/// A fully validated run document.
#[derive(Debug, Clone)]
pub struct ConfigDoc {
    pub command: CommandConfig,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

pub fn parse_config(text: &str) -> Result<ConfigDoc> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))?;
    let mut root = as_object(value, "config root")?;

    let version = take_u64(&mut root, "", "schema_version")?;
    if version != SCHEMA_VERSION {
        return Err(err_at(
            "schema_version",
            &format!("expected {SCHEMA_VERSION}, got {version}"),
        ));
    }

    let command_name = take_string(&mut root, "", "command")?;
    const COMMANDS: [&str; 5] = ["algebra-check", "evolve", "sweep", "dressed-check", "rabi"];
    if !COMMANDS.contains(&command_name.as_str()) {
        return Err(err_at(
            "command",
            &format!("unknown command '{command_name}' (expected one of {COMMANDS:?})"),
        ));
    }

    let seed = take_opt_u64(&mut root, "", "seed")?.unwrap_or(0);
    let output_dir = match root.remove("output_dir") {
        Some(v) => Some(PathBuf::from(string_value(v, "output_dir")?)),
        None => None,
    };

    let block_value = root.remove(&command_name).ok_or_else(|| {
        err_at(
            &command_name,
            "missing parameter block for the declared command",
        )
    })?;
    let block = as_object(block_value, &command_name)?;
    let command = match command_name.as_str() {
        "algebra-check" => CommandConfig::AlgebraCheck(parse_algebra_check(block)?),
        "evolve" => CommandConfig::Evolve(parse_evolve(block)?),
        "sweep" => CommandConfig::Sweep(parse_sweep(block)?),
        "dressed-check" => CommandConfig::DressedCheck(parse_dressed_check(block)?),
        "rabi" => CommandConfig::Rabi(parse_rabi(block)?),
        _ => unreachable!("command name checked above"),
    };

    reject_unknown(&root, "")?;
    Ok(ConfigDoc {
        command,
        seed,
        output_dir,
    })
}

fn parse_algebra_check(mut block: Map<String, Value>) -> Result<AlgebraCheckConfig> {
    let path = "algebra-check";
    let n_values = take_sector_list(&mut block, path, "n_values")?;
    let dressed_pairs = match block.remove("dressed_pairs") {
        Some(v) => parse_dressed_pairs(v, &join(path, "dressed_pairs"))?,
        None => Vec::new(),
    };
    let random_dressed_count = take_opt_u64(&mut block, path, "random_dressed_count")?.unwrap_or(0);
    let random_dressed_max = match block.remove("random_dressed_max") {
        Some(v) => {
            let p = &join(path, "random_dressed_max");
            let pair = parse_u64_pair(v, p)?;
            if pair.0 == 0 || pair.1 == 0 {
                return Err(err_at(p, "both bounds must be at least 1"));
            }
            pair
        }
        None => (32, 32),
    };
    let sign = take_sign_choice(&mut block, path)?;
    reject_unknown(&block, path)?;
    Ok(AlgebraCheckConfig {
        n_values,
        dressed_pairs,
        random_dressed_count,
        random_dressed_max,
        sign,
    })
}

fn parse_evolve(mut block: Map<String, Value>) -> Result<EvolveConfig> {
    let path = "evolve";
    let n_total = take_sector_size(&mut block, path, "n_total")?;
    let omega_e = take_finite_f64(&mut block, path, "omega_e")?;
    let pulse = take_pulse(&mut block, path)?;
    let grid = take_grid(&mut block, path)?;
    let sign = take_sign_choice(&mut block, path)?;
    let steps_per_unit = take_steps_per_unit(&mut block, path)?;
    reject_unknown(&block, path)?;
    Ok(EvolveConfig {
        n_total,
        omega_e,
        pulse,
        grid,
        sign,
        steps_per_unit,
    })
}

fn parse_sweep(mut block: Map<String, Value>) -> Result<SweepConfig> {
    let path = "sweep";
    let mut n_values = take_sector_list(&mut block, path, "n_values")?;
    n_values.sort_unstable();
    if n_values.windows(2).any(|w| w[0] == w[1]) {
        return Err(err_at(&join(path, "n_values"), "values must be distinct"));
    }
    let omega_e = take_finite_f64(&mut block, path, "omega_e")?;
    let pulse = take_pulse(&mut block, path)?;
    let grid = take_grid(&mut block, path)?;
    let sign = take_sign_choice(&mut block, path)?;
    let steps_per_unit = take_steps_per_unit(&mut block, path)?;
    reject_unknown(&block, path)?;
    Ok(SweepConfig {
        n_values,
        omega_e,
        pulse,
        grid,
        sign,
        steps_per_unit,
    })
}

fn parse_dressed_check(mut block: Map<String, Value>) -> Result<DressedCheckConfig> {
    let path = "dressed-check";
    let n_total = take_sector_size(&mut block, path, "n_total")?;
    let delta = take_sector_size(&mut block, path, "delta")?;
    let g = take_finite_f64(&mut block, path, "g")?;
    let omega_e = take_finite_f64(&mut block, path, "omega_e")?;
    let omega_g = take_opt_finite_f64(&mut block, path, "omega_g")?.unwrap_or(0.0);
    let omega_0 = take_opt_finite_f64(&mut block, path, "omega_0")?.unwrap_or(0.0);
    let grid = take_grid(&mut block, path)?;
    let (sign, sign_explicit) = match block.remove("sign") {
        Some(v) => {
            let p = &join(path, "sign");
            let s = string_value(v, p)?;
            let sign = match s.as_str() {
                "negative" => QuadraticSign::Negative,
                "positive" => QuadraticSign::Positive,
                "auto" => {
                    return Err(err_at(
                        p,
                        "'auto' is not available here; pick 'negative' or 'positive'",
                    ))
                }
                other => {
                    return Err(err_at(
                        p,
                        &format!("unknown sign '{other}' (expected 'negative' or 'positive')"),
                    ))
                }
            };
            (sign, true)
        }
        None => (QuadraticSign::Negative, false),
    };
    let steps_per_unit = take_steps_per_unit(&mut block, path)?;
    reject_unknown(&block, path)?;
    Ok(DressedCheckConfig {
        n_total,
        delta,
        g,
        omega_e,
        omega_g,
        omega_0,
        grid,
        sign,
        sign_explicit,
        steps_per_unit,
    })
}

fn parse_rabi(mut block: Map<String, Value>) -> Result<RabiConfig> {
    let path = "rabi";
    let g = take_finite_f64(&mut block, path, "g")?;
    let omega_e = take_finite_f64(&mut block, path, "omega_e")?;
    let omega_f = take_finite_f64(&mut block, path, "omega_f")?;
    let n_total = take_sector_size(&mut block, path, "n_total")?;
    let grid = take_grid(&mut block, path)?;
    let sign = take_sign_choice(&mut block, path)?;
    let steps_per_unit = take_steps_per_unit(&mut block, path)?;
    reject_unknown(&block, path)?;
    Ok(RabiConfig {
        g,
        omega_e,
        omega_f,
        n_total,
        grid,
        sign,
        steps_per_unit,
    })
}

fn take_pulse(block: &mut Map<String, Value>, path: &str) -> Result<PulseProfile> {
    let p = join(path, "pulse");
    let mut pulse = as_object(take(block, path, "pulse")?, &p)?;

    let kind = string_value(take(&mut pulse, &p, "type")?, &join(&p, "type"))?;
    let amplitude = parse_amplitude(take(&mut pulse, &p, "amplitude")?, &join(&p, "amplitude"))?;
    let profile = match kind.as_str() {
        "constant" => PulseProfile::Constant { amplitude },
        "monochromatic" => PulseProfile::Monochromatic {
            amplitude,
            omega_f: take_finite_f64(&mut pulse, &p, "omega_f")?,
        },
        "gaussian" => {
            let omega_f = take_finite_f64(&mut pulse, &p, "omega_f")?;
            let center = take_finite_f64(&mut pulse, &p, "center")?;
            let width = take_finite_f64(&mut pulse, &p, "width")?;
            if width <= 0.0 {
                return Err(err_at(&join(&p, "width"), "must be positive"));
            }
            PulseProfile::GaussianEnvelope {
                amplitude,
                omega_f,
                center,
                width,
            }
        }
        other => {
            return Err(err_at(
                &join(&p, "type"),
                &format!(
                    "unknown pulse type '{other}' (expected 'constant', 'monochromatic', or 'gaussian')"
                ),
            ))
        }
    };
    reject_unknown(&pulse, &p)?;
    Ok(profile)
}

/// Complex amplitudes are written as a two-element array [re, im].
fn parse_amplitude(value: Value, path: &str) -> Result<Complex64> {
    let items = array_value(value, path)?;
    if items.len() != 2 {
        return Err(err_at(
            path,
            &format!("expected a [re, im] pair, got {} elements", items.len()),
        ));
    }
    let mut parts = [0.0; 2];
    for (k, item) in items.into_iter().enumerate() {
        parts[k] = finite_f64_value(item, &format!("{path}[{k}]"))?;
    }
    Ok(Complex64::new(parts[0], parts[1]))
}

fn take_grid(block: &mut Map<String, Value>, path: &str) -> Result<GridConfig> {
    let p = join(path, "grid");
    let mut grid = as_object(take(block, path, "grid")?, &p)?;
    let t_final = take_finite_f64(&mut grid, &p, "t_final")?;
    if t_final <= 0.0 {
        return Err(err_at(&join(&p, "t_final"), "must be positive"));
    }
    let points = take_u64(&mut grid, &p, "points")?;
    if points < 2 {
        return Err(err_at(&join(&p, "points"), "a grid needs at least 2 points"));
    }
    reject_unknown(&grid, &p)?;
    Ok(GridConfig {
        t_final,
        points: points as usize,
    })
}

fn take_sign_choice(block: &mut Map<String, Value>, path: &str) -> Result<SignChoice> {
    match block.remove("sign") {
        Some(v) => {
            let p = join(path, "sign");
            let s = string_value(v, &p)?;
            match s.as_str() {
                "auto" => Ok(SignChoice::Auto),
                "negative" => Ok(SignChoice::Negative),
                "positive" => Ok(SignChoice::Positive),
                other => Err(err_at(
                    &p,
                    &format!("unknown sign '{other}' (expected 'auto', 'negative', or 'positive')"),
                )),
            }
        }
        None => Ok(SignChoice::Auto),
    }
}

fn take_steps_per_unit(block: &mut Map<String, Value>, path: &str) -> Result<Option<f64>> {
    match block.remove("steps_per_unit") {
        Some(v) => {
            let p = join(path, "steps_per_unit");
            let x = finite_f64_value(v, &p)?;
            if x <= 0.0 {
                return Err(err_at(&p, "must be positive"));
            }
            Ok(Some(x))
        }
        None => Ok(None),
    }
}

fn take_sector_size(block: &mut Map<String, Value>, path: &str, key: &str) -> Result<u64> {
    let p = join(path, key);
    let n = u64_value(take(block, path, key)?, &p)?;
    if n == 0 {
        return Err(err_at(&p, "sector size must be at least 1"));
    }
    Ok(n)
}

fn take_sector_list(block: &mut Map<String, Value>, path: &str, key: &str) -> Result<Vec<u64>> {
    let p = join(path, key);
    let items = array_value(take(block, path, key)?, &p)?;
    if items.is_empty() {
        return Err(err_at(&p, "needs at least one sector size"));
    }
    let mut out = Vec::with_capacity(items.len());
    for (k, item) in items.into_iter().enumerate() {
        let elem_path = format!("{p}[{k}]");
        let n = u64_value(item, &elem_path)?;
        if n == 0 {
            return Err(err_at(&elem_path, "sector size must be at least 1"));
        }
        out.push(n);
    }
    Ok(out)
}

fn parse_dressed_pairs(value: Value, path: &str) -> Result<Vec<(u64, u64)>> {
    let items = array_value(value, path)?;
    let mut out = Vec::with_capacity(items.len());
    for (k, item) in items.into_iter().enumerate() {
        let elem_path = format!("{path}[{k}]");
        let pair = parse_u64_pair(item, &elem_path)?;
        if pair.0 == 0 || pair.1 == 0 {
            return Err(err_at(&elem_path, "both sector sizes must be at least 1"));
        }
        out.push(pair);
    }
    Ok(out)
}

fn parse_u64_pair(value: Value, path: &str) -> Result<(u64, u64)> {
    let items = array_value(value, path)?;
    if items.len() != 2 {
        return Err(err_at(
            path,
            &format!("expected a two-element array, got {} elements", items.len()),
        ));
    }
    let mut parts = [0u64; 2];
    for (k, item) in items.into_iter().enumerate() {
        parts[k] = u64_value(item, &format!("{path}[{k}]"))?;
    }
    Ok((parts[0], parts[1]))
}

fn take_finite_f64(block: &mut Map<String, Value>, path: &str, key: &str) -> Result<f64> {
    finite_f64_value(take(block, path, key)?, &join(path, key))
}

fn take_opt_finite_f64(block: &mut Map<String, Value>, path: &str, key: &str) -> Result<Option<f64>> {
    match block.remove(key) {
        Some(v) => Ok(Some(finite_f64_value(v, &join(path, key))?)),
        None => Ok(None),
    }
}

fn take_u64(block: &mut Map<String, Value>, path: &str, key: &str) -> Result<u64> {
    u64_value(take(block, path, key)?, &join(path, key))
}

fn take_opt_u64(block: &mut Map<String, Value>, path: &str, key: &str) -> Result<Option<u64>> {
    match block.remove(key) {
        Some(v) => Ok(Some(u64_value(v, &join(path, key))?)),
        None => Ok(None),
    }
}

fn take_string(block: &mut Map<String, Value>, path: &str, key: &str) -> Result<String> {
    string_value(take(block, path, key)?, &join(path, key))
}

fn take(block: &mut Map<String, Value>, path: &str, key: &str) -> Result<Value> {
    block
        .remove(key)
        .ok_or_else(|| err_at(&join(path, key), "missing required field"))
}

/// Strictness: by the time a block is done, every key must have been
/// consumed. serde_json's default map is sorted, so the reported key is
/// deterministic.
fn reject_unknown(block: &Map<String, Value>, path: &str) -> Result<()> {
    if let Some(key) = block.keys().next() {
        return Err(err_at(&join(path, key), "unknown field"));
    }
    Ok(())
}

fn as_object(value: Value, path: &str) -> Result<Map<String, Value>> {
    match value {
        Value::Object(map) => Ok(map),
        other => Err(err_at(
            path,
            &format!("expected an object, got {}", kind(&other)),
        )),
    }
}

fn array_value(value: Value, path: &str) -> Result<Vec<Value>> {
    match value {
        Value::Array(items) => Ok(items),
        other => Err(err_at(
            path,
            &format!("expected an array, got {}", kind(&other)),
        )),
    }
}

fn string_value(value: Value, path: &str) -> Result<String> {
    match value {
        Value::String(s) => Ok(s),
        other => Err(err_at(
            path,
            &format!("expected a string, got {}", kind(&other)),
        )),
    }
}

fn u64_value(value: Value, path: &str) -> Result<u64> {
    value
        .as_u64()
        .ok_or_else(|| err_at(path, "expected a non-negative integer"))
}

fn finite_f64_value(value: Value, path: &str) -> Result<f64> {
    let x = value
        .as_f64()
        .ok_or_else(|| err_at(path, "expected a number"))?;
    if !x.is_finite() {
        return Err(err_at(path, "must be finite"));
    }
    Ok(x)
}

fn kind(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn err_at(path: &str, msg: &str) -> CliError {
    CliError::Config(format!("{path}: {msg}"))
}
