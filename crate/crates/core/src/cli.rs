//! The `leadlag` command-line tool.
//!
//! Every subcommand resolves its settings from three layers: built-in
//! defaults, an optional flat `key=value` config file (`--config`), and
//! flags, with flags winning. The resolved settings and the seed are written
//! into the header of every output.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::compare::compare;
use crate::error::{Error, ErrorClass, Result};
use crate::granger::{granger_panel, GrangerVariant};
use crate::indicator::{indicator_series, LagSet, WindowSpec};
use crate::panel::TimeSeriesPanel;
use crate::panel_io::{
    read_panel, render_results, Artifact, LoadedPanel, Meta, MissingPolicy, OutputFormat,
    PanelSchema,
};
use crate::rmt::{self, build_tw_table, mp_histogram_check, standardized_lmax_sample, TwTable};
use crate::stats;
use crate::synth::{coupled_panel, iid_panel, CouplingSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Smallest `s_max` accepted for a Tracy-Widom table.
pub const MIN_TW_S_MAX: f64 = 6.0;
/// Fewest Monte-Carlo replications `validate-rmt` will run.
pub const MIN_REPLICATIONS: usize = 10;

#[derive(Parser, Debug)]
#[command(
    name = "leadlag",
    version,
    about = "Lead-lag structure monitoring for time-series panels"
)]
pub struct Cli {
    /// Flat key=value settings file; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate the Tracy-Widom F1 distribution.
    Twtable(TwTableArgs),
    /// Monte-Carlo check of the Tracy-Widom and Marchenko-Pastur laws.
    ValidateRmt(ValidateArgs),
    /// Generate a synthetic panel.
    Simulate(SimulateArgs),
    /// Rolling σ_λ indicator of cause candidates against an effect.
    Indicator(IndicatorArgs),
    /// Granger F-tests of cause candidates against an effect.
    Granger(GrangerArgs),
    /// Rank cause candidates by mean σ_λ and by Granger ln(1/p).
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
pub struct TwTableArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub s_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s_max: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub mp_n: Option<usize>,
    /// Comma-separated p/n ratios in (0, 1].
    #[arg(long)]
    pub mp_ratios: Option<String>,
    #[arg(long)]
    pub mp_matrices: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// iid or coupled.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub n_series: Option<usize>,
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    #[arg(long)]
    pub true_lag: Option<usize>,
    #[arg(long)]
    pub distractors: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct InputArgs {
    #[arg(long, value_name = "PATH")]
    pub input: Option<String>,
    #[arg(long)]
    pub effect: Option<String>,
    /// Comma-separated cause columns (default: every other column).
    #[arg(long)]
    pub causes: Option<String>,
    #[arg(long)]
    pub time_column: Option<String>,
    #[arg(long)]
    pub date_format: Option<String>,
    /// drop_row or error.
    #[arg(long)]
    pub missing_policy: Option<String>,
    /// Named column group, `NAME=col1,col2`. Repeatable.
    #[arg(long, value_name = "NAME=COLS")]
    pub bucket: Vec<String>,
}

#[derive(Args, Debug)]
pub struct IndicatorArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub max_lag: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub include_lag0: Option<bool>,
}

#[derive(Args, Debug)]
pub struct GrangerArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated lag orders.
    #[arg(long)]
    pub lag_orders: Option<String>,
    /// Comma-separated variants: raw, diff, winsor, diff_winsor.
    #[arg(long)]
    pub variants: Option<String>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub window: Option<usize>,
    /// Comma-separated lags (σ_λ max lag and Granger lag order).
    #[arg(long)]
    pub lags: Option<String>,
    #[arg(long)]
    pub variant: Option<String>,
}

struct Key {
    name: &'static str,
    default: Option<&'static str>,
}

const fn key(name: &'static str, default: Option<&'static str>) -> Key {
    Key { name, default }
}

const COMMON_KEYS: &[Key] = &[key("seed", Some("42")), key("format", Some("csv"))];

const TWTABLE_KEYS: &[Key] = &[
    key("s_min", Some("-10")),
    key("s_max", Some("8")),
    key("step", Some("0.005")),
];

const VALIDATE_KEYS: &[Key] = &[
    key("n", Some("100")),
    key("p", Some("100")),
    key("replications", Some("2000")),
    key("mp_n", Some("1000")),
    key("mp_ratios", Some("1,0.5")),
    key("mp_matrices", Some("4")),
    key("bins", Some("40")),
];

const SIMULATE_KEYS: &[Key] = &[
    key("kind", Some("coupled")),
    key("n_series", Some("10")),
    key("length", Some("400")),
    key("beta", Some("0.9")),
    key("noise_sigma", Some("0.5")),
    key("true_lag", Some("2")),
    key("distractors", Some("0")),
];

const INPUT_KEYS: &[Key] = &[
    key("input", None),
    key("effect", None),
    key("causes", None),
    key("time_column", None),
    key("date_format", Some("%Y-%m-%d")),
    key("missing_policy", Some("drop_row")),
];

const INDICATOR_KEYS: &[Key] = &[
    key("window", Some("60")),
    key("max_lag", Some("2")),
    key("include_lag0", Some("false")),
];

const GRANGER_KEYS: &[Key] = &[key("lag_orders", Some("2,5")), key("variants", Some("raw"))];

const COMPARE_KEYS: &[Key] = &[
    key("window", Some("60")),
    key("lags", Some("2,5")),
    key("variant", Some("raw")),
];

const BUCKET_PREFIX: &str = "bucket.";

fn all_key_tables() -> [&'static [Key]; 8] {
    [
        COMMON_KEYS,
        TWTABLE_KEYS,
        VALIDATE_KEYS,
        SIMULATE_KEYS,
        INPUT_KEYS,
        INDICATOR_KEYS,
        GRANGER_KEYS,
        COMPARE_KEYS,
    ]
}

/// Parses a flat `key=value` file. `#` starts a comment line; dashes in keys
/// are read as underscores.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("config line {}: expected key=value", i + 1)))?;
        let k = k.trim().replace('-', "_");
        let known = k.starts_with(BUCKET_PREFIX)
            || all_key_tables()
                .iter()
                .flat_map(|t| t.iter())
                .any(|key| key.name == k);
        if !known {
            return Err(Error::Usage(format!(
                "config line {}: unknown key `{k}`",
                i + 1
            )));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

/// Fully resolved settings for one invocation, in echo order.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    entries: Vec<(String, String)>,
}

impl Settings {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    fn set(&mut self, name: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == name) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((name.to_string(), value)),
        }
    }

    fn required(&self, name: &str) -> Result<&str> {
        self.get(name)
            .ok_or_else(|| Error::Usage(format!("missing required setting `{name}`")))
    }

    fn parse<T: FromStr>(&self, name: &str) -> Result<T>
    where
        T::Err: Display,
    {
        let raw = self.required(name)?;
        raw.parse()
            .map_err(|e| Error::Usage(format!("invalid value `{raw}` for `{name}`: {e}")))
    }

    fn parse_list<T: FromStr>(&self, name: &str) -> Result<Vec<T>>
    where
        T::Err: Display,
    {
        let raw = self.required(name)?;
        let items = split_list(raw)
            .into_iter()
            .map(|item| {
                item.parse()
                    .map_err(|e| Error::Usage(format!("invalid item `{item}` in `{name}`: {e}")))
            })
            .collect::<Result<Vec<T>>>()?;
        if items.is_empty() {
            return Err(Error::Usage(format!("`{name}` is empty")));
        }
        Ok(items)
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    fn buckets(&self) -> Vec<(&str, Vec<String>)> {
        self.entries
            .iter()
            .filter_map(|(k, v)| {
                k.strip_prefix(BUCKET_PREFIX).map(|name| {
                    (
                        name,
                        split_list(v).into_iter().map(str::to_string).collect(),
                    )
                })
            })
            .collect()
    }
}

fn split_list(raw: &str) -> Vec<&str> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

type Flags = Vec<(&'static str, Option<String>)>;

fn resolve(
    command: &str,
    tables: &[&[Key]],
    file: &BTreeMap<String, String>,
    flags: Flags,
) -> Result<Settings> {
    let mut settings = Settings::default();
    settings.set("command", command);
    for table in tables {
        for k in table.iter() {
            let flag = flags
                .iter()
                .find(|(n, _)| *n == k.name)
                .and_then(|(_, v)| v.clone());
            let value = flag
                .or_else(|| file.get(k.name).cloned())
                .or_else(|| k.default.map(str::to_string));
            if let Some(v) = value {
                settings.set(k.name, v);
            }
        }
    }
    if tables.iter().any(|t| std::ptr::eq(*t, INPUT_KEYS)) {
        let mut buckets: BTreeMap<String, String> = file
            .iter()
            .filter(|(k, _)| k.starts_with(BUCKET_PREFIX))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        for (name, value) in flags.iter().filter(|(n, _)| *n == "bucket") {
            let Some(spec) = value else { continue };
            let (bucket, cols) = spec
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("--{name} expects NAME=COLS, got `{spec}`")))?;
            buckets.insert(
                format!("{BUCKET_PREFIX}{}", bucket.trim()),
                cols.trim().to_string(),
            );
        }
        for (k, v) in buckets {
            settings.set(&k, v);
        }
    }
    Ok(settings)
}

fn common_flags(cli: &Cli) -> Flags {
    vec![
        ("seed", cli.seed.map(|s| s.to_string())),
        ("format", cli.format.clone()),
    ]
}

fn some<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(T::to_string)
}

impl InputArgs {
    fn flags(&self) -> Flags {
        let mut flags = vec![
            ("input", self.input.clone()),
            ("effect", self.effect.clone()),
            ("causes", self.causes.clone()),
            ("time_column", self.time_column.clone()),
            ("date_format", self.date_format.clone()),
            ("missing_policy", self.missing_policy.clone()),
        ];
        flags.extend(self.bucket.iter().map(|b| ("bucket", Some(b.clone()))));
        flags
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Twtable(_) => "twtable",
            Command::ValidateRmt(_) => "validate-rmt",
            Command::Simulate(_) => "simulate",
            Command::Indicator(_) => "indicator",
            Command::Granger(_) => "granger",
            Command::Compare(_) => "compare",
        }
    }

    fn tables(&self) -> Vec<&'static [Key]> {
        let specific: &[&'static [Key]] = match self {
            Command::Twtable(_) => &[TWTABLE_KEYS],
            Command::ValidateRmt(_) => &[VALIDATE_KEYS],
            Command::Simulate(_) => &[SIMULATE_KEYS],
            Command::Indicator(_) => &[INPUT_KEYS, INDICATOR_KEYS],
            Command::Granger(_) => &[INPUT_KEYS, GRANGER_KEYS],
            Command::Compare(_) => &[INPUT_KEYS, COMPARE_KEYS],
        };
        std::iter::once(COMMON_KEYS)
            .chain(specific.iter().copied())
            .collect()
    }

    fn flags(&self) -> Flags {
        match self {
            Command::Twtable(a) => vec![
                ("s_min", some(&a.s_min)),
                ("s_max", some(&a.s_max)),
                ("step", some(&a.step)),
            ],
            Command::ValidateRmt(a) => vec![
                ("n", some(&a.n)),
                ("p", some(&a.p)),
                ("replications", some(&a.replications)),
                ("mp_n", some(&a.mp_n)),
                ("mp_ratios", a.mp_ratios.clone()),
                ("mp_matrices", some(&a.mp_matrices)),
                ("bins", some(&a.bins)),
            ],
            Command::Simulate(a) => vec![
                ("kind", a.kind.clone()),
                ("n_series", some(&a.n_series)),
                ("length", some(&a.length)),
                ("beta", some(&a.beta)),
                ("noise_sigma", some(&a.noise_sigma)),
                ("true_lag", some(&a.true_lag)),
                ("distractors", some(&a.distractors)),
            ],
            Command::Indicator(a) => {
                let mut f = a.input.flags();
                f.extend([
                    ("window", some(&a.window)),
                    ("max_lag", some(&a.max_lag)),
                    ("include_lag0", some(&a.include_lag0)),
                ]);
                f
            }
            Command::Granger(a) => {
                let mut f = a.input.flags();
                f.extend([
                    ("lag_orders", a.lag_orders.clone()),
                    ("variants", a.variants.clone()),
                ]);
                f
            }
            Command::Compare(a) => {
                let mut f = a.input.flags();
                f.extend([
                    ("window", some(&a.window)),
                    ("lags", a.lags.clone()),
                    ("variant", a.variant.clone()),
                ]);
                f
            }
        }
    }
}

/// Loads the config file (if any) and applies flags over it.
pub fn resolve_settings(cli: &Cli) -> Result<Settings> {
    let file =
        match &cli.config {
            Some(path) => parse_config(&fs::read_to_string(path).map_err(|e| {
                Error::Usage(format!("cannot read config {}: {e}", path.display()))
            })?)?,
            None => BTreeMap::new(),
        };
    let mut flags = common_flags(cli);
    flags.extend(cli.command.flags());
    resolve(cli.command.name(), &cli.command.tables(), &file, flags)
}

fn emit<A: Artifact + ?Sized>(artifact: &A, settings: &Settings, out: Option<&Path>) -> Result<()> {
    let format: OutputFormat = settings.parse("format")?;
    let text = render_results(artifact, format, settings.entries())?;
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn cmd_twtable(settings: &Settings, out: Option<&Path>) -> Result<i32> {
    let s_min: f64 = settings.parse("s_min")?;
    let s_max: f64 = settings.parse("s_max")?;
    let step: f64 = settings.parse("step")?;
    if !(s_max >= MIN_TW_S_MAX) {
        return Err(Error::Usage(format!(
            "s_max = {s_max} is too small: the right end is initialized from the Airy asymptotics, \
             which need s_max >= {MIN_TW_S_MAX}"
        )));
    }
    let table = build_tw_table::<f64>(s_min, s_max, step)?;
    emit(&table, settings, out)?;
    Ok(EXIT_OK)
}

/// One line of a `validate-rmt` report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Gated checks decide the exit status; the rest are informational.
    pub gated: bool,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value.is_finite()
            && self.lower.is_none_or(|lo| self.value >= lo)
            && self.upper.is_none_or(|hi| self.value <= hi)
    }

    fn status(&self) -> &'static str {
        match (self.passed(), self.gated) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "INFO",
        }
    }
}

fn opt_text(v: Option<f64>) -> String {
    v.map_or_else(String::new, crate::panel_io::format_number)
}

impl Artifact for [Check] {
    fn to_csv(&self, meta: &Meta) -> Result<String> {
        let mut out = String::new();
        for (k, v) in meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str("check,value,lower,upper,gated,status\n");
        for c in self {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.name,
                crate::panel_io::format_number(c.value),
                opt_text(c.lower),
                opt_text(c.upper),
                c.gated,
                c.status()
            ));
        }
        Ok(out)
    }

    fn to_json(&self, meta: &Meta) -> Result<Value> {
        let config: serde_json::Map<String, Value> =
            meta.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let num = |v: f64| json!(crate::panel_io::round_sig12(v));
        let rows: Vec<Value> = self
            .iter()
            .map(|c| {
                json!({
                    "check": c.name,
                    "value": if c.value.is_finite() { num(c.value) } else { Value::Null },
                    "lower": c.lower.map(num),
                    "upper": c.upper.map(num),
                    "gated": c.gated,
                    "status": c.status(),
                })
            })
            .collect();
        Ok(json!({ "config": config, "rows": rows }))
    }
}

/// Runs the Monte-Carlo checks. Tolerances gate only when the run is at least
/// as large as the reference sizes they were set for (`n, p >= 100` with
/// 2000 replications; `mp_n >= 1000` pooling 4 matrices).
pub fn rmt_checks(settings: &Settings) -> Result<Vec<Check>> {
    let n: usize = settings.parse("n")?;
    let p: usize = settings.parse("p")?;
    let reps: usize = settings.parse("replications")?;
    let mp_n: usize = settings.parse("mp_n")?;
    let ratios: Vec<f64> = settings.parse_list("mp_ratios")?;
    let mp_matrices: usize = settings.parse("mp_matrices")?;
    let bins: usize = settings.parse("bins")?;
    let seed: u64 = settings.parse("seed")?;
    if reps < MIN_REPLICATIONS {
        return Err(Error::Usage(format!(
            "replications = {reps}: at least {MIN_REPLICATIONS} are needed for a distributional check"
        )));
    }
    if n < 2 || p < 2 || mp_n < 2 || mp_matrices == 0 || bins == 0 {
        return Err(Error::Usage(
            "n, p, mp_n must be >= 2; mp_matrices and bins >= 1".into(),
        ));
    }
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
        return Err(Error::Usage(format!("mp ratio {r} outside (0, 1]")));
    }

    let table = TwTable::<f64>::standard()?;
    let tw_gated = n.min(p) >= 100 && reps >= 2000;
    let sample = standardized_lmax_sample::<f64>(n, p, reps, seed)?;
    let ks = stats::ks_distance(&sample, |s| table.cdf(s));
    let below = sample.iter().filter(|&&s| s <= 0.0).count() as f64 / sample.len() as f64;

    let (big, small) = (n.max(p), n.min(p));
    let lmax = rmt::lmax_sample::<f64>(big, small, reps, seed)?;
    let ratio = (small as f64 / big as f64).sqrt();
    let limit = (1.0 + ratio).powi(2);
    let mean_scaled = stats::mean(&lmax.iter().map(|l| l / big as f64).collect::<Vec<_>>());

    let mut checks = vec![
        Check {
            name: "tw_ks_distance".into(),
            value: ks,
            lower: None,
            upper: Some(0.05),
            gated: tw_gated,
        },
        Check {
            name: "tw_mass_below_zero".into(),
            value: below,
            lower: Some(0.80),
            upper: Some(0.86),
            gated: tw_gated,
        },
        Check {
            name: "lmax_over_n_relative_error".into(),
            value: (mean_scaled / limit - 1.0).abs(),
            lower: None,
            upper: Some(0.02),
            gated: false,
        },
    ];
    let mp_gated = mp_n >= 1000 && mp_matrices >= 4;
    for (i, &r) in ratios.iter().enumerate() {
        let mp_p = ((mp_n as f64 * r).round() as usize).max(1);
        let check =
            mp_histogram_check::<f64>(mp_n, mp_p, mp_matrices, bins, seed.wrapping_add(i as u64))?;
        checks.push(Check {
            name: format!("mp_mad_ratio_{r}"),
            value: check.mad,
            lower: None,
            upper: Some(0.02),
            gated: mp_gated,
        });
        checks.push(Check {
            name: format!("mp_normalization_error_ratio_{r}"),
            value: (check.normalization - 1.0).abs(),
            lower: None,
            upper: Some(1e-3),
            gated: true,
        });
    }
    Ok(checks)
}

fn cmd_validate(settings: &Settings, out: Option<&Path>) -> Result<i32> {
    let checks = rmt_checks(settings)?;
    for c in &checks {
        let bounds = match (c.lower, c.upper) {
            (Some(lo), Some(hi)) => format!("in [{lo}, {hi}]"),
            (None, Some(hi)) => format!("<= {hi}"),
            (Some(lo), None) => format!(">= {lo}"),
            (None, None) => String::new(),
        };
        eprintln!("{} {} = {:.6} ({bounds})", c.status(), c.name, c.value);
    }
    emit(checks.as_slice(), settings, out)?;
    Ok(if checks.iter().any(|c| c.gated && !c.passed()) {
        EXIT_NUMERIC
    } else {
        EXIT_OK
    })
}

fn cmd_simulate(settings: &Settings, out: Option<&Path>) -> Result<i32> {
    let seed: u64 = settings.parse("seed")?;
    let length: usize = settings.parse("length")?;
    let panel: TimeSeriesPanel<f64> = match settings.required("kind")? {
        "iid" => iid_panel(settings.parse("n_series")?, length, seed),
        "coupled" => {
            let spec = CouplingSpec {
                true_lag: settings.parse("true_lag")?,
                beta: settings.parse("beta")?,
                noise_sigma: settings.parse("noise_sigma")?,
                len: length,
                seed,
            };
            coupled_panel(&spec, settings.parse("distractors")?)
        }
        other => {
            return Err(Error::Usage(format!(
                "unknown kind `{other}` (expected iid or coupled)"
            )))
        }
    }
    .map_err(|e| match e {
        Error::Domain(msg) => Error::Usage(msg),
        other => other,
    })?;
    emit(&panel, settings, out)?;
    Ok(EXIT_OK)
}

/// Reads the input panel and settles the cause list. Causes default to the
/// listed buckets, or else every column other than the effect.
fn load_input(settings: &mut Settings) -> Result<(LoadedPanel, String, Vec<String>)> {
    let input = settings.required("input")?.to_string();
    let effect = settings.required("effect")?.to_string();
    let mut causes: Option<Vec<String>> = settings
        .get("causes")
        .map(|c| split_list(c).into_iter().map(str::to_string).collect());
    if causes.is_none() {
        let from_buckets: Vec<String> = settings
            .buckets()
            .into_iter()
            .flat_map(|(_, cols)| cols)
            .fold(Vec::new(), |mut acc, c| {
                if !acc.contains(&c) {
                    acc.push(c);
                }
                acc
            });
        if !from_buckets.is_empty() {
            causes = Some(from_buckets);
        }
    }
    if let Some(c) = &causes {
        if c.is_empty() {
            return Err(Error::Usage("`causes` is empty".into()));
        }
        if c.contains(&effect) {
            return Err(Error::Usage(format!(
                "effect `{effect}` is also listed as a cause"
            )));
        }
    }
    let schema = PanelSchema {
        time_column: settings.get("time_column").map(str::to_string),
        value_columns: causes.as_ref().map(|c| {
            std::iter::once(effect.clone())
                .chain(c.iter().cloned())
                .collect()
        }),
        date_format: settings.required("date_format")?.to_string(),
        missing_policy: settings.parse::<MissingPolicy>("missing_policy")?,
    };
    let loaded = read_panel(&input, &schema)?;
    loaded.panel.index_of(&effect)?;
    let causes = match causes {
        Some(c) => c,
        None => loaded
            .panel
            .names()
            .iter()
            .filter(|n| **n != effect)
            .cloned()
            .collect(),
    };
    if causes.is_empty() {
        return Err(Error::InsufficientData {
            rows: loaded.panel.len(),
            needed: 2,
        });
    }
    settings.set("causes", causes.join(","));
    settings.set("rows_read", loaded.report.rows_read.to_string());
    settings.set("rows_dropped", loaded.report.rows_dropped.to_string());
    if loaded.report.rows_dropped > 0 {
        eprintln!(
            "dropped {} of {} rows with missing values",
            loaded.report.rows_dropped, loaded.report.rows_read
        );
    }
    Ok((loaded, effect, causes))
}

fn cmd_indicator(settings: &mut Settings, out: Option<&Path>) -> Result<i32> {
    let window: usize = settings.parse("window")?;
    let max_lag: usize = settings.parse("max_lag")?;
    let lag_set = if settings.parse::<bool>("include_lag0")? {
        LagSet::IncludeZero
    } else {
        LagSet::ExcludeZero
    };
    let spec = WindowSpec::with_lag_set(window, max_lag, lag_set).map_err(as_usage)?;
    let (loaded, effect, causes) = load_input(settings)?;
    let series = indicator_series(&loaded.panel, &effect, &causes, &spec)?;
    emit(&series, settings, out)?;
    Ok(EXIT_OK)
}

fn cmd_granger(settings: &mut Settings, out: Option<&Path>) -> Result<i32> {
    let lags: Vec<usize> = settings.parse_list("lag_orders")?;
    let variants: Vec<GrangerVariant> = settings.parse_list("variants")?;
    if lags.contains(&0) {
        return Err(Error::Usage("lag orders must be >= 1".into()));
    }
    let (loaded, effect, causes) = load_input(settings)?;
    let results = granger_panel(&loaded.panel, &effect, &causes, &lags, &variants)?;
    for r in &results {
        if let Err(e) = &r.outcome {
            eprintln!("{} lag {} {}: {e}", r.cause, r.lag_order, r.variant);
        }
    }
    emit(results.as_slice(), settings, out)?;
    Ok(if results.iter().all(|r| r.outcome.is_err()) {
        EXIT_NUMERIC
    } else {
        EXIT_OK
    })
}

fn cmd_compare(settings: &mut Settings, out: Option<&Path>) -> Result<i32> {
    let window: usize = settings.parse("window")?;
    let lags: Vec<usize> = settings.parse_list("lags")?;
    let variant: GrangerVariant = settings.parse("variant")?;
    for &lag in &lags {
        WindowSpec::new(window, lag).map_err(as_usage)?;
    }
    let (loaded, effect, causes) = load_input(settings)?;
    let cmp = compare(&loaded.panel, &effect, &causes, window, &lags, variant)?;
    emit(&cmp, settings, out)?;
    Ok(EXIT_OK)
}

fn as_usage(e: Error) -> Error {
    match e {
        Error::Domain(msg) => Error::Usage(msg),
        other => other,
    }
}

fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Usage => EXIT_USAGE,
        ErrorClass::Data => EXIT_DATA,
        ErrorClass::Numeric => EXIT_NUMERIC,
    }
}

/// Executes a parsed command line and returns the process exit status.
pub fn execute(cli: &Cli) -> i32 {
    let result = resolve_settings(cli).and_then(|mut settings| {
        settings.parse::<OutputFormat>("format")?;
        settings.parse::<u64>("seed")?;
        let out = cli.out.as_deref();
        match &cli.command {
            Command::Twtable(_) => cmd_twtable(&settings, out),
            Command::ValidateRmt(_) => cmd_validate(&settings, out),
            Command::Simulate(_) => cmd_simulate(&settings, out),
            Command::Indicator(_) => cmd_indicator(&mut settings, out),
            Command::Granger(_) => cmd_granger(&mut settings, out),
            Command::Compare(_) => cmd_compare(&mut settings, out),
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `args` (program name first) and runs the tool.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            code
        }
    }
}
