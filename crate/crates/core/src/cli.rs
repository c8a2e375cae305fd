//! Command-line front end.
//!
//! Every command writes sorted-key JSON (or CSV for `sweep`) with floats cut
//! to 12 significant digits, so identical invocations give identical bytes.
//! Exit codes: 0 success, 1 usage, 2 validation, 3 resource cap.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::bounds::{b_mm22, min_relaxation, BoundFamily, RelaxationBudget};
use crate::error::{Error, Result};
use crate::info::{c_commun, c_meas_dep, c_random, c_sig, capacity_report, channel_capacity, CapacityConfig, CommModel};
use crate::lp::{builtin, relaxed_bound_lp, BellFunctional, LPConfig};
use crate::measures::{free_will_fraction, measure_report, prior_distance};
use crate::model::{chsh_value, correlator, observed_correlations, CorrelationTable, NPartyModel};
use crate::report::{render_json, Cell, CsvTable};
use crate::scalar::{Rational, Scalar};
use crate::transforms::{check_commutation, to_deterministic};
use crate::zoo;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

pub const CONFIG_ENV: &str = "BELLKIT_CONFIG";

/// Defaults read from a TOML file; command-line flags take precedence.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub jobs: Option<usize>,
    pub branch_cap: Option<u64>,
    pub lp_tolerance: Option<f64>,
    pub capacity_gap: Option<f64>,
    pub capacity_max_iterations: Option<usize>,
    pub hall_resolution_deg: Option<f64>,
}

impl Config {
    pub fn load(path: &Path) -> std::result::Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }

    fn capacity(&self) -> CapacityConfig {
        let d = CapacityConfig::default();
        CapacityConfig {
            gap: self.capacity_gap.unwrap_or(d.gap),
            max_iterations: self.capacity_max_iterations.unwrap_or(d.max_iterations),
            ..d
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bellkit", version, about = "Relaxed hidden-variable models: measures, capacities and Bell bounds")]
pub struct Cli {
    /// TOML file with default seeds, caps and tolerances.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a model file holds valid probability tables.
    Validate(ModelArgs),
    /// Relaxation measures and information capacities of a model.
    Measures(ModelArgs),
    /// Information capacities of a model.
    Capacities(ModelArgs),
    /// Evaluate a closed-form relaxed bound, or invert the CHSH bound.
    Bound(BoundArgs),
    /// Tabulate a bound family over a parameter grid as CSV.
    Sweep(SweepArgs),
    /// Relaxed bound of a Bell functional by branch enumeration.
    Lp(LpArgs),
    /// Build or verify a named model.
    Zoo(ZooArgs),
    /// Convert an outcome-independent model into a deterministic one.
    Convert(ConvertArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Read probabilities as exact rationals.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// chsh, chsh-nosig, outcome, i3322 or imm22.
    pub family: String,
    #[arg(long = "I", default_value = "0")]
    pub i: String,
    #[arg(long = "S", default_value = "0")]
    pub s: String,
    #[arg(long = "M", default_value = "0")]
    pub m: String,
    #[arg(long = "O", default_value = "0")]
    pub o: String,
    /// Number of settings per party for imm22.
    #[arg(long = "settings", default_value_t = 4)]
    pub settings: u32,
    /// Report the smallest relaxations allowing CHSH violation V.
    #[arg(long, value_name = "V")]
    pub invert: Option<f64>,
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub family: String,
    /// Grid as `v`, `a,b,c` or `start:stop:count`.
    #[arg(long = "I", default_value = "0")]
    pub i: String,
    #[arg(long = "S", default_value = "0")]
    pub s: String,
    #[arg(long = "M", default_value = "0")]
    pub m: String,
    #[arg(long = "O", default_value = "0")]
    pub o: String,
    #[arg(long = "settings", default_value_t = 4)]
    pub settings: u32,
    /// Violation marked by the feasible_for_V column (bound ≥ 2 + V).
    #[arg(long = "V")]
    pub v: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LpArgs {
    /// Functional file, or a built-in name such as chsh or i3322.
    pub functional: String,
    #[arg(long = "I", default_value_t = 0.0)]
    pub i: f64,
    #[arg(long = "S", default_value_t = 0.0)]
    pub s: f64,
    /// Where to write the witness model; inlined in the output otherwise.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Largest number of branches to enumerate.
    #[arg(long)]
    pub cap: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ZooArgs {
    /// toner-bacon, hall, pawlowski, brans, mermin, hardy or conway-kochen.
    pub name: String,
    /// Where to write the model; inlined in the output otherwise.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<u64>,
    /// Number of setting pairs for sphere models.
    #[arg(long, default_value_t = 10)]
    pub pairs: usize,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub a: u8,
    #[arg(long, default_value_t = 0)]
    pub b: u8,
    /// Twelve comma-separated ±1 values a1,b1,c1,...,a4,b4,c4.
    #[arg(long, allow_hyphen_values = true)]
    pub signs: Option<String>,
    /// Also compute entropies, capacities and the prior distance.
    #[arg(long)]
    pub capacities: bool,
    /// Grid resolution in degrees for the prior-distance search.
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Model whose observed correlations the brans model reproduces.
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub exact: bool,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::ResourceCap(_) => EXIT_RESOURCE,
            Error::OutOfRange { .. } | Error::Unknown { .. } => EXIT_USAGE,
            _ => EXIT_VALIDATION,
        };
        let mut message = e.to_string();
        if code == EXIT_RESOURCE {
            message.push_str("\nhint: raise --cap (or branch_cap in the config) or use a smaller functional");
        }
        Failure { code, message }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CmdResult = std::result::Result<String, Failure>;

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let config_path = cli.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut config = match config_path {
        Some(p) => match Config::load(&p) {
            Ok(c) => c,
            Err(m) => {
                let _ = writeln!(err, "error: {m}");
                return EXIT_USAGE;
            }
        },
        None => Config::default(),
    };
    if cli.jobs.is_some() {
        config.jobs = cli.jobs;
    }
    if let Some(j) = config.jobs {
        // Fails only if a pool already exists, e.g. on a second call in-process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    match dispatch(&cli.command, &config) {
        Ok(text) => {
            let _ = write!(out, "{text}");
            EXIT_OK
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: &Command, config: &Config) -> CmdResult {
    match cmd {
        Command::Validate(a) => cmd_validate(a),
        Command::Measures(a) => cmd_measures(a, config, true),
        Command::Capacities(a) => cmd_measures(a, config, false),
        Command::Bound(a) => cmd_bound(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Lp(a) => cmd_lp(a, config),
        Command::Zoo(a) => cmd_zoo(a, config),
        Command::Convert(a) => cmd_convert(a),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn write_text(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

/// Optional one-way communication section of a model document:
/// `{"sender": 1 or 2, "messages": [...], "law": [setting][lambda][message]}`,
/// or with an extra sender-outcome level before the message.
fn comm_from_json<T: Scalar>(doc: &Value, model: &NPartyModel<T>) -> Result<Option<CommModel>> {
    let Some(c) = doc.get("communication") else {
        return Ok(None);
    };
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Law {
        Outcome(Vec<Vec<Vec<Vec<f64>>>>),
        Setting(Vec<Vec<Vec<f64>>>),
    }
    #[derive(Deserialize)]
    struct Section {
        sender: usize,
        messages: Vec<String>,
        law: Law,
    }
    let s: Section = serde_json::from_value(c.clone())?;
    if s.sender == 0 || s.sender > 2 {
        return Err(Error::Unknown {
            kind: "sender party",
            name: s.sender.to_string(),
        });
    }
    let comm = match s.law {
        Law::Outcome(l) => CommModel::new(model, s.sender - 1, s.messages, l)?,
        Law::Setting(l) => CommModel::from_setting_law(model, s.sender - 1, s.messages, l)?,
    };
    Ok(Some(comm))
}

fn comm_to_json(comm: &CommModel) -> Value {
    json!({
        "sender": comm.sender() + 1,
        "messages": comm.messages(),
        "law": comm.law(),
    })
}

fn model_document<T: Scalar>(model: &NPartyModel<T>, comm: Option<&CommModel>) -> Value {
    let mut doc = model.to_json_value();
    if let Some(c) = comm {
        doc["communication"] = comm_to_json(c);
    }
    doc
}

/// Writes the model to `out` and returns its path, or returns it inline.
fn emit_model(doc: Value, out: Option<&PathBuf>) -> std::result::Result<Value, Failure> {
    match out {
        Some(p) => {
            write_text(p, &render_json(&doc))?;
            Ok(json!(p.display().to_string()))
        }
        None => Ok(doc),
    }
}

fn cmd_validate(a: &ModelArgs) -> CmdResult {
    let doc = read_json(&a.model)?;
    let report = if a.exact {
        let m = NPartyModel::<Rational>::from_json_value(&doc)?;
        m.validate(&Rational::default_tolerance())
    } else {
        let m = NPartyModel::<f64>::from_json_value(&doc)?;
        m.validate(&f64::default_tolerance())
    };
    let text = render_json(&json!({
        "valid": report.is_valid(),
        "tolerance": report.tolerance,
        "violations": report.violations,
    }));
    if report.is_valid() {
        Ok(text)
    } else {
        Err(Failure {
            code: EXIT_VALIDATION,
            message: format!("{}\n{text}", report.summary()),
        })
    }
}

fn cmd_measures(a: &ModelArgs, config: &Config, with_measures: bool) -> CmdResult {
    let doc = read_json(&a.model)?;
    let model = NPartyModel::<f64>::from_json_value(&doc)?;
    model.ensure_valid()?;
    let comm = comm_from_json(&doc, &model)?;
    let caps = capacity_report(&model, comm.as_ref(), &config.capacity())?;
    if !with_measures {
        return Ok(render_json(&caps.to_json_value()));
    }
    let measures = if a.exact {
        measure_report(&NPartyModel::<Rational>::from_json_value(&doc)?)?.to_json_value()
    } else {
        measure_report(&model)?.to_json_value()
    };
    Ok(render_json(&json!({"measures": measures, "capacities": caps.to_json_value()})))
}

fn budget<T: Scalar>(i: &str, s: &str, m: &str, o: &str) -> Result<RelaxationBudget<T>> {
    RelaxationBudget::new(T::parse_str(i)?, T::parse_str(s)?, T::parse_str(m)?)?.with_outcome(T::parse_str(o)?)
}

fn cmd_bound(a: &BoundArgs) -> CmdResult {
    if let Some(v) = a.invert {
        if a.family != "chsh" {
            return Err(usage("--invert is available for the chsh family only"));
        }
        let r = min_relaxation(v)?;
        return Ok(render_json(&serde_json::to_value(r).expect("report serializes")));
    }
    let family = BoundFamily::parse(&a.family, Some(a.settings))?;
    let conjectured = match family {
        BoundFamily::Imm22(m) => b_mm22(m, &0.0, &0.0)?.conjectured,
        _ => false,
    };
    let mut text = if a.exact {
        let b = budget::<Rational>(&a.i, &a.s, &a.m, &a.o)?;
        let v = family.evaluate(&b)?;
        format!("{v}\n")
    } else {
        let b = budget::<f64>(&a.i, &a.s, &a.m, &a.o)?;
        format!("{}\n", crate::report::format_g(family.evaluate(&b)?))
    };
    if conjectured {
        text.push_str("# conjectured: tightness is proven for up to three settings only\n");
    }
    Ok(text)
}

/// `v`, `a,b,c` or `start:stop:count` (count ≥ 1, endpoints included).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, count] => {
            let (start, stop) = (f64::parse_str(start)?, f64::parse_str(stop)?);
            let n: usize = count.trim().parse().map_err(|_| Error::Parse { input: count.to_string() })?;
            if n == 0 {
                return Err(Error::out_of_range("grid", "point count must be positive"));
            }
            if n == 1 {
                vec![start]
            } else {
                (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect()
            }
        }
        [list] => list.split(',').map(f64::parse_str).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::Parse { input: spec.to_string() }),
    };
    if grid.is_empty() || grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::out_of_range("grid", format!("`{spec}` has no finite points")));
    }
    Ok(grid)
}

/// Parameter grids for one bound family.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub family: BoundFamily,
    pub i: Vec<f64>,
    pub s: Vec<f64>,
    pub m: Vec<f64>,
    pub o: Vec<f64>,
    pub v: Option<f64>,
}

impl SweepSpec {
    /// Rows (I, S, M, O, bound, feasible_for_V), I outermost.
    pub fn table(&self) -> Result<CsvTable> {
        let mut t = CsvTable::new(&["I", "S", "M", "O", "bound", "feasible_for_V"]);
        for &i in &self.i {
            for &s in &self.s {
                for &m in &self.m {
                    for &o in &self.o {
                        let b = RelaxationBudget::new(i, s, m)?.with_outcome(o)?;
                        let bound = self.family.evaluate(&b)?;
                        let feasible = match self.v {
                            Some(v) => Cell::Bool(bound + 1e-12 >= 2.0 + v),
                            None => Cell::Text(String::new()),
                        };
                        t.push(vec![
                            Cell::Float(i),
                            Cell::Float(s),
                            Cell::Float(m),
                            Cell::Float(o),
                            Cell::Float(bound),
                            feasible,
                        ]);
                    }
                }
            }
        }
        Ok(t)
    }
}

fn cmd_sweep(a: &SweepArgs) -> CmdResult {
    let spec = SweepSpec {
        family: BoundFamily::parse(&a.family, Some(a.settings))?,
        i: parse_grid(&a.i)?,
        s: parse_grid(&a.s)?,
        m: parse_grid(&a.m)?,
        o: parse_grid(&a.o)?,
        v: a.v,
    };
    let csv = spec.table()?.render();
    match &a.out {
        Some(p) => {
            write_text(p, &csv)?;
            Ok(String::new())
        }
        None => Ok(csv),
    }
}

fn load_functional(name: &str) -> Result<BellFunctional> {
    let path = Path::new(name);
    if path.exists() {
        return BellFunctional::load(path);
    }
    builtin(name).ok_or_else(|| Error::Unknown {
        kind: "functional",
        name: name.to_string(),
    })
}

fn cmd_lp(a: &LpArgs, config: &Config) -> CmdResult {
    let func = load_functional(&a.functional)?;
    let d = LPConfig::default();
    let cfg = LPConfig {
        branch_cap: a.cap.or(config.branch_cap).unwrap_or(d.branch_cap),
        tolerance: config.lp_tolerance.unwrap_or(d.tolerance),
        jobs: config.jobs,
        ..d
    };
    let r = relaxed_bound_lp(&func, a.i, a.s, &cfg)?;
    let mut v = r.to_json_value();
    v["functional"] = json!(func.name.clone().unwrap_or_else(|| a.functional.clone()));
    v["witness"] = emit_model(r.witness.to_json_value(), a.out.as_ref())?;
    Ok(render_json(&v))
}

fn comparison(value: f64, reference: f64) -> Value {
    json!({"value": value, "reference": reference, "deviation": value - reference})
}

fn param<T: Scalar>(raw: &Option<String>, default: T) -> Result<T> {
    raw.as_deref().map_or(Ok(default), T::parse_str)
}

fn cmd_zoo(a: &ZooArgs, config: &Config) -> CmdResult {
    let cap = config.capacity();
    let out = a.out.as_ref();
    let summary = match a.name.as_str() {
        "pawlowski" => zoo_pawlowski(a, &cap)?,
        "brans" => {
            let target: CorrelationTable<f64> = match &a.model {
                Some(p) => observed_correlations(&NPartyModel::<f64>::load(p)?)?,
                None => observed_correlations(&zoo::pawlowski_model(&(std::f64::consts::SQRT_2 - 1.0))?.0)?,
            };
            let m = zoo::brans_model(&target)?;
            let reproduced = observed_correlations(&m)?.table == target.table;
            let r = measure_report(&m)?;
            json!({
                "name": "brans",
                "reproduces_target": reproduced,
                "measures": r.to_json_value(),
                "model": emit_model(m.to_json_value(), out)?,
            })
        }
        "mermin" => {
            let signs = parse_signs(a.signs.as_deref())?;
            let exact: NPartyModel<Rational> = zoo::mermin_model(&signs)?;
            let t = observed_correlations(&exact)?;
            let corr = |c: [usize; 3]| correlator(&t, &c).map(|v| v.to_f64_lossy());
            let m = crate::measures::measurement_dependence(&exact)?;
            let c = c_meas_dep(&exact, &cap)?;
            json!({
                "name": "mermin",
                "correlators": {"ABC'": corr([0, 0, 1])?, "AB'C": corr([0, 1, 0])?, "A'BC": corr([1, 0, 0])?, "A'B'C'": corr([1, 1, 1])?},
                "M": m.to_json(),
                "F": free_will_fraction(&m)?.to_json(),
                "C_meas_dep": comparison(c.value, (4.0f64 / 3.0).log2()),
                "model": emit_model(exact.to_json_value(), out)?,
            })
        }
        "hardy" => zoo_hardy(a, &cap, out)?,
        "conway-kochen" => {
            let exact: Vec<Vec<Rational>> = zoo::conway_kochen_prior();
            let m = prior_distance(&exact);
            let rows: Vec<Vec<f64>> = exact.iter().map(|r| r.iter().map(Scalar::to_f64_lossy).collect()).collect();
            let c = channel_capacity(&rows, &cap);
            let bound = zoo::conway_kochen_capacity_bound();
            json!({
                "name": "conway-kochen",
                "M": m.to_json(),
                "F": free_will_fraction(&m)?.to_json(),
                "C_meas_dep": c.value,
                "capacity_bound": bound,
                "within_bound": c.value <= bound + cap.gap,
                "prior": emit_model(json!({"directions": zoo::CONWAY_KOCHEN_DIRECTIONS, "prior": rows}), out)?,
            })
        }
        "hall" => zoo_hall(a, config, out)?,
        "toner-bacon" => zoo_toner_bacon(a, config)?,
        other => {
            return Err(Error::Unknown {
                kind: "zoo model",
                name: other.to_string(),
            }
            .into())
        }
    };
    Ok(render_json(&summary))
}

fn parse_signs(raw: Option<&str>) -> Result<[[i8; 3]; 4]> {
    let mut signs = [[1i8; 3]; 4];
    let Some(raw) = raw else { return Ok(signs) };
    let vals: Vec<i8> = raw
        .split(',')
        .map(|t| match t.trim() {
            "1" | "+1" | "+" => Ok(1),
            "-1" | "-" => Ok(-1),
            other => Err(Error::Parse { input: other.to_string() }),
        })
        .collect::<Result<_>>()?;
    if vals.len() != 12 {
        return Err(Error::out_of_range("signs", format!("expected 12 values, got {}", vals.len())));
    }
    for (k, v) in vals.into_iter().enumerate() {
        signs[k / 3][k % 3] = v;
    }
    Ok(signs)
}

fn zoo_pawlowski(a: &ZooArgs, cap: &CapacityConfig) -> std::result::Result<Value, Failure> {
    let out = a.out.as_ref();
    let (doc, table, p) = if a.exact {
        let p: Rational = param(&a.p, Rational::from_f64_lossy(std::f64::consts::SQRT_2 - 1.0))?;
        let (m, comm) = zoo::pawlowski_model(&p)?;
        let measures = measure_report(&m)?.to_json_value();
        (model_document(&m, Some(&comm)), measures, p.to_f64_lossy())
    } else {
        let p: f64 = param(&a.p, std::f64::consts::SQRT_2 - 1.0)?;
        let (m, comm) = zoo::pawlowski_model(&p)?;
        (model_document(&m, Some(&comm)), measure_report(&m)?.to_json_value(), p)
    };
    let (m, comm) = zoo::pawlowski_model(&p)?;
    let sig = c_sig(&m, cap)?;
    let commun = c_commun(&comm, None, cap)?;
    let chsh = chsh_value(&observed_correlations(&m)?)?;
    Ok(json!({
        "name": "pawlowski",
        "p": p,
        "measures": table,
        "CHSH": comparison(chsh, 2.0 + 2.0 * p),
        "C_random": comparison(c_random(&m)?, crate::info::binary_entropy(p)?),
        "C_sig": sig.value,
        "C_sig_weight": sig.golden_weight,
        "C_commun": commun.c_commun,
        "message_information_at_half": comm.information(0, &[0.5, 0.5]),
        "model": emit_model(doc, out)?,
    }))
}

fn zoo_hardy(a: &ZooArgs, cap: &CapacityConfig, out: Option<&PathBuf>) -> std::result::Result<Value, Failure> {
    let gm = zoo::hardy_gamma_max();
    let (doc, gamma, m_json, pdd, warning) = if a.exact {
        let g: Rational = param(&a.gamma, Rational::from_f64_lossy(gm))?;
        let m = zoo::hardy_model(&g, a.a, a.b)?;
        let t = observed_correlations(&m)?;
        let md = crate::measures::measurement_dependence(&m)?;
        let w = m.metadata().and_then(|v| v.get("warning")).cloned();
        (m.to_json_value(), g.to_f64_lossy(), md.to_json(), t.table[3][3].to_json(), w)
    } else {
        let g: f64 = param(&a.gamma, gm)?;
        let m = zoo::hardy_model(&g, a.a, a.b)?;
        let t = observed_correlations(&m)?;
        let md = crate::measures::measurement_dependence(&m)?;
        let w = m.metadata().and_then(|v| v.get("warning")).cloned();
        (m.to_json_value(), g, json!(md), json!(t.table[3][3]), w)
    };
    let m = zoo::hardy_model(&gamma, a.a, a.b)?;
    let t = observed_correlations(&m)?;
    let c = c_meas_dep(&m, cap)?;
    let bound = zoo::hardy_capacity_bound(gamma);
    let mut v = json!({
        "name": "hardy",
        "gamma": gamma,
        "M": m_json,
        "p_dd_11": pdd,
        "constraints": {
            "p_uu_11": t.table[0][3],
            "p_du_10": t.table[2][2],
            "p_ud_01": t.table[1][1],
        },
        "C_meas_dep": c.value,
        "capacity_bound": bound,
        "within_bound": c.value <= bound + cap.gap,
        "model": emit_model(doc, out)?,
    });
    if let Some(w) = warning {
        v["warning"] = w;
    }
    Ok(v)
}

fn zoo_hall(a: &ZooArgs, config: &Config, out: Option<&PathBuf>) -> std::result::Result<Value, Failure> {
    let q = zoo::HallQuadrature::default();
    let mut worst: f64 = 0.0;
    let mut worst_grid: f64 = 0.0;
    let mut normalization: f64 = 0.0;
    for (x, y) in zoo::spread_setting_pairs(a.pairs.max(1)) {
        let c = zoo::hall_verify_singlet(&x, &y, &q);
        worst = worst.max(c.max_deviation);
        worst_grid = worst_grid.max(c.grid_deviation);
        normalization = normalization.max((c.normalization - 1.0).abs());
    }
    let pi = std::f64::consts::PI;
    let restriction = zoo::hall_discretized_model(&[0.0, -pi / 2.0], &[3.0 * pi / 4.0, -3.0 * pi / 4.0])?;
    let mut v = json!({
        "name": "hall",
        "singlet": {
            "pairs": a.pairs.max(1),
            "max_deviation": worst,
            "grid_max_deviation": worst_grid,
            "normalization_error": normalization,
        },
        "chsh_restriction": {
            "CHSH": chsh_value(&observed_correlations(&restriction)?)?,
            "model": emit_model(restriction.to_json_value(), out)?,
        },
    });
    if a.capacities {
        let res = a.resolution.or(config.hall_resolution_deg).unwrap_or(0.5);
        let c = zoo::hall_capacities(res)?;
        v["capacities"] = json!({
            "H_max": comparison(c.h_max, (4.0 * pi).log2()),
            "H_min": c.h_min,
            "H_min_at": c.h_min_at,
            "C_meas_dep": comparison(c.c_meas_dep, 1.0 / 15.0),
            "I_uniform": comparison(c.i_uniform, 1.0 / 36.0),
            "I_CHSH": comparison(c.i_chsh, 1.0 / 22.0),
            "M": comparison(c.m.value, 2.0 * (2f64.sqrt() - 1.0) / 3.0),
            "M_angles": c.m.angles,
            "M_resolution_deg": c.m.resolution_deg,
        });
    }
    Ok(v)
}

fn zoo_toner_bacon(a: &ZooArgs, config: &Config) -> std::result::Result<Value, Failure> {
    let spec = zoo::TonerBaconSpec {
        seed: a.seed.or(config.seed).unwrap_or(7),
        samples: a.samples.or(config.samples).unwrap_or(1_000_000),
    };
    let mut runs = Vec::new();
    let mut max_sigma: f64 = 0.0;
    for (x, y) in zoo::spread_setting_pairs(a.pairs.max(1)) {
        let r = zoo::toner_bacon_run(&x, &y, &spec)?;
        max_sigma = max_sigma.max(r.max_sigma);
        runs.push(json!({
            "x": x.vector(),
            "y": y.vector(),
            "estimates": r.estimates,
            "target": r.target,
            "max_sigma": r.max_sigma,
            "message_plus_fraction": r.message_plus_fraction,
            "mean_message_entropy": r.mean_message_entropy,
            "message_entropy_std_error": r.message_entropy_std_error,
        }));
    }
    let h = runs[0]["mean_message_entropy"].as_f64().unwrap_or(f64::NAN);
    Ok(json!({
        "name": "toner-bacon",
        "seed": spec.seed,
        "samples": spec.samples,
        "max_sigma": max_sigma,
        "within_4_sigma": max_sigma < 4.0,
        "mean_message_entropy": comparison(h, 0.85),
        "runs": runs,
    }))
}

fn convert_with<T: Scalar>(model: &NPartyModel<T>, out: Option<&PathBuf>) -> std::result::Result<Value, Failure> {
    let det = to_deterministic(model)?;
    let reproduced = {
        let (a, b) = (observed_correlations(model)?, observed_correlations(&det)?);
        let tol = T::default_tolerance();
        a.table
            .iter()
            .flatten()
            .zip(b.table.iter().flatten())
            .all(|(p, q)| (p.clone() - q.clone()).abs() <= tol)
    };
    let r = check_commutation(model, &det)?;
    Ok(json!({
        "lambdas": det.num_lambdas(),
        "reproduces_correlations": reproduced,
        "I": crate::measures::indeterminism(&det)?.to_json(),
        "commutation": r.to_json_value(),
        "commutation_holds": r.holds(),
        "model": emit_model(det.to_json_value(), out)?,
    }))
}

fn cmd_convert(a: &ConvertArgs) -> CmdResult {
    let doc = read_json(&a.model)?;
    let v = if a.exact {
        convert_with(&NPartyModel::<Rational>::from_json_value(&doc)?, a.out.as_ref())?
    } else {
        convert_with(&NPartyModel::<f64>::from_json_value(&doc)?, a.out.as_ref())?
    };
    Ok(render_json(&v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("bellkit").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.2").unwrap(), vec![0.2]);
        assert_eq!(parse_grid("0,1/4").unwrap(), vec![0.0, 0.25]);
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a").is_err());
    }

    #[test]
    fn bound_examples() {
        assert_eq!(call(&["bound", "chsh"]).1, "2\n");
        let (code, out, _) = call(&["bound", "chsh", "--M", "0.276"]);
        assert_eq!(code, 0);
        assert!((out.trim().parse::<f64>().unwrap() - 2.828).abs() < 1e-3);
        assert_eq!(call(&["bound", "i3322", "--I", "1/8", "--exact"]).1, "5\n");
        assert_eq!(call(&["bound", "nope"]).0, EXIT_USAGE);
        assert_eq!(call(&["bound", "chsh", "--I", "0.7"]).0, EXIT_USAGE);
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn signs_parse() {
        assert_eq!(parse_signs(None).unwrap(), [[1; 3]; 4]);
        let s = parse_signs(Some("-1,1,1,1,1,1,1,1,1,1,1,-1")).unwrap();
        assert_eq!(s[0][0], -1);
        assert_eq!(s[3][2], -1);
        assert!(parse_signs(Some("1,1")).is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(toml::from_str::<Config>("seed = 3\nbranch_cap = 100").is_ok());
        assert!(toml::from_str::<Config>("colour = 1").is_err());
    }
}
