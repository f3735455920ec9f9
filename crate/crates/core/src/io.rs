//! Run configuration and report files.
//!
//! Every CSV written here is read back by the matching `read_*` function
//! without loss: floats are printed in their shortest round-trip form.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispatch::{HourlyFlows, ScenarioPolicy, YearSummary};
use crate::economics::{CostBreakdown, Feasibility, FinanceParams};
use crate::model::{DeviceCatalog, Profiles, SizingVector};
use crate::optimizer::{HistoryPoint, PsoConfig};
use crate::profiles::{load_profiles, synthesize, ProfileError, SynthesisSpec};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Default,
    #[default]
    FullScale,
}

impl Preset {
    pub fn spec(self) -> SynthesisSpec {
        match self {
            Preset::Default => SynthesisSpec::default(),
            Preset::FullScale => SynthesisSpec::full_scale(),
        }
    }
}

/// Paths of the five profile files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFiles {
    pub irradiance: PathBuf,
    pub wind: PathBuf,
    pub electric_load: PathBuf,
    pub thermal_load: PathBuf,
    pub hydrogen_demand: PathBuf,
}

impl ProfileFiles {
    pub fn paths(&self) -> [&Path; 5] {
        [
            &self.irradiance,
            &self.wind,
            &self.electric_load,
            &self.thermal_load,
            &self.hydrogen_demand,
        ]
    }
}

/// Where the profiles come from: files when given, otherwise the synthesis
/// spec, otherwise the preset.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSource {
    pub files: Option<ProfileFiles>,
    pub preset: Preset,
    pub synthesis: Option<SynthesisSpec>,
}

impl ProfileSource {
    pub fn synthesis_spec(&self) -> SynthesisSpec {
        self.synthesis.clone().unwrap_or_else(|| self.preset.spec())
    }

    /// Loads or generates the profiles. Relative file paths are taken from `base`.
    pub fn resolve(&self, base: &Path) -> Result<Profiles, ProfileError> {
        match &self.files {
            Some(files) => load_profiles(&files.paths().map(|p| base.join(p))),
            None => synthesize(&self.synthesis_spec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    /// Tank contents at the start of the year, fraction of capacity.
    pub initial_tank_fraction: f64,
    pub catalog: DeviceCatalog,
    pub finance: FinanceParams,
    pub policy: ScenarioPolicy,
    pub pso: PsoConfig,
    pub profiles: ProfileSource,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: PathBuf::from("out"),
            initial_tank_fraction: 0.5,
            catalog: DeviceCatalog::default(),
            finance: FinanceParams::default(),
            policy: ScenarioPolicy::fixed(),
            pso: PsoConfig::default(),
            profiles: ProfileSource::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.initial_tank_fraction) {
            return Err(format!(
                "initial_tank_fraction must be in [0, 1], got {}",
                self.initial_tank_fraction
            ));
        }
        self.catalog.validate().map_err(|e| e.to_string())?;
        self.finance.validate()?;
        self.policy.validate().map_err(|e| e.to_string())?;
        self.pso.validate().map_err(|e| e.to_string())?;
        if let Some(spec) = &self.profiles.synthesis {
            spec.validate().map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self, IoError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| IoError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|message| IoError::Config {
            path: path.to_path_buf(),
            message,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    let mut out = create(path)?;
    out.write_all(text.as_bytes()).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

/// Reads a CSV with a fixed header, returning the data rows.
fn read_table(path: &Path, header: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>, IoError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(file);
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| parse_err(path, line, e.to_string()))?;
        if line == 1 {
            if !record.iter().eq(header.iter().copied()) {
                return Err(parse_err(
                    path,
                    1,
                    format!("expected header {}", header.join(",")),
                ));
            }
            continue;
        }
        if record.len() != header.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} fields, got {}", header.len(), record.len()),
            ));
        }
        rows.push((line, record));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, raw: &str) -> Result<T, IoError> {
    raw.trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("cannot parse {raw:?}")))
}

/// Hourly ledger with hours numbered from 1.
pub fn write_ledger(path: &Path, ledger: &[HourlyFlows]) -> Result<(), IoError> {
    let mut out = create(path)?;
    let mut line = HourlyFlows::FIELDS.join(",");
    line.push('\n');
    for f in ledger {
        write!(line, "{}", f.hour + 1).unwrap();
        for v in f.values() {
            write!(line, ",{v}").unwrap();
        }
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(io_err(path))?;
        line.clear();
    }
    if ledger.is_empty() {
        out.write_all(line.as_bytes()).map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

pub fn read_ledger(path: &Path) -> Result<Vec<HourlyFlows>, IoError> {
    let mut ledger = Vec::new();
    for (line, rec) in read_table(path, &HourlyFlows::FIELDS)? {
        let hour: usize = field(path, line, &rec[0])?;
        if hour == 0 {
            return Err(parse_err(path, line, "hours start at 1"));
        }
        let mut values = [0.0; 27];
        for (v, raw) in values.iter_mut().zip(rec.iter().skip(1)) {
            *v = field(path, line, raw)?;
        }
        ledger.push(HourlyFlows::from_values(hour - 1, &values));
    }
    Ok(ledger)
}

const COSTS_HEADER: [&str; 2] = ["term", "value"];

pub fn write_costs(path: &Path, costs: &CostBreakdown) -> Result<(), IoError> {
    let mut text = String::from("term,value\n");
    let values = costs
        .terms()
        .into_iter()
        .chain(std::iter::once(costs.total));
    for (label, v) in CostBreakdown::LABELS.iter().zip(values) {
        writeln!(text, "{label},{v}").unwrap();
    }
    write_text(path, &text)
}

/// Reads the fifteen terms back; the total is recomputed from them and must
/// match the stored row.
pub fn read_costs(path: &Path) -> Result<CostBreakdown, IoError> {
    let rows = read_table(path, &COSTS_HEADER)?;
    if rows.len() != CostBreakdown::LABELS.len() {
        return Err(parse_err(path, rows.len() + 1, "expected 16 cost rows"));
    }
    let mut values = [0.0; 16];
    for (i, (line, rec)) in rows.iter().enumerate() {
        if &rec[0] != CostBreakdown::LABELS[i] {
            return Err(parse_err(
                path,
                *line,
                format!("expected {}", CostBreakdown::LABELS[i]),
            ));
        }
        values[i] = field(path, *line, &rec[1])?;
    }
    let terms: [f64; 15] = values[..15].try_into().unwrap();
    let costs = CostBreakdown::from_terms(terms);
    if costs.total != values[15] {
        return Err(parse_err(
            path,
            17,
            "NPC does not equal the sum of the terms",
        ));
    }
    Ok(costs)
}

const SIZES_HEADER: [&str; 2] = ["component", "size"];

pub fn write_sizes(path: &Path, sizes: &SizingVector) -> Result<(), IoError> {
    let mut text = String::from("component,size\n");
    for (name, v) in SizingVector::NAMES.iter().zip(sizes.to_array()) {
        writeln!(text, "{name},{v}").unwrap();
    }
    write_text(path, &text)
}

pub fn read_sizes(path: &Path) -> Result<SizingVector, IoError> {
    let rows = read_table(path, &SIZES_HEADER)?;
    let mut x = [f64::NAN; 8];
    for (line, rec) in &rows {
        let Some(i) = SizingVector::NAMES.iter().position(|n| *n == &rec[0]) else {
            return Err(parse_err(
                path,
                *line,
                format!("unknown component {:?}", &rec[0]),
            ));
        };
        let v: f64 = field(path, *line, &rec[1])?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(parse_err(path, *line, "sizes must be finite and >= 0"));
        }
        if i < 2 && v.fract() != 0.0 {
            return Err(parse_err(
                path,
                *line,
                format!("{} must be a whole number", &rec[0]),
            ));
        }
        x[i] = v;
    }
    if let Some(i) = x.iter().position(|v| v.is_nan()) {
        return Err(IoError::Config {
            path: path.to_path_buf(),
            message: format!("missing component {}", SizingVector::NAMES[i]),
        });
    }
    Ok(SizingVector::from_position(&x))
}

const CONVERGENCE_HEADER: [&str; 3] = ["iteration", "best_fitness", "feasible"];

pub fn write_convergence(path: &Path, history: &[HistoryPoint]) -> Result<(), IoError> {
    let mut text = String::from("iteration,best_fitness,feasible\n");
    for h in history {
        writeln!(
            text,
            "{},{},{}",
            h.iteration,
            h.best_fitness,
            u8::from(h.feasible)
        )
        .unwrap();
    }
    write_text(path, &text)
}

pub fn read_convergence(path: &Path) -> Result<Vec<HistoryPoint>, IoError> {
    let mut history = Vec::new();
    for (line, rec) in read_table(path, &CONVERGENCE_HEADER)? {
        let feasible = match &rec[2] {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(path, line, format!("bad flag {other:?}"))),
        };
        history.push(HistoryPoint {
            iteration: field(path, line, &rec[0])?,
            best_fitness: field(path, line, &rec[1])?,
            feasible,
        });
    }
    Ok(history)
}

/// Plain-text verdict of a simulated year.
pub fn summary_text(summary: &YearSummary, feas: &Feasibility, costs: &CostBreakdown) -> String {
    let flag = |ok: bool| if ok { "ok" } else { "violated" };
    let mut t = String::new();
    writeln!(t, "elf_el = {}", feas.elf_el).unwrap();
    writeln!(t, "elf_th = {}", feas.elf_th).unwrap();
    writeln!(t, "tank_initial_kwh = {}", feas.tank_initial).unwrap();
    writeln!(t, "tank_end_kwh = {}", feas.tank_end).unwrap();
    writeln!(t, "elf_el_limit = {}", flag(feas.elf_el_ok())).unwrap();
    writeln!(t, "elf_th_limit = {}", flag(feas.elf_th_ok())).unwrap();
    writeln!(t, "tank_rule = {}", flag(feas.tank_ok())).unwrap();
    writeln!(t, "feasible = {}", feas.is_feasible()).unwrap();
    writeln!(t, "total_npc = {}", costs.total).unwrap();
    writeln!(t, "electric_demand_kwh = {}", summary.electric_demand).unwrap();
    writeln!(t, "shed_interruptible_kwh = {}", summary.shed_interruptible).unwrap();
    writeln!(
        t,
        "shed_uninterruptible_kwh = {}",
        summary.shed_uninterruptible
    )
    .unwrap();
    writeln!(t, "thermal_demand_kwh = {}", summary.thermal_demand).unwrap();
    writeln!(t, "unserved_thermal_kwh = {}", summary.unserved_thermal).unwrap();
    writeln!(t, "hydrogen_demand_kwh = {}", summary.hydrogen_demand).unwrap();
    writeln!(t, "hydrogen_delivered_kwh = {}", summary.hydrogen_delivered).unwrap();
    writeln!(t, "unserved_hydrogen_kwh = {}", summary.unserved_hydrogen).unwrap();
    writeln!(
        t,
        "pending_hydrogen_end_kwh = {}",
        summary.pending_hydrogen_end
    )
    .unwrap();
    writeln!(t, "boiler_heat_kwh = {}", summary.boiler_heat).unwrap();
    writeln!(t, "curtailed_kwh = {}", summary.curtailed).unwrap();
    t
}

pub fn write_summary(
    path: &Path,
    summary: &YearSummary,
    feas: &Feasibility,
    costs: &CostBreakdown,
) -> Result<(), IoError> {
    write_text(path, &summary_text(summary, feas, costs))
}

pub const LEDGER_FILE: &str = "ledger.csv";
pub const COSTS_FILE: &str = "costs.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const SIZES_FILE: &str = "best_sizes.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";

/// Writes the ledger, cost table and summary of one simulated year into `dir`.
pub fn write_year_reports(
    dir: &Path,
    ledger: &[HourlyFlows],
    summary: &YearSummary,
    feas: &Feasibility,
    costs: &CostBreakdown,
) -> Result<(), IoError> {
    write_ledger(&dir.join(LEDGER_FILE), ledger)?;
    write_costs(&dir.join(COSTS_FILE), costs)?;
    write_summary(&dir.join(SUMMARY_FILE), summary, feas, costs)
}
