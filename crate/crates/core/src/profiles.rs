//! Annual input profiles: CSV ingestion and seeded synthetic generators.
//!
//! Profile files hold one series each. The first line is `hour,value,<unit>`
//! where `<unit>` is the tag of [`Unit`]; then 8760 rows `hour,value` with
//! hours numbered 1 to 8760.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, Weibull};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{HourlySeries, Profiles, SeriesError, Unit, HOURS_PER_YEAR};

const DAYS: usize = 365;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: header unit {found:?} where {expected} was expected")]
    UnitMismatch {
        path: PathBuf,
        expected: &'static str,
        found: String,
    },
    #[error("{path}: {found} data rows, expected {HOURS_PER_YEAR}")]
    WrongLength { path: PathBuf, found: usize },
    #[error("{path}: {source}")]
    Series {
        path: PathBuf,
        #[source]
        source: SeriesError,
    },
    #[error("invalid synthesis spec: {0}")]
    Spec(String),
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> ProfileError {
    ProfileError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads one profile file and checks that its unit is `expected`.
pub fn read_series(path: &Path, expected: Unit) -> Result<HourlySeries, ProfileError> {
    let file = File::open(path).map_err(|source| ProfileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut values = Vec::with_capacity(HOURS_PER_YEAR);
    let mut saw_header = false;
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| parse_err(path, line, e.to_string()))?;
        if !saw_header {
            if record.len() != 3 || &record[0] != "hour" || &record[1] != "value" {
                return Err(parse_err(path, line, "expected header `hour,value,<unit>`"));
            }
            if Unit::from_tag(&record[2]) != Some(expected) {
                return Err(ProfileError::UnitMismatch {
                    path: path.to_path_buf(),
                    expected: expected.tag(),
                    found: record[2].to_string(),
                });
            }
            saw_header = true;
            continue;
        }
        if record.len() != 2 {
            return Err(parse_err(
                path,
                line,
                format!("expected 2 fields, got {}", record.len()),
            ));
        }
        let hour: usize = record[0]
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad hour {:?}", &record[0])))?;
        if hour != values.len() + 1 {
            return Err(parse_err(
                path,
                line,
                format!("hour {hour} out of sequence, expected {}", values.len() + 1),
            ));
        }
        let value: f64 = record[1]
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad value {:?}", &record[1])))?;
        values.push(value);
    }
    if !saw_header {
        return Err(parse_err(path, 1, "empty file"));
    }
    if values.len() != HOURS_PER_YEAR {
        return Err(ProfileError::WrongLength {
            path: path.to_path_buf(),
            found: values.len(),
        });
    }
    HourlySeries::new(expected, values).map_err(|source| ProfileError::Series {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads the five profiles in the order irradiance, wind, electric load,
/// thermal load, hydrogen demand.
pub fn load_profiles<P: AsRef<Path>>(paths: &[P; 5]) -> Result<Profiles, ProfileError> {
    let mut slots = Vec::with_capacity(5);
    for (path, unit) in paths.iter().zip(Profiles::UNITS) {
        slots.push(read_series(path.as_ref(), unit)?);
    }
    let series: [HourlySeries; 5] = slots.try_into().expect("five slots");
    Ok(Profiles::new(series).expect("units checked on read"))
}

pub fn write_series(path: &Path, series: &HourlySeries) -> Result<(), ProfileError> {
    let io = |source| ProfileError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "hour,value,{}", series.unit().tag()).map_err(io)?;
    for (i, v) in series.values().iter().enumerate() {
        writeln!(out, "{},{}", i + 1, v).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// File names used by [`write_profiles`], in profile order.
pub const FILE_NAMES: [&str; 5] = [
    "irradiance.csv",
    "wind.csv",
    "electric_load.csv",
    "thermal_load.csv",
    "hydrogen_demand.csv",
];

/// Writes the five profiles into `dir` and returns their paths.
pub fn write_profiles(dir: &Path, profiles: &Profiles) -> Result<[PathBuf; 5], ProfileError> {
    std::fs::create_dir_all(dir).map_err(|source| ProfileError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let paths = FILE_NAMES.map(|name| dir.join(name));
    for (path, series) in paths.iter().zip(profiles.slots()) {
        write_series(path, series)?;
    }
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IrradianceSpec {
    /// Clear-sky noon peak on the longest day, W/m².
    pub peak: f64,
    /// Noon peak on the shortest day relative to `peak`.
    pub winter_peak_ratio: f64,
    /// Day length in hours on the longest and shortest day.
    pub summer_day_hours: f64,
    pub winter_day_hours: f64,
    /// Daily clearness is drawn from `[1 - cloudiness, 1]`.
    pub cloudiness: f64,
    /// Standard deviation of the hourly multiplicative noise.
    pub hourly_noise: f64,
}

impl Default for IrradianceSpec {
    fn default() -> Self {
        IrradianceSpec {
            peak: 1000.0,
            winter_peak_ratio: 0.55,
            summer_day_hours: 15.0,
            winter_day_hours: 9.0,
            cloudiness: 0.6,
            hourly_noise: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindSpec {
    pub weibull_shape: f64,
    /// m/s.
    pub weibull_scale: f64,
    /// m/s; hourly speeds are clamped to `[0, max_speed]`.
    pub max_speed: f64,
}

impl Default for WindSpec {
    fn default() -> Self {
        WindSpec {
            weibull_shape: 2.0,
            weibull_scale: 7.0,
            max_speed: 40.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadSpec {
    /// kWh per year; the generated series is scaled to this total.
    pub annual_energy: f64,
    /// Hour-of-day and relative height of the morning and evening peaks.
    pub morning_peak_hour: f64,
    pub morning_peak: f64,
    pub evening_peak_hour: f64,
    pub evening_peak: f64,
    /// Extra demand at midwinter relative to midsummer.
    pub winter_boost: f64,
    /// Share of the yearly swing that never goes away in summer.
    pub summer_floor: f64,
    pub hourly_noise: f64,
}

impl LoadSpec {
    fn electric(annual_energy: f64) -> Self {
        LoadSpec {
            annual_energy,
            morning_peak_hour: 8.0,
            morning_peak: 0.35,
            evening_peak_hour: 19.0,
            evening_peak: 0.6,
            winter_boost: 0.15,
            summer_floor: 1.0,
            hourly_noise: 0.05,
        }
    }

    fn thermal(annual_energy: f64) -> Self {
        LoadSpec {
            annual_energy,
            morning_peak_hour: 7.0,
            morning_peak: 0.5,
            evening_peak_hour: 20.0,
            evening_peak: 0.6,
            winter_boost: 3.0,
            summer_floor: 0.25,
            hourly_noise: 0.05,
        }
    }
}

impl Default for LoadSpec {
    fn default() -> Self {
        LoadSpec::electric(219_000.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FcevSpec {
    pub fleet_size: u32,
    pub fills_per_week: u32,
    /// kg per refill.
    pub kg_per_fill: f64,
    /// kWh per kg.
    pub hydrogen_hhv: f64,
    /// Relative arrival likelihood for each hour of day.
    pub arrival_weights: [f64; 24],
}

/// Daytime-heavy arrivals with the busiest hours in the late afternoon.
pub const DAYTIME_ARRIVALS: [f64; 24] = [
    0.1, 0.1, 0.1, 0.1, 0.1, 0.2, 0.5, 1.5, 1.5, 1.2, 1.0, 1.0, 1.2, 1.2, 1.0, 1.0, 1.5, 2.0, 2.0,
    1.5, 1.0, 0.5, 0.3, 0.2,
];

impl Default for FcevSpec {
    fn default() -> Self {
        FcevSpec {
            fleet_size: 150,
            fills_per_week: 2,
            kg_per_fill: 5.0,
            hydrogen_hhv: 39.7,
            arrival_weights: DAYTIME_ARRIVALS,
        }
    }
}

impl FcevSpec {
    /// kWh of hydrogen demanded over 52 weeks.
    pub fn annual_demand(&self) -> f64 {
        self.fleet_size as f64
            * self.fills_per_week as f64
            * 52.0
            * self.kg_per_fill
            * self.hydrogen_hhv
    }
}

/// Parameters of [`synthesize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisSpec {
    pub rng_seed: u64,
    pub irradiance: IrradianceSpec,
    pub wind: WindSpec,
    pub electric_load: LoadSpec,
    pub thermal_load: LoadSpec,
    pub fcev: FcevSpec,
}

impl Default for SynthesisSpec {
    fn default() -> Self {
        SynthesisSpec {
            rng_seed: 1,
            irradiance: IrradianceSpec::default(),
            wind: WindSpec::default(),
            electric_load: LoadSpec::electric(219_000.0),
            thermal_load: LoadSpec::thermal(175_200.0),
            fcev: FcevSpec::default(),
        }
    }
}

impl SynthesisSpec {
    /// District-scale demand next to the full 150-vehicle fleet. The
    /// magnitudes are an estimate, not measured data; the electric load is
    /// kept low enough that the reliability limits stay reachable while the
    /// station draws hydrogen from the same tank.
    pub fn full_scale() -> Self {
        SynthesisSpec {
            electric_load: LoadSpec::electric(300_000.0),
            thermal_load: LoadSpec::thermal(1_000_000.0),
            ..SynthesisSpec::default()
        }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let bad = |m: &str| Err(ProfileError::Spec(m.to_string()));
        let ir = &self.irradiance;
        if !(ir.peak >= 0.0 && (0.0..=1.0).contains(&ir.winter_peak_ratio)) {
            return bad("irradiance peak must be >= 0 and winter_peak_ratio in [0, 1]");
        }
        if !(ir.winter_day_hours > 0.0
            && ir.winter_day_hours <= ir.summer_day_hours
            && ir.summer_day_hours < 24.0)
        {
            return bad("day lengths must satisfy 0 < winter <= summer < 24");
        }
        if !(0.0..=1.0).contains(&ir.cloudiness) || !(ir.hourly_noise >= 0.0) {
            return bad("cloudiness must be in [0, 1] and hourly_noise >= 0");
        }
        let w = &self.wind;
        if !(w.weibull_shape > 0.0 && w.weibull_scale > 0.0 && w.max_speed >= 0.0) {
            return bad("wind Weibull parameters must be > 0");
        }
        for l in [&self.electric_load, &self.thermal_load] {
            if !(l.annual_energy >= 0.0 && l.annual_energy.is_finite()) {
                return bad("annual_energy must be finite and >= 0");
            }
            if !(l.morning_peak >= 0.0
                && l.evening_peak >= 0.0
                && l.winter_boost >= 0.0
                && l.summer_floor >= 0.0
                && l.hourly_noise >= 0.0)
            {
                return bad("load shape parameters must be >= 0");
            }
        }
        let f = &self.fcev;
        if !(f.kg_per_fill >= 0.0 && f.hydrogen_hhv > 0.0) {
            return bad("kg_per_fill must be >= 0 and hydrogen_hhv > 0");
        }
        if f.arrival_weights.iter().any(|w| !(*w >= 0.0))
            || f.arrival_weights.iter().sum::<f64>() <= 0.0
        {
            return bad("arrival_weights must be >= 0 with a positive sum");
        }
        Ok(())
    }
}

/// 0 at the winter solstice, 1 at the summer solstice.
fn summerness(day: usize) -> f64 {
    0.5 - 0.5 * (2.0 * PI * (day as f64 + 10.0) / DAYS as f64).cos()
}

fn bump(hour: f64, centre: f64, width: f64) -> f64 {
    let d = hour - centre;
    (-(d * d) / (2.0 * width * width)).exp()
}

fn irradiance_series(spec: &IrradianceSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let noise = Normal::new(1.0, spec.hourly_noise).expect("checked sigma");
    let mut out = vec![0.0; HOURS_PER_YEAR];
    for day in 0..DAYS {
        let s = summerness(day);
        let length = spec.winter_day_hours + (spec.summer_day_hours - spec.winter_day_hours) * s;
        let peak = spec.peak * (spec.winter_peak_ratio + (1.0 - spec.winter_peak_ratio) * s);
        let clearness = 1.0 - spec.cloudiness * rng.random::<f64>();
        let sunrise = 12.0 - length / 2.0;
        for h in 0..24 {
            let t = h as f64 + 0.5 - sunrise;
            let jitter: f64 = noise.sample(rng);
            if t > 0.0 && t < length {
                let g = peak * (PI * t / length).sin() * clearness * jitter;
                out[day * 24 + h] = g.clamp(0.0, spec.peak);
            }
        }
    }
    out
}

fn wind_series(spec: &WindSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let weibull = Weibull::new(spec.weibull_scale, spec.weibull_shape).expect("checked parameters");
    (0..HOURS_PER_YEAR)
        .map(|_| weibull.sample(rng).clamp(0.0, spec.max_speed))
        .collect()
}

fn load_series(spec: &LoadSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let noise = Normal::new(1.0, spec.hourly_noise).expect("checked sigma");
    let mut out = Vec::with_capacity(HOURS_PER_YEAR);
    for day in 0..DAYS {
        let winter = 1.0 - summerness(day);
        let season = spec.summer_floor + spec.winter_boost * winter;
        for h in 0..24 {
            let hf = h as f64 + 0.5;
            let shape = 1.0
                + spec.morning_peak * bump(hf, spec.morning_peak_hour, 1.5)
                + spec.evening_peak * bump(hf, spec.evening_peak_hour, 2.0);
            let jitter: f64 = noise.sample(rng);
            out.push((season * shape * jitter).max(0.0));
        }
    }
    let total: f64 = out.iter().sum();
    let scale = if total > 0.0 {
        spec.annual_energy / total
    } else {
        0.0
    };
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

/// Places every refill of 52 weeks at a random day of its week and a random
/// hour drawn from the arrival weights.
fn fcev_series(spec: &FcevSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let arrivals = WeightedIndex::new(spec.arrival_weights).expect("checked weights");
    let per_fill = spec.kg_per_fill * spec.hydrogen_hhv;
    let fills = spec.fleet_size as usize * spec.fills_per_week as usize;
    let mut out = vec![0.0; HOURS_PER_YEAR];
    for week in 0..52 {
        for _ in 0..fills {
            let day = week * 7 + rng.random_range(0..7);
            let hour = arrivals.sample(rng);
            out[day * 24 + hour] += per_fill;
        }
    }
    out
}

/// Builds the five profiles from `spec`. Pure in the seed.
pub fn synthesize(spec: &SynthesisSpec) -> Result<Profiles, ProfileError> {
    spec.validate()?;
    // Each series draws from its own stream so editing one leaves the others unchanged.
    let stream = |n: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
        rng.set_stream(n);
        rng
    };
    let values = [
        irradiance_series(&spec.irradiance, &mut stream(0)),
        wind_series(&spec.wind, &mut stream(1)),
        load_series(&spec.electric_load, &mut stream(2)),
        load_series(&spec.thermal_load, &mut stream(3)),
        fcev_series(&spec.fcev, &mut stream(4)),
    ];
    let mut slots = Vec::with_capacity(5);
    for ((v, unit), name) in values.into_iter().zip(Profiles::UNITS).zip(Profiles::NAMES) {
        slots.push(
            HourlySeries::new(unit, v).map_err(|e| ProfileError::Spec(format!("{name}: {e}")))?,
        );
    }
    let series: [HourlySeries; 5] = slots.try_into().expect("five slots");
    Ok(Profiles::new(series).expect("units in slot order"))
}
