//! Shared domain types: hourly series, device economics, the device catalog
//! and the sizing vector.
//!
//! Conventions used throughout the crate: power in kW, energy in kWh, one
//! simulation step is one hour (so kW and kWh per step are interchangeable),
//! and hydrogen is carried as energy on a higher-heating-value basis.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of hourly slots in a (non-leap) simulation year.
pub const HOURS_PER_YEAR: usize = 8760;

/// Physical unit attached to an [`HourlySeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    /// Irradiance on the array plane, W/m².
    WattsPerSquareMetre,
    /// Wind speed at hub height, m/s.
    MetresPerSecond,
    /// Electric or thermal power, kW.
    Kilowatts,
    /// Hydrogen energy (HHV basis) per hour, kWh.
    KilowattHoursHydrogen,
}

impl Unit {
    /// Tag used in CSV headers.
    pub fn tag(self) -> &'static str {
        match self {
            Unit::WattsPerSquareMetre => "W/m2",
            Unit::MetresPerSecond => "m/s",
            Unit::Kilowatts => "kW",
            Unit::KilowattHoursHydrogen => "kWh-H2",
        }
    }

    /// Parses a CSV unit tag. `W/m²` is accepted as an alias of `W/m2`.
    pub fn from_tag(tag: &str) -> Option<Unit> {
        match tag.trim() {
            "W/m2" | "W/m²" => Some(Unit::WattsPerSquareMetre),
            "m/s" => Some(Unit::MetresPerSecond),
            "kW" => Some(Unit::Kilowatts),
            "kWh-H2" => Some(Unit::KilowattHoursHydrogen),
            _ => None,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("series has {0} values, expected {HOURS_PER_YEAR}")]
    WrongLength(usize),
    #[error("negative value at index {0}")]
    NegativeValue(usize),
    #[error("non-finite value at index {0}")]
    NonFiniteValue(usize),
}

/// One year of hourly samples of a single physical quantity.
///
/// Index `i` covers clock hours `[i, i + 1)` of the year, so the hour of day
/// is `i % 24`. Construction validates length, sign and finiteness; the
/// series is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlySeries {
    unit: Unit,
    values: Vec<f64>,
}

impl HourlySeries {
    pub fn new(unit: Unit, values: Vec<f64>) -> Result<Self, SeriesError> {
        validate_series(HourlySeries { unit, values })
    }

    pub fn zeros(unit: Unit) -> Self {
        HourlySeries {
            unit,
            values: vec![0.0; HOURS_PER_YEAR],
        }
    }

    pub fn constant(unit: Unit, value: f64) -> Result<Self, SeriesError> {
        Self::new(unit, vec![value; HOURS_PER_YEAR])
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, hour: usize) -> f64 {
        self.values[hour]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Checks the series invariants, returning the series unchanged when they hold.
pub fn validate_series(series: HourlySeries) -> Result<HourlySeries, SeriesError> {
    if series.values.len() != HOURS_PER_YEAR {
        return Err(SeriesError::WrongLength(series.values.len()));
    }
    for (i, &v) in series.values.iter().enumerate() {
        if !v.is_finite() {
            return Err(SeriesError::NonFiniteValue(i));
        }
        if v < 0.0 {
            return Err(SeriesError::NegativeValue(i));
        }
    }
    Ok(series)
}

/// The five annual input series, in the fixed order irradiance, wind speed,
/// electrical load, thermal load, station hydrogen demand.
#[derive(Debug, Clone, PartialEq)]
pub struct Profiles {
    pub irradiance: HourlySeries,
    pub wind: HourlySeries,
    pub p_load: HourlySeries,
    pub q_load: HourlySeries,
    pub h_demand: HourlySeries,
}

impl Profiles {
    /// Expected unit of each slot, in order.
    pub const UNITS: [Unit; 5] = [
        Unit::WattsPerSquareMetre,
        Unit::MetresPerSecond,
        Unit::Kilowatts,
        Unit::Kilowatts,
        Unit::KilowattHoursHydrogen,
    ];

    /// Slot names, also used as profile file stems.
    pub const NAMES: [&'static str; 5] = [
        "irradiance",
        "wind",
        "electric_load",
        "thermal_load",
        "hydrogen_demand",
    ];

    /// Assembles profiles, checking each slot carries the expected unit.
    pub fn new(series: [HourlySeries; 5]) -> Result<Self, (usize, Unit)> {
        for (slot, (s, unit)) in series.iter().zip(Self::UNITS).enumerate() {
            if s.unit() != unit {
                return Err((slot, s.unit()));
            }
        }
        let [irradiance, wind, p_load, q_load, h_demand] = series;
        Ok(Profiles {
            irradiance,
            wind,
            p_load,
            q_load,
            h_demand,
        })
    }

    pub fn zeros() -> Self {
        Profiles {
            irradiance: HourlySeries::zeros(Unit::WattsPerSquareMetre),
            wind: HourlySeries::zeros(Unit::MetresPerSecond),
            p_load: HourlySeries::zeros(Unit::Kilowatts),
            q_load: HourlySeries::zeros(Unit::Kilowatts),
            h_demand: HourlySeries::zeros(Unit::KilowattHoursHydrogen),
        }
    }

    pub fn slots(&self) -> [&HourlySeries; 5] {
        [
            &self.irradiance,
            &self.wind,
            &self.p_load,
            &self.q_load,
            &self.h_demand,
        ]
    }
}

/// Cost and performance data for one unit (module, turbine, kW or kg) of a device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEconomics {
    /// $ per unit.
    pub capital_cost: f64,
    /// $ per unit, paid at each replacement inside the project horizon.
    pub replacement_cost: f64,
    /// $ per unit per year.
    pub maintenance_cost: f64,
    /// Years.
    pub lifetime: f64,
    pub efficiency: f64,
}

impl DeviceEconomics {
    pub const fn new(
        capital_cost: f64,
        replacement_cost: f64,
        maintenance_cost: f64,
        lifetime: f64,
        efficiency: f64,
    ) -> Self {
        DeviceEconomics {
            capital_cost,
            replacement_cost,
            maintenance_cost,
            lifetime,
            efficiency,
        }
    }

    fn check(&self, name: &str) -> Result<(), CatalogError> {
        let costs = [
            self.capital_cost,
            self.replacement_cost,
            self.maintenance_cost,
        ];
        if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(CatalogError::Invalid(format!(
                "{name}: costs must be finite and >= 0"
            )));
        }
        if !(self.lifetime >= 1.0) || !self.lifetime.is_finite() {
            return Err(CatalogError::Invalid(format!(
                "{name}: lifetime must be >= 1 year"
            )));
        }
        check_efficiency(name, self.efficiency)
    }
}

fn check_efficiency(name: &str, eta: f64) -> Result<(), CatalogError> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(CatalogError::Invalid(format!(
            "{name}: efficiency {eta} outside (0, 1]"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("invalid catalog: {0}")]
    Invalid(String),
}

/// How the storage efficiency enters the tank balance on discharge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TankDischargeMode {
    /// Withdrawals are multiplied by the storage efficiency before leaving the tank.
    #[default]
    Multiply,
    /// Withdrawals are divided by the storage efficiency (losses grow the draw).
    Divide,
}

/// Device data and physical constants consumed by the component models.
///
/// `efficiency` on each [`DeviceEconomics`] is the single source for the
/// corresponding device efficiency; the accessors below name them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceCatalog {
    /// Per module. `efficiency` is the generator efficiency.
    pub pv: DeviceEconomics,
    /// Per 1 kW turbine. `efficiency` folds generator and converter losses.
    pub wind_turbine: DeviceEconomics,
    /// Per kW. `efficiency` is the electrical efficiency.
    pub fuel_cell: DeviceEconomics,
    /// Per kW of input.
    pub electrolyzer: DeviceEconomics,
    /// Per kg. `efficiency` is the storage efficiency.
    pub hydrogen_tank: DeviceEconomics,
    /// Per kW of electrical input.
    pub heater: DeviceEconomics,
    /// Per kW of heat output.
    pub boiler: DeviceEconomics,
    /// Per kW of AC output.
    pub converter: DeviceEconomics,
    /// Fixed compressor-dispenser package, quantity one. `efficiency` is the
    /// compression efficiency.
    pub station_compressor: DeviceEconomics,

    /// m² per PV module.
    pub pv_module_area: f64,
    /// m/s.
    pub wind_cut_in: f64,
    /// m/s.
    pub wind_rated_speed: f64,
    /// m/s.
    pub wind_cut_out: f64,
    /// kW per turbine.
    pub wind_rated_power: f64,
    /// kW per turbine at cut-out; `None` means equal to the rated power.
    pub wind_furl_power: Option<f64>,
    pub fuel_cell_thermal_efficiency: f64,
    /// kWh per kg.
    pub hydrogen_hhv: f64,
    /// $ per kWh of boiler fuel input.
    pub boiler_fuel_cost: f64,
    /// Fraction of tank capacity that cannot be extracted.
    pub tank_min_fraction: f64,
    pub tank_discharge_efficiency_mode: TankDischargeMode,
    /// Largest hydrogen delivery the station compressor can handle per hour, kWh-H2.
    pub station_max_delivery: f64,
}

impl Default for DeviceCatalog {
    fn default() -> Self {
        DeviceCatalog {
            pv: DeviceEconomics::new(2000.0, 1800.0, 0.0, 20.0, 0.154),
            wind_turbine: DeviceEconomics::new(1500.0, 900.0, 45.0, 20.0, 1.0),
            fuel_cell: DeviceEconomics::new(2000.0, 1500.0, 100.0, 5.0, 0.40),
            electrolyzer: DeviceEconomics::new(1500.0, 1000.0, 15.0, 20.0, 0.75),
            hydrogen_tank: DeviceEconomics::new(500.0, 450.0, 5.0, 20.0, 0.95),
            heater: DeviceEconomics::new(281.0, 150.0, 5.0, 20.0, 0.90),
            boiler: DeviceEconomics::new(85.0, 60.0, 2.0, 15.0, 0.94),
            converter: DeviceEconomics::new(700.0, 650.0, 7.0, 15.0, 0.90),
            station_compressor: DeviceEconomics::new(100_000.0, 80_000.0, 200.0, 20.0, 0.49),
            pv_module_area: 1.9,
            wind_cut_in: 2.5,
            wind_rated_speed: 11.0,
            wind_cut_out: 25.0,
            wind_rated_power: 1.0,
            wind_furl_power: None,
            fuel_cell_thermal_efficiency: 0.50,
            hydrogen_hhv: 39.7,
            boiler_fuel_cost: 0.03,
            tank_min_fraction: 0.05,
            tank_discharge_efficiency_mode: TankDischargeMode::Multiply,
            station_max_delivery: 200.0,
        }
    }
}

impl DeviceCatalog {
    pub fn eta_pv(&self) -> f64 {
        self.pv.efficiency
    }
    pub fn eta_wind(&self) -> f64 {
        self.wind_turbine.efficiency
    }
    pub fn eta_fc_el(&self) -> f64 {
        self.fuel_cell.efficiency
    }
    pub fn eta_fc_th(&self) -> f64 {
        self.fuel_cell_thermal_efficiency
    }
    pub fn eta_el(&self) -> f64 {
        self.electrolyzer.efficiency
    }
    pub fn eta_storage(&self) -> f64 {
        self.hydrogen_tank.efficiency
    }
    pub fn eta_heater(&self) -> f64 {
        self.heater.efficiency
    }
    pub fn eta_boiler(&self) -> f64 {
        self.boiler.efficiency
    }
    pub fn eta_conv(&self) -> f64 {
        self.converter.efficiency
    }
    pub fn eta_station(&self) -> f64 {
        self.station_compressor.efficiency
    }
    pub fn furl_power(&self) -> f64 {
        self.wind_furl_power.unwrap_or(self.wind_rated_power)
    }

    /// Devices in a fixed order, with the names used in configs and reports.
    pub fn devices(&self) -> [(&'static str, &DeviceEconomics); 9] {
        [
            ("pv", &self.pv),
            ("wind_turbine", &self.wind_turbine),
            ("fuel_cell", &self.fuel_cell),
            ("electrolyzer", &self.electrolyzer),
            ("hydrogen_tank", &self.hydrogen_tank),
            ("heater", &self.heater),
            ("boiler", &self.boiler),
            ("converter", &self.converter),
            ("station_compressor", &self.station_compressor),
        ]
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        for (name, econ) in self.devices() {
            econ.check(name)?;
        }
        check_efficiency("fuel_cell_thermal", self.fuel_cell_thermal_efficiency)?;
        let positive = [
            ("pv_module_area", self.pv_module_area),
            ("wind_rated_power", self.wind_rated_power),
            ("hydrogen_hhv", self.hydrogen_hhv),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CatalogError::Invalid(format!("{name} must be > 0")));
            }
        }
        if !(0.0 <= self.wind_cut_in
            && self.wind_cut_in < self.wind_rated_speed
            && self.wind_rated_speed <= self.wind_cut_out)
        {
            return Err(CatalogError::Invalid(
                "wind speeds must satisfy 0 <= cut_in < rated <= cut_out".into(),
            ));
        }
        if self.furl_power() < 0.0 {
            return Err(CatalogError::Invalid("wind_furl_power must be >= 0".into()));
        }
        if !(self.boiler_fuel_cost >= 0.0) {
            return Err(CatalogError::Invalid(
                "boiler_fuel_cost must be >= 0".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.tank_min_fraction) {
            return Err(CatalogError::Invalid(
                "tank_min_fraction must be in [0, 1)".into(),
            ));
        }
        if !(self.station_max_delivery >= 0.0) {
            return Err(CatalogError::Invalid(
                "station_max_delivery must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// The eight sizing decisions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SizingVector {
    /// PV modules.
    pub n_pv: u32,
    /// 1 kW wind turbines.
    pub n_wt: u32,
    /// kW of electrolyzer input.
    pub p_electrolyzer: f64,
    /// kg of hydrogen storage.
    pub m_tank: f64,
    /// kW of fuel-cell electrical output.
    pub p_fuelcell: f64,
    /// kW of DC/AC converter output.
    pub p_converter: f64,
    /// kW of boiler heat output.
    pub p_boiler: f64,
    /// kW of heater electrical input.
    pub p_heater: f64,
}

impl SizingVector {
    pub const DIMENSIONS: usize = 8;

    /// Names in decision-vector order; also the row labels of sizes CSVs.
    pub const NAMES: [&'static str; 8] = [
        "n_pv",
        "n_wt",
        "p_electrolyzer",
        "m_tank",
        "p_fuelcell",
        "p_converter",
        "p_boiler",
        "p_heater",
    ];

    /// Builds a sizing from a continuous position, rounding the two count
    /// dimensions to the nearest integer and clamping negatives to zero.
    pub fn from_position(x: &[f64; 8]) -> Self {
        let count = |v: f64| v.max(0.0).round().min(u32::MAX as f64) as u32;
        let cap = |v: f64| v.max(0.0);
        SizingVector {
            n_pv: count(x[0]),
            n_wt: count(x[1]),
            p_electrolyzer: cap(x[2]),
            m_tank: cap(x[3]),
            p_fuelcell: cap(x[4]),
            p_converter: cap(x[5]),
            p_boiler: cap(x[6]),
            p_heater: cap(x[7]),
        }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.n_pv as f64,
            self.n_wt as f64,
            self.p_electrolyzer,
            self.m_tank,
            self.p_fuelcell,
            self.p_converter,
            self.p_boiler,
            self.p_heater,
        ]
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_are_valid() {
        let s = HourlySeries::new(Unit::Kilowatts, vec![0.0; HOURS_PER_YEAR]).unwrap();
        assert_eq!(s.unit(), Unit::Kilowatts);
        assert_eq!(s.sum(), 0.0);
    }

    #[test]
    fn short_series_is_rejected() {
        let err = HourlySeries::new(Unit::Kilowatts, vec![0.0; 8759]).unwrap_err();
        assert_eq!(err, SeriesError::WrongLength(8759));
    }

    #[test]
    fn negative_value_is_located() {
        let mut v = vec![1.0; HOURS_PER_YEAR];
        v[3] = -1.0;
        let err = HourlySeries::new(Unit::Kilowatts, v).unwrap_err();
        assert_eq!(err, SeriesError::NegativeValue(3));
    }

    #[test]
    fn nan_is_rejected() {
        let mut v = vec![1.0; HOURS_PER_YEAR];
        v[100] = f64::NAN;
        assert_eq!(
            HourlySeries::new(Unit::MetresPerSecond, v).unwrap_err(),
            SeriesError::NonFiniteValue(100)
        );
    }

    #[test]
    fn default_catalog_constants() {
        let c = DeviceCatalog::default();
        assert_eq!(c.pv, DeviceEconomics::new(2000.0, 1800.0, 0.0, 20.0, 0.154));
        assert_eq!(c.wind_turbine.capital_cost, 1500.0);
        assert_eq!(c.wind_turbine.replacement_cost, 900.0);
        assert_eq!(c.wind_turbine.maintenance_cost, 45.0);
        assert_eq!(c.wind_turbine.lifetime, 20.0);
        assert_eq!(
            c.fuel_cell,
            DeviceEconomics::new(2000.0, 1500.0, 100.0, 5.0, 0.40)
        );
        assert_eq!(
            c.electrolyzer,
            DeviceEconomics::new(1500.0, 1000.0, 15.0, 20.0, 0.75)
        );
        assert_eq!(
            c.hydrogen_tank,
            DeviceEconomics::new(500.0, 450.0, 5.0, 20.0, 0.95)
        );
        assert_eq!(
            c.heater,
            DeviceEconomics::new(281.0, 150.0, 5.0, 20.0, 0.90)
        );
        assert_eq!(c.boiler, DeviceEconomics::new(85.0, 60.0, 2.0, 15.0, 0.94));
        assert_eq!(
            c.converter,
            DeviceEconomics::new(700.0, 650.0, 7.0, 15.0, 0.90)
        );
        assert_eq!(
            c.station_compressor,
            DeviceEconomics::new(100_000.0, 80_000.0, 200.0, 20.0, 0.49)
        );
        assert_eq!(c.pv_module_area, 1.9);
        assert_eq!(
            (
                c.wind_cut_in,
                c.wind_rated_speed,
                c.wind_cut_out,
                c.wind_rated_power
            ),
            (2.5, 11.0, 25.0, 1.0)
        );
        assert_eq!(c.furl_power(), 1.0);
        assert_eq!(c.eta_fc_el(), 0.40);
        assert_eq!(c.eta_fc_th(), 0.50);
        assert_eq!(c.eta_el(), 0.75);
        assert_eq!(c.eta_storage(), 0.95);
        assert_eq!(c.eta_heater(), 0.90);
        assert_eq!(c.eta_boiler(), 0.94);
        assert_eq!(c.eta_conv(), 0.90);
        assert_eq!(c.eta_station(), 0.49);
        assert_eq!(c.hydrogen_hhv, 39.7);
        assert_eq!(c.boiler_fuel_cost, 0.03);
        assert_eq!(c.tank_min_fraction, 0.05);
        assert_eq!(
            c.tank_discharge_efficiency_mode,
            TankDischargeMode::Multiply
        );
        assert!(c.validate().is_ok());
    }

    #[test]
    fn catalog_round_trips_through_toml() {
        let mut c = DeviceCatalog::default();
        c.wind_furl_power = Some(0.8);
        c.boiler.capital_cost = 91.25;
        let text = toml::to_string(&c).unwrap();
        let back: DeviceCatalog = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_catalog_keeps_defaults() {
        let c: DeviceCatalog = toml::from_str("hydrogen_hhv = 33.3\n").unwrap();
        assert_eq!(c.hydrogen_hhv, 33.3);
        assert_eq!(c.pv, DeviceCatalog::default().pv);
    }

    #[test]
    fn bad_efficiency_is_rejected() {
        let mut c = DeviceCatalog::default();
        c.electrolyzer.efficiency = 1.2;
        assert!(c.validate().is_err());
        c.electrolyzer.efficiency = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn position_rounding() {
        let s = SizingVector::from_position(&[2.5, 1.49, 3.0, -1.0, 0.0, 0.0, 0.0, 0.25]);
        assert_eq!(s.n_pv, 3);
        assert_eq!(s.n_wt, 1);
        assert_eq!(s.m_tank, 0.0);
        assert_eq!(s.p_heater, 0.25);
    }
}
