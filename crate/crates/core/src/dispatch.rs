//! Hour-by-hour energy management of the islanded microgrid.
//!
//! PV, wind, fuel cell, electrolyzer, heater and tank share a DC bus; the AC
//! loads are fed through the converter, whose output rating caps the AC power
//! that can be delivered. Each hour runs the same priority cascade:
//!
//! 1. Renewable output is committed to the (AC-equivalent) electrical load.
//! 2. Surplus goes to the electrolyzer (limited by its rating and the tank
//!    headroom), then to the heater (limited by its rating and the heat
//!    demand), and the rest is curtailed.
//! 3. A deficit is covered by the fuel cell (limited by its rating and the
//!    hydrogen above the tank floor); what remains is shed, interruptible load
//!    first.
//! 4. Heat demand is served by fuel-cell heat, heater output, then the boiler.
//! 5. The refilling station draws what is left in the tank, within the
//!    compressor cap. Under [`PolicyMode::Managed`], refills that cannot be
//!    served outside the off-peak window are pushed to the next hour.
//!
//! The stage functions are public so the agent layer can run the same
//! arithmetic from inside its message handlers.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::components::{
    boiler_fuel_for_heat, electrolyzer_output, fuel_cell_outputs, heater_output, max_withdrawal,
    pv_power, station_tank_draw, tank_step, wind_farm_power, TankState,
};
use crate::model::{DeviceCatalog, Profiles, SizingVector, HOURS_PER_YEAR};

/// Whether the energy-management strategy controls the flexible demands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyMode {
    /// Every load is treated as fixed and uninterruptible.
    Fixed,
    /// Part of the electric load is interruptible and refills may be deferred.
    Managed,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("interruptible_fraction {0} outside [0, 1]")]
    InterruptibleFraction(f64),
    #[error("defer window hour {0} outside 0..24")]
    WindowHour(u8),
    #[error("fixed mode cannot have interruptible load")]
    FixedWithInterruptible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioPolicy {
    pub mode: PolicyMode,
    /// Share of each hour's electric load that may be shed at the low penalty.
    pub interruptible_fraction: f64,
    /// Off-peak hours of day in which deferred refills are served.
    pub defer_window_hours: Vec<u8>,
    /// Hours a refill may be carried forward before it counts as unserved.
    pub max_defer_hours: u32,
}

impl Default for ScenarioPolicy {
    fn default() -> Self {
        Self::fixed()
    }
}

/// 21:00 through 05:59.
pub const DEFAULT_DEFER_WINDOW: [u8; 9] = [21, 22, 23, 0, 1, 2, 3, 4, 5];

impl ScenarioPolicy {
    pub fn fixed() -> Self {
        ScenarioPolicy {
            mode: PolicyMode::Fixed,
            interruptible_fraction: 0.0,
            defer_window_hours: DEFAULT_DEFER_WINDOW.to_vec(),
            max_defer_hours: 12,
        }
    }

    pub fn managed() -> Self {
        ScenarioPolicy {
            mode: PolicyMode::Managed,
            interruptible_fraction: 0.15,
            ..Self::fixed()
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if !(0.0..=1.0).contains(&self.interruptible_fraction) {
            return Err(PolicyError::InterruptibleFraction(
                self.interruptible_fraction,
            ));
        }
        if self.mode == PolicyMode::Fixed && self.interruptible_fraction != 0.0 {
            return Err(PolicyError::FixedWithInterruptible);
        }
        if let Some(&h) = self.defer_window_hours.iter().find(|&&h| h >= 24) {
            return Err(PolicyError::WindowHour(h));
        }
        Ok(())
    }

    pub fn in_defer_window(&self, hour_of_day: u32) -> bool {
        self.defer_window_hours
            .iter()
            .any(|&h| u32::from(h) == hour_of_day)
    }

    /// True when unserved refills in this hour are carried forward.
    pub fn defers_at(&self, hour_of_day: u32) -> bool {
        self.mode == PolicyMode::Managed && !self.in_defer_window(hour_of_day)
    }
}

/// Raw inputs of one hour.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HourInput {
    /// W/m².
    pub irradiance: f64,
    /// m/s.
    pub wind_speed: f64,
    /// kW AC.
    pub p_load: f64,
    /// kW heat.
    pub q_load: f64,
    /// kWh-H2 of new refilling demand.
    pub h_demand: f64,
}

impl HourInput {
    pub fn from_profiles(profiles: &Profiles, hour: usize) -> Self {
        HourInput {
            irradiance: profiles.irradiance.get(hour),
            wind_speed: profiles.wind.get(hour),
            p_load: profiles.p_load.get(hour),
            q_load: profiles.q_load.get(hour),
            h_demand: profiles.h_demand.get(hour),
        }
    }
}

/// Every flow of one hour. Power in kW, hydrogen in kWh (HHV).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HourlyFlows {
    pub hour: usize,
    pub p_load: f64,
    pub p_uninterruptible: f64,
    pub q_load: f64,
    pub h_demand: f64,
    /// Deferred refills carried into this hour.
    pub h_pending_in: f64,
    pub p_pv: f64,
    pub p_wg: f64,
    /// AC load actually supplied.
    pub p_load_served: f64,
    pub p_ren_el: f64,
    pub p_el_tank: f64,
    pub p_ren_h: f64,
    pub p_tank_fc: f64,
    pub p_fc_conv: f64,
    pub p_tank_sta: f64,
    pub h_delivered: f64,
    pub q_fc_tl: f64,
    pub q_fc_vented: f64,
    pub q_h_tl: f64,
    pub q_b_tl: f64,
    pub boiler_fuel: f64,
    pub shed_interruptible: f64,
    pub shed_uninterruptible: f64,
    pub unserved_thermal: f64,
    pub unserved_hydrogen: f64,
    pub deferred_hydrogen: f64,
    pub curtailed: f64,
    pub tank_energy_end: f64,
}

impl HourlyFlows {
    /// Column names in the order of [`HourlyFlows::values`].
    pub const FIELDS: [&'static str; 28] = [
        "hour",
        "p_load",
        "p_uninterruptible",
        "q_load",
        "h_demand",
        "h_pending_in",
        "p_pv",
        "p_wg",
        "p_load_served",
        "p_ren_el",
        "p_el_tank",
        "p_ren_h",
        "p_tank_fc",
        "p_fc_conv",
        "p_tank_sta",
        "h_delivered",
        "q_fc_tl",
        "q_fc_vented",
        "q_h_tl",
        "q_b_tl",
        "boiler_fuel",
        "shed_interruptible",
        "shed_uninterruptible",
        "unserved_thermal",
        "unserved_hydrogen",
        "deferred_hydrogen",
        "curtailed",
        "tank_energy_end",
    ];

    /// All numeric fields after `hour`, in [`HourlyFlows::FIELDS`] order.
    pub fn values(&self) -> [f64; 27] {
        [
            self.p_load,
            self.p_uninterruptible,
            self.q_load,
            self.h_demand,
            self.h_pending_in,
            self.p_pv,
            self.p_wg,
            self.p_load_served,
            self.p_ren_el,
            self.p_el_tank,
            self.p_ren_h,
            self.p_tank_fc,
            self.p_fc_conv,
            self.p_tank_sta,
            self.h_delivered,
            self.q_fc_tl,
            self.q_fc_vented,
            self.q_h_tl,
            self.q_b_tl,
            self.boiler_fuel,
            self.shed_interruptible,
            self.shed_uninterruptible,
            self.unserved_thermal,
            self.unserved_hydrogen,
            self.deferred_hydrogen,
            self.curtailed,
            self.tank_energy_end,
        ]
    }

    /// Inverse of [`HourlyFlows::values`].
    pub fn from_values(hour: usize, v: &[f64; 27]) -> Self {
        HourlyFlows {
            hour,
            p_load: v[0],
            p_uninterruptible: v[1],
            q_load: v[2],
            h_demand: v[3],
            h_pending_in: v[4],
            p_pv: v[5],
            p_wg: v[6],
            p_load_served: v[7],
            p_ren_el: v[8],
            p_el_tank: v[9],
            p_ren_h: v[10],
            p_tank_fc: v[11],
            p_fc_conv: v[12],
            p_tank_sta: v[13],
            h_delivered: v[14],
            q_fc_tl: v[15],
            q_fc_vented: v[16],
            q_h_tl: v[17],
            q_b_tl: v[18],
            boiler_fuel: v[19],
            shed_interruptible: v[20],
            shed_uninterruptible: v[21],
            unserved_thermal: v[22],
            unserved_hydrogen: v[23],
            deferred_hydrogen: v[24],
            curtailed: v[25],
            tank_energy_end: v[26],
        }
    }

    pub fn shed_total(&self) -> f64 {
        self.shed_interruptible + self.shed_uninterruptible
    }

    /// DC bus: sources minus sinks, kW.
    pub fn electrical_residual(&self, cat: &DeviceCatalog) -> f64 {
        self.p_pv + self.p_wg + self.p_fc_conv
            - (self.p_load_served / cat.eta_conv() + self.p_ren_el + self.p_ren_h + self.curtailed)
    }

    /// AC side: load equals served plus shed.
    pub fn load_residual(&self) -> f64 {
        self.p_load - self.p_load_served - self.shed_total()
    }

    pub fn thermal_residual(&self) -> f64 {
        self.q_load - (self.q_fc_tl + self.q_h_tl + self.q_b_tl + self.unserved_thermal)
    }

    pub fn hydrogen_residual(&self) -> f64 {
        self.h_demand + self.h_pending_in
            - (self.h_delivered + self.unserved_hydrogen + self.deferred_hydrogen)
    }
}

/// A refill carried forward, with the number of hours it has already waited.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeferredDemand {
    pub age: u32,
    pub amount: f64,
}

/// Outcome of one hour at the refilling station, kWh-H2 delivered to vehicles.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StationOutcome {
    pub delivered: f64,
    pub deferred: f64,
    pub unserved: f64,
}

/// Refills waiting to be served, oldest first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DeferredQueue {
    items: VecDeque<DeferredDemand>,
}

impl DeferredQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total(&self) -> f64 {
        self.items.iter().fold(0.0, |acc, d| acc + d.amount)
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> impl Iterator<Item = &DeferredDemand> {
        self.items.iter()
    }

    /// Serves the queue and this hour's new demand, oldest first.
    ///
    /// Up to `allowance` is delivered. When `defer_limit` is set, undelivered
    /// demand within that limit (counted from the oldest) is carried to the
    /// next hour one hour older, or dropped as unserved once it would exceed
    /// `max_age`; everything else undelivered is unserved.
    pub fn settle(
        &self,
        new_demand: f64,
        allowance: f64,
        defer_limit: Option<f64>,
        max_age: u32,
    ) -> (StationOutcome, DeferredQueue) {
        let fresh = DeferredDemand {
            age: 0,
            amount: new_demand,
        };
        let total = self.total() + new_demand;
        let mut left_serve = allowance;
        let mut left_defer = match defer_limit {
            Some(limit) => (total.min(limit) - total.min(allowance)).max(0.0),
            None => 0.0,
        };
        let mut out = StationOutcome::default();
        let mut next = DeferredQueue::new();
        for item in self.items.iter().copied().chain(std::iter::once(fresh)) {
            let take = item.amount.min(left_serve);
            left_serve -= take;
            out.delivered += take;
            let rest = item.amount - take;
            let carry = rest.min(left_defer);
            left_defer -= carry;
            out.unserved += rest - carry;
            if carry > 0.0 {
                if item.age + 1 > max_age {
                    out.unserved += carry;
                } else {
                    next.items.push_back(DeferredDemand {
                        age: item.age + 1,
                        amount: carry,
                    });
                    out.deferred += carry;
                }
            }
        }
        (out, next)
    }
}

/// Renewable generation of one hour, kW DC.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Generation {
    pub p_pv: f64,
    pub p_wg: f64,
}

impl Generation {
    pub fn total(&self) -> f64 {
        self.p_pv + self.p_wg
    }
}

pub fn generation(input: &HourInput, sizes: &SizingVector, cat: &DeviceCatalog) -> Generation {
    Generation {
        p_pv: pv_power(input.irradiance, sizes.n_pv, cat),
        p_wg: wind_farm_power(input.wind_speed, sizes.n_wt, cat),
    }
}

/// AC load the converter can carry this hour and the DC power that requires.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusNeed {
    pub servable_ac: f64,
    pub dc_need: f64,
}

pub fn bus_need(p_load: f64, sizes: &SizingVector, cat: &DeviceCatalog) -> BusNeed {
    let servable_ac = p_load.min(sizes.p_converter);
    BusNeed {
        servable_ac,
        dc_need: servable_ac / cat.eta_conv(),
    }
}

/// How the DC surplus of an hour was used.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SurplusUse {
    pub p_ren_el: f64,
    pub p_el_tank: f64,
    pub p_ren_h: f64,
    pub q_h_tl: f64,
    pub curtailed: f64,
}

/// Electrolyzer first, then heater toward the heat demand, then curtailment.
pub fn absorb_surplus(
    surplus: f64,
    q_load: f64,
    tank: &TankState,
    sizes: &SizingVector,
    cat: &DeviceCatalog,
) -> SurplusUse {
    let el_limit = sizes.p_electrolyzer.min(tank.headroom() / cat.eta_el());
    let p_ren_el = surplus.min(el_limit);
    let rest = surplus - p_ren_el;
    let p_ren_h = rest.min(sizes.p_heater.min(q_load / cat.eta_heater()));
    SurplusUse {
        p_ren_el,
        p_el_tank: electrolyzer_output(p_ren_el, cat),
        p_ren_h,
        q_h_tl: heater_output(p_ren_h, cat),
        curtailed: rest - p_ren_h,
    }
}

/// Fuel-cell response to a DC deficit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FuelCellUse {
    pub p_tank_fc: f64,
    pub p_fc_conv: f64,
    pub heat: f64,
    /// Whether the whole deficit was covered.
    pub covered: bool,
}

pub fn cover_deficit(
    deficit: f64,
    tank: &TankState,
    sizes: &SizingVector,
    cat: &DeviceCatalog,
) -> FuelCellUse {
    let limit = (sizes.p_fuelcell / cat.eta_fc_el()).min(max_withdrawal(tank.extractable(), cat));
    let want = deficit / cat.eta_fc_el();
    let (p_tank_fc, covered) = if want <= limit {
        (want, true)
    } else {
        (limit, false)
    };
    let (p_fc_conv, heat) = fuel_cell_outputs(p_tank_fc, cat);
    FuelCellUse {
        p_tank_fc,
        p_fc_conv,
        heat,
        covered,
    }
}

/// AC load supplied in a deficit hour.
pub fn served_in_deficit(
    need: &BusNeed,
    renewables: f64,
    fc: &FuelCellUse,
    cat: &DeviceCatalog,
) -> f64 {
    if fc.covered {
        need.servable_ac
    } else {
        need.servable_ac
            .min((renewables + fc.p_fc_conv) * cat.eta_conv())
    }
}

/// Splits shed load into (interruptible, uninterruptible), interruptible first.
pub fn split_shedding(p_load: f64, served: f64, interruptible_fraction: f64) -> (f64, f64) {
    let shed = (p_load - served).max(0.0);
    let interruptible = shed.min(interruptible_fraction * p_load);
    (interruptible, shed - interruptible)
}

/// Fuel-cell heat credited to the thermal load and the vented excess.
pub fn credit_fc_heat(heat: f64, q_load: f64) -> (f64, f64) {
    let used = heat.min(q_load);
    (used, heat - used)
}

/// Boiler response to the heat still missing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoilerUse {
    pub q_b_tl: f64,
    pub fuel: f64,
    pub unserved: f64,
}

pub fn thermal_backup(remaining: f64, sizes: &SizingVector, cat: &DeviceCatalog) -> BoilerUse {
    let q_b_tl = remaining.min(sizes.p_boiler);
    BoilerUse {
        q_b_tl,
        fuel: boiler_fuel_for_heat(q_b_tl, cat).0,
        unserved: remaining - q_b_tl,
    }
}

/// Hydrogen the station could deliver to vehicles this hour, given the charge
/// and fuel-cell draw already committed.
pub fn station_deliverable(
    tank: &TankState,
    charge: f64,
    p_tank_fc: f64,
    cat: &DeviceCatalog,
) -> f64 {
    let draw =
        (max_withdrawal(tank.energy + charge - tank.floor_energy(), cat) - p_tank_fc).max(0.0);
    cat.station_max_delivery.min(draw * cat.eta_station())
}

/// Station allowance and deferral limit for the hour.
pub fn station_terms(
    deliverable: f64,
    stressed: bool,
    hour_of_day: u32,
    policy: &ScenarioPolicy,
    cat: &DeviceCatalog,
) -> (f64, Option<f64>) {
    if policy.defers_at(hour_of_day) {
        let allowance = if stressed { 0.0 } else { deliverable };
        (allowance, Some(cat.station_max_delivery))
    } else {
        (deliverable, None)
    }
}

/// Runs one hour. Returns the flows, the tank after the hour and the refills
/// carried into the next hour.
#[allow(clippy::too_many_arguments)]
pub fn dispatch_hour(
    hour: usize,
    tank: TankState,
    input: &HourInput,
    sizes: &SizingVector,
    policy: &ScenarioPolicy,
    cat: &DeviceCatalog,
    pending: &DeferredQueue,
) -> (HourlyFlows, TankState, DeferredQueue) {
    let hour_of_day = (hour % 24) as u32;
    let gen = generation(input, sizes, cat);
    let ren = gen.total();
    let need = bus_need(input.p_load, sizes, cat);

    let mut f = HourlyFlows {
        hour,
        p_load: input.p_load,
        p_uninterruptible: input.p_load * (1.0 - policy.interruptible_fraction),
        q_load: input.q_load,
        h_demand: input.h_demand,
        h_pending_in: pending.total(),
        p_pv: gen.p_pv,
        p_wg: gen.p_wg,
        ..HourlyFlows::default()
    };

    let mut fc_heat = 0.0;
    let mut stressed = false;
    if ren >= need.dc_need {
        let s = absorb_surplus(ren - need.dc_need, input.q_load, &tank, sizes, cat);
        f.p_load_served = need.servable_ac;
        f.p_ren_el = s.p_ren_el;
        f.p_el_tank = s.p_el_tank;
        f.p_ren_h = s.p_ren_h;
        f.q_h_tl = s.q_h_tl;
        f.curtailed = s.curtailed;
    } else {
        let fc = cover_deficit(need.dc_need - ren, &tank, sizes, cat);
        f.p_tank_fc = fc.p_tank_fc;
        f.p_fc_conv = fc.p_fc_conv;
        f.p_load_served = served_in_deficit(&need, ren, &fc, cat);
        fc_heat = fc.heat;
        stressed = !fc.covered;
    }
    let (shed_i, shed_uni) =
        split_shedding(input.p_load, f.p_load_served, policy.interruptible_fraction);
    f.shed_interruptible = shed_i;
    f.shed_uninterruptible = shed_uni;

    let (q_fc_tl, vented) = credit_fc_heat(fc_heat, input.q_load);
    f.q_fc_tl = q_fc_tl;
    f.q_fc_vented = vented;
    let b = thermal_backup(remaining_heat(input.q_load, q_fc_tl, f.q_h_tl), sizes, cat);
    f.q_b_tl = b.q_b_tl;
    f.boiler_fuel = b.fuel;
    f.unserved_thermal = b.unserved;

    let deliverable = station_deliverable(&tank, f.p_el_tank, f.p_tank_fc, cat);
    let (allowance, defer_limit) = station_terms(deliverable, stressed, hour_of_day, policy, cat);
    let (out, next) = pending.settle(
        input.h_demand,
        allowance,
        defer_limit,
        policy.max_defer_hours,
    );
    f.h_delivered = out.delivered;
    f.deferred_hydrogen = out.deferred;
    f.unserved_hydrogen = out.unserved;
    f.p_tank_sta = station_tank_draw(out.delivered, cat);

    let tank = tank_step(tank, f.p_el_tank, f.p_tank_fc, f.p_tank_sta, cat)
        .expect("dispatch keeps the tank within its bounds");
    f.tank_energy_end = tank.energy;
    (f, tank, next)
}

/// Heat still needed after fuel-cell heat and heater output.
pub fn remaining_heat(q_load: f64, q_fc_tl: f64, q_h_tl: f64) -> f64 {
    (q_load - q_fc_tl - q_h_tl).max(0.0)
}

/// Annual aggregates accumulated hour by hour.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct YearSummary {
    pub hours: usize,
    pub electric_demand: f64,
    pub thermal_demand: f64,
    pub hydrogen_demand: f64,
    pub shed_interruptible: f64,
    pub shed_uninterruptible: f64,
    pub unserved_thermal: f64,
    pub unserved_hydrogen: f64,
    pub hydrogen_delivered: f64,
    /// Refills still queued after the last hour.
    pub pending_hydrogen_end: f64,
    pub boiler_heat: f64,
    pub boiler_fuel: f64,
    pub curtailed: f64,
    /// Sum over hours of shed uninterruptible / uninterruptible load.
    pub elf_el_sum: f64,
    /// Sum over hours of unserved heat / heat demand.
    pub elf_th_sum: f64,
    pub tank_initial: f64,
    pub tank_end: f64,
    pub tank_capacity_energy: f64,
}

impl YearSummary {
    /// Empty aggregates for a year starting from `tank`.
    pub fn opening(tank: &TankState) -> Self {
        YearSummary {
            tank_initial: tank.energy,
            tank_end: tank.energy,
            tank_capacity_energy: tank.capacity_energy(),
            ..YearSummary::default()
        }
    }

    /// Folds one hour into the aggregates.
    pub fn add(&mut self, f: &HourlyFlows) {
        self.hours += 1;
        self.electric_demand += f.p_load;
        self.thermal_demand += f.q_load;
        self.hydrogen_demand += f.h_demand;
        self.shed_interruptible += f.shed_interruptible;
        self.shed_uninterruptible += f.shed_uninterruptible;
        self.unserved_thermal += f.unserved_thermal;
        self.unserved_hydrogen += f.unserved_hydrogen;
        self.hydrogen_delivered += f.h_delivered;
        self.boiler_heat += f.q_b_tl;
        self.boiler_fuel += f.boiler_fuel;
        self.curtailed += f.curtailed;
        self.elf_el_sum += loss_ratio(f.shed_uninterruptible, f.p_uninterruptible);
        self.elf_th_sum += loss_ratio(f.unserved_thermal, f.q_load);
        self.tank_end = f.tank_energy_end;
    }

    /// Unserved electric energy, both classes.
    pub fn unserved_electric(&self) -> f64 {
        self.shed_interruptible + self.shed_uninterruptible
    }
}

/// Hourly loss ratio; an hour without demand loses nothing.
pub fn loss_ratio(unserved: f64, demand: f64) -> f64 {
    if demand > 0.0 {
        unserved / demand
    } else {
        0.0
    }
}

/// Full outcome of a simulated period.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub ledger: Vec<HourlyFlows>,
    pub summary: YearSummary,
    pub interruptible_fraction: f64,
}

/// Folds [`dispatch_hour`] over `hours` inputs, handing each hour's flows to `sink`.
pub fn run_hours<I, F>(
    inputs: I,
    sizes: &SizingVector,
    policy: &ScenarioPolicy,
    cat: &DeviceCatalog,
    initial_tank_fraction: f64,
    mut sink: F,
) -> YearSummary
where
    I: IntoIterator<Item = HourInput>,
    F: FnMut(&HourlyFlows),
{
    let mut tank = TankState::at_fraction(sizes.m_tank, initial_tank_fraction, cat);
    let mut queue = DeferredQueue::new();
    let mut summary = YearSummary::opening(&tank);
    for (hour, input) in inputs.into_iter().enumerate() {
        let (flows, next_tank, next_queue) =
            dispatch_hour(hour, tank, &input, sizes, policy, cat, &queue);
        summary.add(&flows);
        sink(&flows);
        tank = next_tank;
        queue = next_queue;
    }
    summary.pending_hydrogen_end = queue.total();
    summary
}

/// Simulates an arbitrary sequence of hours (hour 0 is midnight).
pub fn simulate_hours(
    inputs: &[HourInput],
    sizes: &SizingVector,
    policy: &ScenarioPolicy,
    cat: &DeviceCatalog,
    initial_tank_fraction: f64,
) -> SimulationResult {
    let mut ledger = Vec::with_capacity(inputs.len());
    let summary = run_hours(
        inputs.iter().copied(),
        sizes,
        policy,
        cat,
        initial_tank_fraction,
        |f| ledger.push(*f),
    );
    SimulationResult {
        ledger,
        summary,
        interruptible_fraction: policy.interruptible_fraction,
    }
}

fn year_inputs(profiles: &Profiles) -> impl Iterator<Item = HourInput> + '_ {
    (0..HOURS_PER_YEAR).map(move |h| HourInput::from_profiles(profiles, h))
}

/// One year of operation with the full hourly ledger.
pub fn simulate_year(
    profiles: &Profiles,
    sizes: &SizingVector,
    policy: &ScenarioPolicy,
    cat: &DeviceCatalog,
    initial_tank_fraction: f64,
) -> SimulationResult {
    let mut ledger = Vec::with_capacity(HOURS_PER_YEAR);
    let summary = run_hours(
        year_inputs(profiles),
        sizes,
        policy,
        cat,
        initial_tank_fraction,
        |f| ledger.push(*f),
    );
    SimulationResult {
        ledger,
        summary,
        interruptible_fraction: policy.interruptible_fraction,
    }
}

/// One year of operation keeping only the aggregates.
pub fn simulate_year_summary(
    profiles: &Profiles,
    sizes: &SizingVector,
    policy: &ScenarioPolicy,
    cat: &DeviceCatalog,
    initial_tank_fraction: f64,
) -> YearSummary {
    run_hours(
        year_inputs(profiles),
        sizes,
        policy,
        cat,
        initial_tank_fraction,
        |_| {},
    )
}
