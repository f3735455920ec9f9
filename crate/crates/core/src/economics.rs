//! Net-present-cost accounting, reliability indices and the feasibility rule.

use serde::{Deserialize, Serialize};

use crate::dispatch::{
    loss_ratio, simulate_year_summary, ScenarioPolicy, SimulationResult, YearSummary,
};
use crate::model::{DeviceCatalog, DeviceEconomics, Profiles, SizingVector, HOURS_PER_YEAR};

/// Reliability threshold applied to both loss factors.
pub const ELF_LIMIT: f64 = 0.01;

/// Externality cost and boiler emission factor of one pollutant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionFactor {
    pub pollutant: String,
    /// $ per lb.
    pub externality_cost: f64,
    /// lb per MWh.
    pub boiler_factor: f64,
}

impl EmissionFactor {
    fn new(pollutant: &str, externality_cost: f64, boiler_factor: f64) -> Self {
        EmissionFactor {
            pollutant: pollutant.to_string(),
            externality_cost,
            boiler_factor,
        }
    }
}

/// Which boiler energy the emission factors apply to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmissionBasis {
    #[default]
    HeatOutput,
    FuelInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FinanceParams {
    /// Real interest rate.
    pub interest_rate: f64,
    /// Project horizon, years.
    pub project_years: u32,
    /// $ per kWh of shed uninterruptible load.
    pub penalty_uninterruptible: f64,
    /// $ per kWh of shed interruptible load.
    pub penalty_interruptible: f64,
    /// $ per kWh of unserved heat.
    pub penalty_thermal: f64,
    /// $ per kWh of unserved refilling demand.
    pub penalty_hydrogen: f64,
    pub emissions: Vec<EmissionFactor>,
    pub emission_basis: EmissionBasis,
}

impl Default for FinanceParams {
    fn default() -> Self {
        FinanceParams {
            interest_rate: 0.06,
            project_years: 20,
            penalty_uninterruptible: 5.6,
            penalty_interruptible: 0.56,
            penalty_thermal: 5.6,
            penalty_hydrogen: 0.56,
            emissions: vec![
                EmissionFactor::new("NOx", 4.2, 5.06),
                EmissionFactor::new("SO2", 0.99, 11.9),
                EmissionFactor::new("CO2", 0.014, 1965.0),
            ],
            emission_basis: EmissionBasis::HeatOutput,
        }
    }
}

impl FinanceParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.interest_rate > 0.0) || !self.interest_rate.is_finite() {
            return Err(format!(
                "interest_rate must be > 0, got {}",
                self.interest_rate
            ));
        }
        if self.project_years < 1 {
            return Err("project_years must be >= 1".into());
        }
        let rates = [
            self.penalty_uninterruptible,
            self.penalty_interruptible,
            self.penalty_thermal,
            self.penalty_hydrogen,
        ];
        if rates.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err("penalty rates must be finite and >= 0".into());
        }
        for e in &self.emissions {
            if !(e.externality_cost >= 0.0 && e.boiler_factor >= 0.0) {
                return Err(format!("emission entry {} must be >= 0", e.pollutant));
            }
        }
        Ok(())
    }

    pub fn pwa(&self) -> f64 {
        pwa(self.interest_rate, self.project_years)
    }

    /// $ of externalities per MWh of boiler energy.
    pub fn emission_cost_per_mwh(&self) -> f64 {
        self.emissions
            .iter()
            .map(|e| e.externality_cost * e.boiler_factor)
            .sum()
    }
}

/// Present worth of a uniform annual payment of 1 over `years` years.
pub fn pwa(ir: f64, years: u32) -> f64 {
    let growth = (1.0 + ir).powi(years as i32);
    (growth - 1.0) / (ir * growth)
}

/// Discount factor sum over the replacements that fall strictly inside the horizon.
pub fn replacement_present_worth(lifetime: f64, years: u32, ir: f64) -> f64 {
    let horizon = years as f64;
    let mut k = 0.0;
    let mut n = 1u32;
    loop {
        let at = n as f64 * lifetime;
        if at >= horizon {
            break;
        }
        k += 1.0 / (1.0 + ir).powf(at);
        n += 1;
    }
    k
}

/// Net present cost of `units` units (or kW / kg) of a device.
pub fn device_npc(units: f64, econ: &DeviceEconomics, fin: &FinanceParams) -> f64 {
    let k = replacement_present_worth(econ.lifetime, fin.project_years, fin.interest_rate);
    units * (econ.capital_cost + econ.replacement_cost * k + econ.maintenance_cost * fin.pwa())
}

/// Emission externalities for `boiler_energy_kwh` per year.
pub fn emission_npc_from_total(boiler_energy_kwh: f64, fin: &FinanceParams) -> f64 {
    fin.pwa() * fin.emission_cost_per_mwh() * (boiler_energy_kwh / 1000.0)
}

/// Emission externalities of an hourly boiler series (kW, one value per hour).
pub fn emission_npc(boiler_by_hour: &[f64], fin: &FinanceParams) -> f64 {
    emission_npc_from_total(boiler_by_hour.iter().sum(), fin)
}

/// Fuel bill for `boiler_heat_kwh` of boiler heat per year.
pub fn fuel_npc_from_total(boiler_heat_kwh: f64, fin: &FinanceParams, cat: &DeviceCatalog) -> f64 {
    fin.pwa() * (boiler_heat_kwh / cat.eta_boiler()) * cat.boiler_fuel_cost
}

pub fn fuel_npc(boiler_heat_by_hour: &[f64], fin: &FinanceParams, cat: &DeviceCatalog) -> f64 {
    fuel_npc_from_total(boiler_heat_by_hour.iter().sum(), fin, cat)
}

/// Penalty NPCs: (interruptible, uninterruptible, thermal, hydrogen).
///
/// Refills still queued at the end of the year count as unserved.
pub fn penalty_npcs(summary: &YearSummary, fin: &FinanceParams) -> (f64, f64, f64, f64) {
    let pwa = fin.pwa();
    (
        pwa * fin.penalty_interruptible * summary.shed_interruptible,
        pwa * fin.penalty_uninterruptible * summary.shed_uninterruptible,
        pwa * fin.penalty_thermal * summary.unserved_thermal,
        pwa * fin.penalty_hydrogen * (summary.unserved_hydrogen + summary.pending_hydrogen_end),
    )
}

/// Equivalent loss factors (electric, thermal) from the hourly ledger.
pub fn elf_indices(result: &SimulationResult) -> (f64, f64) {
    let mut el = 0.0;
    let mut th = 0.0;
    for f in &result.ledger {
        el += loss_ratio(f.shed_uninterruptible, f.p_uninterruptible);
        th += loss_ratio(f.unserved_thermal, f.q_load);
    }
    (el / HOURS_PER_YEAR as f64, th / HOURS_PER_YEAR as f64)
}

/// Equivalent loss factors from the running sums of a summary.
pub fn elf_from_summary(summary: &YearSummary) -> (f64, f64) {
    (
        summary.elf_el_sum / HOURS_PER_YEAR as f64,
        summary.elf_th_sum / HOURS_PER_YEAR as f64,
    )
}

/// Every term of the objective, $.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub npc_pv: f64,
    pub npc_wt: f64,
    pub npc_el: f64,
    pub npc_tank: f64,
    pub npc_fc: f64,
    pub npc_boiler: f64,
    pub npc_heater: f64,
    pub npc_conv: f64,
    pub npc_sta: f64,
    pub npc_em: f64,
    pub npc_fuel: f64,
    pub npc_pi: f64,
    pub npc_puni: f64,
    pub npc_q: f64,
    pub npc_h: f64,
    pub total: f64,
}

impl CostBreakdown {
    /// Report labels of the fifteen terms, then the total.
    pub const LABELS: [&'static str; 16] = [
        "NPC_PV",
        "NPC_WT",
        "NPC_el",
        "NPC_tank",
        "NPC_FC",
        "NPC_boiler",
        "NPC_heater",
        "NPC_conv",
        "NPC_sta",
        "NPC_em",
        "NPC_fuel",
        "NPC_Pi",
        "NPC_Puni",
        "NPC_Q",
        "NPC_h",
        "NPC",
    ];

    pub fn terms(&self) -> [f64; 15] {
        [
            self.npc_pv,
            self.npc_wt,
            self.npc_el,
            self.npc_tank,
            self.npc_fc,
            self.npc_boiler,
            self.npc_heater,
            self.npc_conv,
            self.npc_sta,
            self.npc_em,
            self.npc_fuel,
            self.npc_pi,
            self.npc_puni,
            self.npc_q,
            self.npc_h,
        ]
    }

    /// Builds a breakdown from the fifteen terms; the total is their sum.
    pub fn from_terms(t: [f64; 15]) -> Self {
        CostBreakdown {
            npc_pv: t[0],
            npc_wt: t[1],
            npc_el: t[2],
            npc_tank: t[3],
            npc_fc: t[4],
            npc_boiler: t[5],
            npc_heater: t[6],
            npc_conv: t[7],
            npc_sta: t[8],
            npc_em: t[9],
            npc_fuel: t[10],
            npc_pi: t[11],
            npc_puni: t[12],
            npc_q: t[13],
            npc_h: t[14],
            total: t.iter().sum(),
        }
    }

    /// Capital-side terms (devices and station).
    pub fn equipment(&self) -> f64 {
        self.terms()[..9].iter().sum()
    }

    /// The four unserved-energy penalty terms.
    pub fn penalties(&self) -> f64 {
        self.npc_pi + self.npc_puni + self.npc_q + self.npc_h
    }
}

/// Outcome of the design-acceptance rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub elf_el: f64,
    pub elf_th: f64,
    pub tank_initial: f64,
    pub tank_end: f64,
    pub tank_capacity_energy: f64,
}

impl Feasibility {
    pub fn elf_el_ok(&self) -> bool {
        self.elf_el <= ELF_LIMIT
    }
    pub fn elf_th_ok(&self) -> bool {
        self.elf_th <= ELF_LIMIT
    }
    pub fn tank_ok(&self) -> bool {
        self.tank_end >= self.tank_initial
    }
    pub fn is_feasible(&self) -> bool {
        self.elf_el_ok() && self.elf_th_ok() && self.tank_ok()
    }

    /// Sum of constraint violations; zero exactly when feasible.
    pub fn violation(&self) -> f64 {
        let tank = if self.tank_capacity_energy > 0.0 {
            ((self.tank_initial - self.tank_end) / self.tank_capacity_energy).max(0.0)
        } else {
            0.0
        };
        (self.elf_el - ELF_LIMIT).max(0.0) + (self.elf_th - ELF_LIMIT).max(0.0) + tank
    }
}

/// Capital-side NPCs of a sizing, in objective order (PV through station).
pub fn equipment_npcs(sizes: &SizingVector, cat: &DeviceCatalog, fin: &FinanceParams) -> [f64; 9] {
    [
        device_npc(sizes.n_pv as f64, &cat.pv, fin),
        device_npc(sizes.n_wt as f64, &cat.wind_turbine, fin),
        device_npc(sizes.p_electrolyzer, &cat.electrolyzer, fin),
        device_npc(sizes.m_tank, &cat.hydrogen_tank, fin),
        device_npc(sizes.p_fuelcell, &cat.fuel_cell, fin),
        device_npc(sizes.p_boiler, &cat.boiler, fin),
        device_npc(sizes.p_heater, &cat.heater, fin),
        device_npc(sizes.p_converter, &cat.converter, fin),
        device_npc(1.0, &cat.station_compressor, fin),
    ]
}

/// Prices a simulated year.
pub fn assess(
    summary: &YearSummary,
    sizes: &SizingVector,
    cat: &DeviceCatalog,
    fin: &FinanceParams,
) -> (CostBreakdown, Feasibility) {
    let eq = equipment_npcs(sizes, cat, fin);
    let emission_energy = match fin.emission_basis {
        EmissionBasis::HeatOutput => summary.boiler_heat,
        EmissionBasis::FuelInput => summary.boiler_fuel,
    };
    let (pi, puni, q, h) = penalty_npcs(summary, fin);
    let costs = CostBreakdown::from_terms([
        eq[0],
        eq[1],
        eq[2],
        eq[3],
        eq[4],
        eq[5],
        eq[6],
        eq[7],
        eq[8],
        emission_npc_from_total(emission_energy, fin),
        fuel_npc_from_total(summary.boiler_heat, fin, cat),
        pi,
        puni,
        q,
        h,
    ]);
    let (elf_el, elf_th) = elf_from_summary(summary);
    let feas = Feasibility {
        elf_el,
        elf_th,
        tank_initial: summary.tank_initial,
        tank_end: summary.tank_end,
        tank_capacity_energy: summary.tank_capacity_energy,
    };
    (costs, feas)
}

/// A priced design point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub costs: CostBreakdown,
    pub feasibility: Feasibility,
    pub summary: YearSummary,
}

/// Simulates a year for `sizes` and prices it.
pub fn evaluate(
    sizes: &SizingVector,
    profiles: &Profiles,
    policy: &ScenarioPolicy,
    cat: &DeviceCatalog,
    fin: &FinanceParams,
    initial_tank_fraction: f64,
) -> Evaluation {
    let summary = simulate_year_summary(profiles, sizes, policy, cat, initial_tank_fraction);
    let (costs, feasibility) = assess(&summary, sizes, cat, fin);
    Evaluation {
        costs,
        feasibility,
        summary,
    }
}
