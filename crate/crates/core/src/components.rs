//! Per-device physical models. Every function here is pure: inputs plus
//! catalog constants in, power or energy out. Ratings are enforced by the
//! dispatch layer, not here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DeviceCatalog, TankDischargeMode};

/// PV array output in kW for plane irradiance `g_t` (W/m²) over `n_pv` modules.
pub fn pv_power(g_t: f64, n_pv: u32, cat: &DeviceCatalog) -> f64 {
    cat.eta_pv() * n_pv as f64 * cat.pv_module_area * g_t / 1000.0
}

/// Power curve of a single turbine, kW.
///
/// Cubic between cut-in and rated speed, then a straight line from the rated
/// power at the rated speed to the furl power at cut-out. Zero outside
/// `[cut_in, cut_out]`.
pub fn wind_power_per_unit(v: f64, cat: &DeviceCatalog) -> f64 {
    let (v_in, v_r, v_out) = (cat.wind_cut_in, cat.wind_rated_speed, cat.wind_cut_out);
    let p_r = cat.wind_rated_power;
    if v < v_in || v > v_out {
        0.0
    } else if v < v_r {
        p_r * ((v - v_in) / (v_r - v_in)).powi(3)
    } else if v_out > v_r {
        p_r + (cat.furl_power() - p_r) * (v - v_r) / (v_out - v_r)
    } else {
        p_r
    }
}

/// Wind farm output in kW for `n_wt` turbines.
pub fn wind_farm_power(v: f64, n_wt: u32, cat: &DeviceCatalog) -> f64 {
    cat.eta_wind() * n_wt as f64 * wind_power_per_unit(v, cat)
}

/// Electrical and thermal output (kW) of the fuel cell for a hydrogen feed in kW.
pub fn fuel_cell_outputs(p_tank_fc: f64, cat: &DeviceCatalog) -> (f64, f64) {
    (p_tank_fc * cat.eta_fc_el(), p_tank_fc * cat.eta_fc_th())
}

/// Hydrogen (kW, HHV) produced from `p_ren_el` kW of electricity.
pub fn electrolyzer_output(p_ren_el: f64, cat: &DeviceCatalog) -> f64 {
    p_ren_el * cat.eta_el()
}

/// Heat (kW) from `p_ren_h` kW of electricity.
pub fn heater_output(p_ren_h: f64, cat: &DeviceCatalog) -> f64 {
    p_ren_h * cat.eta_heater()
}

/// Fuel input (kW) and its hourly cost ($) for a boiler heat output of `q_needed` kW.
pub fn boiler_fuel_for_heat(q_needed: f64, cat: &DeviceCatalog) -> (f64, f64) {
    let fuel_in = q_needed / cat.eta_boiler();
    (fuel_in, fuel_in * cat.boiler_fuel_cost)
}

/// Tank-side hydrogen draw needed to deliver `h_delivered` kWh to vehicles.
pub fn station_tank_draw(h_delivered: f64, cat: &DeviceCatalog) -> f64 {
    h_delivered / cat.eta_station()
}

/// Stored hydrogen mass in kg.
pub fn tank_mass(energy: f64, cat: &DeviceCatalog) -> f64 {
    energy / cat.hydrogen_hhv
}

/// Energy that actually leaves the tank when `draw` kWh is withdrawn.
pub fn withdrawal_cost(draw: f64, cat: &DeviceCatalog) -> f64 {
    match cat.tank_discharge_efficiency_mode {
        TankDischargeMode::Multiply => draw * cat.eta_storage(),
        TankDischargeMode::Divide => draw / cat.eta_storage(),
    }
}

/// Largest withdrawal whose [`withdrawal_cost`] fits in `available` kWh.
pub fn max_withdrawal(available: f64, cat: &DeviceCatalog) -> f64 {
    if available <= 0.0 {
        return 0.0;
    }
    match cat.tank_discharge_efficiency_mode {
        TankDischargeMode::Multiply => available / cat.eta_storage(),
        TankDischargeMode::Divide => available * cat.eta_storage(),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TankError {
    #[error("tank energy {energy} kWh outside [{min}, {max}]")]
    BoundsViolation { energy: f64, min: f64, max: f64 },
}

/// Hydrogen tank contents. Energy is kWh on an HHV basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TankState {
    pub energy: f64,
    pub capacity_kg: f64,
    pub min_fraction: f64,
    /// kWh per kg used to convert the capacity.
    pub hhv: f64,
}

/// Absolute slack allowed on the tank bounds, scaled by capacity.
const TANK_BOUND_SLACK: f64 = 1e-9;

impl TankState {
    /// A tank of `capacity_kg` filled to `fraction` of capacity (clamped to the floor).
    pub fn at_fraction(capacity_kg: f64, fraction: f64, cat: &DeviceCatalog) -> Self {
        let mut tank = TankState {
            energy: 0.0,
            capacity_kg,
            min_fraction: cat.tank_min_fraction,
            hhv: cat.hydrogen_hhv,
        };
        tank.energy = (fraction.clamp(0.0, 1.0) * tank.capacity_energy()).max(tank.floor_energy());
        tank
    }

    pub fn capacity_energy(&self) -> f64 {
        self.capacity_kg * self.hhv
    }

    pub fn floor_energy(&self) -> f64 {
        self.min_fraction * self.capacity_energy()
    }

    /// Room left before the tank is full, kWh.
    pub fn headroom(&self) -> f64 {
        (self.capacity_energy() - self.energy).max(0.0)
    }

    /// Energy above the extraction floor, kWh.
    pub fn extractable(&self) -> f64 {
        (self.energy - self.floor_energy()).max(0.0)
    }

    pub fn mass(&self) -> f64 {
        self.energy / self.hhv
    }

    pub fn check_bounds(&self) -> Result<(), TankError> {
        let (min, max) = (self.floor_energy(), self.capacity_energy());
        let slack = TANK_BOUND_SLACK * max.max(1.0);
        if self.energy.is_finite() && self.energy >= min - slack && self.energy <= max + slack {
            Ok(())
        } else {
            Err(TankError::BoundsViolation {
                energy: self.energy,
                min,
                max,
            })
        }
    }
}

/// One-hour tank balance: charge enters as is, both withdrawals pass through
/// the storage efficiency.
pub fn tank_step(
    state: TankState,
    charge: f64,
    discharge_fc: f64,
    discharge_sta: f64,
    cat: &DeviceCatalog,
) -> Result<TankState, TankError> {
    let energy = state.energy + charge - withdrawal_cost(discharge_fc + discharge_sta, cat);
    let next = TankState { energy, ..state };
    next.check_bounds()?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cat() -> DeviceCatalog {
        DeviceCatalog::default()
    }

    fn rel_eq(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * b.abs().max(1e-300) || a == b
    }

    #[test]
    fn pv_examples() {
        let c = cat();
        assert_eq!(pv_power(0.0, 100, &c), 0.0);
        // 0.154 * 1.9 m² * 1 kW/m²
        assert!(rel_eq(pv_power(1000.0, 1, &c), 0.2926));
        assert!(rel_eq(pv_power(500.0, 2, &c), 0.2926));
    }

    #[test]
    fn wind_curve_examples() {
        let c = cat();
        assert_eq!(wind_power_per_unit(2.0, &c), 0.0);
        assert!(rel_eq(wind_power_per_unit(11.0, &c), 1.0));
        assert_eq!(wind_power_per_unit(26.0, &c), 0.0);
        assert!(rel_eq(wind_power_per_unit(6.75, &c), 0.125));
        assert_eq!(wind_power_per_unit(25.0, &c), 1.0);
        assert_eq!(wind_power_per_unit(2.5, &c), 0.0);
    }

    #[test]
    fn wind_curve_tapers_to_furl_power() {
        let mut c = cat();
        c.wind_furl_power = Some(0.5);
        assert!(rel_eq(wind_power_per_unit(18.0, &c), 0.75));
        assert!(rel_eq(wind_power_per_unit(25.0, &c), 0.5));
    }

    #[test]
    fn wind_farm_examples() {
        let c = cat();
        assert!(rel_eq(wind_farm_power(11.0, 232, &c), 232.0));
        assert_eq!(wind_farm_power(0.0, 50, &c), 0.0);
        assert!(rel_eq(wind_farm_power(6.75, 4, &c), 0.5));
    }

    #[test]
    fn fuel_cell_examples() {
        let c = cat();
        let (e, h) = fuel_cell_outputs(100.0, &c);
        assert!(rel_eq(e, 40.0) && rel_eq(h, 50.0));
        assert_eq!(fuel_cell_outputs(0.0, &c), (0.0, 0.0));
        let (e, h) = fuel_cell_outputs(1.0, &c);
        assert!(rel_eq(e, 0.4) && rel_eq(h, 0.5));
    }

    #[test]
    fn electrolyzer_heater_boiler_station_examples() {
        let c = cat();
        assert!(rel_eq(electrolyzer_output(100.0, &c), 75.0));
        assert_eq!(electrolyzer_output(0.0, &c), 0.0);
        assert!(rel_eq(electrolyzer_output(1498.0, &c), 1123.5));

        assert!(rel_eq(heater_output(100.0, &c), 90.0));
        assert_eq!(heater_output(0.0, &c), 0.0);
        assert!(rel_eq(heater_output(31.87, &c), 28.683));

        let (fuel, cost) = boiler_fuel_for_heat(94.0, &c);
        assert!(rel_eq(fuel, 100.0) && rel_eq(cost, 3.0));
        assert_eq!(boiler_fuel_for_heat(0.0, &c), (0.0, 0.0));
        let (fuel, cost) = boiler_fuel_for_heat(47.0, &c);
        assert!(rel_eq(fuel, 50.0) && rel_eq(cost, 1.5));

        assert!(rel_eq(station_tank_draw(49.0, &c), 100.0));
        assert_eq!(station_tank_draw(0.0, &c), 0.0);
        assert!(rel_eq(station_tank_draw(5.0 * 39.7, &c), 198.5 / 0.49));
    }

    #[test]
    fn tank_mass_examples() {
        let c = cat();
        assert!(rel_eq(tank_mass(39.7, &c), 1.0));
        assert_eq!(tank_mass(0.0, &c), 0.0);
        // 62063.9 / 39.7
        assert!(rel_eq(tank_mass(62063.9, &c), 1563.322418136020));
    }

    fn big_tank(energy: f64) -> TankState {
        TankState {
            energy,
            capacity_kg: 10.0,
            min_fraction: 0.05,
            hhv: 39.7,
        }
    }

    #[test]
    fn tank_step_examples() {
        let c = cat();
        assert_eq!(
            tank_step(big_tank(100.0), 10.0, 0.0, 0.0, &c)
                .unwrap()
                .energy,
            110.0
        );
        assert!(rel_eq(
            tank_step(big_tank(100.0), 0.0, 10.0, 0.0, &c)
                .unwrap()
                .energy,
            90.5
        ));
        assert_eq!(
            tank_step(big_tank(123.4), 0.0, 0.0, 0.0, &c)
                .unwrap()
                .energy,
            123.4
        );
    }

    #[test]
    fn tank_step_divide_mode() {
        let mut c = cat();
        c.tank_discharge_efficiency_mode = TankDischargeMode::Divide;
        let e = tank_step(big_tank(100.0), 0.0, 9.5, 0.0, &c)
            .unwrap()
            .energy;
        assert!(rel_eq(e, 90.0));
        assert!(rel_eq(max_withdrawal(withdrawal_cost(7.0, &c), &c), 7.0));
    }

    #[test]
    fn tank_step_flags_bound_violations() {
        let c = cat();
        // capacity 397 kWh, floor 19.85 kWh
        assert!(matches!(
            tank_step(big_tank(390.0), 10.0, 0.0, 0.0, &c),
            Err(TankError::BoundsViolation { .. })
        ));
        assert!(tank_step(big_tank(25.0), 0.0, 10.0, 0.0, &c).is_err());
    }

    #[test]
    fn tank_at_fraction_respects_floor() {
        let c = cat();
        let t = TankState::at_fraction(100.0, 0.0, &c);
        assert_eq!(t.energy, t.floor_energy());
        let t = TankState::at_fraction(100.0, 0.5, &c);
        assert!(rel_eq(t.energy, 1985.0));
        assert!(rel_eq(t.headroom(), 1985.0));
    }

    proptest! {
        #[test]
        fn device_models_are_monotone(a in 0.0f64..5000.0, b in 0.0f64..5000.0) {
            let c = cat();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(pv_power(lo, 7, &c) <= pv_power(hi, 7, &c));
            prop_assert!(electrolyzer_output(lo, &c) <= electrolyzer_output(hi, &c));
            prop_assert!(heater_output(lo, &c) <= heater_output(hi, &c));
            prop_assert!(fuel_cell_outputs(lo, &c).0 <= fuel_cell_outputs(hi, &c).0);
            prop_assert!(boiler_fuel_for_heat(lo, &c).0 <= boiler_fuel_for_heat(hi, &c).0);
            prop_assert!(electrolyzer_output(hi, &c) <= hi);
            prop_assert!(heater_output(hi, &c) <= hi);
            let (e, h) = fuel_cell_outputs(hi, &c);
            prop_assert!(e + h <= hi);
        }

        #[test]
        fn wind_curve_shape(v in 0.0f64..40.0, dv in 0.0f64..1.0) {
            let c = cat();
            let p = wind_power_per_unit(v, &c);
            prop_assert!((0.0..=1.0).contains(&p));
            if v + dv <= c.wind_cut_out && v >= c.wind_cut_in {
                prop_assert!(wind_power_per_unit(v + dv, &c) >= p);
            }
            if v < c.wind_cut_in || v > c.wind_cut_out {
                prop_assert_eq!(p, 0.0);
            }
        }

        #[test]
        fn tank_step_follows_balance(e in 50.0f64..300.0, ch in 0.0f64..50.0, fc in 0.0f64..20.0, sta in 0.0f64..20.0) {
            let c = cat();
            let t = big_tank(e);
            if let Ok(next) = tank_step(t, ch, fc, sta, &c) {
                prop_assert_eq!(next.energy, e + ch - (fc + sta) * 0.95);
            }
        }
    }

    #[test]
    fn wind_curve_continuous_at_rated_speed() {
        let c = cat();
        let below = wind_power_per_unit(11.0 - 1e-9, &c);
        assert!((below - 1.0).abs() < 1e-9);
        assert_eq!(wind_power_per_unit(11.0, &c), 1.0);
    }
}
