//! Brute-force hour-by-hour re-implementation of the dispatch rules, written
//! with plain arithmetic and literal constants, and the 24-hour toy instance
//! it is checked on.

use mgsize_core::dispatch::{simulate_hours, HourInput, ScenarioPolicy};
use mgsize_core::model::{DeviceCatalog, SizingVector};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Row {
    pub p_pv: f64,
    pub p_wg: f64,
    pub served: f64,
    pub p_ren_el: f64,
    pub p_el_tank: f64,
    pub p_ren_h: f64,
    pub curtailed: f64,
    pub p_tank_fc: f64,
    pub p_fc_conv: f64,
    pub q_fc_tl: f64,
    pub q_fc_vented: f64,
    pub q_h_tl: f64,
    pub q_b_tl: f64,
    pub boiler_fuel: f64,
    pub shed_i: f64,
    pub shed_uni: f64,
    pub unserved_th: f64,
    pub h_delivered: f64,
    pub p_tank_sta: f64,
    pub unserved_h2: f64,
    pub deferred_h2: f64,
    pub tank_end: f64,
}

pub struct Toy {
    pub g: [f64; 24],
    pub v: [f64; 24],
    pub p: [f64; 24],
    pub q: [f64; 24],
    pub h: [f64; 24],
}

pub fn toy() -> Toy {
    let g = [
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 50.0, 200.0, 400.0, 600.0, 800.0, 900.0, 950.0, 900.0, 800.0,
        600.0, 400.0, 200.0, 50.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    ];
    let v = [
        3.0, 2.0, 1.0, 0.0, 4.5, 6.75, 8.0, 11.0, 12.0, 26.0, 9.0, 5.0, 3.0, 2.6, 7.0, 10.0, 14.0,
        20.0, 25.0, 6.0, 4.0, 2.0, 2.4, 3.5,
    ];
    let p = [
        30.0, 28.0, 27.0, 26.0, 27.0, 32.0, 45.0, 60.0, 55.0, 50.0, 48.0, 47.0, 52.0, 50.0, 48.0,
        50.0, 58.0, 70.0, 85.0, 90.0, 80.0, 60.0, 45.0, 35.0,
    ];
    let q = [
        40.0, 38.0, 36.0, 35.0, 36.0, 45.0, 60.0, 55.0, 40.0, 30.0, 25.0, 20.0, 18.0, 18.0, 20.0,
        22.0, 30.0, 45.0, 55.0, 60.0, 58.0, 52.0, 46.0, 42.0,
    ];
    let h = [
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 40.0, 90.0, 120.0, 150.0, 60.0, 80.0, 200.0, 250.0,
        30.0, 120.0, 60.0, 20.0, 0.0, 0.0, 10.0, 0.0, 0.0,
    ];
    Toy { g, v, p, q, h }
}

pub fn toy_sizes() -> SizingVector {
    SizingVector {
        n_pv: 400,
        n_wt: 40,
        p_electrolyzer: 30.0,
        m_tank: 12.0,
        p_fuelcell: 35.0,
        p_converter: 80.0,
        p_boiler: 30.0,
        p_heater: 10.0,
    }
}

pub fn wind_unit(v: f64) -> f64 {
    if v < 2.5 || v > 25.0 {
        0.0
    } else if v < 11.0 {
        let x = (v - 2.5) / (11.0 - 2.5);
        x * x * x
    } else {
        1.0
    }
}

/// Literal transcription of the hourly rules with the default constants.
pub fn oracle(t: &Toy, s: &SizingVector, managed: bool, initial_fraction: f64) -> Vec<Row> {
    let hhv = 39.7;
    let cap = s.m_tank * hhv;
    let floor = 0.05 * cap;
    let mut e = (initial_fraction * cap).max(floor);
    let f_int = if managed { 0.15 } else { 0.0 };
    // (age, amount), oldest first
    let mut queue: Vec<(u32, f64)> = Vec::new();
    let mut rows = Vec::new();

    for i in 0..24 {
        let mut r = Row::default();
        r.p_pv = 0.154 * s.n_pv as f64 * 1.9 * t.g[i] / 1000.0;
        r.p_wg = 1.0 * s.n_wt as f64 * wind_unit(t.v[i]);
        let ren = r.p_pv + r.p_wg;
        let servable = t.p[i].min(s.p_converter);
        let dc_need = servable / 0.9;
        let mut fc_heat = 0.0;
        let mut stressed = false;
        if ren >= dc_need {
            r.served = servable;
            let surplus = ren - dc_need;
            let headroom = (cap - e).max(0.0);
            r.p_ren_el = surplus.min(s.p_electrolyzer.min(headroom / 0.75));
            r.p_el_tank = r.p_ren_el * 0.75;
            let rest = surplus - r.p_ren_el;
            r.p_ren_h = rest.min(s.p_heater.min(t.q[i] / 0.9));
            r.q_h_tl = r.p_ren_h * 0.9;
            r.curtailed = rest - r.p_ren_h;
        } else {
            let deficit = dc_need - ren;
            let avail = (e - floor).max(0.0);
            let limit = (s.p_fuelcell / 0.4).min(if avail > 0.0 { avail / 0.95 } else { 0.0 });
            let want = deficit / 0.4;
            if want <= limit {
                r.p_tank_fc = want;
                r.p_fc_conv = want * 0.4;
                r.served = servable;
            } else {
                r.p_tank_fc = limit;
                r.p_fc_conv = limit * 0.4;
                r.served = servable.min((ren + r.p_fc_conv) * 0.9);
                stressed = true;
            }
            fc_heat = r.p_tank_fc * 0.5;
        }
        let shed = (t.p[i] - r.served).max(0.0);
        r.shed_i = shed.min(f_int * t.p[i]);
        r.shed_uni = shed - r.shed_i;

        r.q_fc_tl = fc_heat.min(t.q[i]);
        r.q_fc_vented = fc_heat - r.q_fc_tl;
        let remaining = (t.q[i] - r.q_fc_tl - r.q_h_tl).max(0.0);
        r.q_b_tl = remaining.min(s.p_boiler);
        r.boiler_fuel = r.q_b_tl / 0.94;
        r.unserved_th = remaining - r.q_b_tl;

        let after = e + r.p_el_tank - floor;
        let sta_draw = ((if after > 0.0 { after / 0.95 } else { 0.0 }) - r.p_tank_fc).max(0.0);
        let deliverable = 200.0f64.min(sta_draw * 0.49);
        let hod = i % 24;
        let in_window = hod >= 21 || hod <= 5;
        let defer_mode = managed && !in_window;
        let allowance = if defer_mode && stressed {
            0.0
        } else {
            deliverable
        };

        let mut items = queue.clone();
        items.push((0, t.h[i]));
        let total: f64 = items.iter().map(|x| x.1).sum();
        let deferrable_cap = if defer_mode { total.min(200.0) } else { 0.0 };
        let mut left_serve = allowance;
        let mut left_defer = (deferrable_cap - total.min(allowance)).max(0.0);
        let mut next = Vec::new();
        for (age, amount) in items {
            let take = amount.min(left_serve);
            left_serve -= take;
            r.h_delivered += take;
            let rest = amount - take;
            let d = rest.min(left_defer);
            left_defer -= d;
            let lost = rest - d;
            r.unserved_h2 += lost;
            if d > 0.0 {
                if age + 1 > 12 {
                    r.unserved_h2 += d;
                } else {
                    next.push((age + 1, d));
                    r.deferred_h2 += d;
                }
            }
        }
        queue = next;
        r.p_tank_sta = r.h_delivered / 0.49;

        e = e + r.p_el_tank - (r.p_tank_fc + r.p_tank_sta) * 0.95;
        r.tank_end = e;
        rows.push(r);
    }
    rows
}

pub fn inputs(t: &Toy) -> Vec<HourInput> {
    (0..24)
        .map(|i| HourInput {
            irradiance: t.g[i],
            wind_speed: t.v[i],
            p_load: t.p[i],
            q_load: t.q[i],
            h_demand: t.h[i],
        })
        .collect()
}

/// Kernel ledger projected onto the oracle's columns.
pub fn kernel_rows(managed: bool, initial: f64) -> Vec<Row> {
    let t = toy();
    let policy = if managed {
        ScenarioPolicy::managed()
    } else {
        ScenarioPolicy::fixed()
    };
    let result = simulate_hours(
        &inputs(&t),
        &toy_sizes(),
        &policy,
        &DeviceCatalog::default(),
        initial,
    );
    result
        .ledger
        .iter()
        .map(|got| Row {
            p_pv: got.p_pv,
            p_wg: got.p_wg,
            served: got.p_load_served,
            p_ren_el: got.p_ren_el,
            p_el_tank: got.p_el_tank,
            p_ren_h: got.p_ren_h,
            curtailed: got.curtailed,
            p_tank_fc: got.p_tank_fc,
            p_fc_conv: got.p_fc_conv,
            q_fc_tl: got.q_fc_tl,
            q_fc_vented: got.q_fc_vented,
            q_h_tl: got.q_h_tl,
            q_b_tl: got.q_b_tl,
            boiler_fuel: got.boiler_fuel,
            shed_i: got.shed_interruptible,
            shed_uni: got.shed_uninterruptible,
            unserved_th: got.unserved_thermal,
            h_delivered: got.h_delivered,
            p_tank_sta: got.p_tank_sta,
            unserved_h2: got.unserved_hydrogen,
            deferred_h2: got.deferred_hydrogen,
            tank_end: got.tank_energy_end,
        })
        .collect()
}

/// ELF pair by direct summation over the oracle ledger.
pub fn brute_force_elf(managed: bool, initial: f64) -> (f64, f64) {
    let t = toy();
    let rows = oracle(&t, &toy_sizes(), managed, initial);
    let f_uni = if managed { 0.85 } else { 1.0 };
    let mut el = 0.0;
    let mut th = 0.0;
    for (i, r) in rows.iter().enumerate() {
        let uni = f_uni * t.p[i];
        if uni > 0.0 {
            el += r.shed_uni / uni;
        }
        if t.q[i] > 0.0 {
            th += r.unserved_th / t.q[i];
        }
    }
    (el / 8760.0, th / 8760.0)
}
