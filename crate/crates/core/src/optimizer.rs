//! Global-best particle swarm optimization.
//!
//! [`minimize`] works on any [`Objective`]; [`optimize`] wires it to the
//! microgrid cost with an exterior penalty on the reliability and tank rules.
//! Each particle owns its own random stream, derived from the seed and the
//! particle index, and fitness evaluations within an iteration run in
//! parallel, so results do not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispatch::{simulate_year_summary, ScenarioPolicy, YearSummary};
use crate::economics::{assess, CostBreakdown, Feasibility, FinanceParams};
use crate::model::{DeviceCatalog, Profiles, SizingVector};

/// Upper search limits per sizing dimension; lower limits are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SizingBounds {
    pub n_pv: f64,
    pub n_wt: f64,
    pub p_electrolyzer: f64,
    pub m_tank: f64,
    pub p_fuelcell: f64,
    pub p_converter: f64,
    pub p_boiler: f64,
    pub p_heater: f64,
}

impl Default for SizingBounds {
    fn default() -> Self {
        SizingBounds {
            n_pv: 5000.0,
            n_wt: 1000.0,
            p_electrolyzer: 3000.0,
            m_tank: 3000.0,
            p_fuelcell: 1000.0,
            p_converter: 1000.0,
            p_boiler: 1000.0,
            p_heater: 500.0,
        }
    }
}

impl SizingBounds {
    pub fn upper(&self) -> [f64; 8] {
        [
            self.n_pv,
            self.n_wt,
            self.p_electrolyzer,
            self.m_tank,
            self.p_fuelcell,
            self.p_converter,
            self.p_boiler,
            self.p_heater,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Per-dimension speed limit as a fraction of the search range.
    pub max_velocity_fraction: f64,
    /// $ per unit of constraint violation.
    pub penalty_weight: f64,
    pub rng_seed: u64,
    pub bounds: SizingBounds,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            swarm_size: 50,
            iterations: 200,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            max_velocity_fraction: 0.5,
            penalty_weight: 1e10,
            rng_seed: 1,
            bounds: SizingBounds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PsoError {
    #[error("invalid PSO configuration: {0}")]
    Config(String),
}

impl PsoConfig {
    pub fn validate(&self) -> Result<(), PsoError> {
        let bad = |m: String| Err(PsoError::Config(m));
        if self.swarm_size < 2 {
            return bad(format!("swarm_size must be >= 2, got {}", self.swarm_size));
        }
        if self.iterations < 1 {
            return bad("iterations must be >= 1".into());
        }
        if !(self.penalty_weight > 0.0) {
            return bad(format!(
                "penalty_weight must be > 0, got {}",
                self.penalty_weight
            ));
        }
        if !(self.max_velocity_fraction > 0.0) {
            return bad("max_velocity_fraction must be > 0".into());
        }
        for (name, c) in [
            ("inertia", self.inertia),
            ("cognitive", self.cognitive),
            ("social", self.social),
        ] {
            if !(c >= 0.0 && c.is_finite()) {
                return bad(format!("{name} must be finite and >= 0"));
            }
        }
        for (name, u) in SizingVector::NAMES.iter().zip(self.bounds.upper()) {
            if !(u > 0.0 && u.is_finite()) {
                return bad(format!("upper bound of {name} must be > 0"));
            }
        }
        Ok(())
    }
}

/// Fitness of one position. Lower is better.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub fitness: f64,
    pub feasible: bool,
}

pub trait Objective: Sync {
    fn evaluate(&self, position: &[f64]) -> Scored;
}

/// Unconstrained objectives are plain functions and always feasible.
impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn evaluate(&self, position: &[f64]) -> Scored {
        Scored {
            fitness: self(position),
            feasible: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub iteration: usize,
    /// Swarm-best penalized fitness after this iteration.
    pub best_fitness: f64,
    /// Whether that swarm-best position is feasible.
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmResult {
    /// Best feasible position seen, or the best penalized one when no
    /// position was ever feasible.
    pub position: Vec<f64>,
    pub fitness: f64,
    pub feasible_found: bool,
    pub history: Vec<HistoryPoint>,
    pub evaluations: usize,
}

struct Particle {
    x: Vec<f64>,
    v: Vec<f64>,
    best_x: Vec<f64>,
    best: f64,
    rng: ChaCha8Rng,
}

fn reflect(x: &mut f64, v: &mut f64, lo: f64, hi: f64) {
    if *x < lo {
        *x = lo + (lo - *x);
        *v = -*v;
    } else if *x > hi {
        *x = hi - (*x - hi);
        *v = -*v;
    }
    *x = x.clamp(lo, hi);
}

/// Minimizes `objective` over the box `[lower, upper]`.
pub fn minimize<O: Objective + ?Sized>(
    objective: &O,
    lower: &[f64],
    upper: &[f64],
    cfg: &PsoConfig,
) -> SwarmResult {
    let dims = lower.len();
    assert_eq!(dims, upper.len(), "bounds of different length");
    let vmax: Vec<f64> = lower
        .iter()
        .zip(upper)
        .map(|(l, u)| cfg.max_velocity_fraction * (u - l))
        .collect();

    let mut swarm: Vec<Particle> = (0..cfg.swarm_size)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
            rng.set_stream(i as u64);
            let x: Vec<f64> = (0..dims)
                .map(|d| rng.random_range(lower[d]..=upper[d]))
                .collect();
            let v: Vec<f64> = (0..dims)
                .map(|d| rng.random_range(-vmax[d]..=vmax[d]))
                .collect();
            Particle {
                best_x: x.clone(),
                x,
                v,
                best: f64::INFINITY,
                rng,
            }
        })
        .collect();

    let mut g_x = swarm[0].x.clone();
    let mut g_best = f64::INFINITY;
    let mut g_feasible = false;
    let mut feasible_x: Option<(Vec<f64>, f64)> = None;
    let mut history = Vec::with_capacity(cfg.iterations);
    let mut evaluations = 0;

    for iteration in 0..cfg.iterations {
        if iteration > 0 {
            for p in &mut swarm {
                for d in 0..dims {
                    let r1: f64 = p.rng.random();
                    let r2: f64 = p.rng.random();
                    let v = cfg.inertia * p.v[d]
                        + cfg.cognitive * r1 * (p.best_x[d] - p.x[d])
                        + cfg.social * r2 * (g_x[d] - p.x[d]);
                    p.v[d] = v.clamp(-vmax[d], vmax[d]);
                    p.x[d] += p.v[d];
                    reflect(&mut p.x[d], &mut p.v[d], lower[d], upper[d]);
                }
            }
        }

        let scores: Vec<Scored> = swarm.par_iter().map(|p| objective.evaluate(&p.x)).collect();
        evaluations += scores.len();

        for (p, s) in swarm.iter_mut().zip(&scores) {
            if s.fitness < p.best {
                p.best = s.fitness;
                p.best_x.clone_from(&p.x);
            }
            if s.fitness < g_best {
                g_best = s.fitness;
                g_x.clone_from(&p.x);
                g_feasible = s.feasible;
            }
            if s.feasible && feasible_x.as_ref().is_none_or(|(_, f)| s.fitness < *f) {
                feasible_x = Some((p.x.clone(), s.fitness));
            }
        }
        history.push(HistoryPoint {
            iteration,
            best_fitness: g_best,
            feasible: g_feasible,
        });
    }

    let feasible_found = feasible_x.is_some();
    let (position, fitness) = feasible_x.unwrap_or((g_x, g_best));
    SwarmResult {
        position,
        fitness,
        feasible_found,
        history,
        evaluations,
    }
}

/// Penalized net present cost of a sizing, for the swarm.
pub struct MicrogridObjective<'a> {
    pub profiles: &'a Profiles,
    pub policy: &'a ScenarioPolicy,
    pub catalog: &'a DeviceCatalog,
    pub finance: &'a FinanceParams,
    pub initial_tank_fraction: f64,
    pub penalty_weight: f64,
}

/// Everything known about one evaluated sizing.
#[derive(Debug, Clone, PartialEq)]
pub struct SizingScore {
    pub sizes: SizingVector,
    pub costs: CostBreakdown,
    pub feasibility: Feasibility,
    pub summary: YearSummary,
    pub fitness: f64,
}

impl MicrogridObjective<'_> {
    pub fn score(&self, position: &[f64]) -> SizingScore {
        let x: [f64; 8] = position.try_into().expect("eight sizing dimensions");
        let sizes = SizingVector::from_position(&x);
        let summary = simulate_year_summary(
            self.profiles,
            &sizes,
            self.policy,
            self.catalog,
            self.initial_tank_fraction,
        );
        let (costs, feasibility) = assess(&summary, &sizes, self.catalog, self.finance);
        let violation = feasibility.violation();
        let fitness = if violation > 0.0 {
            costs.total + self.penalty_weight * violation
        } else {
            costs.total
        };
        SizingScore {
            sizes,
            costs,
            feasibility,
            summary,
            fitness,
        }
    }
}

impl Objective for MicrogridObjective<'_> {
    fn evaluate(&self, position: &[f64]) -> Scored {
        let s = self.score(position);
        Scored {
            fitness: s.fitness,
            feasible: s.feasibility.is_feasible(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub best: SizingScore,
    /// False when no evaluated sizing met the constraints; `best` is then the
    /// lowest penalized point.
    pub feasible_found: bool,
    pub history: Vec<HistoryPoint>,
    pub evaluations: usize,
}

/// Searches the sizing that minimizes the penalized net present cost.
pub fn optimize(
    profiles: &Profiles,
    policy: &ScenarioPolicy,
    catalog: &DeviceCatalog,
    finance: &FinanceParams,
    pso: &PsoConfig,
    initial_tank_fraction: f64,
) -> Result<Optimum, PsoError> {
    pso.validate()?;
    let objective = MicrogridObjective {
        profiles,
        policy,
        catalog,
        finance,
        initial_tank_fraction,
        penalty_weight: pso.penalty_weight,
    };
    let upper = pso.bounds.upper();
    let run = minimize(&objective, &[0.0; 8], &upper, pso);
    Ok(Optimum {
        best: objective.score(&run.position),
        feasible_found: run.feasible_found,
        history: run.history,
        evaluations: run.evaluations,
    })
}
