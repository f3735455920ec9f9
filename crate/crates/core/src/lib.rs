//! Design-time sizing of an islanded combined heat-and-power microgrid with
//! PV, wind, a hydrogen loop (electrolyzer, tank, fuel cell), heater, boiler
//! and a fuel-cell vehicle refilling station.
//!
//! A year is simulated hour by hour under a rule-based strategy
//! ([`dispatch`]), optionally through a message-passing agent hierarchy
//! ([`agents`]); the result is priced by net present cost with reliability
//! penalties ([`economics`]), and component sizes are searched by particle
//! swarm optimization ([`optimizer`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod components;
pub mod dispatch;
pub mod economics;
pub mod io;
pub mod model;
pub mod optimizer;
pub mod profiles;

pub use components::TankState;
pub use dispatch::{simulate_year, HourlyFlows, ScenarioPolicy, SimulationResult};
pub use economics::{evaluate, CostBreakdown, FinanceParams};
pub use model::{DeviceCatalog, HourlySeries, Profiles, SizingVector, Unit};
