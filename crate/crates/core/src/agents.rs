//! Five agents on three levels that run the hourly strategy by exchanging
//! messages.
//!
//! The design agent (DA) assigns sizes. The coordination agent (CA) takes the
//! dispatch decisions. The generation agent (GA), load agent (LA) and station
//! agent (SA) own the field-level state and carry the decisions out. Field
//! agents only talk to the CA.
//!
//! Each hour the CA runs one synchronous round:
//!
//! | # | CA sends                                    | to | reply                        |
//! |---|---------------------------------------------|----|------------------------------|
//! | 1 | `ForecastRequest`                           | GA | `GenerationForecast`         |
//! | 2 | `ForecastRequest`                           | LA | `LoadForecast`               |
//! | 3 | `ForecastRequest`                           | SA | `HydrogenDemand`             |
//! | 4 | `StoreSurplusRequest` or `SupplyDeficitRequest` | GA | `OperationReport`        |
//! | 5 | `LoadShedNotice`                            | LA | `OperationReport`            |
//! | 6 | `ThermalBackupRequest`                      | GA | `OperationReport`            |
//! | 7 | `DeferRequest` or `HydrogenAllocation`      | SA | `UpdatedDemand` or `UnsuppliedReport` |
//! | 8 | `StationSupplyRequest`                      | GA | `OperationReport`            |
//!
//! Before the first hour the DA sends `SizeAssignment` to the CA, which
//! forwards it to the GA and SA. After the last hour the CA sends an
//! `OperationReport` with the year's aggregates to the DA.
//!
//! The agents call the same stage functions as [`crate::dispatch`] in the same
//! order, so a run is bit-identical to [`crate::dispatch::simulate_hours`].
//!
//! A trace is exported as JSON lines, one message per line, with the fields
//! `hour`, `kind`, `sender`, `recipient`, `payload`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::components::{station_tank_draw, tank_step, TankState};
use crate::dispatch::{
    absorb_surplus, bus_need, cover_deficit, credit_fc_heat, generation, remaining_heat,
    served_in_deficit, split_shedding, station_deliverable, station_terms, thermal_backup,
    DeferredQueue, FuelCellUse, Generation, HourInput, HourlyFlows, ScenarioPolicy,
    SimulationResult, StationOutcome, YearSummary,
};
use crate::model::{DeviceCatalog, Profiles, SizingVector, HOURS_PER_YEAR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentId {
    DA,
    CA,
    GA,
    LA,
    SA,
}

impl AgentId {
    pub fn is_field(self) -> bool {
        matches!(self, AgentId::GA | AgentId::LA | AgentId::SA)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    SizeAssignment,
    ForecastRequest,
    GenerationForecast,
    LoadForecast,
    HydrogenDemand,
    StoreSurplusRequest,
    SupplyDeficitRequest,
    LoadShedNotice,
    ThermalBackupRequest,
    DeferRequest,
    HydrogenAllocation,
    UpdatedDemand,
    UnsuppliedReport,
    StationSupplyRequest,
    OperationReport,
}

/// Numeric content of a message. Power in kW, hydrogen in kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Payload {
    None,
    Assignment {
        sizes: SizingVector,
        policy: ScenarioPolicy,
        initial_tank_fraction: f64,
    },
    Generation {
        irradiance: f64,
        wind_speed: f64,
        p_pv: f64,
        p_wg: f64,
    },
    Load {
        p_load: f64,
        p_uninterruptible: f64,
        q_load: f64,
    },
    Hydrogen {
        new_demand: f64,
        pending: f64,
    },
    Surplus {
        surplus: f64,
        q_load: f64,
    },
    Deficit {
        deficit: f64,
    },
    Storage {
        p_ren_el: f64,
        p_el_tank: f64,
        p_ren_h: f64,
        q_h_tl: f64,
        curtailed: f64,
        station_deliverable: f64,
    },
    FuelCell {
        p_tank_fc: f64,
        p_fc_conv: f64,
        heat: f64,
        covered: bool,
        station_deliverable: f64,
    },
    Served {
        p_load_served: f64,
    },
    Shedding {
        interruptible: f64,
        uninterruptible: f64,
    },
    Heat {
        remaining: f64,
    },
    Boiler {
        q_b_tl: f64,
        fuel: f64,
        unserved: f64,
    },
    Allocation {
        allowance: f64,
        defer_limit: Option<f64>,
    },
    Station {
        delivered: f64,
        deferred: f64,
        unserved: f64,
    },
    Delivery {
        h_delivered: f64,
    },
    Tank {
        p_tank_sta: f64,
        energy: f64,
    },
    Year(YearSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub hour: usize,
    pub kind: MessageKind,
    pub sender: AgentId,
    pub recipient: AgentId,
    pub payload: Payload,
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("protocol violation: {kind:?} at hour {hour}")]
    ProtocolViolation { kind: MessageKind, hour: usize },
    #[error("trace line {line}: {source}")]
    TraceParse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("trace io: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace is missing {0}")]
    IncompleteTrace(&'static str),
}

fn violation(msg: &Message) -> AgentError {
    AgentError::ProtocolViolation {
        kind: msg.kind,
        hour: msg.hour,
    }
}

fn reply(to: &Message, kind: MessageKind, payload: Payload) -> Message {
    Message {
        hour: to.hour,
        kind,
        sender: to.recipient,
        recipient: to.sender,
        payload,
    }
}

/// Generation agent: renewables, hydrogen loop, heater, boiler and the tank.
#[derive(Debug, Clone)]
pub struct GenerationAgent {
    irradiance: Vec<f64>,
    wind: Vec<f64>,
    catalog: DeviceCatalog,
    sizes: Option<SizingVector>,
    tank: Option<TankState>,
    charge: f64,
    p_tank_fc: f64,
}

impl GenerationAgent {
    pub fn new(irradiance: Vec<f64>, wind: Vec<f64>, catalog: DeviceCatalog) -> Self {
        GenerationAgent {
            irradiance,
            wind,
            catalog,
            sizes: None,
            tank: None,
            charge: 0.0,
            p_tank_fc: 0.0,
        }
    }

    pub fn tank(&self) -> Option<&TankState> {
        self.tank.as_ref()
    }

    pub fn handle(&mut self, msg: &Message) -> Result<Option<Message>, AgentError> {
        use MessageKind::*;
        let cat = &self.catalog;
        if let (
            SizeAssignment,
            Payload::Assignment {
                sizes,
                initial_tank_fraction,
                ..
            },
        ) = (msg.kind, &msg.payload)
        {
            self.tank = Some(TankState::at_fraction(
                sizes.m_tank,
                *initial_tank_fraction,
                cat,
            ));
            self.sizes = Some(*sizes);
            return Ok(None);
        }
        let (Some(sizes), Some(tank)) = (self.sizes.as_ref(), self.tank) else {
            return Err(violation(msg));
        };
        let out = match (msg.kind, &msg.payload) {
            (ForecastRequest, Payload::None) => {
                let input = HourInput {
                    irradiance: self.irradiance[msg.hour],
                    wind_speed: self.wind[msg.hour],
                    ..HourInput::default()
                };
                let gen = generation(&input, sizes, cat);
                self.charge = 0.0;
                self.p_tank_fc = 0.0;
                reply(
                    msg,
                    GenerationForecast,
                    Payload::Generation {
                        irradiance: input.irradiance,
                        wind_speed: input.wind_speed,
                        p_pv: gen.p_pv,
                        p_wg: gen.p_wg,
                    },
                )
            }
            (StoreSurplusRequest, &Payload::Surplus { surplus, q_load }) => {
                let s = absorb_surplus(surplus, q_load, &tank, sizes, cat);
                self.charge = s.p_el_tank;
                reply(
                    msg,
                    OperationReport,
                    Payload::Storage {
                        p_ren_el: s.p_ren_el,
                        p_el_tank: s.p_el_tank,
                        p_ren_h: s.p_ren_h,
                        q_h_tl: s.q_h_tl,
                        curtailed: s.curtailed,
                        station_deliverable: station_deliverable(&tank, s.p_el_tank, 0.0, cat),
                    },
                )
            }
            (SupplyDeficitRequest, &Payload::Deficit { deficit }) => {
                let fc = cover_deficit(deficit, &tank, sizes, cat);
                self.p_tank_fc = fc.p_tank_fc;
                reply(
                    msg,
                    OperationReport,
                    Payload::FuelCell {
                        p_tank_fc: fc.p_tank_fc,
                        p_fc_conv: fc.p_fc_conv,
                        heat: fc.heat,
                        covered: fc.covered,
                        station_deliverable: station_deliverable(&tank, 0.0, fc.p_tank_fc, cat),
                    },
                )
            }
            (ThermalBackupRequest, &Payload::Heat { remaining }) => {
                let b = thermal_backup(remaining, sizes, cat);
                reply(
                    msg,
                    OperationReport,
                    Payload::Boiler {
                        q_b_tl: b.q_b_tl,
                        fuel: b.fuel,
                        unserved: b.unserved,
                    },
                )
            }
            (StationSupplyRequest, &Payload::Delivery { h_delivered }) => {
                let p_tank_sta = station_tank_draw(h_delivered, cat);
                let next = tank_step(tank, self.charge, self.p_tank_fc, p_tank_sta, cat)
                    .map_err(|_| violation(msg))?;
                self.tank = Some(next);
                reply(
                    msg,
                    OperationReport,
                    Payload::Tank {
                        p_tank_sta,
                        energy: next.energy,
                    },
                )
            }
            _ => return Err(violation(msg)),
        };
        Ok(Some(out))
    }
}

/// Load agent: electric and thermal demand and the interruptible split.
#[derive(Debug, Clone)]
pub struct LoadAgent {
    p_load: Vec<f64>,
    q_load: Vec<f64>,
    interruptible_fraction: f64,
}

impl LoadAgent {
    pub fn new(p_load: Vec<f64>, q_load: Vec<f64>, interruptible_fraction: f64) -> Self {
        LoadAgent {
            p_load,
            q_load,
            interruptible_fraction,
        }
    }

    pub fn handle(&mut self, msg: &Message) -> Result<Option<Message>, AgentError> {
        let f = self.interruptible_fraction;
        let out = match (msg.kind, &msg.payload) {
            (MessageKind::ForecastRequest, Payload::None) => {
                let p_load = self.p_load[msg.hour];
                reply(
                    msg,
                    MessageKind::LoadForecast,
                    Payload::Load {
                        p_load,
                        p_uninterruptible: p_load * (1.0 - f),
                        q_load: self.q_load[msg.hour],
                    },
                )
            }
            (MessageKind::LoadShedNotice, &Payload::Served { p_load_served }) => {
                let (interruptible, uninterruptible) =
                    split_shedding(self.p_load[msg.hour], p_load_served, f);
                reply(
                    msg,
                    MessageKind::OperationReport,
                    Payload::Shedding {
                        interruptible,
                        uninterruptible,
                    },
                )
            }
            _ => return Err(violation(msg)),
        };
        Ok(Some(out))
    }
}

/// Station agent: refilling demand and the queue of deferred refills.
#[derive(Debug, Clone)]
pub struct StationAgent {
    demand: Vec<f64>,
    queue: DeferredQueue,
    max_defer_hours: Option<u32>,
}

impl StationAgent {
    pub fn new(demand: Vec<f64>) -> Self {
        StationAgent {
            demand,
            queue: DeferredQueue::new(),
            max_defer_hours: None,
        }
    }

    pub fn pending(&self) -> f64 {
        self.queue.total()
    }

    pub fn handle(&mut self, msg: &Message) -> Result<Option<Message>, AgentError> {
        use MessageKind::*;
        if let (SizeAssignment, Payload::Assignment { policy, .. }) = (msg.kind, &msg.payload) {
            self.max_defer_hours = Some(policy.max_defer_hours);
            return Ok(None);
        }
        let Some(max_age) = self.max_defer_hours else {
            return Err(violation(msg));
        };
        let out = match (msg.kind, &msg.payload) {
            (ForecastRequest, Payload::None) => reply(
                msg,
                HydrogenDemand,
                Payload::Hydrogen {
                    new_demand: self.demand[msg.hour],
                    pending: self.queue.total(),
                },
            ),
            (
                DeferRequest | HydrogenAllocation,
                &Payload::Allocation {
                    allowance,
                    defer_limit,
                },
            ) => {
                let (o, next) =
                    self.queue
                        .settle(self.demand[msg.hour], allowance, defer_limit, max_age);
                self.queue = next;
                let kind = if msg.kind == DeferRequest {
                    UpdatedDemand
                } else {
                    UnsuppliedReport
                };
                reply(
                    msg,
                    kind,
                    Payload::Station {
                        delivered: o.delivered,
                        deferred: o.deferred,
                        unserved: o.unserved,
                    },
                )
            }
            _ => return Err(violation(msg)),
        };
        Ok(Some(out))
    }
}

/// Field agents plus the message log. Routes every message and refuses
/// anything that bypasses the coordination agent.
struct Network {
    ga: GenerationAgent,
    la: LoadAgent,
    sa: StationAgent,
    trace: Vec<Message>,
}

impl Network {
    fn send(&mut self, msg: Message) -> Result<Option<Message>, AgentError> {
        if msg.sender != AgentId::CA && msg.recipient != AgentId::CA {
            return Err(violation(&msg));
        }
        let answer = match msg.recipient {
            AgentId::GA => self.ga.handle(&msg),
            AgentId::LA => self.la.handle(&msg),
            AgentId::SA => self.sa.handle(&msg),
            AgentId::CA | AgentId::DA => Ok(None),
        };
        self.trace.push(msg);
        let answer = answer?;
        if let Some(r) = &answer {
            self.trace.push(r.clone());
        }
        Ok(answer)
    }

    /// Sends a request that must be answered with `expected`.
    fn ask(&mut self, msg: Message, expected: &[MessageKind]) -> Result<Payload, AgentError> {
        let (kind, hour) = (msg.kind, msg.hour);
        match self.send(msg)? {
            Some(r) if expected.contains(&r.kind) => Ok(r.payload),
            _ => Err(AgentError::ProtocolViolation { kind, hour }),
        }
    }
}

fn ca_to(recipient: AgentId, hour: usize, kind: MessageKind, payload: Payload) -> Message {
    Message {
        hour,
        kind,
        sender: AgentId::CA,
        recipient,
        payload,
    }
}

/// Coordination agent: runs each hour's round and keeps the year's books.
#[derive(Debug, Clone)]
pub struct CoordinationAgent {
    catalog: DeviceCatalog,
    sizes: SizingVector,
    policy: ScenarioPolicy,
    ledger: Vec<HourlyFlows>,
    summary: YearSummary,
}

impl CoordinationAgent {
    fn round(&mut self, net: &mut Network, hour: usize) -> Result<HourlyFlows, AgentError> {
        use AgentId::*;
        use MessageKind::*;
        let bad = || AgentError::ProtocolViolation {
            kind: OperationReport,
            hour,
        };
        let cat = &self.catalog;

        let Payload::Generation { p_pv, p_wg, .. } = net.ask(
            ca_to(GA, hour, ForecastRequest, Payload::None),
            &[GenerationForecast],
        )?
        else {
            return Err(bad());
        };
        let Payload::Load {
            p_load,
            p_uninterruptible,
            q_load,
        } = net.ask(
            ca_to(LA, hour, ForecastRequest, Payload::None),
            &[LoadForecast],
        )?
        else {
            return Err(bad());
        };
        let Payload::Hydrogen {
            new_demand,
            pending,
        } = net.ask(
            ca_to(SA, hour, ForecastRequest, Payload::None),
            &[HydrogenDemand],
        )?
        else {
            return Err(bad());
        };

        let gen = Generation { p_pv, p_wg };
        let ren = gen.total();
        let need = bus_need(p_load, &self.sizes, cat);
        let mut f = HourlyFlows {
            hour,
            p_load,
            p_uninterruptible,
            q_load,
            h_demand: new_demand,
            h_pending_in: pending,
            p_pv,
            p_wg,
            ..HourlyFlows::default()
        };

        let mut fc_heat = 0.0;
        let mut stressed = false;
        let deliverable;
        if ren >= need.dc_need {
            let req = Payload::Surplus {
                surplus: ren - need.dc_need,
                q_load,
            };
            let Payload::Storage {
                p_ren_el,
                p_el_tank,
                p_ren_h,
                q_h_tl,
                curtailed,
                station_deliverable,
            } = net.ask(
                ca_to(GA, hour, StoreSurplusRequest, req),
                &[OperationReport],
            )?
            else {
                return Err(bad());
            };
            f.p_load_served = need.servable_ac;
            f.p_ren_el = p_ren_el;
            f.p_el_tank = p_el_tank;
            f.p_ren_h = p_ren_h;
            f.q_h_tl = q_h_tl;
            f.curtailed = curtailed;
            deliverable = station_deliverable;
        } else {
            let req = Payload::Deficit {
                deficit: need.dc_need - ren,
            };
            let Payload::FuelCell {
                p_tank_fc,
                p_fc_conv,
                heat,
                covered,
                station_deliverable,
            } = net.ask(
                ca_to(GA, hour, SupplyDeficitRequest, req),
                &[OperationReport],
            )?
            else {
                return Err(bad());
            };
            let fc = FuelCellUse {
                p_tank_fc,
                p_fc_conv,
                heat,
                covered,
            };
            f.p_tank_fc = p_tank_fc;
            f.p_fc_conv = p_fc_conv;
            f.p_load_served = served_in_deficit(&need, ren, &fc, cat);
            fc_heat = heat;
            stressed = !covered;
            deliverable = station_deliverable;
        }

        let served = Payload::Served {
            p_load_served: f.p_load_served,
        };
        let Payload::Shedding {
            interruptible,
            uninterruptible,
        } = net.ask(ca_to(LA, hour, LoadShedNotice, served), &[OperationReport])?
        else {
            return Err(bad());
        };
        f.shed_interruptible = interruptible;
        f.shed_uninterruptible = uninterruptible;

        let (q_fc_tl, vented) = credit_fc_heat(fc_heat, q_load);
        f.q_fc_tl = q_fc_tl;
        f.q_fc_vented = vented;
        let heat = Payload::Heat {
            remaining: remaining_heat(q_load, q_fc_tl, f.q_h_tl),
        };
        let Payload::Boiler {
            q_b_tl,
            fuel,
            unserved,
        } = net.ask(
            ca_to(GA, hour, ThermalBackupRequest, heat),
            &[OperationReport],
        )?
        else {
            return Err(bad());
        };
        f.q_b_tl = q_b_tl;
        f.boiler_fuel = fuel;
        f.unserved_thermal = unserved;

        let hour_of_day = (hour % 24) as u32;
        let (allowance, defer_limit) =
            station_terms(deliverable, stressed, hour_of_day, &self.policy, cat);
        let kind = if defer_limit.is_some() && allowance < pending + new_demand {
            DeferRequest
        } else {
            HydrogenAllocation
        };
        let alloc = Payload::Allocation {
            allowance,
            defer_limit,
        };
        let Payload::Station {
            delivered,
            deferred,
            unserved,
        } = net.ask(
            ca_to(SA, hour, kind, alloc),
            &[UpdatedDemand, UnsuppliedReport],
        )?
        else {
            return Err(bad());
        };
        let o = StationOutcome {
            delivered,
            deferred,
            unserved,
        };
        f.h_delivered = o.delivered;
        f.deferred_hydrogen = o.deferred;
        f.unserved_hydrogen = o.unserved;

        let delivery = Payload::Delivery {
            h_delivered: o.delivered,
        };
        let Payload::Tank { p_tank_sta, energy } = net.ask(
            ca_to(GA, hour, StationSupplyRequest, delivery),
            &[OperationReport],
        )?
        else {
            return Err(bad());
        };
        f.p_tank_sta = p_tank_sta;
        f.tank_energy_end = energy;
        Ok(f)
    }
}

/// Outcome of an agent-orchestrated run.
#[derive(Debug, Clone, PartialEq)]
pub struct MasRun {
    pub result: SimulationResult,
    pub trace: Vec<Message>,
}

/// Runs the agents over an arbitrary sequence of hours (hour 0 is midnight).
pub fn run_mas_hours(
    inputs: &[HourInput],
    sizes: &SizingVector,
    policy: &ScenarioPolicy,
    cat: &DeviceCatalog,
    initial_tank_fraction: f64,
) -> Result<MasRun, AgentError> {
    let column = |f: fn(&HourInput) -> f64| inputs.iter().map(f).collect::<Vec<_>>();
    let mut net = Network {
        ga: GenerationAgent::new(
            column(|i| i.irradiance),
            column(|i| i.wind_speed),
            cat.clone(),
        ),
        la: LoadAgent::new(
            column(|i| i.p_load),
            column(|i| i.q_load),
            policy.interruptible_fraction,
        ),
        sa: StationAgent::new(column(|i| i.h_demand)),
        trace: Vec::with_capacity(inputs.len() * 16 + 4),
    };

    let assignment = Payload::Assignment {
        sizes: *sizes,
        policy: policy.clone(),
        initial_tank_fraction,
    };
    net.send(Message {
        hour: 0,
        kind: MessageKind::SizeAssignment,
        sender: AgentId::DA,
        recipient: AgentId::CA,
        payload: assignment.clone(),
    })?;
    for to in [AgentId::GA, AgentId::SA] {
        net.send(ca_to(
            to,
            0,
            MessageKind::SizeAssignment,
            assignment.clone(),
        ))?;
    }

    let tank = *net.ga.tank().ok_or(AgentError::ProtocolViolation {
        kind: MessageKind::SizeAssignment,
        hour: 0,
    })?;
    let mut ca = CoordinationAgent {
        catalog: cat.clone(),
        sizes: *sizes,
        policy: policy.clone(),
        ledger: Vec::with_capacity(inputs.len()),
        summary: YearSummary::opening(&tank),
    };
    for hour in 0..inputs.len() {
        let flows = ca.round(&mut net, hour)?;
        ca.summary.add(&flows);
        ca.ledger.push(flows);
    }
    ca.summary.pending_hydrogen_end = net.sa.pending();
    net.send(Message {
        hour: inputs.len().saturating_sub(1),
        kind: MessageKind::OperationReport,
        sender: AgentId::CA,
        recipient: AgentId::DA,
        payload: Payload::Year(ca.summary),
    })?;

    Ok(MasRun {
        result: SimulationResult {
            ledger: ca.ledger,
            summary: ca.summary,
            interruptible_fraction: policy.interruptible_fraction,
        },
        trace: net.trace,
    })
}

/// Runs the agents over a full year of profiles.
pub fn run_mas_year(
    profiles: &Profiles,
    sizes: &SizingVector,
    policy: &ScenarioPolicy,
    cat: &DeviceCatalog,
    initial_tank_fraction: f64,
) -> Result<MasRun, AgentError> {
    let inputs: Vec<HourInput> = (0..HOURS_PER_YEAR)
        .map(|h| HourInput::from_profiles(profiles, h))
        .collect();
    run_mas_hours(&inputs, sizes, policy, cat, initial_tank_fraction)
}

/// The ordered message log of a run.
pub fn trace_log(run: &MasRun) -> &[Message] {
    &run.trace
}

/// True when no message passes directly between two field agents.
pub fn respects_hierarchy(trace: &[Message]) -> bool {
    trace
        .iter()
        .all(|m| !(m.sender.is_field() && m.recipient.is_field()))
}

pub fn write_trace<W: Write>(trace: &[Message], mut out: W) -> Result<(), AgentError> {
    for m in trace {
        serde_json::to_writer(&mut out, m).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<Message>, AgentError> {
    let mut trace = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let msg = serde_json::from_str(&line).map_err(|source| AgentError::TraceParse {
            line: i + 1,
            source,
        })?;
        trace.push(msg);
    }
    Ok(trace)
}

/// Re-runs the agents on the inputs and assignment recorded in `trace`.
pub fn replay(trace: &[Message], cat: &DeviceCatalog) -> Result<MasRun, AgentError> {
    let Some(Payload::Assignment {
        sizes,
        policy,
        initial_tank_fraction,
    }) = trace
        .iter()
        .find(|m| m.kind == MessageKind::SizeAssignment && m.sender == AgentId::DA)
        .map(|m| &m.payload)
    else {
        return Err(AgentError::IncompleteTrace("SizeAssignment"));
    };

    let mut inputs: Vec<HourInput> = Vec::new();
    for m in trace {
        if inputs.len() <= m.hour && m.kind == MessageKind::GenerationForecast {
            inputs.resize(m.hour + 1, HourInput::default());
        }
        let Some(slot) = inputs.get_mut(m.hour) else {
            continue;
        };
        match m.payload {
            Payload::Generation {
                irradiance,
                wind_speed,
                ..
            } => {
                slot.irradiance = irradiance;
                slot.wind_speed = wind_speed;
            }
            Payload::Load { p_load, q_load, .. } => {
                slot.p_load = p_load;
                slot.q_load = q_load;
            }
            Payload::Hydrogen { new_demand, .. } => slot.h_demand = new_demand,
            _ => {}
        }
    }
    run_mas_hours(&inputs, sizes, policy, cat, *initial_tank_fraction)
}

/// Kinds of a trace, in order.
pub fn kinds(trace: &[Message]) -> Vec<MessageKind> {
    trace.iter().map(|m| m.kind).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::simulate_hours;
    use MessageKind::*;

    fn sizes() -> SizingVector {
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

    fn hour(g: f64, v: f64, p: f64, q: f64, h: f64) -> HourInput {
        HourInput {
            irradiance: g,
            wind_speed: v,
            p_load: p,
            q_load: q,
            h_demand: h,
        }
    }

    fn round_kinds(first_dispatch: MessageKind, station: MessageKind) -> Vec<MessageKind> {
        let station_reply = if station == DeferRequest {
            UpdatedDemand
        } else {
            UnsuppliedReport
        };
        vec![
            ForecastRequest,
            GenerationForecast,
            ForecastRequest,
            LoadForecast,
            ForecastRequest,
            HydrogenDemand,
            first_dispatch,
            OperationReport,
            LoadShedNotice,
            OperationReport,
            ThermalBackupRequest,
            OperationReport,
            station,
            station_reply,
            StationSupplyRequest,
            OperationReport,
        ]
    }

    #[test]
    fn zero_inputs_report_zero_aggregates() {
        let inputs = vec![HourInput::default(); 48];
        let run = run_mas_hours(
            &inputs,
            &SizingVector::default(),
            &ScenarioPolicy::fixed(),
            &DeviceCatalog::default(),
            0.5,
        )
        .unwrap();
        let last = run.trace.last().unwrap();
        assert_eq!(last.kind, OperationReport);
        assert_eq!(last.recipient, AgentId::DA);
        let Payload::Year(s) = &last.payload else {
            panic!()
        };
        assert_eq!(s.electric_demand, 0.0);
        assert_eq!(s.unserved_electric(), 0.0);
        assert_eq!(s.unserved_hydrogen, 0.0);
        assert_eq!(s.boiler_heat, 0.0);
    }

    #[test]
    fn matches_kernel_on_toy_hours() {
        let inputs: Vec<HourInput> = (0..72)
            .map(|i| {
                let t = i as f64;
                hour(
                    (900.0 * (t * 0.26).sin()).max(0.0),
                    (t * 0.37).rem_euclid(20.0),
                    40.0 + 45.0 * (t * 0.11).cos().abs(),
                    10.0 + 50.0 * (t * 0.19).sin().abs(),
                    if i % 5 == 0 { 150.0 } else { 20.0 },
                )
            })
            .collect();
        let cat = DeviceCatalog::default();
        for policy in [ScenarioPolicy::fixed(), ScenarioPolicy::managed()] {
            for frac in [0.0, 0.5, 1.0] {
                let kernel = simulate_hours(&inputs, &sizes(), &policy, &cat, frac);
                let mas = run_mas_hours(&inputs, &sizes(), &policy, &cat, frac).unwrap();
                assert_eq!(mas.result, kernel);
                assert!(respects_hierarchy(&mas.trace));
            }
        }
    }

    #[test]
    fn two_hour_trace_sequence() {
        // Hour 0 (midnight, in the off-peak window): no sun, calm, deficit.
        // Hour 1: strong wind, surplus.
        let inputs = [
            hour(0.0, 0.0, 30.0, 20.0, 50.0),
            hour(0.0, 11.0, 10.0, 5.0, 0.0),
        ];
        let run = run_mas_hours(
            &inputs,
            &sizes(),
            &ScenarioPolicy::managed(),
            &DeviceCatalog::default(),
            0.5,
        )
        .unwrap();
        let mut want = vec![SizeAssignment, SizeAssignment, SizeAssignment];
        want.extend(round_kinds(SupplyDeficitRequest, HydrogenAllocation));
        want.extend(round_kinds(StoreSurplusRequest, HydrogenAllocation));
        want.push(OperationReport);
        assert_eq!(kinds(&run.trace), want);

        let route: Vec<(AgentId, AgentId)> = run.trace[..3]
            .iter()
            .map(|m| (m.sender, m.recipient))
            .collect();
        assert_eq!(
            route,
            [
                (AgentId::DA, AgentId::CA),
                (AgentId::CA, AgentId::GA),
                (AgentId::CA, AgentId::SA)
            ]
        );
        let hours: Vec<usize> = run.trace.iter().map(|m| m.hour).collect();
        assert!(hours.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn stressed_peak_hour_sends_defer_request() {
        // Hour 12 is outside the window; nothing generates and the tank is at
        // its floor, so the fuel cell cannot cover the load.
        let mut inputs = vec![HourInput::default(); 13];
        inputs[12] = hour(0.0, 0.0, 30.0, 0.0, 40.0);
        let run = run_mas_hours(
            &inputs,
            &sizes(),
            &ScenarioPolicy::managed(),
            &DeviceCatalog::default(),
            0.0,
        )
        .unwrap();
        let k = kinds(&run.trace);
        assert_eq!(k.iter().filter(|&&x| x == DeferRequest).count(), 1);
        assert_eq!(k.iter().filter(|&&x| x == UpdatedDemand).count(), 1);
        assert_eq!(run.result.ledger[12].deferred_hydrogen, 40.0);
    }

    #[test]
    fn fixed_hour_has_no_defer_request() {
        let inputs = [hour(0.0, 0.0, 30.0, 0.0, 40.0)];
        let run = run_mas_hours(
            &inputs,
            &sizes(),
            &ScenarioPolicy::fixed(),
            &DeviceCatalog::default(),
            0.0,
        )
        .unwrap();
        assert!(!kinds(&run.trace).contains(&DeferRequest));
    }

    #[test]
    fn surplus_hour_has_one_store_request() {
        let inputs = [hour(1000.0, 11.0, 10.0, 5.0, 0.0)];
        let run = run_mas_hours(
            &inputs,
            &sizes(),
            &ScenarioPolicy::fixed(),
            &DeviceCatalog::default(),
            0.5,
        )
        .unwrap();
        let k = kinds(&run.trace);
        assert_eq!(k.iter().filter(|&&x| x == StoreSurplusRequest).count(), 1);
        assert!(!k.contains(&SupplyDeficitRequest));
    }

    #[test]
    fn trace_round_trips_and_replays() {
        let inputs: Vec<HourInput> = (0..30)
            .map(|i| {
                hour(
                    37.1 * i as f64,
                    0.3 * i as f64,
                    33.3 + i as f64,
                    12.7,
                    0.1 * i as f64,
                )
            })
            .collect();
        let cat = DeviceCatalog::default();
        let run = run_mas_hours(&inputs, &sizes(), &ScenarioPolicy::managed(), &cat, 0.3).unwrap();
        let mut buf = Vec::new();
        write_trace(&run.trace, &mut buf).unwrap();
        assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), run.trace.len());
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back, run.trace);
        let again = replay(&back, &cat).unwrap();
        assert_eq!(again, run);
    }

    #[test]
    fn field_agent_rejects_unknown_request() {
        let mut la = LoadAgent::new(vec![1.0], vec![1.0], 0.0);
        let msg = ca_to(
            AgentId::LA,
            0,
            ThermalBackupRequest,
            Payload::Heat { remaining: 1.0 },
        );
        assert!(matches!(
            la.handle(&msg),
            Err(AgentError::ProtocolViolation {
                kind: ThermalBackupRequest,
                hour: 0
            })
        ));
        let mut ga = GenerationAgent::new(vec![0.0], vec![0.0], DeviceCatalog::default());
        let early = ca_to(AgentId::GA, 0, ForecastRequest, Payload::None);
        assert!(ga.handle(&early).is_err());
    }

    #[test]
    fn peer_message_is_refused() {
        let mut net = Network {
            ga: GenerationAgent::new(vec![0.0], vec![0.0], DeviceCatalog::default()),
            la: LoadAgent::new(vec![0.0], vec![0.0], 0.0),
            sa: StationAgent::new(vec![0.0]),
            trace: Vec::new(),
        };
        let msg = Message {
            hour: 0,
            kind: ForecastRequest,
            sender: AgentId::GA,
            recipient: AgentId::LA,
            payload: Payload::None,
        };
        assert!(net.send(msg).is_err());
        assert!(net.trace.is_empty());
    }
}
