//! Time-stepped disaster-area scenario engine.
//!
//! A deployable base station (MEOC) with satellite backhaul and a fixed
//! terrestrial station serve a mix of first responders and civilians.
//! Each step applies scripted events (terrestrial destruction or
//! degradation, MEOC movement, traffic surges), recomputes disc coverage,
//! classifies every user's connectivity, and allocates bearer rates with
//! strict first-responder priority. Stepping is pure and deterministic:
//! the state at step `t + 1` is a function of the state at `t` and the
//! configuration alone.

use serde::Serialize;

use crate::error::{Result, SimError};

/// User class. First responders get dedicated bearers and outrank
/// civilian traffic on their station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UserClass {
    FirstResponder,
    Civilian,
}

/// 2-D position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserConfig {
    pub id: u32,
    pub class: UserClass,
    pub position: Point,
    /// Requested rate in abstract capacity units.
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeocConfig {
    pub position: Point,
    pub coverage_radius_m: f64,
    pub capacity_units: f64,
    pub speed_m_per_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerrestrialConfig {
    pub position: Point,
    pub coverage_radius_m: f64,
    pub capacity_units: f64,
    pub alive: bool,
}

/// Scripted change applied at a given step.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioEvent {
    /// Terrestrial station destroyed: coverage and capacity drop to zero
    /// for the rest of the run.
    TerrestrialDestroyed,
    /// Terrestrial capacity multiplied by `factor`.
    TerrestrialDegraded { factor: f64 },
    /// The MEOC starts moving toward `waypoint` at its configured speed.
    MeocMove { waypoint: Point },
    /// Every user's demand multiplied by `multiplier`.
    TrafficSurge { multiplier: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimedEvent {
    pub step: u64,
    pub event: ScenarioEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub duration_steps: u64,
    pub users: Vec<UserConfig>,
    pub meoc: MeocConfig,
    pub terrestrial: TerrestrialConfig,
    pub events: Vec<TimedEvent>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.duration_steps == 0 {
            return Err(SimError::config("scenario: duration_steps must be >= 1"));
        }
        let radius_ok = |r: f64| r.is_finite() && r > 0.0;
        if !radius_ok(self.meoc.coverage_radius_m)
            || !radius_ok(self.terrestrial.coverage_radius_m)
        {
            return Err(SimError::config(
                "scenario: coverage radii must be finite and > 0",
            ));
        }
        if self.meoc.capacity_units < 0.0 || self.terrestrial.capacity_units < 0.0 {
            return Err(SimError::config("scenario: capacities must be >= 0"));
        }
        if self.meoc.speed_m_per_step < 0.0 {
            return Err(SimError::config("scenario: meoc speed must be >= 0"));
        }
        for (i, u) in self.users.iter().enumerate() {
            if u.demand < 0.0 || !u.demand.is_finite() {
                return Err(SimError::config(format!(
                    "scenario: users[{i}] demand must be finite and >= 0"
                )));
            }
            if self.users[..i].iter().any(|v| v.id == u.id) {
                return Err(SimError::config(format!(
                    "scenario: duplicate user id {}",
                    u.id
                )));
            }
        }
        for (i, e) in self.events.iter().enumerate() {
            if e.step >= self.duration_steps {
                return Err(SimError::config(format!(
                    "scenario: events[{i}] step {} is outside duration {}",
                    e.step, self.duration_steps
                )));
            }
            let scale_ok = |v: f64| v.is_finite() && v >= 0.0;
            match e.event {
                ScenarioEvent::TerrestrialDegraded { factor } if !scale_ok(factor) => {
                    return Err(SimError::config(format!(
                        "scenario: events[{i}] degradation factor must be finite and >= 0"
                    )));
                }
                ScenarioEvent::TrafficSurge { multiplier } if !scale_ok(multiplier) => {
                    return Err(SimError::config(format!(
                        "scenario: events[{i}] surge multiplier must be finite and >= 0"
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Connectivity of one user at one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectivityState {
    /// Covered by neither station.
    NoComms,
    /// Covered by exactly one station.
    Possible,
    /// Covered by both stations.
    Reliable,
}

/// Maps coverage flags to the connectivity case. The terrestrial flag
/// must already account for the station being alive.
pub fn classify_connectivity(in_meoc: bool, in_terrestrial: bool) -> ConnectivityState {
    match (in_meoc, in_terrestrial) {
        (false, false) => ConnectivityState::NoComms,
        (true, true) => ConnectivityState::Reliable,
        _ => ConnectivityState::Possible,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BearerKind {
    Default,
    Dedicated,
}

/// One allocated bearer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bearer {
    pub owner: u32,
    pub kind: BearerKind,
    pub allocated_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Station {
    Meoc,
    Terrestrial,
}

/// A user attached to one station, as seen by the allocator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttachedUser {
    pub id: u32,
    pub class: UserClass,
    pub demand: f64,
}

/// Iterative equal-share allocation that exhausts
/// `min(capacity, total demand)`: users whose demand falls below the
/// current share are granted in full and the share recomputed, so no
/// capacity is left over while any demand is unmet.
fn waterfill_max_min(capacity: f64, demands: &[f64]) -> Vec<f64> {
    let mut grants = vec![0.0; demands.len()];
    let mut remaining = capacity;
    let mut active: Vec<usize> = (0..demands.len()).collect();
    while !active.is_empty() && remaining > 0.0 {
        let share = remaining / active.len() as f64;
        let satisfied: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&i| demands[i] <= share)
            .collect();
        if satisfied.is_empty() {
            for &i in &active {
                grants[i] = share;
            }
            break;
        }
        for &i in &satisfied {
            grants[i] = demands[i];
            remaining -= demands[i];
        }
        active.retain(|i| !satisfied.contains(i));
    }
    grants
}

/// Allocates one station's capacity among its attached users.
///
/// First responders are served first from the full pool with equal-share
/// water-filling. Whatever remains is split among civilians as an equal
/// share capped at demand, with the remainder topped up in ascending id
/// order. Every attached user receives a Default bearer record (zero
/// rate is possible); first responders additionally hold a Dedicated
/// bearer carrying their grant.
pub fn allocate_bearers(capacity_units: f64, attached_users: &[AttachedUser]) -> Vec<Bearer> {
    let mut users: Vec<AttachedUser> = attached_users.to_vec();
    users.sort_by_key(|u| u.id);

    let responders: Vec<&AttachedUser> = users
        .iter()
        .filter(|u| u.class == UserClass::FirstResponder)
        .collect();
    let civilians: Vec<&AttachedUser> = users
        .iter()
        .filter(|u| u.class == UserClass::Civilian)
        .collect();

    let fr_demands: Vec<f64> = responders.iter().map(|u| u.demand).collect();
    let fr_grants = waterfill_max_min(capacity_units, &fr_demands);
    let mut remaining = capacity_units - fr_grants.iter().sum::<f64>();
    remaining = remaining.max(0.0);

    // Civilians: one equal-share pass capped at demand, remainder in
    // ascending id order.
    let mut civ_grants = vec![0.0; civilians.len()];
    if !civilians.is_empty() && remaining > 0.0 {
        let share = remaining / civilians.len() as f64;
        for (g, u) in civ_grants.iter_mut().zip(&civilians) {
            *g = u.demand.min(share);
        }
        let mut leftover = remaining - civ_grants.iter().sum::<f64>();
        for (g, u) in civ_grants.iter_mut().zip(&civilians) {
            if leftover <= 0.0 {
                break;
            }
            let top_up = (u.demand - *g).min(leftover).max(0.0);
            *g += top_up;
            leftover -= top_up;
        }
    }

    let mut bearers = Vec::with_capacity(users.len() + responders.len());
    let mut fr_iter = fr_grants.iter();
    let mut civ_iter = civ_grants.iter();
    for user in &users {
        match user.class {
            UserClass::FirstResponder => {
                let grant = *fr_iter.next().expect("grant per responder");
                bearers.push(Bearer {
                    owner: user.id,
                    kind: BearerKind::Default,
                    allocated_rate: 0.0,
                });
                bearers.push(Bearer {
                    owner: user.id,
                    kind: BearerKind::Dedicated,
                    allocated_rate: grant,
                });
            }
            UserClass::Civilian => {
                let grant = *civ_iter.next().expect("grant per civilian");
                bearers.push(Bearer {
                    owner: user.id,
                    kind: BearerKind::Default,
                    allocated_rate: grant,
                });
            }
        }
    }
    bearers
}

/// Per-user outcome at one step, as emitted in traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UserStepRecord {
    pub id: u32,
    pub class: UserClass,
    pub connectivity: ConnectivityState,
    pub serving: Option<Station>,
    pub bearer_kind: Option<BearerKind>,
    pub granted_rate: f64,
}

/// Cumulative user-step counts per class and connectivity case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConnectivityCounters {
    pub fr_no_comms: u64,
    pub fr_possible: u64,
    pub fr_reliable: u64,
    pub civ_no_comms: u64,
    pub civ_possible: u64,
    pub civ_reliable: u64,
}

impl ConnectivityCounters {
    pub fn total(&self) -> u64 {
        self.fr_no_comms
            + self.fr_possible
            + self.fr_reliable
            + self.civ_no_comms
            + self.civ_possible
            + self.civ_reliable
    }

    fn record(&mut self, class: UserClass, state: ConnectivityState) {
        let slot = match (class, state) {
            (UserClass::FirstResponder, ConnectivityState::NoComms) => &mut self.fr_no_comms,
            (UserClass::FirstResponder, ConnectivityState::Possible) => &mut self.fr_possible,
            (UserClass::FirstResponder, ConnectivityState::Reliable) => &mut self.fr_reliable,
            (UserClass::Civilian, ConnectivityState::NoComms) => &mut self.civ_no_comms,
            (UserClass::Civilian, ConnectivityState::Possible) => &mut self.civ_possible,
            (UserClass::Civilian, ConnectivityState::Reliable) => &mut self.civ_reliable,
        };
        *slot += 1;
    }
}

/// Running utilization aggregates per station.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct UtilizationStats {
    pub meoc_sum: f64,
    pub meoc_peak: f64,
    pub terrestrial_sum: f64,
    pub terrestrial_peak: f64,
    pub steps: u64,
}

impl UtilizationStats {
    fn record(&mut self, meoc: f64, terrestrial: f64) {
        self.meoc_sum += meoc;
        self.meoc_peak = self.meoc_peak.max(meoc);
        self.terrestrial_sum += terrestrial;
        self.terrestrial_peak = self.terrestrial_peak.max(terrestrial);
        self.steps += 1;
    }
}

/// Complete simulation state after processing one step.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioState {
    pub step: u64,
    pub meoc_position: Point,
    pub meoc_waypoint: Option<Point>,
    pub meoc_capacity: f64,
    pub terrestrial_alive: bool,
    pub terrestrial_capacity: f64,
    /// Current per-user demand, surge multipliers applied.
    pub demands: Vec<f64>,
    pub users: Vec<UserStepRecord>,
    pub bearers: Vec<Bearer>,
    pub meoc_allocated: f64,
    pub terrestrial_allocated: f64,
    pub counters: ConnectivityCounters,
    pub utilization: UtilizationStats,
    pub dedicated_shortfall_steps: u64,
}

impl ScenarioState {
    pub fn meoc_remaining(&self) -> f64 {
        self.meoc_capacity - self.meoc_allocated
    }

    pub fn terrestrial_remaining(&self) -> f64 {
        self.terrestrial_capacity - self.terrestrial_allocated
    }
}

fn apply_events(state: &mut ScenarioState, cfg: &ScenarioConfig, step: u64) -> Result<()> {
    for timed in cfg.events.iter().filter(|e| e.step == step) {
        match &timed.event {
            ScenarioEvent::TerrestrialDestroyed => {
                state.terrestrial_alive = false;
                state.terrestrial_capacity = 0.0;
            }
            ScenarioEvent::TerrestrialDegraded { factor } => {
                if !(factor.is_finite() && *factor >= 0.0) {
                    return Err(SimError::config(
                        "scenario: degradation factor must be finite and >= 0",
                    ));
                }
                state.terrestrial_capacity *= factor;
            }
            ScenarioEvent::MeocMove { waypoint } => {
                state.meoc_waypoint = Some(*waypoint);
            }
            ScenarioEvent::TrafficSurge { multiplier } => {
                if !(multiplier.is_finite() && *multiplier >= 0.0) {
                    return Err(SimError::config(
                        "scenario: surge multiplier must be finite and >= 0",
                    ));
                }
                for d in &mut state.demands {
                    *d *= multiplier;
                }
            }
        }
    }
    Ok(())
}

fn move_meoc(state: &mut ScenarioState, cfg: &ScenarioConfig) {
    if let Some(waypoint) = state.meoc_waypoint {
        let distance = state.meoc_position.distance(&waypoint);
        let speed = cfg.meoc.speed_m_per_step;
        if distance <= speed || distance == 0.0 {
            state.meoc_position = waypoint;
            state.meoc_waypoint = None;
        } else {
            let t = speed / distance;
            state.meoc_position = Point {
                x: state.meoc_position.x + (waypoint.x - state.meoc_position.x) * t,
                y: state.meoc_position.y + (waypoint.y - state.meoc_position.y) * t,
            };
        }
    }
}

/// Recomputes coverage, classification, attachment, and allocation for
/// the current step, then updates the cumulative counters.
fn settle(state: &mut ScenarioState, cfg: &ScenarioConfig) {
    let mut meoc_attached: Vec<AttachedUser> = Vec::new();
    let mut terrestrial_attached: Vec<AttachedUser> = Vec::new();
    let mut placements: Vec<(ConnectivityState, Option<Station>)> =
        Vec::with_capacity(cfg.users.len());

    for (user, &demand) in cfg.users.iter().zip(&state.demands) {
        let in_meoc =
            user.position.distance(&state.meoc_position) <= cfg.meoc.coverage_radius_m;
        let in_terrestrial = state.terrestrial_alive
            && user.position.distance(&cfg.terrestrial.position)
                <= cfg.terrestrial.coverage_radius_m;
        let connectivity = classify_connectivity(in_meoc, in_terrestrial);

        // Attachment preference: responders use the MEOC when they can,
        // civilians keep the terrestrial network as their first path.
        let serving = match user.class {
            UserClass::FirstResponder => {
                if in_meoc {
                    Some(Station::Meoc)
                } else if in_terrestrial {
                    Some(Station::Terrestrial)
                } else {
                    None
                }
            }
            UserClass::Civilian => {
                if in_terrestrial {
                    Some(Station::Terrestrial)
                } else if in_meoc {
                    Some(Station::Meoc)
                } else {
                    None
                }
            }
        };
        match serving {
            Some(Station::Meoc) => meoc_attached.push(AttachedUser {
                id: user.id,
                class: user.class,
                demand,
            }),
            Some(Station::Terrestrial) => terrestrial_attached.push(AttachedUser {
                id: user.id,
                class: user.class,
                demand,
            }),
            None => {}
        }
        placements.push((connectivity, serving));
    }

    let meoc_bearers = allocate_bearers(state.meoc_capacity, &meoc_attached);
    let terrestrial_bearers = allocate_bearers(state.terrestrial_capacity, &terrestrial_attached);
    state.meoc_allocated = meoc_bearers.iter().map(|b| b.allocated_rate).sum();
    state.terrestrial_allocated = terrestrial_bearers.iter().map(|b| b.allocated_rate).sum();

    let granted_for = |id: u32| -> f64 {
        meoc_bearers
            .iter()
            .chain(&terrestrial_bearers)
            .filter(|b| b.owner == id)
            .map(|b| b.allocated_rate)
            .sum()
    };

    let mut shortfall = false;
    let mut records = Vec::with_capacity(cfg.users.len());
    for (user, ((connectivity, serving), &demand)) in
        cfg.users.iter().zip(placements.iter().zip(&state.demands))
    {
        let granted = granted_for(user.id);
        if user.class == UserClass::FirstResponder && granted + 1e-9 < demand {
            shortfall = true;
        }
        let bearer_kind = serving.map(|_| match user.class {
            UserClass::FirstResponder => BearerKind::Dedicated,
            UserClass::Civilian => BearerKind::Default,
        });
        records.push(UserStepRecord {
            id: user.id,
            class: user.class,
            connectivity: *connectivity,
            serving: *serving,
            bearer_kind,
            granted_rate: granted,
        });
        state.counters.record(user.class, *connectivity);
    }

    let utilization = |allocated: f64, capacity: f64| {
        if capacity > 0.0 {
            allocated / capacity
        } else {
            0.0
        }
    };
    state.utilization.record(
        utilization(state.meoc_allocated, state.meoc_capacity),
        utilization(state.terrestrial_allocated, state.terrestrial_capacity),
    );
    if shortfall {
        state.dedicated_shortfall_steps += 1;
    }

    state.users = records;
    state.bearers = meoc_bearers
        .into_iter()
        .chain(terrestrial_bearers)
        .collect();
}

/// Builds the state for step 0, applying any step-0 events.
pub fn initial_state(cfg: &ScenarioConfig) -> Result<ScenarioState> {
    cfg.validate()?;
    let mut state = ScenarioState {
        step: 0,
        meoc_position: cfg.meoc.position,
        meoc_waypoint: None,
        meoc_capacity: cfg.meoc.capacity_units,
        terrestrial_alive: cfg.terrestrial.alive,
        terrestrial_capacity: if cfg.terrestrial.alive {
            cfg.terrestrial.capacity_units
        } else {
            0.0
        },
        demands: cfg.users.iter().map(|u| u.demand).collect(),
        users: Vec::new(),
        bearers: Vec::new(),
        meoc_allocated: 0.0,
        terrestrial_allocated: 0.0,
        counters: ConnectivityCounters::default(),
        utilization: UtilizationStats::default(),
        dedicated_shortfall_steps: 0,
    };
    apply_events(&mut state, cfg, 0)?;
    move_meoc(&mut state, cfg);
    settle(&mut state, cfg);
    Ok(state)
}

/// Advances the simulation by one step.
pub fn step_scenario(state: &ScenarioState, cfg: &ScenarioConfig) -> Result<ScenarioState> {
    let next_step = state.step + 1;
    if next_step >= cfg.duration_steps {
        return Err(SimError::invalid(format!(
            "step {next_step} is outside duration {}",
            cfg.duration_steps
        )));
    }
    let mut next = state.clone();
    next.step = next_step;
    apply_events(&mut next, cfg, next_step)?;
    move_meoc(&mut next, cfg);
    settle(&mut next, cfg);
    Ok(next)
}

/// Runs the full scenario and returns every step's state in order.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<ScenarioState>> {
    let mut states = Vec::with_capacity(cfg.duration_steps as usize);
    states.push(initial_state(cfg)?);
    for _ in 1..cfg.duration_steps {
        let next = step_scenario(states.last().expect("nonempty"), cfg)?;
        states.push(next);
    }
    Ok(states)
}

/// Fractions of user-steps spent in each connectivity case.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StateFractions {
    pub no_comms: f64,
    pub possible: f64,
    pub reliable: f64,
}

impl StateFractions {
    fn from_counts(no_comms: u64, possible: u64, reliable: u64) -> Self {
        let total = no_comms + possible + reliable;
        if total == 0 {
            return StateFractions::default();
        }
        let t = total as f64;
        StateFractions {
            no_comms: no_comms as f64 / t,
            possible: possible as f64 / t,
            reliable: reliable as f64 / t,
        }
    }
}

/// Mission-level summary derived from the final state's counters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub first_responder: StateFractions,
    pub civilian: StateFractions,
    pub overall: StateFractions,
    pub meoc_peak_utilization: f64,
    pub meoc_mean_utilization: f64,
    pub terrestrial_peak_utilization: f64,
    pub terrestrial_mean_utilization: f64,
    pub dedicated_shortfall_steps: u64,
    /// True when no user spent any step without communications.
    pub no_comms_avoided: bool,
}

/// Computes the summary for a completed run.
pub fn scenario_metrics(final_state: &ScenarioState) -> MetricsReport {
    let c = &final_state.counters;
    let steps = final_state.utilization.steps;
    let mean = |sum: f64| if steps > 0 { sum / steps as f64 } else { 0.0 };
    MetricsReport {
        first_responder: StateFractions::from_counts(
            c.fr_no_comms,
            c.fr_possible,
            c.fr_reliable,
        ),
        civilian: StateFractions::from_counts(c.civ_no_comms, c.civ_possible, c.civ_reliable),
        overall: StateFractions::from_counts(
            c.fr_no_comms + c.civ_no_comms,
            c.fr_possible + c.civ_possible,
            c.fr_reliable + c.civ_reliable,
        ),
        meoc_peak_utilization: final_state.utilization.meoc_peak,
        meoc_mean_utilization: mean(final_state.utilization.meoc_sum),
        terrestrial_peak_utilization: final_state.utilization.terrestrial_peak,
        terrestrial_mean_utilization: mean(final_state.utilization.terrestrial_sum),
        dedicated_shortfall_steps: final_state.dedicated_shortfall_steps,
        no_comms_avoided: c.fr_no_comms + c.civ_no_comms == 0,
    }
}
