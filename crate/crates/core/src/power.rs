//! Static plus load-proportional power per node, the network total, and
//! F-RRH battery accounting.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::controller::FrrhState;
use crate::engine::config::{PowerParams, ProfileParams};
use crate::error::{Error, Result};
use crate::ids::NodeId;
use crate::math;
use crate::topology::{LinkKind, NodeKind, NodeSpec, Topology};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile {
    pub static_w: f64,
    /// Load-dependent slope applied to the transmit power.
    pub slope: f64,
    pub tx_w: f64,
    pub hover_w: f64,
}

impl PowerProfile {
    pub fn new(params: &ProfileParams, tx_dbm: f64) -> Self {
        PowerProfile {
            static_w: params.static_w,
            slope: params.slope,
            tx_w: math::dbm_to_watts(tx_dbm),
            hover_w: params.hover_w,
        }
    }
}

/// `static + slope * tx * load (+ hover when flying)`.
pub fn node_power(profile: &PowerProfile, load_fraction: f64, flying: bool) -> Result<f64> {
    if !(0.0..=1.0).contains(&load_fraction) {
        return Err(Error::domain("load fraction outside [0, 1]"));
    }
    let mut p = profile.static_w + profile.slope * profile.tx_w * load_fraction;
    if flying {
        p += profile.hover_w;
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryState {
    pub remaining_wh: f64,
    pub capacity_wh: f64,
}

impl BatteryState {
    pub fn full(capacity_wh: f64) -> Self {
        BatteryState {
            remaining_wh: capacity_wh,
            capacity_wh,
        }
    }

    pub fn is_full(&self) -> bool {
        self.remaining_wh >= self.capacity_wh
    }

    pub fn is_empty(&self) -> bool {
        self.remaining_wh <= 0.0
    }
}

/// Charge below this is rounding residue from many small drain steps.
const EMPTY_WH: f64 = 1e-9;

/// Drain `draw_w` for `dt` seconds; never below zero.
pub fn battery_step(state: BatteryState, draw_w: f64, dt: f64) -> BatteryState {
    let used = draw_w * dt / 3600.0;
    let remaining = state.remaining_wh - used;
    BatteryState {
        remaining_wh: if remaining > EMPTY_WH { remaining } else { 0.0 },
        ..state
    }
}

/// Charge at `rate_w` for `dt` seconds; never above capacity.
pub fn battery_charge(state: BatteryState, rate_w: f64, dt: f64) -> BatteryState {
    let remaining = state.remaining_wh + rate_w * dt / 3600.0;
    BatteryState {
        remaining_wh: if remaining < state.capacity_wh { remaining } else { state.capacity_wh },
        ..state
    }
}

/// Power accounting for one topology.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerModel {
    profiles: BTreeMap<NodeId, PowerProfile>,
    bbu_w: BTreeMap<NodeId, f64>,
    pub standby_w: f64,
    pub include_hover: bool,
}

/// Per-node draw and the network total. The F-RRH share is summed apart
/// from the ground share and added once, so adding parked F-RRHs to a
/// network shifts its total by exactly their standby draw.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSnapshot {
    pub per_node: Vec<(NodeId, f64)>,
    pub ground_w: f64,
    pub frrh_w: f64,
    pub total_w: f64,
}

impl PowerModel {
    pub fn new(params: &PowerParams, topology: &Topology) -> Self {
        let mut profiles = BTreeMap::new();
        let mut bbu_w = BTreeMap::new();
        for n in &topology.nodes {
            match n.kind {
                NodeKind::MacroBS => {
                    profiles.insert(n.id, PowerProfile::new(&params.macro_bs, n.tx_power_dbm));
                }
                NodeKind::SRRH => {
                    profiles.insert(n.id, PowerProfile::new(&params.srrh, n.tx_power_dbm));
                }
                NodeKind::FRRHPassive | NodeKind::FRRHActive => {
                    profiles.insert(n.id, PowerProfile::new(&params.frrh, n.tx_power_dbm));
                }
                NodeKind::BBUPool => {
                    let rrhs = topology
                        .links_at(n.id)
                        .filter(|l| l.kind == LinkKind::OpticalFronthaul)
                        .count();
                    bbu_w.insert(n.id, params.bbu_static_w + params.bbu_per_rrh_w * rrhs as f64);
                }
            }
        }
        PowerModel {
            profiles,
            bbu_w,
            standby_w: params.standby_w,
            include_hover: params.include_hover,
        }
    }

    pub fn profile(&self, node: NodeId) -> Option<&PowerProfile> {
        self.profiles.get(&node)
    }

    /// Battery drain of a flying F-RRH; hover always counts here.
    pub fn flight_draw(&self, node: NodeId, load_fraction: f64) -> f64 {
        self.profiles
            .get(&node)
            .and_then(|p| node_power(p, load_fraction.clamp(0.0, 1.0), true).ok())
            .unwrap_or(0.0)
    }

    fn frrh_power(&self, node: &NodeSpec, load: f64, state: FrrhState) -> Result<f64> {
        if !state.is_flying() {
            return Ok(self.standby_w);
        }
        let p = self.profiles.get(&node.id).ok_or_else(|| Error::domain("no power profile"))?;
        node_power(p, load, self.include_hover)
    }

    /// Network power at one instant. `load` gives each serving node's PRB
    /// load fraction; `state` gives each F-RRH's lifecycle state (F-RRHs
    /// without one count as parked).
    pub fn snapshot(
        &self,
        topology: &Topology,
        load: impl Fn(NodeId) -> f64,
        state: impl Fn(NodeId) -> Option<FrrhState>,
    ) -> Result<PowerSnapshot> {
        let mut per_node = Vec::with_capacity(topology.nodes.len());
        let mut ground_w = 0.0;
        let mut frrh_w = 0.0;
        for n in &topology.nodes {
            let w = match n.kind {
                NodeKind::BBUPool => self.bbu_w.get(&n.id).copied().unwrap_or(0.0),
                NodeKind::MacroBS | NodeKind::SRRH => {
                    let p = self.profiles.get(&n.id).ok_or_else(|| Error::domain("no power profile"))?;
                    node_power(p, load(n.id), false)?
                }
                NodeKind::FRRHPassive | NodeKind::FRRHActive => {
                    let w = self.frrh_power(n, load(n.id), state(n.id).unwrap_or(FrrhState::Standby))?;
                    frrh_w += w;
                    per_node.push((n.id, w));
                    continue;
                }
            };
            ground_w += w;
            per_node.push((n.id, w));
        }
        Ok(PowerSnapshot {
            per_node,
            ground_w,
            frrh_w,
            total_w: ground_w + frrh_w,
        })
    }
}

/// Total network power for the given loads and F-RRH states.
pub fn total_power(
    model: &PowerModel,
    topology: &Topology,
    loads: &BTreeMap<NodeId, f64>,
    states: &BTreeMap<NodeId, FrrhState>,
) -> Result<f64> {
    model
        .snapshot(
            topology,
            |id| loads.get(&id).copied().unwrap_or(0.0),
            |id| states.get(&id).copied(),
        )
        .map(|s| s.total_w)
}
