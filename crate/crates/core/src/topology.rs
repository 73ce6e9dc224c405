//! Network elements, links and cells for the three architectures, plus the
//! extended-star cluster used over complex terrain.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::{self, ChannelEnv};
use crate::engine::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::ids::{CellId, LinkId, NodeId};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Architecture {
    #[cfg_attr(feature = "serde", serde(rename = "macro"))]
    MacroOnly,
    #[cfg_attr(feature = "serde", serde(rename = "cran"))]
    CRAN,
    #[cfg_attr(feature = "serde", serde(rename = "ucran"))]
    UCRAN,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::MacroOnly, Architecture::CRAN, Architecture::UCRAN];

    pub fn label(self) -> &'static str {
        match self {
            Architecture::MacroOnly => "macro",
            Architecture::CRAN => "cran",
            Architecture::UCRAN => "ucran",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Architecture::ALL.into_iter().find(|a| a.label() == s)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    MacroBS,
    SRRH,
    FRRHPassive,
    FRRHActive,
    BBUPool,
}

impl NodeKind {
    pub fn is_flying(self) -> bool {
        matches!(self, NodeKind::FRRHPassive | NodeKind::FRRHActive)
    }

    pub fn is_ground_serving(self) -> bool {
        matches!(self, NodeKind::MacroBS | NodeKind::SRRH)
    }

    /// Nodes that can hold UE sessions.
    pub fn serves_ues(self) -> bool {
        self.is_ground_serving() || self.is_flying()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Position { x, y, z }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        math::hypot3(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn ground_distance(&self, other: &Position) -> f64 {
        math::hypot3(self.x - other.x, self.y - other.y, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: NodeId,
    pub kind: NodeKind,
    pub position: Position,
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub capacity_prbs: u32,
    /// Tasks per second; zero where no baseband processing happens.
    pub proc_rate: f64,
    pub battery_wh: Option<f64>,
    /// Radius within which attached UEs are placed.
    pub coverage_radius_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinkKind {
    OpticalFronthaul,
    WirelessFronthaul,
    MicrowaveBackhaul,
    RFAccess,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub id: LinkId,
    pub endpoints: (NodeId, NodeId),
    pub kind: LinkKind,
    pub fixed_latency_s: f64,
    pub capacity_bps: f64,
}

impl LinkSpec {
    pub fn other_end(&self, node: NodeId) -> Option<NodeId> {
        match self.endpoints {
            (a, b) if a == node => Some(b),
            (a, b) if b == node => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: CellId,
    pub center: Position,
    pub serving_nodes: Vec<NodeId>,
    pub area_km2: f64,
    pub max_ues: u32,
}

impl Cell {
    pub fn radius_m(&self) -> f64 {
        radius_for_area(self.area_km2)
    }
}

/// Radius of the circle with the given area.
pub fn radius_for_area(area_km2: f64) -> f64 {
    math::sqrt(area_km2 * 1.0e6 / core::f64::consts::PI)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub architecture: Architecture,
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
    pub cells: Vec<Cell>,
}

impl Topology {
    pub fn node(&self, id: NodeId) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn link(&self, id: LinkId) -> Option<&LinkSpec> {
        self.links.iter().find(|l| l.id == id)
    }

    pub fn cell(&self, id: CellId) -> Option<&Cell> {
        self.cells.iter().find(|c| c.id == id)
    }

    pub fn nodes_of(&self, pred: impl Fn(NodeKind) -> bool) -> impl Iterator<Item = &NodeSpec> {
        self.nodes.iter().filter(move |n| pred(n.kind))
    }

    pub fn flying_nodes(&self) -> impl Iterator<Item = &NodeSpec> {
        self.nodes_of(NodeKind::is_flying)
    }

    pub fn links_at(&self, node: NodeId) -> impl Iterator<Item = &LinkSpec> {
        self.links.iter().filter(move |l| l.endpoints.0 == node || l.endpoints.1 == node)
    }

    /// Shortest (fewest links) route from `from` to any node satisfying
    /// `target`, ties broken toward lower link ids. Empty when `from` itself
    /// is a target; `None` when unreachable.
    pub fn route_to(&self, from: NodeId, target: impl Fn(&NodeSpec) -> bool) -> Option<Vec<LinkId>> {
        let mut prev: BTreeMap<NodeId, (NodeId, LinkId)> = BTreeMap::new();
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(at) = queue.pop_front() {
            let spec = self.node(at)?;
            if target(spec) {
                let mut route = Vec::new();
                let mut cur = at;
                while let Some(&(p, l)) = prev.get(&cur) {
                    route.push(l);
                    cur = p;
                }
                route.reverse();
                return Some(route);
            }
            let mut next: Vec<(LinkId, NodeId)> = self
                .links_at(at)
                .filter_map(|l| l.other_end(at).map(|n| (l.id, n)))
                .collect();
            next.sort();
            for (l, n) in next {
                if seen.insert(n) {
                    prev.insert(n, (at, l));
                    queue.push_back(n);
                }
            }
        }
        None
    }

    /// Route to the nearest BBU pool.
    pub fn route_to_bbu(&self, from: NodeId) -> Option<Vec<LinkId>> {
        self.route_to(from, |n| n.kind == NodeKind::BBUPool)
    }

    /// Hop count from `from` to `to` over links, if connected.
    pub fn hops_between(&self, from: NodeId, to: NodeId) -> Option<usize> {
        self.route_to(from, |n| n.id == to).map(|r| r.len())
    }
}

/// Link parameters shared by all topology builders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub optical_latency_s: f64,
    pub optical_capacity_bps: f64,
    pub wireless_latency_s: f64,
    pub wireless_bandwidth_hz: f64,
    pub microwave_latency_s: f64,
    pub microwave_capacity_bps: f64,
    pub env: ChannelEnv,
}

impl LinkParams {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        let t = &cfg.topology;
        LinkParams {
            optical_latency_s: t.optical_latency_s,
            optical_capacity_bps: t.optical_capacity_bps,
            wireless_latency_s: t.wireless_latency_s,
            wireless_bandwidth_hz: t.wireless_bandwidth_mhz * 1e6,
            microwave_latency_s: t.microwave_latency_s,
            microwave_capacity_bps: t.microwave_capacity_bps,
            env: cfg.channel,
        }
    }

    /// Rate of a wireless fronthaul hop. Air-to-air hops see free space plus
    /// the LoS excess; hops down to a ground head use the air-to-ground model.
    pub fn wireless_capacity(&self, a: &NodeSpec, b: &NodeSpec) -> f64 {
        let (air, other) = if a.kind.is_flying() { (a, b) } else { (b, a) };
        let loss = if other.kind.is_flying() {
            let range = a.position.distance(&b.position);
            let range = if range > 1.0 { range } else { 1.0 };
            channel::free_space_loss(range, self.env.carrier_hz) + self.env.excess_los_db
        } else {
            let dz = air.position.z - other.position.z;
            let ground = air.position.ground_distance(&other.position);
            if dz > 0.0 {
                channel::atg_path_loss(ground, dz, &self.env).unwrap_or(f64::INFINITY)
            } else {
                channel::terrestrial_path_loss(air.position.distance(&other.position), &self.env)
            }
        };
        channel::link_rate(air.tx_power_dbm, loss, self.wireless_bandwidth_hz, &self.env)
            .map(|b| b.rate_bps)
            .unwrap_or(0.0)
    }

    pub fn link(&self, id: LinkId, kind: LinkKind, a: &NodeSpec, b: &NodeSpec) -> LinkSpec {
        let (fixed_latency_s, capacity_bps) = match kind {
            LinkKind::OpticalFronthaul => (self.optical_latency_s, self.optical_capacity_bps),
            LinkKind::MicrowaveBackhaul => (self.microwave_latency_s, self.microwave_capacity_bps),
            LinkKind::WirelessFronthaul | LinkKind::RFAccess => {
                (self.wireless_latency_s, self.wireless_capacity(a, b))
            }
        };
        LinkSpec {
            id,
            endpoints: (a.id, b.id),
            kind,
            fixed_latency_s,
            capacity_bps,
        }
    }
}

/// Multi-cell layout for the hotspot study: cells on a line two radii apart,
/// one ground node per cell, a shared BBU pool for C-RAN, and the flying
/// radio heads parked on the standby cell's platform.
pub fn build_topology(cfg: &ScenarioConfig) -> Result<Topology> {
    let t = &cfg.topology;
    let arch = cfg.scenario.architecture;
    let radius = radius_for_area(t.cell_area_km2);
    let ground_capacity = t.ground_capacity_prbs()?;
    let frrh_capacity = t.frrh_capacity_prbs()?;
    let links = LinkParams::from_config(cfg);

    if arch != Architecture::MacroOnly && t.bbu_pools == 0 {
        return Err(Error::invalid("topology.bbu_pools", "C-RAN needs at least one BBU pool"));
    }

    let mut nodes = Vec::new();
    let mut cells = Vec::new();
    let mut next_id = 0u32;
    let mut fresh = || {
        let id = NodeId(next_id);
        next_id += 1;
        id
    };

    for i in 0..t.cells {
        let center = Position::new(i as f64 * 2.0 * radius, 0.0, 0.0);
        let (kind, proc_rate) = match arch {
            Architecture::MacroOnly => (NodeKind::MacroBS, cfg.latency.macro_proc_rate),
            _ => (NodeKind::SRRH, 0.0),
        };
        let id = fresh();
        nodes.push(NodeSpec {
            id,
            kind,
            position: Position::new(center.x, center.y, t.ground_height_m),
            tx_power_dbm: t.ground_tx_dbm,
            bandwidth_hz: t.bandwidth_mhz * 1e6,
            capacity_prbs: ground_capacity,
            proc_rate,
            battery_wh: None,
            coverage_radius_m: radius,
        });
        let max_ues = ground_capacity / cfg.traffic.demand_prbs;
        if max_ues == 0 {
            return Err(Error::invalid("traffic.demand_prbs", "exceeds a cell's PRB capacity"));
        }
        cells.push(Cell {
            id: CellId(i + 1),
            center,
            serving_nodes: alloc::vec![id],
            area_km2: t.cell_area_km2,
            max_ues,
        });
    }

    let mut link_specs = Vec::new();
    if arch != Architecture::MacroOnly {
        let pools: Vec<NodeSpec> = (0..t.bbu_pools)
            .map(|k| NodeSpec {
                id: fresh(),
                kind: NodeKind::BBUPool,
                position: Position::new(-radius, (k as f64) * 100.0, 0.0),
                tx_power_dbm: 0.0,
                bandwidth_hz: 0.0,
                capacity_prbs: 0,
                proc_rate: cfg.latency.bbu_proc_rate,
                battery_wh: None,
                coverage_radius_m: 0.0,
            })
            .collect();
        for (i, rrh) in nodes.iter().enumerate() {
            let pool = &pools[i % pools.len()];
            let id = LinkId(link_specs.len() as u32);
            link_specs.push(links.link(id, LinkKind::OpticalFronthaul, rrh, pool));
        }
        nodes.extend(pools);
    }

    if arch == Architecture::UCRAN {
        let standby = cells
            .iter()
            .find(|c| c.id == CellId(t.standby_cell))
            .ok_or_else(|| Error::invalid("topology.standby_cell", "no such cell"))?;
        let platform = standby.center;
        let pool = nodes
            .iter()
            .find(|n| n.kind == NodeKind::BBUPool)
            .cloned()
            .expect("pool created above");
        for _ in 0..t.uav_count {
            let frrh = flying_node(fresh(), cfg, platform, frrh_capacity);
            let id = LinkId(link_specs.len() as u32);
            link_specs.push(links.link(id, LinkKind::MicrowaveBackhaul, &frrh, &pool));
            nodes.push(frrh);
        }
    }

    Ok(Topology {
        architecture: arch,
        nodes,
        links: link_specs,
        cells,
    })
}

/// A flying radio head of the configured kind parked at `at` (ground level).
pub fn flying_node(id: NodeId, cfg: &ScenarioConfig, at: Position, capacity_prbs: u32) -> NodeSpec {
    let active = cfg.topology.frrh_active;
    NodeSpec {
        id,
        kind: if active { NodeKind::FRRHActive } else { NodeKind::FRRHPassive },
        position: Position::new(at.x, at.y, 0.0),
        tx_power_dbm: cfg.topology.frrh_tx_dbm,
        bandwidth_hz: cfg.topology.frrh_bandwidth_mhz * 1e6,
        capacity_prbs,
        proc_rate: if active { cfg.latency.frrh_proc_rate } else { 0.0 },
        battery_wh: Some(cfg.power.frrh.battery_wh),
        coverage_radius_m: cfg.topology.small_cell_radius_m,
    }
}

/// Depth of every member under breadth-first placement with at most
/// `fan_out` children per node: the first `fan_out` members hang off the
/// head, the next ones off the first member, and so on.
pub fn extended_star_parents(members: usize, fan_out: usize) -> Result<Vec<(usize, Option<usize>)>> {
    let capacity = fan_out + fan_out * fan_out;
    if members > capacity || (fan_out == 0 && members > 0) {
        return Err(Error::ClusterTooLarge { members, capacity });
    }
    // (depth, parent member index; None = head)
    let mut placement = Vec::with_capacity(members);
    for i in 0..members {
        if i < fan_out {
            placement.push((1, None));
        } else {
            placement.push((2, Some((i - fan_out) / fan_out)));
        }
    }
    Ok(placement)
}

/// Extended-star cluster: members within two wireless hops of an
/// MEC-enabled head, and the head backhauled to `bbu` over microwave.
pub fn build_cluster_topology(
    head: NodeSpec,
    members: Vec<NodeSpec>,
    bbu: NodeSpec,
    fan_out: usize,
    params: &LinkParams,
) -> Result<Topology> {
    if head.kind != NodeKind::FRRHActive {
        return Err(Error::PassiveClusterHead);
    }
    if let Some(m) = members.iter().find(|m| !m.kind.is_flying()) {
        return Err(Error::NotFlyingMember(m.id));
    }
    let placement = extended_star_parents(members.len(), fan_out)?;

    let mut links = Vec::new();
    links.push(params.link(LinkId(0), LinkKind::MicrowaveBackhaul, &head, &bbu));
    for (member, &(_, parent)) in members.iter().zip(&placement) {
        let up = match parent {
            None => &head,
            Some(p) => &members[p],
        };
        let id = LinkId(links.len() as u32);
        links.push(params.link(id, LinkKind::WirelessFronthaul, member, up));
    }

    let mut nodes = Vec::with_capacity(members.len() + 2);
    nodes.push(head);
    nodes.extend(members);
    nodes.push(bbu);
    Ok(Topology {
        architecture: Architecture::UCRAN,
        nodes,
        links,
        cells: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub subject: String,
    pub rule: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.rule)
    }
}

/// Every broken invariant, one entry per offending element.
pub fn validate_topology(t: &Topology) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut flag = |subject: String, rule: &'static str| out.push(Violation { subject, rule });

    let mut ids = BTreeSet::new();
    for n in &t.nodes {
        if !ids.insert(n.id) {
            flag(format!("{}", n.id), "duplicate node id");
        }
    }
    let mut link_ids = BTreeSet::new();
    for l in &t.links {
        if !link_ids.insert(l.id) {
            flag(format!("{}", l.id), "duplicate link id");
        }
    }

    let max_ground_tx = t
        .nodes
        .iter()
        .filter(|n| n.kind.is_ground_serving())
        .map(|n| n.tx_power_dbm)
        .fold(f64::NEG_INFINITY, f64::max);

    for n in &t.nodes {
        let subject = format!("{}", n.id);
        match n.kind {
            NodeKind::FRRHPassive if n.proc_rate != 0.0 => {
                flag(subject.clone(), "passive F-RRH must not process tasks")
            }
            NodeKind::FRRHActive if !(n.proc_rate > 0.0) => {
                flag(subject.clone(), "active F-RRH needs a processing rate")
            }
            _ => {}
        }
        if n.kind.is_flying() {
            if n.battery_wh.is_none() {
                flag(subject.clone(), "F-RRH needs a battery");
            }
            if max_ground_tx.is_finite() && n.tx_power_dbm > max_ground_tx {
                flag(subject.clone(), "F-RRH transmit power exceeds ground nodes");
            }
        } else if n.battery_wh.is_some() {
            flag(subject.clone(), "only F-RRHs carry batteries");
        }
        if !(n.position.z >= 0.0) {
            flag(subject.clone(), "altitude below ground");
        }
        if n.kind.serves_ues() && n.capacity_prbs == 0 {
            flag(subject.clone(), "serving node has zero PRB capacity");
        }
    }

    for l in &t.links {
        let subject = format!("{}", l.id);
        let (a, b) = match (t.node(l.endpoints.0), t.node(l.endpoints.1)) {
            (Some(a), Some(b)) => (a.kind, b.kind),
            _ => {
                flag(subject, "endpoint not in topology");
                continue;
            }
        };
        let either = |k: NodeKind| a == k || b == k;
        let ok = match l.kind {
            LinkKind::OpticalFronthaul => either(NodeKind::SRRH) && either(NodeKind::BBUPool),
            LinkKind::WirelessFronthaul => {
                (a.is_flying() && (b.is_flying() || b == NodeKind::SRRH))
                    || (b.is_flying() && a == NodeKind::SRRH)
            }
            LinkKind::MicrowaveBackhaul => {
                (a.is_flying() && b == NodeKind::BBUPool) || (b.is_flying() && a == NodeKind::BBUPool)
            }
            LinkKind::RFAccess => a.serves_ues() || b.serves_ues(),
        };
        if !ok {
            flag(subject.clone(), "link kind not allowed between these endpoints");
        }
        if !(l.fixed_latency_s >= 0.0) {
            flag(subject.clone(), "negative fixed latency");
        }
        if !(l.capacity_bps > 0.0) {
            flag(subject, "link capacity must be positive");
        }
    }

    for c in &t.cells {
        let subject = format!("{}", c.id);
        if !(c.area_km2 > 0.0) {
            flag(subject.clone(), "cell area must be positive");
        }
        if c.max_ues == 0 {
            flag(subject.clone(), "cell supports no UEs");
        }
        if c.serving_nodes.iter().any(|id| t.node(*id).is_none()) {
            flag(subject, "serving node not in topology");
        }
    }

    let flying = t.nodes.iter().filter(|n| n.kind.is_flying()).count();
    match t.architecture {
        Architecture::UCRAN if flying == 0 => flag(String::from("topology"), "UC-RAN needs at least one F-RRH"),
        Architecture::CRAN | Architecture::MacroOnly if flying > 0 => {
            flag(String::from("topology"), "F-RRHs only belong to UC-RAN")
        }
        _ => {}
    }

    for n in &t.nodes {
        let needs_pool = matches!(n.kind, NodeKind::SRRH) || n.kind.is_flying();
        if needs_pool && t.route_to_bbu(n.id).is_none() {
            flag(format!("{}", n.id), "no path to a BBU pool");
        }
    }
    out
}
