//! Layouts of the disaster relay chain and the complex-terrain cluster, and
//! the terrain coverage run.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use super::config::ScenarioConfig;
use crate::channel;
use crate::error::Result;
use crate::ids::{CellId, LinkId, NodeId, UeId};
use crate::math;
use crate::topology::{
    build_cluster_topology, extended_star_parents, flying_node, LinkKind, LinkParams, NodeKind, NodeSpec, Position,
    Topology,
};
use crate::trace::{Trace, TraceRecord};
use crate::traffic::{stream_rng, Origin};

/// Relay chain over a disaster area: survey F-RRHs report through passive
/// relays to a head F-RRH, which reaches the surviving S-RRH wirelessly;
/// the S-RRH is fibred to the BBU pool.
#[derive(Debug, Clone, PartialEq)]
pub struct DisasterLayout {
    pub topology: Topology,
    pub head: NodeId,
    pub relays: Vec<NodeId>,
    pub sources: Vec<NodeId>,
}

fn aloft(mut n: NodeSpec, altitude: f64) -> NodeSpec {
    n.position.z = altitude;
    n
}

pub fn scenario_disaster(cfg: &ScenarioConfig) -> Result<DisasterLayout> {
    let d = &cfg.disaster;
    let t = &cfg.topology;
    let params = LinkParams::from_config(cfg);
    let cap = t.frrh_capacity_prbs()?;

    let srrh = NodeSpec {
        id: NodeId(0),
        kind: NodeKind::SRRH,
        position: Position::new(0.0, 0.0, t.ground_height_m),
        tx_power_dbm: t.ground_tx_dbm,
        bandwidth_hz: t.bandwidth_mhz * 1e6,
        capacity_prbs: t.ground_capacity_prbs()?,
        proc_rate: 0.0,
        battery_wh: None,
        coverage_radius_m: 0.0,
    };
    let bbu = NodeSpec {
        id: NodeId(1),
        kind: NodeKind::BBUPool,
        position: Position::new(-1000.0, 0.0, 0.0),
        tx_power_dbm: 0.0,
        bandwidth_hz: 0.0,
        capacity_prbs: 0,
        proc_rate: cfg.latency.bbu_proc_rate,
        battery_wh: None,
        coverage_radius_m: 0.0,
    };
    let mut head = aloft(
        flying_node(NodeId(2), cfg, Position::new(d.backhaul_distance_m, 0.0, 0.0), cap),
        d.altitude_m,
    );
    if d.head_active {
        head.kind = NodeKind::FRRHActive;
        head.proc_rate = cfg.latency.frrh_proc_rate;
    } else {
        head.kind = NodeKind::FRRHPassive;
        head.proc_rate = 0.0;
    }

    let mut nodes = vec![srrh, bbu, head];
    let mut next = 3u32;
    let mut relays = Vec::new();
    for k in 0..d.relays {
        let x = d.backhaul_distance_m + f64::from(k + 1) * d.hop_spacing_m;
        let mut r = aloft(flying_node(NodeId(next), cfg, Position::new(x, 0.0, 0.0), cap), d.altitude_m);
        r.kind = NodeKind::FRRHPassive;
        r.proc_rate = 0.0;
        relays.push(r.id);
        nodes.push(r);
        next += 1;
    }
    let tail_x = d.backhaul_distance_m + f64::from(d.relays + 1) * d.hop_spacing_m;
    let mut sources = Vec::new();
    for k in 0..d.sources {
        let y = (f64::from(k) - f64::from(d.sources - 1) / 2.0) * d.hop_spacing_m * 0.5;
        let mut s = aloft(flying_node(NodeId(next), cfg, Position::new(tail_x, y, 0.0), cap), d.altitude_m);
        s.kind = NodeKind::FRRHPassive;
        s.proc_rate = 0.0;
        sources.push(s.id);
        nodes.push(s);
        next += 1;
    }

    let by_id = |id: NodeId| nodes.iter().find(|n| n.id == id).expect("node built above");
    let mut links = Vec::new();
    let add = |kind, a: NodeId, b: NodeId, links: &mut Vec<_>| {
        let id = LinkId(links.len() as u32);
        links.push(params.link(id, kind, by_id(a), by_id(b)));
    };
    add(LinkKind::OpticalFronthaul, NodeId(0), NodeId(1), &mut links);
    add(LinkKind::WirelessFronthaul, NodeId(2), NodeId(0), &mut links);
    let mut up = NodeId(2);
    for &r in &relays {
        add(LinkKind::WirelessFronthaul, r, up, &mut links);
        up = r;
    }
    for &s in &sources {
        add(LinkKind::WirelessFronthaul, s, up, &mut links);
    }

    Ok(DisasterLayout {
        topology: Topology {
            architecture: cfg.scenario.architecture,
            nodes,
            links,
            cells: Vec::new(),
        },
        head: NodeId(2),
        relays,
        sources,
    })
}

/// Extended-star cluster over rough terrain plus the UEs on the ground.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainLayout {
    pub topology: Topology,
    pub head: NodeId,
    pub ues: Vec<Position>,
    /// Nearest ground S-RRH, outside the cluster.
    pub srrh: NodeSpec,
}

/// Member positions depend only on the member's index, so a cluster with
/// more members contains the smaller one.
fn member_positions(head: Position, members: usize, fan_out: usize, spacing: f64) -> Result<Vec<Position>> {
    let placement = extended_star_parents(members, fan_out)?;
    let mut out: Vec<Position> = Vec::with_capacity(members);
    let mut angles: Vec<f64> = Vec::with_capacity(members);
    for (i, &(_, parent)) in placement.iter().enumerate() {
        let (base, angle) = match parent {
            None => (head, 2.0 * PI * i as f64 / fan_out as f64),
            Some(p) => {
                let j = (i - fan_out) % fan_out;
                let offset = (j as f64 - (fan_out as f64 - 1.0) / 2.0) * PI / 4.0;
                (out[p], angles[p] + offset)
            }
        };
        out.push(Position::new(
            base.x + spacing * math::cos(angle),
            base.y + spacing * math::sin(angle),
            head.z,
        ));
        angles.push(angle);
    }
    Ok(out)
}

pub fn scenario_terrain(cfg: &ScenarioConfig) -> Result<TerrainLayout> {
    let te = &cfg.terrain;
    let t = &cfg.topology;
    let cap = t.frrh_capacity_prbs()?;
    let origin = Position::new(0.0, 0.0, te.altitude_m);

    let mut head = aloft(flying_node(NodeId(0), cfg, origin, cap), te.altitude_m);
    head.kind = NodeKind::FRRHActive;
    head.proc_rate = cfg.latency.frrh_proc_rate;
    let members: Vec<NodeSpec> = member_positions(origin, te.members as usize, t.fan_out as usize, te.member_spacing_m)?
        .into_iter()
        .enumerate()
        .map(|(i, p)| aloft(flying_node(NodeId(1 + i as u32), cfg, p, cap), te.altitude_m))
        .collect();
    let bbu = NodeSpec {
        id: NodeId(1 + te.members),
        kind: NodeKind::BBUPool,
        position: Position::new(-te.srrh_distance_m, 0.0, 0.0),
        tx_power_dbm: 0.0,
        bandwidth_hz: 0.0,
        capacity_prbs: 0,
        proc_rate: cfg.latency.bbu_proc_rate,
        battery_wh: None,
        coverage_radius_m: 0.0,
    };
    let srrh = NodeSpec {
        id: NodeId(2 + te.members),
        kind: NodeKind::SRRH,
        position: Position::new(te.srrh_distance_m, 0.0, t.ground_height_m),
        tx_power_dbm: t.ground_tx_dbm,
        bandwidth_hz: t.bandwidth_mhz * 1e6,
        capacity_prbs: t.ground_capacity_prbs()?,
        proc_rate: 0.0,
        battery_wh: None,
        coverage_radius_m: 0.0,
    };
    let topology = build_cluster_topology(head, members, bbu, t.fan_out as usize, &LinkParams::from_config(cfg))?;

    let mut rng = stream_rng(cfg.scenario.seed, 1 << 48);
    let ues = (0..te.ue_count)
        .map(|_| {
            let r = te.region_radius_m * math::sqrt(rng.random::<f64>());
            let phi = 2.0 * PI * rng.random::<f64>();
            Position::new(r * math::cos(phi), r * math::sin(phi), 0.0)
        })
        .collect();
    Ok(TerrainLayout {
        topology,
        head: NodeId(0),
        ues,
        srrh,
    })
}

/// Flying nodes joined to the head by links that all carry traffic.
fn connected_flyers(layout: &TerrainLayout) -> Vec<&NodeSpec> {
    let t = &layout.topology;
    t.flying_nodes()
        .filter(|n| {
            n.id == layout.head
                || t.route_to(n.id, |m| m.id == layout.head).is_some_and(|route| {
                    route
                        .iter()
                        .all(|l| t.link(*l).is_some_and(|l| l.capacity_bps > 0.0))
                })
        })
        .collect()
}

/// Access rate from `node` to a ground UE at `ue` through `extra_db` of
/// obstruction.
pub fn access_rate(node: &NodeSpec, ue: &Position, extra_db: f64, cfg: &ScenarioConfig) -> f64 {
    let env = &cfg.channel;
    let ground = node.position.ground_distance(ue);
    let loss = if node.kind.is_flying() {
        match channel::atg_path_loss(ground, node.position.z - ue.z, env) {
            Ok(l) => l,
            Err(_) => return 0.0,
        }
    } else {
        channel::terrestrial_path_loss(node.position.distance(ue), env)
    };
    channel::link_rate(node.tx_power_dbm, loss + extra_db, node.bandwidth_hz, env)
        .map(|b| b.rate_bps)
        .unwrap_or(0.0)
}

/// Coverage of the cluster and, for comparison, of the ground S-RRH alone.
/// Each UE attaches to the connected flying node with the best rate.
pub fn run_terrain(cfg: &ScenarioConfig) -> Result<Trace> {
    let layout = scenario_terrain(cfg)?;
    let extra = cfg.terrain.obstruction_db;
    let flyers = connected_flyers(&layout);
    let cell = CellId(1);

    let mut trace = Trace::new();
    trace.push(TraceRecord::Begin {
        scenario: cfg.scenario.kind,
        architecture: cfg.scenario.architecture,
        seed: cfg.scenario.seed,
        ue_count: cfg.terrain.ue_count,
        duration_s: cfg.scenario.duration_s,
        warmup_s: 0.0,
        cell,
    });
    let (mut covered, mut baseline) = (0u32, 0u32);
    for (i, ue_pos) in layout.ues.iter().enumerate() {
        let ue = UeId(i as u32);
        trace.push(TraceRecord::Arrival {
            t: 0.0,
            ue,
            cell,
            origin: Origin::Local,
        });
        let mut best: Option<(NodeId, f64)> = None;
        for n in &flyers {
            let r = access_rate(n, ue_pos, extra, cfg);
            if r > 0.0 && best.is_none_or(|(_, b)| r > b) {
                best = Some((n.id, r));
            }
        }
        match best {
            Some((node, _)) => {
                covered += 1;
                trace.push(TraceRecord::Admit { t: 0.0, ue, node });
            }
            None => trace.push(TraceRecord::Block { t: 0.0, ue, cell }),
        }
        if access_rate(&layout.srrh, ue_pos, extra, cfg) > 0.0 {
            baseline += 1;
        }
    }
    trace.push(TraceRecord::Coverage {
        t: 0.0,
        covered,
        total: cfg.terrain.ue_count,
        baseline,
    });
    trace.push(TraceRecord::End {
        t: cfg.scenario.duration_s,
    });
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::config::ScenarioKind;
    use crate::topology::{validate_topology, Architecture};

    fn terrain_cfg(members: u32) -> ScenarioConfig {
        let mut c = ScenarioConfig::default();
        c.scenario.kind = ScenarioKind::ComplexTerrain;
        c.scenario.architecture = Architecture::UCRAN;
        c.terrain.members = members;
        c
    }

    #[test]
    fn disaster_chain_shape() {
        let cfg = ScenarioConfig::default();
        let l = scenario_disaster(&cfg).unwrap();
        assert_eq!(l.sources.len(), 2);
        assert_eq!(l.relays.len(), 1);
        assert!(validate_topology(&l.topology).is_empty());
        // source -> relay -> head -> S-RRH -> BBU
        assert_eq!(l.topology.route_to_bbu(l.sources[0]).unwrap().len(), 4);
        assert!(l.topology.links.iter().all(|k| k.capacity_bps > 0.0));
    }

    #[test]
    fn members_are_nested() {
        let small = member_positions(Position::new(0.0, 0.0, 100.0), 4, 3, 1000.0).unwrap();
        let large = member_positions(Position::new(0.0, 0.0, 100.0), 9, 3, 1000.0).unwrap();
        assert_eq!(small[..], large[..4]);
    }

    #[test]
    fn cluster_beats_distant_srrh() {
        let m = crate::metrics::compute_metrics(&run_terrain(&terrain_cfg(3)).unwrap()).unwrap();
        assert!(m.coverage.unwrap() > 0.0);
        assert_eq!(m.baseline_coverage, Some(0.0));
    }

    #[test]
    fn coverage_grows_with_members() {
        let mut last = 0.0;
        for k in 0..=12 {
            let m = crate::metrics::compute_metrics(&run_terrain(&terrain_cfg(k)).unwrap()).unwrap();
            let c = m.coverage.unwrap();
            assert!(c >= last, "members {k}: {c} < {last}");
            last = c;
        }
    }
}
