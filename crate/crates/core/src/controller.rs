//! Hotspot monitoring and control: the utilization factor, the F-RRH
//! standby/deploy/recall state machine run by the BBU pool, and UE admission
//! against per-node PRB budgets.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ids::{CellId, NodeId, UeId};
use crate::power::BatteryState;
use crate::traffic::{SessionStatus, UeSession};

/// `100 * load / capacity`. Exceeds 100 when offered load exceeds capacity.
pub fn utilization_factor(load_prbs: u32, capacity_prbs: u32) -> Result<f64> {
    if capacity_prbs == 0 {
        return Err(Error::domain("utilization of a zero-capacity node"));
    }
    Ok((100 * u64::from(load_prbs)) as f64 / f64::from(capacity_prbs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilizationSample {
    pub node: NodeId,
    pub time: f64,
    pub load_prbs: u32,
    pub capacity_prbs: u32,
    pub uf_percent: f64,
}

impl UtilizationSample {
    pub fn new(node: NodeId, time: f64, load_prbs: u32, capacity_prbs: u32) -> Result<Self> {
        Ok(UtilizationSample {
            node,
            time,
            load_prbs,
            capacity_prbs,
            uf_percent: utilization_factor(load_prbs, capacity_prbs)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FrrhState {
    Standby,
    Charging,
    EnRoute,
    Deployed,
    Returning,
}

impl FrrhState {
    pub fn is_flying(self) -> bool {
        matches!(self, FrrhState::EnRoute | FrrhState::Deployed | FrrhState::Returning)
    }

    pub fn label(self) -> &'static str {
        match self {
            FrrhState::Standby => "standby",
            FrrhState::Charging => "charging",
            FrrhState::EnRoute => "enroute",
            FrrhState::Deployed => "deployed",
            FrrhState::Returning => "returning",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FleetEntry {
    pub state: FrrhState,
    pub battery: BatteryState,
    pub capacity_prbs: u32,
    /// Cell the F-RRH is committed to while en route or deployed.
    pub cell: Option<CellId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlertReason {
    /// Overload detected but no F-RRH is charged and parked.
    NoFrrhAvailable,
    BatteryDepleted(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlAction {
    Deploy { frrh: NodeId, cell: CellId },
    Recall { frrh: NodeId, cell: CellId },
    Alert { cell: Option<CellId>, reason: AlertReason },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub fleet: BTreeMap<NodeId, FleetEntry>,
    /// S-RRH to the cell it monitors.
    pub monitored: BTreeMap<NodeId, CellId>,
    pub deploy_threshold: f64,
    pub recall_threshold: f64,
    pub min_deploy_charge_wh: f64,
    pub samples: VecDeque<UtilizationSample>,
    sample_history: usize,
    short: BTreeSet<CellId>,
}

impl ControllerState {
    pub fn new(deploy_threshold: f64, recall_threshold: f64, min_deploy_charge_wh: f64, sample_history: usize) -> Result<Self> {
        if !(recall_threshold < deploy_threshold) {
            return Err(Error::invalid(
                "controller.recall_threshold_pct",
                "must be below deploy_threshold_pct",
            ));
        }
        Ok(ControllerState {
            fleet: BTreeMap::new(),
            monitored: BTreeMap::new(),
            deploy_threshold,
            recall_threshold,
            min_deploy_charge_wh,
            samples: VecDeque::new(),
            sample_history: sample_history.max(1),
            short: BTreeSet::new(),
        })
    }

    pub fn add_frrh(&mut self, id: NodeId, capacity_prbs: u32, battery: BatteryState) {
        self.fleet.insert(
            id,
            FleetEntry {
                state: FrrhState::Standby,
                battery,
                capacity_prbs,
                cell: None,
            },
        );
    }

    pub fn monitor(&mut self, srrh: NodeId, cell: CellId) {
        self.monitored.insert(srrh, cell);
    }

    fn deployable(&self, e: &FleetEntry) -> bool {
        matches!(e.state, FrrhState::Standby | FrrhState::Charging)
            && e.battery.remaining_wh >= self.min_deploy_charge_wh
    }

    fn committed_capacity(&self, cell: CellId) -> u32 {
        self.fleet
            .values()
            .filter(|e| e.cell == Some(cell) && matches!(e.state, FrrhState::EnRoute | FrrhState::Deployed))
            .map(|e| e.capacity_prbs)
            .sum()
    }

    /// One control period: record `samples`, dispatch F-RRHs to cells at or
    /// above the deploy threshold and call them back from cells at or below
    /// the recall threshold.
    ///
    /// Deployment covers the load above the deploy threshold that is not
    /// already covered by F-RRHs committed to the cell; at least one F-RRH is
    /// sent to a hot cell with none committed.
    pub fn step(&mut self, samples: &[UtilizationSample], _now: f64) -> Vec<ControlAction> {
        let mut actions = Vec::new();
        let mut ordered: Vec<&UtilizationSample> = samples.iter().collect();
        ordered.sort_by_key(|s| s.node);
        let mut acted: BTreeSet<NodeId> = BTreeSet::new();

        for s in ordered {
            self.samples.push_back(*s);
            while self.samples.len() > self.sample_history {
                self.samples.pop_front();
            }
            let Some(&cell) = self.monitored.get(&s.node) else {
                continue;
            };

            if s.uf_percent >= self.deploy_threshold {
                let committed = self.committed_capacity(cell);
                let target = self.deploy_threshold / 100.0 * f64::from(s.capacity_prbs);
                let mut remaining = f64::from(s.load_prbs) - target - f64::from(committed);
                let mut need_first = committed == 0;
                let candidates: Vec<NodeId> = self
                    .fleet
                    .iter()
                    .filter(|(id, e)| !acted.contains(id) && self.deployable(e))
                    .map(|(id, _)| *id)
                    .collect();
                for id in candidates {
                    if remaining <= 0.0 && !need_first {
                        break;
                    }
                    let e = self.fleet.get_mut(&id).expect("candidate from fleet");
                    e.state = FrrhState::EnRoute;
                    e.cell = Some(cell);
                    remaining -= f64::from(e.capacity_prbs);
                    need_first = false;
                    acted.insert(id);
                    actions.push(ControlAction::Deploy { frrh: id, cell });
                }
                if remaining > 0.0 || need_first {
                    if self.short.insert(cell) {
                        actions.push(ControlAction::Alert {
                            cell: Some(cell),
                            reason: AlertReason::NoFrrhAvailable,
                        });
                    }
                } else {
                    self.short.remove(&cell);
                }
            } else {
                self.short.remove(&cell);
                if s.uf_percent <= self.recall_threshold {
                    let recall: Vec<NodeId> = self
                        .fleet
                        .iter()
                        .filter(|(id, e)| {
                            !acted.contains(id) && e.cell == Some(cell) && e.state == FrrhState::Deployed
                        })
                        .map(|(id, _)| *id)
                        .collect();
                    for id in recall {
                        let e = self.fleet.get_mut(&id).expect("recall from fleet");
                        e.state = FrrhState::Returning;
                        acted.insert(id);
                        actions.push(ControlAction::Recall { frrh: id, cell });
                    }
                }
            }
        }
        actions
    }

    pub fn arrived(&mut self, frrh: NodeId) -> Result<()> {
        let e = self.entry(frrh)?;
        if e.state != FrrhState::EnRoute {
            return Err(Error::domain("arrival of an F-RRH that is not en route"));
        }
        e.state = FrrhState::Deployed;
        Ok(())
    }

    /// Back on the platform: charge if needed, else park.
    pub fn returned(&mut self, frrh: NodeId) -> Result<()> {
        let e = self.entry(frrh)?;
        if e.state != FrrhState::Returning {
            return Err(Error::domain("return of an F-RRH that is not returning"));
        }
        e.cell = None;
        e.state = if e.battery.is_full() {
            FrrhState::Standby
        } else {
            FrrhState::Charging
        };
        Ok(())
    }

    /// Battery exhausted in flight.
    pub fn force_return(&mut self, frrh: NodeId) -> Result<ControlAction> {
        let e = self.entry(frrh)?;
        if !matches!(e.state, FrrhState::Deployed | FrrhState::EnRoute) {
            return Err(Error::domain("forced return of an F-RRH that is not flying out"));
        }
        let cell = e.cell;
        e.state = FrrhState::Returning;
        Ok(ControlAction::Alert {
            cell,
            reason: AlertReason::BatteryDepleted(frrh),
        })
    }

    fn entry(&mut self, frrh: NodeId) -> Result<&mut FleetEntry> {
        self.fleet
            .get_mut(&frrh)
            .ok_or_else(|| Error::domain("unknown F-RRH"))
    }

    pub fn state_of(&self, frrh: NodeId) -> Option<FrrhState> {
        self.fleet.get(&frrh).map(|e| e.state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admission {
    Admitted(NodeId),
    /// Nothing fits now; the UE waits until `deadline`.
    Wait { deadline: f64 },
    Blocked,
}

/// Candidate with the most free PRBs, lowest id on ties, if it fits `demand`.
pub fn choose_node(candidates: &[(NodeId, u32)], demand: u32) -> Option<NodeId> {
    let mut best: Option<(NodeId, u32)> = None;
    for &(id, free) in candidates {
        best = match best {
            Some((bid, bfree)) if bfree > free || (bfree == free && bid < id) => Some((bid, bfree)),
            _ => Some((id, free)),
        };
    }
    best.filter(|&(_, free)| free >= demand).map(|(id, _)| id)
}

pub fn admit_ue(ue: &UeSession, candidates: &[(NodeId, u32)], timeout: f64) -> Admission {
    match choose_node(candidates, ue.demand_prbs) {
        Some(node) => Admission::Admitted(node),
        None if timeout > 0.0 => Admission::Wait {
            deadline: ue.arrival_time + timeout,
        },
        None => Admission::Blocked,
    }
}

/// PRBs held per node and per UE.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResourceLedger {
    nodes: BTreeMap<NodeId, (u32, u32)>,
    holders: BTreeMap<UeId, (NodeId, u32)>,
}

impl ResourceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, node: NodeId, capacity: u32) {
        self.nodes.insert(node, (capacity, 0));
    }

    pub fn capacity(&self, node: NodeId) -> u32 {
        self.nodes.get(&node).map_or(0, |n| n.0)
    }

    pub fn allocated(&self, node: NodeId) -> u32 {
        self.nodes.get(&node).map_or(0, |n| n.1)
    }

    pub fn free(&self, node: NodeId) -> u32 {
        self.nodes.get(&node).map_or(0, |&(c, a)| c - a)
    }

    pub fn holder(&self, ue: UeId) -> Option<NodeId> {
        self.holders.get(&ue).map(|h| h.0)
    }

    pub fn holders_on(&self, node: NodeId) -> impl Iterator<Item = UeId> + '_ {
        self.holders.iter().filter(move |(_, h)| h.0 == node).map(|(ue, _)| *ue)
    }

    pub fn allocate(&mut self, ue: UeId, node: NodeId, prbs: u32) -> Result<()> {
        if self.holders.contains_key(&ue) {
            return Err(Error::domain("UE already holds resources"));
        }
        let entry = self.nodes.get_mut(&node).ok_or_else(|| Error::domain("unknown node"))?;
        if entry.0 - entry.1 < prbs {
            return Err(Error::domain("allocation exceeds free PRBs"));
        }
        entry.1 += prbs;
        self.holders.insert(ue, (node, prbs));
        Ok(())
    }

    pub fn release(&mut self, ue: UeId) -> Result<(NodeId, u32)> {
        let (node, prbs) = self.holders.remove(&ue).ok_or(Error::DoubleRelease(ue))?;
        let entry = self.nodes.get_mut(&node).expect("holder node registered");
        entry.1 -= prbs;
        Ok((node, prbs))
    }

    /// allocated + free = capacity on every node, and per-UE holdings add up.
    pub fn conserved(&self) -> bool {
        let mut held: BTreeMap<NodeId, u32> = BTreeMap::new();
        for &(node, prbs) in self.holders.values() {
            *held.entry(node).or_default() += prbs;
        }
        self.nodes
            .iter()
            .all(|(id, &(cap, alloc))| alloc <= cap && held.get(id).copied().unwrap_or(0) == alloc)
    }
}

/// Return an admitted UE's PRBs to its serving node.
pub fn release_ue(ledger: &mut ResourceLedger, ue: &UeSession) -> Result<(NodeId, u32)> {
    match ue.status {
        SessionStatus::Admitted(_) => ledger.release(ue.id),
        _ => Err(Error::DoubleRelease(ue.id)),
    }
}
