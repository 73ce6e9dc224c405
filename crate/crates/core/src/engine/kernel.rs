//! Event loop for the hotspot and disaster scenarios.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::config::{Architecture, ScenarioConfig, ScenarioKind};
use super::event::{EventKind, EventQueue};
use super::scenario::{self, access_rate};
use crate::controller::{admit_ue, choose_node, Admission, ControlAction, ControllerState, FrrhState, ResourceLedger, UtilizationSample};
use crate::error::{Error, Result};
use crate::ids::{CellId, LinkId, NodeId, TaskId, UeId};
use crate::latency::{processing_site_decision, total_delay, ProcessingQueue, QueueModel, Site, SiteEstimate, TransmitQueue};
use crate::math;
use crate::power::{battery_charge, battery_step, BatteryState, PowerModel};
use crate::topology::{build_topology, NodeKind, Position, Topology};
use crate::trace::{DropReason, TaskSource, Trace, TraceRecord};
use crate::traffic::{
    generate_arrivals, generate_handover_wave, merge_sessions, stream_rng, ues_at_fraction, SessionShape,
    SessionStatus, UeSession,
};

const TASK_STREAM: u64 = 1 << 40;
const SERVICE_STREAM: u64 = (1 << 40) | 1;

struct UeState {
    session: UeSession,
    node: Option<NodeId>,
    rate_bps: f64,
    active: bool,
}

#[derive(Clone, Copy)]
struct Flight {
    from: Position,
    to: Position,
    depart: f64,
    arrive: f64,
}

impl Flight {
    fn at(&self, now: f64) -> Position {
        if now >= self.arrive || self.arrive <= self.depart {
            return self.to;
        }
        let f = (now - self.depart) / (self.arrive - self.depart);
        Position::new(
            self.from.x + f * (self.to.x - self.from.x),
            self.from.y + f * (self.to.y - self.from.y),
            self.from.z + f * (self.to.z - self.from.z),
        )
    }
}

/// Kernel-side state of one F-RRH beyond what the controller tracks.
struct FrrhOps {
    slot: Option<usize>,
    epoch: u32,
    flight: Flight,
    last_settle: f64,
}

/// Paths from a start node to its processing options.
#[derive(Clone, Copy)]
struct Paths {
    /// (route index, processor) through the BBU pool or a macro site.
    bbu: Option<(usize, NodeId)>,
    edge: Option<(usize, NodeId)>,
    local_macro: bool,
}

struct TaskState {
    id: TaskId,
    source: TaskSource,
    cell: Option<CellId>,
    generated: f64,
    route: usize,
    site: Site,
    processor: NodeId,
    proc_arrival: f64,
}

struct Kernel<'c> {
    cfg: &'c ScenarioConfig,
    topo: Topology,
    events: EventQueue,
    trace: Trace,
    now: f64,
    seq: u64,

    ues: Vec<UeState>,
    pending: BTreeMap<CellId, VecDeque<UeId>>,
    ledger: ResourceLedger,
    controller: Option<ControllerState>,
    ops: BTreeMap<NodeId, FrrhOps>,
    platform: Position,
    slots: Vec<Position>,
    power: Option<PowerModel>,
    task_cell: Option<CellId>,

    tasks: Vec<Option<TaskState>>,
    free_slots: Vec<u32>,
    next_task: u64,
    routes: Vec<Vec<LinkId>>,
    paths: BTreeMap<NodeId, Paths>,
    access_q: Vec<TransmitQueue>,
    link_q: Vec<TransmitQueue>,
    proc_q: Vec<Option<ProcessingQueue>>,
    payload_bits: f64,
    task_gap: Option<Exp<f64>>,
    task_rng: ChaCha8Rng,
    service_rng: ChaCha8Rng,
    source_period: f64,
}

fn consistency(seq: u64, e: Error) -> Error {
    match e {
        Error::Consistency { .. } => e,
        other => Error::Consistency {
            seq,
            reason: format!("{other}"),
        },
    }
}

impl<'c> Kernel<'c> {
    fn new(cfg: &'c ScenarioConfig, topo: Topology) -> Self {
        let n_nodes = topo.nodes.iter().map(|n| n.id.get() as usize + 1).max().unwrap_or(0);
        let proc_q = (0..n_nodes)
            .map(|i| {
                topo.node(NodeId(i as u32))
                    .filter(|n| n.proc_rate > 0.0)
                    .and_then(|n| QueueModel::new(n.proc_rate).ok())
                    .map(ProcessingQueue::new)
            })
            .collect();
        let seed = cfg.scenario.seed;
        Kernel {
            cfg,
            events: EventQueue::new(),
            trace: Trace::new(),
            now: 0.0,
            seq: 0,
            ues: Vec::new(),
            pending: BTreeMap::new(),
            ledger: ResourceLedger::new(),
            controller: None,
            ops: BTreeMap::new(),
            platform: Position::new(0.0, 0.0, 0.0),
            slots: Vec::new(),
            power: None,
            task_cell: None,
            tasks: Vec::new(),
            free_slots: Vec::new(),
            next_task: 0,
            routes: Vec::new(),
            paths: BTreeMap::new(),
            access_q: vec![TransmitQueue::default(); n_nodes],
            link_q: vec![TransmitQueue::default(); topo.links.len()],
            proc_q,
            payload_bits: cfg.latency.task_payload_bits,
            task_gap: None,
            task_rng: stream_rng(seed, TASK_STREAM),
            service_rng: stream_rng(seed, SERVICE_STREAM),
            source_period: 0.0,
            topo,
        }
    }

    fn begin(&mut self, ue_count: u32, cell: CellId) {
        let s = &self.cfg.scenario;
        self.trace.push(TraceRecord::Begin {
            scenario: s.kind,
            architecture: s.architecture,
            seed: s.seed,
            ue_count,
            duration_s: s.duration_s,
            warmup_s: self.cfg.warmup_s(),
            cell,
        });
    }

    fn run_loop(mut self) -> Result<Trace> {
        let duration = self.cfg.scenario.duration_s;
        self.events.schedule(duration, EventKind::End);
        while let Some(ev) = self.events.pop() {
            self.now = ev.time;
            self.seq = ev.seq;
            let seq = ev.seq;
            let done = matches!(ev.kind, EventKind::End);
            self.dispatch(ev.kind).map_err(|e| consistency(seq, e))?;
            if done {
                break;
            }
        }
        Ok(self.trace)
    }

    fn dispatch(&mut self, kind: EventKind) -> Result<()> {
        match kind {
            EventKind::UeArrival(u) => self.on_arrival(u),
            EventKind::UeDeparture(u) => self.on_departure(u),
            EventKind::ControlTick => self.on_tick(),
            EventKind::FrrhArrived { node, epoch } => self.on_frrh_arrived(node, epoch),
            EventKind::FrrhReturned { node, epoch } => self.on_frrh_returned(node, epoch),
            EventKind::TaskArrival { slot, hop } => self.on_task(slot, hop),
            EventKind::TaskDone { slot } => self.on_task_done(slot),
            EventKind::MetricsSample => self.on_sample(),
            EventKind::End => self.on_end(),
        }
    }

    // ---- sessions ----

    fn candidates(&self, cell: CellId) -> Vec<(NodeId, u32)> {
        let mut out = Vec::with_capacity(4);
        if let Some(c) = self.topo.cell(cell) {
            for &n in &c.serving_nodes {
                out.push((n, self.ledger.free(n)));
            }
        }
        if let Some(ctl) = &self.controller {
            for (&id, e) in &ctl.fleet {
                if e.cell == Some(cell) && e.state == FrrhState::Deployed {
                    out.push((id, self.ledger.free(id)));
                }
            }
        }
        out
    }

    fn ue_rate(&self, node: NodeId, radial: f64) -> f64 {
        let Some(n) = self.topo.node(node) else {
            return 0.0;
        };
        // UEs sit around their serving node: cell radius for ground nodes,
        // small-cell radius for F-RRHs
        let d = n.coverage_radius_m * math::sqrt(radial);
        let ue = Position::new(n.position.x + d, n.position.y, 0.0);
        access_rate(n, &ue, 0.0, self.cfg)
    }

    fn admit(&mut self, u: UeId, node: NodeId) -> Result<()> {
        let now = self.now;
        let demand = self.ues[u.get() as usize].session.demand_prbs;
        self.ledger.allocate(u, node, demand)?;
        let radial = self.ues[u.get() as usize].session.radial;
        let rate = self.ue_rate(node, radial);
        let ue = &mut self.ues[u.get() as usize];
        ue.session.admit(node)?;
        ue.node = Some(node);
        ue.rate_bps = rate;
        ue.active = true;
        let holding = ue.session.holding_time;
        let cell = ue.session.cell;
        self.trace.push(TraceRecord::Admit { t: now, ue: u, node });
        self.events.schedule(now + holding, EventKind::UeDeparture(u));
        if self.task_cell == Some(cell) {
            self.schedule_ue_task(u);
        }
        Ok(())
    }

    fn block(&mut self, u: UeId) -> Result<()> {
        let ue = &mut self.ues[u.get() as usize];
        ue.session.block()?;
        let cell = ue.session.cell;
        self.trace.push(TraceRecord::Block { t: self.now, ue: u, cell });
        Ok(())
    }

    /// Block waiters past their deadline and admit the rest in order while
    /// resources last.
    fn drain_pending(&mut self, cell: CellId) -> Result<()> {
        let timeout = self.cfg.controller.blocking_timeout_s;
        loop {
            let Some(&u) = self.pending.get(&cell).and_then(|q| q.front()) else {
                return Ok(());
            };
            let s = &self.ues[u.get() as usize].session;
            if s.arrival_time + timeout < self.now {
                self.pending.get_mut(&cell).expect("non-empty").pop_front();
                self.block(u)?;
                continue;
            }
            match choose_node(&self.candidates(cell), s.demand_prbs) {
                Some(node) => {
                    self.pending.get_mut(&cell).expect("non-empty").pop_front();
                    self.admit(u, node)?;
                }
                None => return Ok(()),
            }
        }
    }

    fn on_arrival(&mut self, u: UeId) -> Result<()> {
        let (cell, origin) = {
            let s = &self.ues[u.get() as usize].session;
            (s.cell, s.origin)
        };
        self.trace.push(TraceRecord::Arrival {
            t: self.now,
            ue: u,
            cell,
            origin,
        });
        self.drain_pending(cell)?;
        let queued = self.pending.get(&cell).is_some_and(|q| !q.is_empty());
        let timeout = self.cfg.controller.blocking_timeout_s;
        let decision = if queued {
            if timeout > 0.0 {
                Admission::Wait {
                    deadline: self.now + timeout,
                }
            } else {
                Admission::Blocked
            }
        } else {
            admit_ue(&self.ues[u.get() as usize].session, &self.candidates(cell), timeout)
        };
        match decision {
            Admission::Admitted(node) => self.admit(u, node),
            Admission::Wait { .. } => {
                self.pending.entry(cell).or_default().push_back(u);
                Ok(())
            }
            Admission::Blocked => self.block(u),
        }
    }

    fn on_departure(&mut self, u: UeId) -> Result<()> {
        let ue = &mut self.ues[u.get() as usize];
        if !ue.active {
            return Ok(());
        }
        ue.active = false;
        ue.node = None;
        let cell = ue.session.cell;
        let (node, _) = self.ledger.release(u)?;
        self.trace.push(TraceRecord::Depart { t: self.now, ue: u, node });
        self.drain_pending(cell)
    }

    /// Move every UE off `frrh` to the remaining nodes of its cell.
    fn hand_back(&mut self, frrh: NodeId, cell: CellId) -> Result<()> {
        let held: Vec<UeId> = self.ledger.holders_on(frrh).collect();
        for u in held {
            self.ledger.release(u)?;
            let demand = self.ues[u.get() as usize].session.demand_prbs;
            match choose_node(&self.candidates(cell), demand) {
                Some(node) => {
                    self.ledger.allocate(u, node, demand)?;
                    let rate = self.ue_rate(node, self.ues[u.get() as usize].session.radial);
                    let ue = &mut self.ues[u.get() as usize];
                    ue.session.status = SessionStatus::Admitted(node);
                    ue.node = Some(node);
                    ue.rate_bps = rate;
                    self.trace.push(TraceRecord::Admit { t: self.now, ue: u, node });
                }
                None => {
                    let ue = &mut self.ues[u.get() as usize];
                    ue.active = false;
                    ue.node = None;
                    self.trace.push(TraceRecord::Drop {
                        t: self.now,
                        ue: u,
                        node: frrh,
                    });
                }
            }
        }
        Ok(())
    }

    // ---- control and flight ----

    fn on_tick(&mut self) -> Result<()> {
        let cells: Vec<CellId> = self.topo.cells.iter().map(|c| c.id).collect();
        for &c in &cells {
            self.drain_pending(c)?;
        }
        let mut samples = Vec::with_capacity(cells.len());
        {
            let ctl = self.controller.as_ref().expect("ticks only run with a controller");
            for (&srrh, &cell) in &ctl.monitored {
                let mut load = self.ledger.allocated(srrh);
                for (&id, e) in &ctl.fleet {
                    if e.cell == Some(cell) && e.state == FrrhState::Deployed {
                        load += self.ledger.allocated(id);
                    }
                }
                let waiting = self.pending.get(&cell).map_or(0, |q| q.len() as u32);
                load += waiting * self.cfg.traffic.demand_prbs;
                samples.push(UtilizationSample::new(srrh, self.now, load, self.ledger.capacity(srrh))?);
            }
        }
        let actions = self.controller.as_mut().expect("controller").step(&samples, self.now);
        for a in actions {
            self.trace.push(TraceRecord::Action { t: self.now, action: a });
            match a {
                ControlAction::Deploy { frrh, .. } => self.fly_out(frrh)?,
                ControlAction::Recall { frrh, cell } => {
                    self.settle(frrh)?;
                    self.hand_back(frrh, cell)?;
                    self.fly_home(frrh)?;
                }
                ControlAction::Alert { .. } => {}
            }
        }
        let next = self.now + self.cfg.controller.control_period_s;
        if next < self.cfg.scenario.duration_s {
            self.events.schedule(next, EventKind::ControlTick);
        }
        Ok(())
    }

    fn position_of(&self, frrh: NodeId) -> Position {
        self.ops[&frrh].flight.at(self.now)
    }

    fn fly_out(&mut self, frrh: NodeId) -> Result<()> {
        self.settle(frrh)?;
        let here = self.position_of(frrh);
        let taken: Vec<usize> = self.ops.values().filter_map(|o| o.slot).collect();
        let slot = (0..self.slots.len())
            .filter(|k| !taken.contains(k))
            .min_by(|&a, &b| here.distance(&self.slots[a]).total_cmp(&here.distance(&self.slots[b])))
            .ok_or_else(|| Error::domain("no free hover slot"))?;
        let to = self.slots[slot];
        let arrive = self.start_flight(frrh, here, to);
        let ops = self.ops.get_mut(&frrh).expect("fleet member");
        ops.slot = Some(slot);
        let epoch = ops.epoch;
        self.events.schedule(arrive, EventKind::FrrhArrived { node: frrh, epoch });
        Ok(())
    }

    fn fly_home(&mut self, frrh: NodeId) -> Result<()> {
        let here = self.position_of(frrh);
        let arrive = self.start_flight(frrh, here, self.platform);
        let ops = self.ops.get_mut(&frrh).expect("fleet member");
        ops.slot = None;
        let epoch = ops.epoch;
        self.events.schedule(arrive, EventKind::FrrhReturned { node: frrh, epoch });
        Ok(())
    }

    fn start_flight(&mut self, frrh: NodeId, from: Position, to: Position) -> f64 {
        let arrive = self.now + from.distance(&to) / self.cfg.controller.uav_speed_mps;
        let ops = self.ops.get_mut(&frrh).expect("fleet member");
        ops.epoch += 1;
        ops.flight = Flight {
            from,
            to,
            depart: self.now,
            arrive,
        };
        arrive
    }

    fn set_position(&mut self, node: NodeId, p: Position) {
        if let Some(n) = self.topo.nodes.iter_mut().find(|n| n.id == node) {
            n.position = p;
        }
    }

    fn on_frrh_arrived(&mut self, node: NodeId, epoch: u32) -> Result<()> {
        if self.ops[&node].epoch != epoch {
            return Ok(());
        }
        self.settle(node)?;
        let ctl = self.controller.as_mut().expect("controller");
        ctl.arrived(node)?;
        let cell = ctl.fleet[&node].cell;
        let to = self.ops[&node].flight.to;
        self.set_position(node, to);
        self.trace.push(TraceRecord::FrrhArrived { t: self.now, node });
        if let Some(c) = cell {
            self.drain_pending(c)?;
        }
        Ok(())
    }

    fn on_frrh_returned(&mut self, node: NodeId, epoch: u32) -> Result<()> {
        if self.ops[&node].epoch != epoch {
            return Ok(());
        }
        self.settle(node)?;
        self.controller.as_mut().expect("controller").returned(node)?;
        self.set_position(node, self.platform);
        self.trace.push(TraceRecord::FrrhReturned { t: self.now, node });
        Ok(())
    }

    fn load_fraction(&self, node: NodeId) -> f64 {
        let cap = self.ledger.capacity(node);
        if cap == 0 {
            0.0
        } else {
            f64::from(self.ledger.allocated(node)) / f64::from(cap)
        }
    }

    /// Bring `frrh`'s battery up to date: drain while flying, charge while
    /// charging on the platform.
    fn settle(&mut self, frrh: NodeId) -> Result<()> {
        let now = self.now;
        let load = self.load_fraction(frrh);
        let draw = self.power.as_ref().map_or(0.0, |p| p.flight_draw(frrh, load));
        let charge_w = self.cfg.power.charge_rate_w;
        let ops = self.ops.get_mut(&frrh).expect("fleet member");
        let dt = now - ops.last_settle;
        ops.last_settle = now;
        if dt <= 0.0 {
            return Ok(());
        }
        let ctl = self.controller.as_mut().expect("controller");
        let e = ctl.fleet.get_mut(&frrh).ok_or_else(|| Error::domain("unknown F-RRH"))?;
        if e.state.is_flying() {
            e.battery = battery_step(e.battery, draw, dt);
        } else if e.state == FrrhState::Charging {
            e.battery = battery_charge(e.battery, charge_w, dt);
            if e.battery.is_full() {
                e.state = FrrhState::Standby;
            }
        }
        Ok(())
    }

    fn on_sample(&mut self) -> Result<()> {
        let fleet: Vec<NodeId> = self.ops.keys().copied().collect();
        for &id in &fleet {
            self.settle(id)?;
            let ctl = self.controller.as_ref().expect("controller");
            let e = &ctl.fleet[&id];
            if e.battery.is_empty() && matches!(e.state, FrrhState::Deployed | FrrhState::EnRoute) {
                let (was_deployed, cell) = (e.state == FrrhState::Deployed, e.cell);
                let alert = self.controller.as_mut().expect("controller").force_return(id)?;
                self.trace.push(TraceRecord::Action { t: self.now, action: alert });
                if let (true, Some(c)) = (was_deployed, cell) {
                    self.hand_back(id, c)?;
                }
                self.fly_home(id)?;
            }
        }

        let Some(model) = &self.power else {
            return Ok(());
        };
        let snap = model.snapshot(
            &self.topo,
            |id| self.load_fraction(id),
            |id| self.controller.as_ref().and_then(|c| c.state_of(id)),
        )?;
        for (node, watts) in snap.per_node {
            self.trace.push(TraceRecord::Power { t: self.now, node, watts });
        }
        self.trace.push(TraceRecord::PowerTotal {
            t: self.now,
            watts: snap.total_w,
        });
        let next = self.now + self.cfg.power.sample_period_s;
        if next < self.cfg.scenario.duration_s {
            self.events.schedule(next, EventKind::MetricsSample);
        }
        Ok(())
    }

    fn on_end(&mut self) -> Result<()> {
        let cells: Vec<CellId> = self.pending.keys().copied().collect();
        for c in cells {
            while let Some(u) = self.pending.get_mut(&c).and_then(|q| q.pop_front()) {
                self.block(u)?;
            }
        }
        if let Some(u) = self.ues.iter().find(|u| u.session.status == SessionStatus::Pending) {
            return Err(Error::Consistency {
                seq: self.seq,
                reason: format!("{} neither admitted nor blocked", u.session.id),
            });
        }
        if !self.ledger.conserved() {
            return Err(Error::Consistency {
                seq: self.seq,
                reason: "PRB ledger out of balance".into(),
            });
        }
        self.trace.push(TraceRecord::End { t: self.now });
        Ok(())
    }

    // ---- tasks ----

    fn new_task(&mut self, source: TaskSource, cell: Option<CellId>, at: f64) -> u32 {
        let id = TaskId(self.next_task);
        self.next_task += 1;
        let t = TaskState {
            id,
            source,
            cell,
            generated: at,
            route: 0,
            site: Site::BBUPool,
            processor: NodeId(0),
            proc_arrival: 0.0,
        };
        match self.free_slots.pop() {
            Some(s) => {
                self.tasks[s as usize] = Some(t);
                s
            }
            None => {
                self.tasks.push(Some(t));
                (self.tasks.len() - 1) as u32
            }
        }
    }

    fn free_task(&mut self, slot: u32) {
        self.tasks[slot as usize] = None;
        self.free_slots.push(slot);
    }

    fn schedule_ue_task(&mut self, u: UeId) {
        let Some(gap) = self.task_gap else {
            return;
        };
        let at = self.now + gap.sample(&mut self.task_rng);
        if at >= self.cfg.scenario.duration_s {
            return;
        }
        let cell = self.ues[u.get() as usize].session.cell;
        let slot = self.new_task(TaskSource::Ue(u), Some(cell), at);
        self.events.schedule(at, EventKind::TaskArrival { slot, hop: 0 });
    }

    fn route_end(&self, from: NodeId, route: &[LinkId]) -> NodeId {
        let mut at = from;
        for l in route {
            if let Some(next) = self.topo.link(*l).and_then(|l| l.other_end(at)) {
                at = next;
            }
        }
        at
    }

    fn paths_from(&mut self, start: NodeId) -> Paths {
        if let Some(p) = self.paths.get(&start) {
            return *p;
        }
        let kind = self.topo.node(start).map(|n| n.kind);
        let p = if kind == Some(NodeKind::MacroBS) {
            self.routes.push(Vec::new());
            Paths {
                bbu: Some((self.routes.len() - 1, start)),
                edge: None,
                local_macro: true,
            }
        } else {
            let bbu_route = self.topo.route_to_bbu(start);
            let edge_route = self.topo.route_to(start, |n| n.kind == NodeKind::FRRHActive);
            let intern = |r: Vec<LinkId>, this: &mut Self| {
                let end = this.route_end(start, &r);
                this.routes.push(r);
                (this.routes.len() - 1, end)
            };
            let bbu = bbu_route.map(|r| intern(r, self));
            let edge = edge_route.map(|r| intern(r, self));
            Paths {
                bbu,
                edge,
                local_macro: false,
            }
        };
        self.paths.insert(start, p);
        p
    }

    /// Predicted communication and processing delay over `route` to `processor`.
    fn estimate(&self, access: Option<(NodeId, f64)>, route: usize, processor: NodeId) -> Option<SiteEstimate> {
        let payload = self.payload_bits;
        let mut t = self.now;
        if let Some((node, rate)) = access {
            if !(rate > 0.0) {
                return None;
            }
            t += self.access_q[node.get() as usize].wait_at(t) + payload / rate + self.cfg.latency.access_latency_s;
        }
        for l in &self.routes[route] {
            let link = self.topo.link(*l)?;
            if !(link.capacity_bps > 0.0) {
                return None;
            }
            t += self.link_q[l.get() as usize].wait_at(t) + payload / link.capacity_bps + link.fixed_latency_s;
        }
        let q = self.proc_q[processor.get() as usize].as_ref()?;
        Some(SiteEstimate {
            comm_s: t - self.now,
            proc_s: q.predicted_sojourn(t),
        })
    }

    fn drop_task(&mut self, slot: u32, reason: DropReason) {
        let id = self.tasks[slot as usize].as_ref().expect("live task").id;
        self.trace.push(TraceRecord::TaskDrop {
            t: self.now,
            task: id,
            reason,
        });
        self.free_task(slot);
    }

    fn on_task(&mut self, slot: u32, hop: u16) -> Result<()> {
        if hop == 0 {
            return self.generate(slot);
        }
        self.forward(slot, hop)
    }

    fn generate(&mut self, slot: u32) -> Result<()> {
        let (source, id) = {
            let t = self.tasks[slot as usize].as_ref().expect("live task");
            (t.source, t.id)
        };
        let (start, access) = match source {
            TaskSource::Ue(u) => {
                let ue = &self.ues[u.get() as usize];
                let Some(node) = ue.node.filter(|_| ue.active) else {
                    self.free_task(slot);
                    return Ok(());
                };
                let rate = ue.rate_bps;
                self.schedule_ue_task(u);
                (node, Some((node, rate)))
            }
            TaskSource::Node(n) => {
                let next = self.now + self.source_period;
                if next < self.cfg.scenario.duration_s {
                    let s = self.new_task(source, None, next);
                    self.events.schedule(next, EventKind::TaskArrival { slot: s, hop: 0 });
                }
                (n, None)
            }
        };

        let paths = self.paths_from(start);
        let (site, route, processor) = if paths.local_macro {
            let (r, p) = paths.bbu.expect("macro path");
            (Site::MacroBS, r, p)
        } else {
            let edge = paths.edge.and_then(|(r, p)| self.estimate(access, r, p).map(|e| (e, r, p)));
            let bbu = paths.bbu.and_then(|(r, p)| self.estimate(access, r, p).map(|e| (e, r, p)));
            let decision = match processing_site_decision(edge.map(|e| e.0), bbu.map(|b| b.0)) {
                Ok(d) => d,
                Err(_) => {
                    self.drop_task(slot, DropReason::NoProcessor);
                    return Ok(());
                }
            };
            if edge.is_some() {
                self.trace.push(TraceRecord::Decision {
                    t: self.now,
                    task: id,
                    decision,
                });
            }
            let (_, r, p) = if decision.site == Site::EdgeFRRH {
                edge.expect("edge chosen")
            } else {
                bbu.expect("bbu chosen")
            };
            (decision.site, r, p)
        };
        {
            let t = self.tasks[slot as usize].as_mut().expect("live task");
            t.site = site;
            t.route = route;
            t.processor = processor;
        }

        match access {
            Some((node, rate)) => {
                if !(rate > 0.0) {
                    self.drop_task(slot, DropReason::NoAccess);
                    return Ok(());
                }
                let done = self.access_q[node.get() as usize].transmit(self.now, self.payload_bits / rate);
                let at = done + self.cfg.latency.access_latency_s;
                self.events.schedule(at, EventKind::TaskArrival { slot, hop: 1 });
                Ok(())
            }
            None => self.forward(slot, 1),
        }
    }

    fn forward(&mut self, slot: u32, hop: u16) -> Result<()> {
        let (route, processor) = {
            let t = self.tasks[slot as usize].as_ref().expect("live task");
            (t.route, t.processor)
        };
        let k = hop as usize - 1;
        if let Some(&l) = self.routes[route].get(k) {
            let link = self.topo.link(l).ok_or(Error::Routing(l))?;
            if !(link.capacity_bps > 0.0) {
                self.drop_task(slot, DropReason::NoLink(l));
                return Ok(());
            }
            let service = self.payload_bits / link.capacity_bps;
            let fixed = link.fixed_latency_s;
            let done = self.link_q[l.get() as usize].transmit(self.now, service);
            self.events.schedule(done + fixed, EventKind::TaskArrival { slot, hop: hop + 1 });
            return Ok(());
        }
        let q = self.proc_q[processor.get() as usize]
            .as_mut()
            .ok_or(Error::DropNoProcessor)?;
        let service = Exp::new(q.model.service_rate)
            .map_err(|_| Error::domain("bad service rate"))?
            .sample(&mut self.service_rng);
        let done = q.arrive(self.now, service);
        self.tasks[slot as usize].as_mut().expect("live task").proc_arrival = self.now;
        self.events.schedule(done, EventKind::TaskDone { slot });
        Ok(())
    }

    fn on_task_done(&mut self, slot: u32) -> Result<()> {
        let t = self.tasks[slot as usize].take().expect("live task");
        self.free_slots.push(slot);
        let sojourn = self.now - t.proc_arrival;
        self.proc_q[t.processor.get() as usize]
            .as_mut()
            .ok_or(Error::DropNoProcessor)?
            .depart(self.now, sojourn)?;
        let delay = total_delay(t.proc_arrival - t.generated, sojourn, t.site)?;
        self.trace.push(TraceRecord::Task {
            t: self.now,
            task: t.id,
            source: t.source,
            cell: t.cell,
            generated: t.generated,
            delay,
        });
        Ok(())
    }
}

/// Number of handover sessions that offers `fraction * ue_count` Erlangs
/// over the window.
pub fn handover_count(fraction: f64, ue_count: u32, window_s: f64, mean_holding_s: f64) -> i64 {
    math::round(fraction * f64::from(ue_count) * window_s / mean_holding_s) as i64
}

pub fn run_hotspot(cfg: &ScenarioConfig) -> Result<Trace> {
    let topo = build_topology(cfg)?;
    let duration = cfg.scenario.duration_s;
    let tr = &cfg.traffic;
    let hot = CellId(cfg.topology.hotspot_cell);
    let hot_cell = topo.cell(hot).cloned().ok_or_else(|| Error::invalid("topology.hotspot_cell", "no such cell"))?;
    let ue_count = ues_at_fraction(tr.load_fraction, hot_cell.max_ues);
    let shape = SessionShape {
        mean_holding_s: tr.mean_holding_s,
        demand_prbs: tr.demand_prbs,
        gbr_bps: tr.gbr_bps,
        max_target: tr.max_target,
    };
    let seed = cfg.scenario.seed;

    let mut streams = Vec::new();
    if duration > 0.0 {
        for c in &topo.cells {
            let target = if c.id == hot {
                ue_count
            } else {
                ues_at_fraction(tr.background_load_fraction, c.max_ues)
            };
            streams.push(generate_arrivals(c, target, duration, &shape, seed)?);
        }
        let from = topo.cells.iter().find(|c| c.id != hot).unwrap_or(&hot_cell);
        let [w0, w1] = tr.handover_window;
        let window = (w0 * duration, w1 * duration);
        let count = handover_count(tr.handover_fraction, ue_count, window.1 - window.0, tr.mean_holding_s);
        streams.push(generate_handover_wave(from, &hot_cell, count, window, &shape, seed)?);
    }
    let sessions = merge_sessions(streams);

    let radius = hot_cell.radius_m();
    let platform = topo
        .cell(CellId(cfg.topology.standby_cell))
        .map(|c| c.center)
        .ok_or_else(|| Error::invalid("topology.standby_cell", "no such cell"))?;
    let mut k = Kernel::new(cfg, topo);
    k.begin(ue_count, hot);
    k.platform = platform;
    k.power = Some(PowerModel::new(&cfg.power, &k.topo));
    if cfg.latency.task_rate_hz > 0.0 {
        k.task_gap = Some(Exp::new(cfg.latency.task_rate_hz).map_err(|_| Error::invalid("latency.task_rate_hz", "must be > 0"))?);
        k.task_cell = Some(hot);
    }
    for n in &k.topo.nodes {
        if n.kind.serves_ues() {
            k.ledger.add_node(n.id, n.capacity_prbs);
        }
    }

    if cfg.scenario.architecture == Architecture::UCRAN {
        let c = &cfg.controller;
        let mut ctl = ControllerState::new(
            c.deploy_threshold_pct,
            c.recall_threshold_pct,
            c.min_deploy_charge_wh,
            c.sample_history as usize,
        )?;
        for cell in &k.topo.cells {
            for &n in &cell.serving_nodes {
                ctl.monitor(n, cell.id);
            }
        }
        let uavs = cfg.topology.uav_count as usize;
        k.slots = (0..uavs)
            .map(|i| {
                let a = PI + 2.0 * PI * i as f64 / uavs as f64;
                Position::new(
                    hot_cell.center.x + 0.5 * radius * math::cos(a),
                    hot_cell.center.y + 0.5 * radius * math::sin(a),
                    cfg.topology.frrh_altitude_m,
                )
            })
            .collect();
        for n in k.topo.flying_nodes() {
            ctl.add_frrh(n.id, n.capacity_prbs, BatteryState::full(cfg.power.frrh.battery_wh));
            k.ops.insert(
                n.id,
                FrrhOps {
                    slot: None,
                    epoch: 0,
                    flight: Flight {
                        from: n.position,
                        to: n.position,
                        depart: 0.0,
                        arrive: 0.0,
                    },
                    last_settle: 0.0,
                },
            );
        }
        k.controller = Some(ctl);
    }

    for s in &sessions {
        k.events.schedule(s.arrival_time, EventKind::UeArrival(s.id));
    }
    k.ues = sessions
        .into_iter()
        .map(|session| UeState {
            session,
            node: None,
            rate_bps: 0.0,
            active: false,
        })
        .collect();
    if duration > 0.0 {
        if k.controller.is_some() {
            k.events.schedule(0.0, EventKind::ControlTick);
        }
        k.events.schedule(0.0, EventKind::MetricsSample);
    }
    k.run_loop()
}

pub fn run_disaster(cfg: &ScenarioConfig) -> Result<Trace> {
    let layout = scenario::scenario_disaster(cfg)?;
    let d = &cfg.disaster;
    let mut k = Kernel::new(cfg, layout.topology);
    k.begin(d.sources, CellId(0));
    k.payload_bits = d.payload_bits;
    k.source_period = d.report_period_s;
    let n = layout.sources.len() as f64;
    for (i, &src) in layout.sources.iter().enumerate() {
        let at = d.report_period_s * i as f64 / n;
        if at < cfg.scenario.duration_s {
            let slot = k.new_task(TaskSource::Node(src), None, at);
            k.events.schedule(at, EventKind::TaskArrival { slot, hop: 0 });
        }
    }
    k.run_loop()
}

/// Dispatch on the scenario kind.
pub fn run_trace(cfg: &ScenarioConfig) -> Result<Trace> {
    match cfg.scenario.kind {
        ScenarioKind::Hotspot => run_hotspot(cfg),
        ScenarioKind::Disaster => run_disaster(cfg),
        ScenarioKind::ComplexTerrain => scenario::run_terrain(cfg),
    }
}
