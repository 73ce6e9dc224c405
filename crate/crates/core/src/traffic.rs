//! UE session streams: stationary Poisson traffic per cell, handover waves
//! into the hotspot cell, and the load sweep schedule.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};

use crate::error::{Error, Result};
use crate::ids::{CellId, NodeId, UeId};
use crate::math;
use crate::topology::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Local,
    Handover,
}

impl Origin {
    pub fn label(self) -> &'static str {
        match self {
            Origin::Local => "local",
            Origin::Handover => "handover",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionStatus {
    Pending,
    Admitted(NodeId),
    Blocked,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UeSession {
    pub id: UeId,
    pub cell: CellId,
    pub arrival_time: f64,
    pub holding_time: f64,
    pub demand_prbs: u32,
    pub demand_rate: f64,
    pub origin: Origin,
    pub status: SessionStatus,
    /// Uniform draw placing the UE at `radius * sqrt(radial)` from whichever
    /// node serves it.
    pub radial: f64,
}

impl UeSession {
    pub fn admit(&mut self, node: NodeId) -> Result<()> {
        match self.status {
            SessionStatus::Pending => {
                self.status = SessionStatus::Admitted(node);
                Ok(())
            }
            _ => Err(Error::domain("only pending sessions can be admitted")),
        }
    }

    pub fn block(&mut self) -> Result<()> {
        match self.status {
            SessionStatus::Pending => {
                self.status = SessionStatus::Blocked;
                Ok(())
            }
            _ => Err(Error::domain("only pending sessions can be blocked")),
        }
    }
}

/// Per-session parameters shared by all generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionShape {
    pub mean_holding_s: f64,
    pub demand_prbs: u32,
    pub gbr_bps: f64,
    pub max_target: u32,
}

/// Independent, reproducible random stream `stream` of run seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn session(cell: CellId, arrival_time: f64, holding_time: f64, origin: Origin, radial: f64, shape: &SessionShape) -> UeSession {
    UeSession {
        id: UeId(0),
        cell,
        arrival_time,
        holding_time,
        demand_prbs: shape.demand_prbs,
        demand_rate: shape.gbr_bps,
        origin,
        status: SessionStatus::Pending,
        radial,
    }
}

fn holding(shape: &SessionShape) -> Result<Exp<f64>> {
    Exp::new(1.0 / shape.mean_holding_s).map_err(|_| Error::invalid("traffic.mean_holding_s", "must be > 0"))
}

/// Stationary Poisson traffic offering `target_count` Erlangs to `cell`.
///
/// The stream starts in steady state: a Poisson(`target_count`) population
/// is already present at t = 0 with exponential residual holding times, and
/// fresh sessions arrive at rate `target_count / mean_holding` until
/// `duration`.
pub fn generate_arrivals(cell: &Cell, target_count: u32, duration: f64, shape: &SessionShape, seed: u64) -> Result<Vec<UeSession>> {
    if target_count > shape.max_target {
        return Err(Error::invalid("traffic.max_target", "target count above the configured cap"));
    }
    if !(duration > 0.0) {
        return Err(Error::domain("duration must be > 0"));
    }
    if target_count == 0 {
        return Ok(Vec::new());
    }
    let hold = holding(shape)?;
    let mut rng = stream_rng(seed, u64::from(cell.id.get()));
    let target = f64::from(target_count);
    let initial = Poisson::new(target).map_err(|_| Error::domain("bad Poisson mean"))?.sample(&mut rng) as usize;
    let rate = target / shape.mean_holding_s;
    let gaps = Exp::new(rate).map_err(|_| Error::domain("bad arrival rate"))?;

    let mut out = Vec::with_capacity(initial + (rate * duration) as usize + 16);
    for _ in 0..initial {
        let h = hold.sample(&mut rng);
        out.push(session(cell.id, 0.0, h, Origin::Local, rng.random(), shape));
    }
    let mut t = 0.0;
    loop {
        t += gaps.sample(&mut rng);
        if t >= duration {
            break;
        }
        let h = hold.sample(&mut rng);
        out.push(session(cell.id, t, h, Origin::Local, rng.random(), shape));
    }
    Ok(out)
}

/// `count` handover sessions into `to_cell`, arriving uniformly over `window`.
pub fn generate_handover_wave(
    from_cell: &Cell,
    to_cell: &Cell,
    count: i64,
    window: (f64, f64),
    shape: &SessionShape,
    seed: u64,
) -> Result<Vec<UeSession>> {
    if count < 0 {
        return Err(Error::invalid("traffic.handover_count", "must be >= 0"));
    }
    let (start, end) = window;
    if !(start >= 0.0 && end >= start) {
        return Err(Error::invalid("traffic.handover_window", "must satisfy 0 <= start <= end"));
    }
    if count as u64 > u64::from(shape.max_target) * 1000 {
        return Err(Error::invalid("traffic.max_target", "handover wave too large"));
    }
    let hold = holding(shape)?;
    let stream = 1 << 32 | u64::from(from_cell.id.get()) << 16 | u64::from(to_cell.id.get());
    let mut rng = stream_rng(seed, stream);
    let mut out: Vec<UeSession> = (0..count)
        .map(|_| {
            let t = start + (end - start) * rng.random::<f64>();
            let h = hold.sample(&mut rng);
            session(to_cell.id, t, h, Origin::Handover, rng.random(), shape)
        })
        .collect();
    out.sort_by(|a, b| a.arrival_time.total_cmp(&b.arrival_time));
    Ok(out)
}

/// Merge streams into one arrival-ordered list with ids `0..n`.
pub fn merge_sessions(streams: impl IntoIterator<Item = Vec<UeSession>>) -> Vec<UeSession> {
    let mut all: Vec<UeSession> = streams.into_iter().flatten().collect();
    // stable: equal-time sessions keep stream order
    all.sort_by(|a, b| a.arrival_time.total_cmp(&b.arrival_time));
    for (i, s) in all.iter_mut().enumerate() {
        s.id = UeId(i as u32);
    }
    all
}

/// Ordered load fractions of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSchedule {
    fractions: Vec<f64>,
}

impl LoadSchedule {
    pub fn new(fractions: Vec<f64>) -> Result<Self> {
        if fractions.is_empty() {
            return Err(Error::invalid("schedule", "empty load schedule"));
        }
        if fractions.iter().any(|f| !(0.1..=1.0).contains(f)) {
            return Err(Error::invalid("schedule", "load fractions must lie in [0.1, 1.0]"));
        }
        if fractions.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("schedule", "load fractions must be strictly increasing"));
        }
        Ok(LoadSchedule { fractions })
    }

    /// 10 %, 20 %, ..., 100 %.
    pub fn default_sweep() -> Self {
        LoadSchedule::new((1..=10).map(|k| k as f64 / 10.0).collect()).expect("static schedule")
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn ues_at(&self, fraction: f64, max_ues: u32) -> u32 {
        ues_at_fraction(fraction, max_ues)
    }
}

pub fn ues_at_fraction(fraction: f64, max_ues: u32) -> u32 {
    math::round(fraction * f64::from(max_ues)) as u32
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: u32,
    pub fraction: f64,
    pub ue_count: u32,
}

pub fn schedule_sweep(schedule: &LoadSchedule, max_ues: u32) -> Result<Vec<SweepPoint>> {
    if schedule.fractions.is_empty() {
        return Err(Error::invalid("schedule", "empty load schedule"));
    }
    Ok(schedule
        .fractions
        .iter()
        .enumerate()
        .map(|(i, &f)| SweepPoint {
            index: i as u32,
            fraction: f,
            ue_count: schedule.ues_at(f, max_ues),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Position;

    fn cell(id: u32) -> Cell {
        Cell {
            id: CellId(id),
            center: Position::default(),
            serving_nodes: Vec::new(),
            area_km2: 3.0,
            max_ues: 1000,
        }
    }

    fn shape() -> SessionShape {
        SessionShape {
            mean_holding_s: 120.0,
            demand_prbs: 2,
            gbr_bps: 64e3,
            max_target: 1_000_000,
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let a = generate_arrivals(&cell(1), 100, 600.0, &shape(), 7).unwrap();
        let b = generate_arrivals(&cell(1), 100, 600.0, &shape(), 7).unwrap();
        assert_eq!(a, b);
        let c = generate_arrivals(&cell(1), 100, 600.0, &shape(), 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_target_is_empty() {
        assert!(generate_arrivals(&cell(1), 0, 600.0, &shape(), 1).unwrap().is_empty());
    }

    #[test]
    fn target_above_cap_rejected() {
        let mut s = shape();
        s.max_target = 10;
        assert!(generate_arrivals(&cell(1), 11, 600.0, &s, 1).is_err());
    }

    #[test]
    fn arrivals_are_sorted() {
        let a = generate_arrivals(&cell(2), 300, 600.0, &shape(), 3).unwrap();
        assert!(a.windows(2).all(|w| w[0].arrival_time <= w[1].arrival_time));
        assert!(a.iter().all(|s| s.holding_time > 0.0 && s.demand_prbs >= 1));
    }

    #[test]
    fn handover_wave_counts() {
        let w = generate_handover_wave(&cell(1), &cell(2), 200, (100.0, 200.0), &shape(), 5).unwrap();
        assert_eq!(w.len(), 200);
        assert!(w.iter().all(|s| s.origin == Origin::Handover && s.cell == CellId(2)));
        assert!(w.iter().all(|s| (100.0..=200.0).contains(&s.arrival_time)));
        assert!(generate_handover_wave(&cell(1), &cell(2), 0, (0.0, 1.0), &shape(), 5).unwrap().is_empty());
        assert!(generate_handover_wave(&cell(1), &cell(2), -1, (0.0, 1.0), &shape(), 5).is_err());
    }

    #[test]
    fn split_waves_add_up() {
        let a = generate_handover_wave(&cell(1), &cell(2), 100, (0.0, 50.0), &shape(), 5).unwrap();
        let b = generate_handover_wave(&cell(1), &cell(2), 100, (50.0, 100.0), &shape(), 6).unwrap();
        let one = generate_handover_wave(&cell(1), &cell(2), 200, (0.0, 100.0), &shape(), 5).unwrap();
        assert_eq!(merge_sessions([a, b]).len(), one.len());
    }

    #[test]
    fn merged_ids_follow_arrival_order() {
        let local = generate_arrivals(&cell(2), 50, 100.0, &shape(), 1).unwrap();
        let wave = generate_handover_wave(&cell(1), &cell(2), 20, (10.0, 20.0), &shape(), 1).unwrap();
        let all = merge_sessions([local.clone(), wave]);
        assert_eq!(all.len(), local.len() + 20);
        assert!(all.iter().enumerate().all(|(i, s)| s.id == UeId(i as u32)));
        assert!(all.windows(2).all(|w| w[0].arrival_time <= w[1].arrival_time));
    }

    #[test]
    fn status_transitions_only_from_pending() {
        let mut s = generate_arrivals(&cell(1), 5, 10.0, &shape(), 1).unwrap().remove(0);
        s.admit(NodeId(3)).unwrap();
        assert!(s.block().is_err());
        assert!(s.admit(NodeId(4)).is_err());
    }

    #[test]
    fn sweep_points() {
        let pts = schedule_sweep(&LoadSchedule::default_sweep(), 1000).unwrap();
        let counts: Vec<u32> = pts.iter().map(|p| p.ue_count).collect();
        assert_eq!(counts, (1..=10).map(|k| k * 100).collect::<Vec<_>>());
        let one = schedule_sweep(&LoadSchedule::new(alloc::vec![1.0]).unwrap(), 1000).unwrap();
        assert_eq!(one[0].ue_count, 1000);
        let q = schedule_sweep(&LoadSchedule::new(alloc::vec![0.25]).unwrap(), 1000).unwrap();
        assert_eq!(q[0].ue_count, 250);
    }

    #[test]
    fn schedule_rules() {
        assert!(LoadSchedule::new(Vec::new()).is_err());
        assert!(LoadSchedule::new(alloc::vec![0.5, 0.5]).is_err());
        assert!(LoadSchedule::new(alloc::vec![0.05]).is_err());
    }
}
