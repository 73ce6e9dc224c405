//! Line-oriented run trace. Every record renders as
//! `<time> <KIND> key=value ...`; the SHA-256 of the rendered lines is the
//! run's reproducibility digest.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use sha2::{Digest, Sha256};

use crate::controller::{AlertReason, ControlAction};
use crate::engine::config::{Architecture, ScenarioKind};
use crate::ids::{CellId, LinkId, NodeId, TaskId, UeId};
use crate::latency::{DelayBreakdown, SiteDecision};
use crate::traffic::Origin;

/// Where a task was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskSource {
    Ue(UeId),
    Node(NodeId),
}

impl fmt::Display for TaskSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskSource::Ue(u) => u.fmt(f),
            TaskSource::Node(n) => n.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// The UE's own radio link decodes nothing.
    NoAccess,
    NoLink(LinkId),
    NoProcessor,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceRecord {
    Begin {
        scenario: ScenarioKind,
        architecture: Architecture,
        seed: u64,
        ue_count: u32,
        duration_s: f64,
        warmup_s: f64,
        /// Cell whose sessions and tasks feed the metrics.
        cell: CellId,
    },
    Arrival { t: f64, ue: UeId, cell: CellId, origin: Origin },
    Admit { t: f64, ue: UeId, node: NodeId },
    Block { t: f64, ue: UeId, cell: CellId },
    Depart { t: f64, ue: UeId, node: NodeId },
    /// Admitted session cut short because no node could take it back.
    Drop { t: f64, ue: UeId, node: NodeId },
    Action { t: f64, action: ControlAction },
    FrrhArrived { t: f64, node: NodeId },
    FrrhReturned { t: f64, node: NodeId },
    Decision { t: f64, task: TaskId, decision: SiteDecision },
    Task { t: f64, task: TaskId, source: TaskSource, cell: Option<CellId>, generated: f64, delay: DelayBreakdown },
    TaskDrop { t: f64, task: TaskId, reason: DropReason },
    Power { t: f64, node: NodeId, watts: f64 },
    PowerTotal { t: f64, watts: f64 },
    Coverage { t: f64, covered: u32, total: u32, baseline: u32 },
    End { t: f64 },
}

impl TraceRecord {
    pub fn time(&self) -> f64 {
        use TraceRecord::*;
        match *self {
            Begin { .. } => 0.0,
            Arrival { t, .. }
            | Admit { t, .. }
            | Block { t, .. }
            | Depart { t, .. }
            | Drop { t, .. }
            | Action { t, .. }
            | FrrhArrived { t, .. }
            | FrrhReturned { t, .. }
            | Decision { t, .. }
            | Task { t, .. }
            | TaskDrop { t, .. }
            | Power { t, .. }
            | PowerTotal { t, .. }
            | Coverage { t, .. }
            | End { t } => t,
        }
    }
}

struct Opt(Option<f64>);

impl fmt::Display for Opt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(v) => v.fmt(f),
            None => f.write_str("-"),
        }
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TraceRecord::*;
        match self {
            Begin {
                scenario,
                architecture,
                seed,
                ue_count,
                duration_s,
                warmup_s,
                cell,
            } => write!(
                f,
                "0 BEGIN scenario={scenario} arch={architecture} seed={seed} ue_count={ue_count} duration={duration_s} warmup={warmup_s} cell={cell}"
            ),
            Arrival { t, ue, cell, origin } => write!(f, "{t} ARRIVAL ue={ue} cell={cell} origin={}", origin.label()),
            Admit { t, ue, node } => write!(f, "{t} ADMIT ue={ue} node={node}"),
            Block { t, ue, cell } => write!(f, "{t} BLOCK ue={ue} cell={cell}"),
            Depart { t, ue, node } => write!(f, "{t} DEPART ue={ue} node={node}"),
            Drop { t, ue, node } => write!(f, "{t} DROP ue={ue} node={node}"),
            Action { t, action } => match action {
                ControlAction::Deploy { frrh, cell } => write!(f, "{t} DEPLOY frrh={frrh} cell={cell}"),
                ControlAction::Recall { frrh, cell } => write!(f, "{t} RECALL frrh={frrh} cell={cell}"),
                ControlAction::Alert { cell, reason } => {
                    write!(f, "{t} ALERT")?;
                    if let Some(c) = cell {
                        write!(f, " cell={c}")?;
                    }
                    match reason {
                        AlertReason::NoFrrhAvailable => f.write_str(" reason=no_frrh"),
                        AlertReason::BatteryDepleted(n) => write!(f, " reason=battery frrh={n}"),
                    }
                }
            },
            FrrhArrived { t, node } => write!(f, "{t} FRRH_ARRIVED node={node}"),
            FrrhReturned { t, node } => write!(f, "{t} FRRH_RETURNED node={node}"),
            Decision { t, task, decision } => write!(
                f,
                "{t} DECISION task={task} site={} edge={} bbu={}",
                decision.site,
                Opt(decision.edge_total_s),
                Opt(decision.bbu_total_s)
            ),
            Task {
                t,
                task,
                source,
                cell,
                generated,
                delay,
            } => {
                write!(f, "{t} TASK task={task} src={source}")?;
                if let Some(c) = cell {
                    write!(f, " cell={c}")?;
                }
                write!(
                    f,
                    " gen={generated} site={} comm={} proc={} total={}",
                    delay.site, delay.comm_s, delay.proc_s, delay.total_s
                )
            }
            TaskDrop { t, task, reason } => match reason {
                DropReason::NoAccess => write!(f, "{t} TASK_DROP task={task} reason=no_access"),
                DropReason::NoLink(l) => write!(f, "{t} TASK_DROP task={task} reason=no_link link={l}"),
                DropReason::NoProcessor => write!(f, "{t} TASK_DROP task={task} reason=no_processor"),
            },
            Power { t, node, watts } => write!(f, "{t} POWER node={node} w={watts}"),
            PowerTotal { t, watts } => write!(f, "{t} POWER_TOTAL w={watts}"),
            Coverage {
                t,
                covered,
                total,
                baseline,
            } => write!(f, "{t} COVERAGE covered={covered} total={total} baseline={baseline}"),
            End { t } => write!(f, "{t} END"),
        }
    }
}

struct HashWriter<'a>(&'a mut Sha256);

impl fmt::Write for HashWriter<'_> {
    fn write_str(&mut self, s: &str) -> fmt::Result {
        self.0.update(s.as_bytes());
        Ok(())
    }
}

/// Ordered records plus a running digest of their rendered lines.
#[derive(Clone)]
pub struct Trace {
    records: Vec<TraceRecord>,
    hasher: Sha256,
}

impl fmt::Debug for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Trace").field("records", &self.records.len()).finish()
    }
}

impl Default for Trace {
    fn default() -> Self {
        Self::new()
    }
}

impl Trace {
    pub fn new() -> Self {
        Trace {
            records: Vec::new(),
            hasher: Sha256::new(),
        }
    }

    pub fn push(&mut self, record: TraceRecord) {
        let _ = writeln!(HashWriter(&mut self.hasher), "{record}");
        self.records.push(record);
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Whether the run reached its End record.
    pub fn is_complete(&self) -> bool {
        matches!(self.records.last(), Some(TraceRecord::End { .. }))
    }

    /// Lowercase hex SHA-256 of every line, newline-terminated.
    pub fn digest(&self) -> String {
        let out = self.hasher.clone().finalize();
        let mut s = String::with_capacity(64);
        for b in out.iter() {
            let _ = write!(s, "{b:02x}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latency::Site;

    #[test]
    fn line_format() {
        let r = TraceRecord::Admit {
            t: 1.5,
            ue: UeId(3),
            node: NodeId(0),
        };
        assert_eq!(alloc::format!("{r}"), "1.5 ADMIT ue=ue3 node=n0");
        let r = TraceRecord::Decision {
            t: 2.0,
            task: TaskId(7),
            decision: SiteDecision {
                site: Site::BBUPool,
                edge_total_s: None,
                bbu_total_s: Some(0.25),
            },
        };
        assert_eq!(alloc::format!("{r}"), "2 DECISION task=t7 site=bbu edge=- bbu=0.25");
    }

    #[test]
    fn digest_tracks_content() {
        let mut a = Trace::new();
        let mut b = Trace::new();
        assert_eq!(a.digest(), b.digest());
        // sha256 of the empty string
        assert_eq!(a.digest(), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        a.push(TraceRecord::End { t: 1.0 });
        assert_ne!(a.digest(), b.digest());
        b.push(TraceRecord::End { t: 1.0 });
        assert_eq!(a.digest(), b.digest());
        assert!(a.is_complete());
    }
}
