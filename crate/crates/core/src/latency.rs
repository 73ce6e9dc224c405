//! End-to-end delay accounting: communication over each hop plus
//! processing at the edge F-RRH or the BBU pool, and the choice between
//! the two.

use core::fmt;

use crate::error::{Error, Result};
use crate::topology::LinkSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Site {
    EdgeFRRH,
    BBUPool,
    /// Baseband integrated in a macro base station.
    MacroBS,
}

impl Site {
    pub fn label(self) -> &'static str {
        match self {
            Site::EdgeFRRH => "edge",
            Site::BBUPool => "bbu",
            Site::MacroBS => "macro",
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayBreakdown {
    pub comm_s: f64,
    pub proc_s: f64,
    pub total_s: f64,
    pub site: Site,
}

/// Communication plus processing delay at `site`.
pub fn total_delay(comm_s: f64, proc_s: f64, site: Site) -> Result<DelayBreakdown> {
    if !(comm_s >= 0.0) || !(proc_s >= 0.0) {
        return Err(Error::domain("delays must be >= 0"));
    }
    Ok(DelayBreakdown {
        comm_s,
        proc_s,
        total_s: comm_s + proc_s,
        site,
    })
}

/// `fixed + payload / rate + wait` for one hop. A hop with no rate cannot
/// carry the task.
pub fn hop_delay(link: &LinkSpec, payload_bits: f64, rate_bps: f64, queue_wait_s: f64) -> Result<f64> {
    if !(rate_bps > 0.0) {
        return Err(Error::DropNoLink(link.id));
    }
    Ok(link.fixed_latency_s + payload_bits / rate_bps + queue_wait_s)
}

/// Sum of hop delays along a connected route. `rates[i]` and `waits[i]`
/// belong to `route[i]`.
pub fn path_delay(route: &[&LinkSpec], payload_bits: f64, rates: &[f64], waits: &[f64]) -> Result<f64> {
    if rates.len() != route.len() || waits.len() != route.len() {
        return Err(Error::domain("one rate and one wait per hop"));
    }
    for pair in route.windows(2) {
        let (a, b) = (pair[0].endpoints, pair[1].endpoints);
        let shared = a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1;
        if !shared {
            return Err(Error::Routing(pair[1].id));
        }
    }
    let mut total = 0.0;
    for ((link, &rate), &wait) in route.iter().zip(rates).zip(waits) {
        total += hop_delay(link, payload_bits, rate, wait)?;
    }
    Ok(total)
}

/// FIFO transmitter: a task waits for the previous transmission to finish.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransmitQueue {
    free_at: f64,
}

impl TransmitQueue {
    pub fn wait_at(&self, now: f64) -> f64 {
        let w = self.free_at - now;
        if w > 0.0 {
            w
        } else {
            0.0
        }
    }

    /// Queue a transmission of `service_s` at `now`; returns its end time.
    pub fn transmit(&mut self, now: f64, service_s: f64) -> f64 {
        let start = now + self.wait_at(now);
        self.free_at = start + service_s;
        self.free_at
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueModel {
    /// Tasks per second.
    pub service_rate: f64,
}

impl QueueModel {
    pub fn new(service_rate: f64) -> Result<Self> {
        if !(service_rate > 0.0) {
            return Err(Error::domain("service rate must be > 0"));
        }
        Ok(QueueModel { service_rate })
    }

    /// Analytic M/M/1 mean sojourn `1 / (mu - lambda)`; `None` when unstable.
    pub fn mm1_sojourn(&self, arrival_rate: f64) -> Option<f64> {
        (arrival_rate < self.service_rate).then(|| 1.0 / (self.service_rate - arrival_rate))
    }
}

/// Single-server FIFO processor with Little's-law bookkeeping: the
/// number in system is integrated over time independently of the
/// per-task sojourn sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessingQueue {
    pub model: QueueModel,
    free_at: f64,
    in_system: u64,
    area: f64,
    last_change: f64,
    arrivals: u64,
    completions: u64,
    sojourn_sum: f64,
}

impl ProcessingQueue {
    pub fn new(model: QueueModel) -> Self {
        ProcessingQueue {
            model,
            free_at: 0.0,
            in_system: 0,
            area: 0.0,
            last_change: 0.0,
            arrivals: 0,
            completions: 0,
            sojourn_sum: 0.0,
        }
    }

    /// Expected sojourn of a task arriving at `at`: current backlog plus
    /// one mean service time.
    pub fn predicted_sojourn(&self, at: f64) -> f64 {
        let backlog = self.free_at - at;
        (if backlog > 0.0 { backlog } else { 0.0 }) + 1.0 / self.model.service_rate
    }

    fn integrate(&mut self, now: f64) {
        self.area += self.in_system as f64 * (now - self.last_change);
        self.last_change = now;
    }

    /// A task with service demand `service_s` arrives; returns its completion time.
    pub fn arrive(&mut self, now: f64, service_s: f64) -> f64 {
        self.integrate(now);
        self.in_system += 1;
        self.arrivals += 1;
        let start = if self.free_at > now { self.free_at } else { now };
        self.free_at = start + service_s;
        self.free_at
    }

    pub fn depart(&mut self, now: f64, sojourn_s: f64) -> Result<()> {
        if self.in_system == 0 {
            return Err(Error::domain("departure from an empty queue"));
        }
        self.integrate(now);
        self.in_system -= 1;
        self.completions += 1;
        self.sojourn_sum += sojourn_s;
        Ok(())
    }

    pub fn completions(&self) -> u64 {
        self.completions
    }

    pub fn arrivals(&self) -> u64 {
        self.arrivals
    }

    pub fn in_system(&self) -> u64 {
        self.in_system
    }

    pub fn mean_sojourn(&self) -> Option<f64> {
        (self.completions > 0).then(|| self.sojourn_sum / self.completions as f64)
    }

    /// Time-average number in system over `[0, until]`.
    pub fn mean_in_system(&self, until: f64) -> f64 {
        let tail = self.in_system as f64 * (until - self.last_change);
        (self.area + tail) / until
    }
}

/// Predicted communication and processing delay of one processing option.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteEstimate {
    pub comm_s: f64,
    pub proc_s: f64,
}

impl SiteEstimate {
    pub fn total(&self) -> f64 {
        self.comm_s + self.proc_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteDecision {
    pub site: Site,
    pub edge_total_s: Option<f64>,
    pub bbu_total_s: Option<f64>,
}

impl SiteDecision {
    /// Whether `site` is the argmin of the logged totals (edge on ties).
    pub fn is_optimal(&self) -> bool {
        match (self.edge_total_s, self.bbu_total_s) {
            (Some(e), Some(b)) => (self.site == Site::EdgeFRRH) == (e <= b),
            (Some(_), None) => self.site == Site::EdgeFRRH,
            (None, Some(_)) => self.site == Site::BBUPool,
            (None, None) => false,
        }
    }
}

/// Process at the edge when its predicted total is no worse than the BBU's.
/// `edge` is only present when an active F-RRH sits on the path.
pub fn processing_site_decision(edge: Option<SiteEstimate>, bbu: Option<SiteEstimate>) -> Result<SiteDecision> {
    let edge_total_s = edge.map(|e| e.total());
    let bbu_total_s = bbu.map(|b| b.total());
    let site = match (edge_total_s, bbu_total_s) {
        (Some(e), Some(b)) if e <= b => Site::EdgeFRRH,
        (Some(_), Some(_)) => Site::BBUPool,
        (Some(_), None) => Site::EdgeFRRH,
        (None, Some(_)) => Site::BBUPool,
        (None, None) => return Err(Error::DropNoProcessor),
    };
    Ok(SiteDecision {
        site,
        edge_total_s,
        bbu_total_s,
    })
}
