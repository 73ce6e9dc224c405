//! Scenario configuration. Every section has documented defaults; the
//! defaults reproduce the two-cell hotspot study (20 MHz LTE, 100 to 1000
//! UEs, 4 UAVs, 43/30 dBm, 100 ft masts and flight altitude).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::{self, ChannelEnv};
use crate::error::{Error, Result};

pub use crate::topology::Architecture;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ScenarioKind {
    Hotspot,
    Disaster,
    ComplexTerrain,
}

impl ScenarioKind {
    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::Hotspot => "hotspot",
            ScenarioKind::Disaster => "disaster",
            ScenarioKind::ComplexTerrain => "complex_terrain",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ScenarioConfig {
    pub scenario: ScenarioParams,
    pub topology: TopologyParams,
    pub traffic: TrafficParams,
    pub channel: ChannelEnv,
    pub controller: ControllerParams,
    pub latency: LatencyParams,
    pub power: PowerParams,
    pub disaster: DisasterParams,
    pub terrain: TerrainParams,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ScenarioParams {
    pub kind: ScenarioKind,
    pub architecture: Architecture,
    pub duration_s: f64,
    /// Leading share of the run excluded from every average.
    pub warmup_fraction: f64,
    pub seed: u64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            kind: ScenarioKind::Hotspot,
            architecture: Architecture::UCRAN,
            duration_s: 1800.0,
            warmup_fraction: 0.1,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TopologyParams {
    pub cells: u32,
    pub cell_area_km2: f64,
    /// Cell receiving the handover wave; metrics are reported for it.
    pub hotspot_cell: u32,
    /// Cell whose S-RRH hosts the F-RRH standby and charging platform.
    pub standby_cell: u32,
    pub uav_count: u32,
    pub bbu_pools: u32,
    pub bandwidth_mhz: f64,
    pub frrh_bandwidth_mhz: f64,
    /// Resource-grid slots per 10 ms frame; node capacity is PRBs x slots.
    pub slots_per_frame: u32,
    /// Replaces the grid-derived capacity of ground nodes when set.
    pub capacity_prbs_override: Option<u32>,
    pub ground_height_m: f64,
    pub frrh_altitude_m: f64,
    pub ground_tx_dbm: f64,
    pub frrh_tx_dbm: f64,
    /// MEC-enabled (active) or RF-only (passive) hotspot F-RRHs.
    pub frrh_active: bool,
    pub small_cell_radius_m: f64,
    pub fan_out: u32,
    pub optical_latency_s: f64,
    pub optical_capacity_bps: f64,
    pub wireless_latency_s: f64,
    pub wireless_bandwidth_mhz: f64,
    pub microwave_latency_s: f64,
    pub microwave_capacity_bps: f64,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            cells: 2,
            cell_area_km2: 3.0,
            hotspot_cell: 2,
            standby_cell: 1,
            uav_count: 4,
            bbu_pools: 1,
            bandwidth_mhz: 20.0,
            frrh_bandwidth_mhz: 10.0,
            slots_per_frame: 20,
            capacity_prbs_override: None,
            ground_height_m: 30.48,
            frrh_altitude_m: 30.48,
            ground_tx_dbm: 43.0,
            frrh_tx_dbm: 30.0,
            frrh_active: false,
            small_cell_radius_m: 250.0,
            fan_out: 3,
            optical_latency_s: 1.0e-4,
            optical_capacity_bps: 10.0e9,
            wireless_latency_s: 1.0e-4,
            wireless_bandwidth_mhz: 20.0,
            microwave_latency_s: 5.0e-4,
            microwave_capacity_bps: 1.0e9,
        }
    }
}

impl TopologyParams {
    pub fn ground_capacity_prbs(&self) -> Result<u32> {
        match self.capacity_prbs_override {
            Some(0) => Err(Error::invalid("topology.capacity_prbs_override", "must be > 0")),
            Some(c) => Ok(c),
            None => channel::prbs_for(self.bandwidth_mhz * 1e6)
                .map(|p| p * self.slots_per_frame)
                .map_err(|_| Error::invalid("topology.bandwidth_mhz", "not an LTE channel bandwidth")),
        }
    }

    pub fn frrh_capacity_prbs(&self) -> Result<u32> {
        channel::prbs_for(self.frrh_bandwidth_mhz * 1e6)
            .map(|p| p * self.slots_per_frame)
            .map_err(|_| Error::invalid("topology.frrh_bandwidth_mhz", "not an LTE channel bandwidth"))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrafficParams {
    /// Load point of a single run, as a share of the hotspot cell's max UEs.
    pub load_fraction: f64,
    /// Sweep schedule.
    pub load_fractions: Vec<f64>,
    pub mean_holding_s: f64,
    pub demand_prbs: u32,
    pub gbr_bps: f64,
    /// Handover load into the hotspot cell, relative to its local load.
    pub handover_fraction: f64,
    /// Handover arrival window as fractions of the run duration.
    pub handover_window: [f64; 2],
    /// Load of the other cells, as a share of their max UEs.
    pub background_load_fraction: f64,
    pub max_target: u32,
}

impl Default for TrafficParams {
    fn default() -> Self {
        TrafficParams {
            load_fraction: 1.0,
            load_fractions: (1..=10).map(|k| k as f64 / 10.0).collect(),
            mean_holding_s: 120.0,
            demand_prbs: 2,
            gbr_bps: 64_000.0,
            handover_fraction: 0.25,
            handover_window: [0.0, 1.0],
            background_load_fraction: 0.3,
            max_target: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ControllerParams {
    pub deploy_threshold_pct: f64,
    pub recall_threshold_pct: f64,
    pub control_period_s: f64,
    pub blocking_timeout_s: f64,
    pub uav_speed_mps: f64,
    pub min_deploy_charge_wh: f64,
    pub sample_history: u32,
}

impl Default for ControllerParams {
    fn default() -> Self {
        ControllerParams {
            deploy_threshold_pct: 85.0,
            recall_threshold_pct: 60.0,
            control_period_s: 1.0,
            blocking_timeout_s: 1.0,
            uav_speed_mps: 10.0,
            min_deploy_charge_wh: 150.0,
            sample_history: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct LatencyParams {
    pub frrh_proc_rate: f64,
    pub bbu_proc_rate: f64,
    pub macro_proc_rate: f64,
    /// Fixed air-interface latency added to every access transmission.
    pub access_latency_s: f64,
    /// Per-UE task generation rate while a session is admitted.
    pub task_rate_hz: f64,
    pub task_payload_bits: f64,
}

impl Default for LatencyParams {
    fn default() -> Self {
        LatencyParams {
            frrh_proc_rate: 200.0,
            bbu_proc_rate: 2000.0,
            macro_proc_rate: 1000.0,
            access_latency_s: 1.0e-3,
            task_rate_hz: 0.05,
            task_payload_bits: 600_000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ProfileParams {
    pub static_w: f64,
    pub slope: f64,
    pub hover_w: f64,
    pub battery_wh: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PowerParams {
    #[cfg_attr(feature = "serde", serde(rename = "macro"))]
    pub macro_bs: ProfileParams,
    pub srrh: ProfileParams,
    pub frrh: ProfileParams,
    pub bbu_static_w: f64,
    pub bbu_per_rrh_w: f64,
    pub standby_w: f64,
    /// Count hover power in the reported total.
    pub include_hover: bool,
    pub charge_rate_w: f64,
    pub sample_period_s: f64,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams {
            static_w: 0.0,
            slope: 0.0,
            hover_w: 0.0,
            battery_wh: 0.0,
        }
    }
}

impl Default for PowerParams {
    fn default() -> Self {
        PowerParams {
            macro_bs: ProfileParams {
                static_w: 130.0,
                slope: 4.7,
                ..ProfileParams::default()
            },
            srrh: ProfileParams {
                static_w: 50.0,
                slope: 4.7,
                ..ProfileParams::default()
            },
            frrh: ProfileParams {
                static_w: 5.0,
                slope: 8.0,
                hover_w: 150.0,
                battery_wh: 300.0,
            },
            bbu_static_w: 100.0,
            bbu_per_rrh_w: 20.0,
            standby_w: 2.0,
            include_hover: true,
            charge_rate_w: 300.0,
            sample_period_s: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DisasterParams {
    /// Passive relays between the survey F-RRHs and the head.
    pub relays: u32,
    pub sources: u32,
    pub hop_spacing_m: f64,
    pub report_period_s: f64,
    pub payload_bits: f64,
    /// Whether the head relay carries an edge processor.
    pub head_active: bool,
    pub altitude_m: f64,
    /// Ground distance from the head relay to the surviving S-RRH.
    pub backhaul_distance_m: f64,
}

impl Default for DisasterParams {
    fn default() -> Self {
        DisasterParams {
            relays: 1,
            sources: 2,
            hop_spacing_m: 800.0,
            report_period_s: 0.5,
            payload_bits: 100_000.0,
            head_active: true,
            altitude_m: 300.0,
            backhaul_distance_m: 4000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TerrainParams {
    pub members: u32,
    pub ue_count: u32,
    pub region_radius_m: f64,
    pub member_spacing_m: f64,
    /// Extra loss on air-to-ground access links from hills and vegetation.
    pub obstruction_db: f64,
    /// Distance from the cluster to the nearest ground S-RRH.
    pub srrh_distance_m: f64,
    pub altitude_m: f64,
}

impl Default for TerrainParams {
    fn default() -> Self {
        TerrainParams {
            members: 3,
            ue_count: 300,
            region_radius_m: 2500.0,
            member_spacing_m: 1200.0,
            obstruction_db: 20.0,
            srrh_distance_m: 6000.0,
            altitude_m: 100.0,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, "must be > 0"))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, "must be >= 0"))
    }
}

impl ScenarioConfig {
    pub fn warmup_s(&self) -> f64 {
        self.scenario.duration_s * self.scenario.warmup_fraction
    }

    /// Same config with another architecture and seed.
    pub fn with(&self, architecture: Architecture, seed: u64) -> Self {
        let mut c = self.clone();
        c.scenario.architecture = architecture;
        c.scenario.seed = seed;
        c
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        non_negative("scenario.duration_s", s.duration_s)?;
        if !(0.0..1.0).contains(&s.warmup_fraction) {
            return Err(Error::invalid("scenario.warmup_fraction", "must be in [0, 1)"));
        }
        if matches!(s.kind, ScenarioKind::Disaster | ScenarioKind::ComplexTerrain)
            && s.architecture != Architecture::UCRAN
        {
            return Err(Error::invalid(
                "scenario.architecture",
                "disaster and terrain scenarios need UC-RAN",
            ));
        }

        let t = &self.topology;
        if t.cells == 0 {
            return Err(Error::invalid("topology.cells", "must be >= 1"));
        }
        positive("topology.cell_area_km2", t.cell_area_km2)?;
        if t.hotspot_cell == 0 || t.hotspot_cell > t.cells {
            return Err(Error::invalid("topology.hotspot_cell", "no such cell"));
        }
        if t.standby_cell == 0 || t.standby_cell > t.cells {
            return Err(Error::invalid("topology.standby_cell", "no such cell"));
        }
        if s.architecture == Architecture::UCRAN && s.kind == ScenarioKind::Hotspot && t.uav_count == 0 {
            return Err(Error::invalid("topology.uav_count", "UC-RAN needs at least one UAV"));
        }
        if s.architecture != Architecture::MacroOnly && t.bbu_pools == 0 {
            return Err(Error::invalid("topology.bbu_pools", "C-RAN needs at least one BBU pool"));
        }
        if t.slots_per_frame == 0 {
            return Err(Error::invalid("topology.slots_per_frame", "must be >= 1"));
        }
        t.ground_capacity_prbs()?;
        t.frrh_capacity_prbs()?;
        non_negative("topology.ground_height_m", t.ground_height_m)?;
        positive("topology.frrh_altitude_m", t.frrh_altitude_m)?;
        if !t.ground_tx_dbm.is_finite() {
            return Err(Error::invalid("topology.ground_tx_dbm", "must be finite"));
        }
        if !(t.frrh_tx_dbm <= t.ground_tx_dbm) {
            return Err(Error::invalid("topology.frrh_tx_dbm", "must not exceed ground_tx_dbm"));
        }
        positive("topology.small_cell_radius_m", t.small_cell_radius_m)?;
        if t.fan_out == 0 {
            return Err(Error::invalid("topology.fan_out", "must be >= 1"));
        }
        non_negative("topology.optical_latency_s", t.optical_latency_s)?;
        positive("topology.optical_capacity_bps", t.optical_capacity_bps)?;
        non_negative("topology.wireless_latency_s", t.wireless_latency_s)?;
        positive("topology.wireless_bandwidth_mhz", t.wireless_bandwidth_mhz)?;
        non_negative("topology.microwave_latency_s", t.microwave_latency_s)?;
        positive("topology.microwave_capacity_bps", t.microwave_capacity_bps)?;

        let tr = &self.traffic;
        if !(0.0..=1.0).contains(&tr.load_fraction) {
            return Err(Error::invalid("traffic.load_fraction", "must be in [0, 1]"));
        }
        crate::traffic::LoadSchedule::new(tr.load_fractions.clone())
            .map_err(|e| match e {
                Error::Validation { reason, .. } => Error::invalid("traffic.load_fractions", reason),
                other => other,
            })?;
        positive("traffic.mean_holding_s", tr.mean_holding_s)?;
        if tr.demand_prbs == 0 {
            return Err(Error::invalid("traffic.demand_prbs", "must be >= 1"));
        }
        if tr.demand_prbs > t.ground_capacity_prbs()? {
            return Err(Error::invalid("traffic.demand_prbs", "exceeds a cell's PRB capacity"));
        }
        non_negative("traffic.gbr_bps", tr.gbr_bps)?;
        non_negative("traffic.handover_fraction", tr.handover_fraction)?;
        let [w0, w1] = tr.handover_window;
        if !(0.0 <= w0 && w0 <= w1 && w1 <= 1.0) {
            return Err(Error::invalid("traffic.handover_window", "must satisfy 0 <= start <= end <= 1"));
        }
        if !(0.0..=1.0).contains(&tr.background_load_fraction) {
            return Err(Error::invalid("traffic.background_load_fraction", "must be in [0, 1]"));
        }

        self.channel.validate()?;

        let c = &self.controller;
        positive("controller.deploy_threshold_pct", c.deploy_threshold_pct)?;
        non_negative("controller.recall_threshold_pct", c.recall_threshold_pct)?;
        if !(c.recall_threshold_pct < c.deploy_threshold_pct) {
            return Err(Error::invalid(
                "controller.recall_threshold_pct",
                "must be below deploy_threshold_pct",
            ));
        }
        positive("controller.control_period_s", c.control_period_s)?;
        non_negative("controller.blocking_timeout_s", c.blocking_timeout_s)?;
        positive("controller.uav_speed_mps", c.uav_speed_mps)?;
        non_negative("controller.min_deploy_charge_wh", c.min_deploy_charge_wh)?;
        if c.sample_history == 0 {
            return Err(Error::invalid("controller.sample_history", "must be >= 1"));
        }

        let l = &self.latency;
        positive("latency.frrh_proc_rate", l.frrh_proc_rate)?;
        positive("latency.bbu_proc_rate", l.bbu_proc_rate)?;
        positive("latency.macro_proc_rate", l.macro_proc_rate)?;
        non_negative("latency.access_latency_s", l.access_latency_s)?;
        non_negative("latency.task_rate_hz", l.task_rate_hz)?;
        non_negative("latency.task_payload_bits", l.task_payload_bits)?;

        let p = &self.power;
        for (name, prof) in [("power.macro", &p.macro_bs), ("power.srrh", &p.srrh), ("power.frrh", &p.frrh)] {
            non_negative(&alloc::format!("{name}.static_w"), prof.static_w)?;
            non_negative(&alloc::format!("{name}.slope"), prof.slope)?;
            non_negative(&alloc::format!("{name}.hover_w"), prof.hover_w)?;
        }
        if p.macro_bs.hover_w != 0.0 || p.srrh.hover_w != 0.0 {
            return Err(Error::invalid("power.srrh.hover_w", "ground nodes do not hover"));
        }
        positive("power.frrh.battery_wh", p.frrh.battery_wh)?;
        if c.min_deploy_charge_wh > p.frrh.battery_wh {
            return Err(Error::invalid("controller.min_deploy_charge_wh", "exceeds battery capacity"));
        }
        non_negative("power.bbu_static_w", p.bbu_static_w)?;
        non_negative("power.bbu_per_rrh_w", p.bbu_per_rrh_w)?;
        non_negative("power.standby_w", p.standby_w)?;
        non_negative("power.charge_rate_w", p.charge_rate_w)?;
        positive("power.sample_period_s", p.sample_period_s)?;

        let d = &self.disaster;
        if d.sources == 0 {
            return Err(Error::invalid("disaster.sources", "must be >= 1"));
        }
        positive("disaster.hop_spacing_m", d.hop_spacing_m)?;
        positive("disaster.report_period_s", d.report_period_s)?;
        non_negative("disaster.payload_bits", d.payload_bits)?;
        positive("disaster.altitude_m", d.altitude_m)?;
        positive("disaster.backhaul_distance_m", d.backhaul_distance_m)?;

        let te = &self.terrain;
        positive("terrain.region_radius_m", te.region_radius_m)?;
        positive("terrain.member_spacing_m", te.member_spacing_m)?;
        non_negative("terrain.obstruction_db", te.obstruction_db)?;
        positive("terrain.srrh_distance_m", te.srrh_distance_m)?;
        positive("terrain.altitude_m", te.altitude_m)?;
        let cap = t.fan_out + t.fan_out * t.fan_out;
        if te.members > cap {
            return Err(Error::invalid("terrain.members", "exceeds the extended-star capacity"));
        }
        Ok(())
    }

    /// Config of a single-cell pure loss system: `servers` concurrent
    /// sessions, `offered_erlangs` of Poisson traffic, no waiting.
    pub fn loss_system(servers: u32, offered_erlangs: f64, arrivals: f64) -> Self {
        let mut c = ScenarioConfig::default();
        c.scenario.architecture = Architecture::CRAN;
        c.topology.cells = 1;
        c.topology.hotspot_cell = 1;
        c.topology.standby_cell = 1;
        c.topology.capacity_prbs_override = Some(servers * c.traffic.demand_prbs);
        c.traffic.mean_holding_s = 1.0;
        c.traffic.handover_fraction = 0.0;
        c.traffic.load_fractions = vec![1.0];
        c.controller.blocking_timeout_s = 0.0;
        c.latency.task_rate_hz = 0.0;
        // the cell's max UEs equals `servers`; pick the load point so the
        // target equals the offered load
        c.traffic.load_fraction = offered_erlangs / servers as f64;
        let rate = offered_erlangs / c.traffic.mean_holding_s;
        c.scenario.warmup_fraction = 0.01;
        c.scenario.duration_s = arrivals / rate / (1.0 - c.scenario.warmup_fraction);
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn negative_duration_rejected() {
        let mut c = ScenarioConfig::default();
        c.scenario.duration_s = -1.0;
        let err = c.validate().unwrap_err();
        assert_eq!(
            err,
            Error::Validation {
                field: "scenario.duration_s".into(),
                reason: "must be >= 0".into()
            }
        );
    }

    #[test]
    fn thresholds_need_hysteresis() {
        let mut c = ScenarioConfig::default();
        c.controller.recall_threshold_pct = 90.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn terrain_requires_ucran() {
        let mut c = ScenarioConfig::default();
        c.scenario.kind = ScenarioKind::ComplexTerrain;
        c.scenario.architecture = Architecture::CRAN;
        assert!(c.validate().is_err());
    }
}
