//! Path loss, altitude search and rate mapping.
//!
//! Air-to-ground links use the sigmoid line-of-sight model: the probability
//! of LoS grows with the elevation angle, so raising a flying radio head first
//! lowers the mean loss (more LoS) and then raises it again (longer range).
//! Terrestrial links use log-distance loss with a 1 m free-space reference.

use crate::error::{Error, Result};
use crate::math;

/// Speed of light in m/s.
const LIGHT_SPEED: f64 = 299_792_458.0;

/// 64-QAM rate-3/4 ceiling, b/s/Hz.
pub const MAX_SPECTRAL_EFF: f64 = 4.5;
/// Implementation-loss factor applied to the Shannon bound.
pub const SHANNON_ATTENUATION: f64 = 0.75;
/// Below this SINR nothing decodes.
pub const DECODE_FLOOR_DB: f64 = -6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ChannelEnv {
    pub s_curve_a: f64,
    pub s_curve_b: f64,
    pub excess_los_db: f64,
    pub excess_nlos_db: f64,
    pub carrier_hz: f64,
    pub terrestrial_exponent: f64,
    pub noise_dbm: f64,
}

impl Default for ChannelEnv {
    /// Urban air-to-ground parameters at 2 GHz.
    fn default() -> Self {
        ChannelEnv {
            s_curve_a: 9.61,
            s_curve_b: 0.16,
            excess_los_db: 1.0,
            excess_nlos_db: 20.0,
            carrier_hz: 2.0e9,
            terrestrial_exponent: 3.5,
            // thermal noise over a 20 MHz carrier
            noise_dbm: -101.0,
        }
    }
}

impl ChannelEnv {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_curve_a > 0.0) {
            return Err(Error::invalid("channel.s_curve_a", "must be > 0"));
        }
        if !(self.s_curve_b > 0.0) {
            return Err(Error::invalid("channel.s_curve_b", "must be > 0"));
        }
        if !(self.excess_los_db >= 0.0) {
            return Err(Error::invalid("channel.excess_los_db", "must be >= 0"));
        }
        if !(self.excess_nlos_db >= self.excess_los_db) {
            return Err(Error::invalid(
                "channel.excess_nlos_db",
                "must be >= excess_los_db",
            ));
        }
        if !(self.carrier_hz > 0.0) {
            return Err(Error::invalid("channel.carrier_hz", "must be > 0"));
        }
        if !(self.terrestrial_exponent > 0.0) {
            return Err(Error::invalid("channel.terrestrial_exponent", "must be > 0"));
        }
        if !self.noise_dbm.is_finite() {
            return Err(Error::invalid("channel.noise_dbm", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub path_loss_db: f64,
    pub sinr_db: f64,
    pub spectral_eff: f64,
    pub rate_bps: f64,
}

pub fn free_space_loss(range_m: f64, carrier_hz: f64) -> f64 {
    20.0 * math::log10(4.0 * core::f64::consts::PI * range_m * carrier_hz / LIGHT_SPEED)
}

/// Probability of line of sight at `elevation_deg` degrees.
pub fn los_probability(elevation_deg: f64, env: &ChannelEnv) -> f64 {
    1.0 / (1.0 + env.s_curve_a * math::exp(-env.s_curve_b * (elevation_deg - env.s_curve_a)))
}

/// Mean air-to-ground loss in dB, weighted by the LoS probability.
pub fn atg_path_loss(ground_distance: f64, altitude: f64, env: &ChannelEnv) -> Result<f64> {
    if !(altitude > 0.0) {
        return Err(Error::domain("altitude must be > 0 for an air-to-ground link"));
    }
    if !(ground_distance >= 0.0) {
        return Err(Error::domain("ground distance must be >= 0"));
    }
    let elevation = math::atan2(altitude, ground_distance).to_degrees();
    let p_los = los_probability(elevation, env);
    let range = math::sqrt(ground_distance * ground_distance + altitude * altitude);
    Ok(free_space_loss(range, env.carrier_hz)
        + p_los * env.excess_los_db
        + (1.0 - p_los) * env.excess_nlos_db)
}

/// Log-distance loss for ground links, clamped to the 1 m reference.
pub fn terrestrial_path_loss(distance: f64, env: &ChannelEnv) -> f64 {
    let d = if distance > 1.0 { distance } else { 1.0 };
    free_space_loss(1.0, env.carrier_hz) + 10.0 * env.terrestrial_exponent * math::log10(d)
}

/// Altitude in `bounds` minimising [`atg_path_loss`] at `ground_distance`.
pub fn optimal_altitude(ground_distance: f64, env: &ChannelEnv, bounds: (f64, f64)) -> Result<f64> {
    let (lo, hi) = bounds;
    if !(lo > 0.0) {
        return Err(Error::invalid("bounds.min", "must be > 0"));
    }
    if !(hi >= lo) {
        return Err(Error::invalid("bounds", "max is below min"));
    }
    if !(ground_distance >= 0.0) {
        return Err(Error::domain("ground distance must be >= 0"));
    }
    let loss = |h: f64| atg_path_loss(ground_distance, h, env).unwrap_or(f64::INFINITY);
    let interior = golden_section_min(loss, lo, hi, 1e-4);
    // the search only brackets interior minima; monotone curves end at a bound
    let mut best = (interior, loss(interior));
    for h in [lo, hi] {
        let l = loss(h);
        if l < best.1 {
            best = (h, l);
        }
    }
    Ok(best.0)
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Attenuated Shannon efficiency, capped at 64-QAM and floored at decode failure.
pub fn spectral_efficiency(sinr_db: f64) -> f64 {
    if !(sinr_db >= DECODE_FLOOR_DB) {
        return 0.0;
    }
    let eff = SHANNON_ATTENUATION * math::log2(1.0 + math::db_to_linear(sinr_db));
    if eff > MAX_SPECTRAL_EFF {
        MAX_SPECTRAL_EFF
    } else {
        eff
    }
}

/// Interference-free link budget.
pub fn link_rate(tx_power_dbm: f64, path_loss_db: f64, bandwidth_hz: f64, env: &ChannelEnv) -> Result<LinkBudget> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::domain("bandwidth must be > 0"));
    }
    let sinr_db = tx_power_dbm - path_loss_db - env.noise_dbm;
    let spectral_eff = spectral_efficiency(sinr_db);
    Ok(LinkBudget {
        path_loss_db,
        sinr_db,
        spectral_eff,
        rate_bps: spectral_eff * bandwidth_hz,
    })
}

/// LTE resource-grid width for a channel bandwidth.
pub fn prbs_for(bandwidth_hz: f64) -> Result<u32> {
    const GRID: [(f64, u32); 6] = [
        (1.4e6, 6),
        (3.0e6, 15),
        (5.0e6, 25),
        (10.0e6, 50),
        (15.0e6, 75),
        (20.0e6, 100),
    ];
    GRID.iter()
        .find(|(bw, _)| (bw - bandwidth_hz).abs() < 1.0)
        .map(|&(_, prbs)| prbs)
        .ok_or_else(|| Error::invalid("bandwidth", "not an LTE channel bandwidth (1.4/3/5/10/15/20 MHz)"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn urban() -> ChannelEnv {
        ChannelEnv::default()
    }

    #[test]
    fn overhead_limit_is_free_space_plus_los_excess() {
        let env = urban();
        let h = 120.0;
        let loss = atg_path_loss(0.0, h, &env).unwrap();
        let expected = free_space_loss(h, env.carrier_hz) + env.excess_los_db;
        assert!((loss - expected).abs() < 1e-3, "{loss} vs {expected}");
    }

    #[test]
    fn low_altitude_loses_more_than_moderate_altitude() {
        let env = urban();
        let low = atg_path_loss(500.0, 10.0, &env).unwrap();
        let mid = atg_path_loss(500.0, 120.0, &env).unwrap();
        // direct evaluation: 10 m is almost surely NLoS, 120 m is ~76% LoS
        assert!(low > mid, "{low} <= {mid}");
    }

    #[test]
    fn zero_altitude_is_a_domain_error() {
        assert!(matches!(atg_path_loss(100.0, 0.0, &urban()), Err(Error::Domain(_))));
    }

    #[test]
    fn loss_grows_with_ground_distance() {
        let env = urban();
        let mut prev = atg_path_loss(0.0, 50.0, &env).unwrap();
        for d in (10..3000).step_by(10) {
            let l = atg_path_loss(d as f64, 50.0, &env).unwrap();
            assert!(l > prev);
            prev = l;
        }
    }

    #[test]
    fn overhead_optimum_is_the_lower_bound() {
        let h = optimal_altitude(0.0, &urban(), (1.0, 2000.0)).unwrap();
        assert_eq!(h, 1.0);
    }

    #[test]
    fn inverted_bounds_rejected() {
        assert!(matches!(
            optimal_altitude(500.0, &urban(), (100.0, 10.0)),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn efficiency_ceiling_and_floor() {
        let env = urban();
        let hot = link_rate(43.0, 40.0, 20e6, &env).unwrap();
        assert_eq!(hot.spectral_eff, MAX_SPECTRAL_EFF);
        assert_eq!(hot.rate_bps, 4.5 * 20e6);
        // sinr -10 dB
        let cold = link_rate(env.noise_dbm - 10.0 + 100.0, 100.0, 20e6, &env).unwrap();
        assert_eq!(cold.rate_bps, 0.0);
    }

    #[test]
    fn ten_db_on_twenty_mhz() {
        let env = urban();
        let b = link_rate(env.noise_dbm + 10.0 + 90.0, 90.0, 20e6, &env).unwrap();
        assert!((b.sinr_db - 10.0).abs() < 1e-9);
        // hand computation: 0.75 * log2(11) = 2.594411..., below the 4.5 cap
        let expected = 0.75 * 3.459_431_618_637_297 * 20e6;
        assert!((b.rate_bps - expected).abs() < 1.0, "{}", b.rate_bps);
    }

    #[test]
    fn lte_grid_sizes() {
        assert_eq!(prbs_for(20e6).unwrap(), 100);
        assert_eq!(prbs_for(1.4e6).unwrap(), 6);
        assert_eq!(prbs_for(10e6).unwrap(), 50);
        assert!(prbs_for(7e6).is_err());
    }

    #[test]
    fn env_validation() {
        let mut env = urban();
        assert!(env.validate().is_ok());
        env.excess_nlos_db = 0.5;
        assert!(env.validate().is_err());
    }
}
