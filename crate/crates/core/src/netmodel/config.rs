use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub const fn new(low: f64, high: f64) -> Self {
        Self { low, high }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.low <= value && value <= self.high
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Area {
    pub width_m: f64,
    pub height_m: f64,
}

/// Parameters for random instance generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub area: Area,
    pub buyers: usize,
    pub requests_per_buyer: usize,
    pub sellers: usize,
    pub relays: usize,
    pub rate_mbps: Interval,
    pub compute_ghz: Interval,
    pub storage_gb: Interval,
    pub bid: Interval,
    pub ask: Interval,
    pub server_compute_ghz: Interval,
    pub server_storage_gb: Interval,
    pub bands: usize,
    pub band_bandwidth_mhz: f64,
    pub communication_range_m: f64,
    pub interference_range_m: f64,
    pub spectral_efficiency_bps_per_hz: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    /// The simulation setup of the reference edge-computing experiment:
    /// 1000x1000 m, 12 buyers with 2 requests each, 3 sellers, 4 relays,
    /// 10 MHz bands.
    pub fn reference() -> Self {
        Self {
            area: Area {
                width_m: 1000.0,
                height_m: 1000.0,
            },
            buyers: 12,
            requests_per_buyer: 2,
            sellers: 3,
            relays: 4,
            rate_mbps: Interval::new(4.0, 8.0),
            compute_ghz: Interval::new(1.0, 4.0),
            storage_gb: Interval::new(1.0, 3.0),
            bid: Interval::new(0.5, 4.0),
            ask: Interval::new(0.0, 1.0),
            server_compute_ghz: Interval::new(6.0, 14.0),
            server_storage_gb: Interval::new(8.0, 24.0),
            bands: 4,
            band_bandwidth_mhz: 10.0,
            communication_range_m: 250.0,
            interference_range_m: 500.0,
            spectral_efficiency_bps_per_hz: 1.0,
            seed: 1,
        }
    }

    /// Reference parameters shrunk to a market small enough for exact
    /// welfare maximization: 3 buyers with 2 requests each, 2 sellers and
    /// 2 relays in a 400 m square.
    pub fn tiny() -> Self {
        Self {
            area: Area {
                width_m: 400.0,
                height_m: 400.0,
            },
            buyers: 3,
            sellers: 2,
            relays: 2,
            ..Self::reference()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_bands(mut self, bands: usize) -> Self {
        self.bands = bands;
        self
    }

    pub fn validate(&self) -> Result<()> {
        fn nonneg(field: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::config(
                    field,
                    format!("{v} is not a finite nonnegative number"),
                ))
            }
        }
        fn positive(field: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(
                    field,
                    format!("{v} is not a finite positive number"),
                ))
            }
        }
        fn interval(field: &str, iv: Interval, strictly_positive: bool) -> Result<()> {
            if !(iv.low.is_finite() && iv.high.is_finite()) {
                return Err(Error::config(field, "bounds must be finite"));
            }
            if iv.low > iv.high {
                return Err(Error::config(
                    field,
                    format!("low {} exceeds high {}", iv.low, iv.high),
                ));
            }
            if strictly_positive && iv.low <= 0.0 {
                return Err(Error::config(field, "low bound must be positive"));
            }
            if iv.low < 0.0 {
                return Err(Error::config(field, "low bound must be nonnegative"));
            }
            Ok(())
        }

        nonneg("area.width_m", self.area.width_m)?;
        nonneg("area.height_m", self.area.height_m)?;
        interval("rate_mbps", self.rate_mbps, true)?;
        interval("compute_ghz", self.compute_ghz, true)?;
        interval("storage_gb", self.storage_gb, true)?;
        interval("bid", self.bid, false)?;
        interval("ask", self.ask, false)?;
        interval("server_compute_ghz", self.server_compute_ghz, true)?;
        interval("server_storage_gb", self.server_storage_gb, true)?;
        positive("band_bandwidth_mhz", self.band_bandwidth_mhz)?;
        nonneg("communication_range_m", self.communication_range_m)?;
        nonneg("interference_range_m", self.interference_range_m)?;
        nonneg(
            "spectral_efficiency_bps_per_hz",
            self.spectral_efficiency_bps_per_hz,
        )?;
        if self.bands > 64 {
            return Err(Error::config("bands", "at most 64 bands are supported"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization is infallible")
    }

    /// Reads and validates a JSON config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::reference()
    }
}
