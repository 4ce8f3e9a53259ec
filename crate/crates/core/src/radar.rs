//! FM-CW signal model: chirp parameters, range discretization and the
//! monostatic radar equation on a calibrated relative dB scale.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::antenna_gain;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Receive polarization. The transmitter is always V-polarized, so `V`
/// selects the co-polarized (VV) channel and `H` the cross-polarized (VH) one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    #[serde(alias = "vv", alias = "V")]
    V,
    #[serde(alias = "vh", alias = "H")]
    H,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::V, Polarization::H];

    /// Channel label as printed in reports: `VV` or `VH`.
    pub fn channel(self) -> &'static str {
        match self {
            Polarization::V => "VV",
            Polarization::H => "VH",
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.channel())
    }
}

impl std::str::FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vv" | "v" => Ok(Polarization::V),
            "vh" | "h" => Ok(Polarization::H),
            other => Err(Error::validation(format!("unknown polarization `{other}`"))),
        }
    }
}

/// Reader configuration.
///
/// Echo levels are reported on a relative scale: [`RadarConfig::cal_offset`]
/// is chosen so that a target of `cal_rcs` dBsm at `cal_range` metres, seen
/// on boresight through the V receive channel, reads exactly 0 dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadarConfig {
    /// Hz
    pub carrier_frequency: f64,
    /// Hz
    pub bandwidth: f64,
    /// s
    pub chirp_duration: f64,
    /// dBi
    pub tx_gain: f64,
    /// degrees
    pub tx_hpbw: f64,
    /// dBi
    pub rx_gain_v: f64,
    /// dBi
    pub rx_gain_h: f64,
    /// degrees
    pub rx_hpbw: f64,
    /// dBm
    pub tx_power: f64,
    /// Mean noise power on the relative echo scale (dB).
    pub noise_floor: f64,
    pub fft_size: usize,
    /// m
    pub range_max: f64,
    /// dBsm
    pub cal_rcs: f64,
    /// m
    pub cal_range: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            carrier_frequency: 23.8e9,
            bandwidth: 2.0e9,
            chirp_duration: 1.0e-3,
            tx_gain: 28.0,
            tx_hpbw: 6.0,
            rx_gain_v: 20.0,
            rx_gain_h: 20.0,
            rx_hpbw: 20.0,
            tx_power: 10.0,
            noise_floor: -25.0,
            fft_size: 256,
            range_max: 8.0,
            cal_rcs: 0.0,
            cal_range: 1.0,
        }
    }
}

impl RadarConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("carrier_frequency", self.carrier_frequency),
            ("bandwidth", self.bandwidth),
            ("chirp_duration", self.chirp_duration),
            ("tx_gain", self.tx_gain),
            ("tx_hpbw", self.tx_hpbw),
            ("rx_gain_v", self.rx_gain_v),
            ("rx_gain_h", self.rx_gain_h),
            ("rx_hpbw", self.rx_hpbw),
            ("tx_power", self.tx_power),
            ("noise_floor", self.noise_floor),
            ("range_max", self.range_max),
            ("cal_rcs", self.cal_rcs),
            ("cal_range", self.cal_range),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::validation(format!("radar.{name} must be finite")));
            }
        }
        if self.bandwidth <= 0.0 {
            return Err(Error::validation("radar.bandwidth must be > 0"));
        }
        if self.carrier_frequency <= self.bandwidth / 2.0 {
            return Err(Error::validation(
                "radar.carrier_frequency must exceed bandwidth / 2",
            ));
        }
        if self.chirp_duration <= 0.0 {
            return Err(Error::validation("radar.chirp_duration must be > 0"));
        }
        if self.fft_size < 2 || !self.fft_size.is_power_of_two() {
            return Err(Error::validation(
                "radar.fft_size must be a power of two >= 2",
            ));
        }
        if self.range_max <= 0.0 {
            return Err(Error::validation("radar.range_max must be > 0"));
        }
        if self.tx_hpbw <= 0.0 || self.rx_hpbw <= 0.0 {
            return Err(Error::validation("antenna beamwidths must be > 0"));
        }
        if self.cal_range <= 0.0 {
            return Err(Error::validation("radar.cal_range must be > 0"));
        }
        Ok(())
    }

    /// Carrier wavelength in metres.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Chirp slope in Hz/s.
    pub fn chirp_slope(&self) -> f64 {
        self.bandwidth / self.chirp_duration
    }

    /// Beat frequency produced by a target at `range` metres.
    pub fn beat_frequency(&self, range: f64) -> f64 {
        2.0 * range * self.chirp_slope() / SPEED_OF_LIGHT
    }

    pub fn rx_gain(&self, pol: Polarization) -> f64 {
        match pol {
            Polarization::V => self.rx_gain_v,
            Polarization::H => self.rx_gain_h,
        }
    }

    /// Uncalibrated radar-equation level, before `cal_offset` is removed.
    fn raw_level(&self, rcs: f64, range: f64, tx_gain: f64, rx_gain: f64) -> f64 {
        self.tx_power + tx_gain + rx_gain + 20.0 * self.wavelength().log10() + rcs
            - 30.0 * (4.0 * PI).log10()
            - 40.0 * range.log10()
    }

    /// Constant subtracted from every raw level so the reference target
    /// reads 0 dB.
    pub fn cal_offset(&self) -> f64 {
        self.raw_level(self.cal_rcs, self.cal_range, self.tx_gain, self.rx_gain_v)
    }

    /// Range axis of the synthesized beat spectrum: origin at 0 m, one bin
    /// per resolution cell, limited by both the positive half of the FFT
    /// and `range_max`.
    pub fn range_axis(&self) -> RangeAxis {
        let bin_width = range_resolution(self);
        let by_range = (self.range_max / bin_width).floor() as usize + 1;
        RangeAxis {
            bin_count: by_range.min(self.fft_size / 2).max(1),
            bin_width,
            origin: 0.0,
        }
    }
}

/// Range resolution `c / 2B` in metres.
pub fn range_resolution(config: &RadarConfig) -> f64 {
    SPEED_OF_LIGHT / (2.0 * config.bandwidth)
}

/// Echo level (relative dB) of a target with radar cross section `rcs`
/// (dBsm) at `range` metres, seen `tx_off_axis` / `rx_off_axis` degrees off
/// the transmit and receive boresights.
///
/// An `rcs` of `-inf` (no return in this channel) yields `-inf`.
pub fn echo_level(
    config: &RadarConfig,
    rcs: f64,
    range: f64,
    tx_off_axis: f64,
    rx_off_axis: f64,
    rx_pol: Polarization,
) -> Result<f64> {
    if !range.is_finite() || range <= 0.0 {
        return Err(Error::Domain(format!("range must be > 0, got {range}")));
    }
    let g_tx = antenna_gain(config.tx_gain, config.tx_hpbw, tx_off_axis);
    let g_rx = antenna_gain(config.rx_gain(rx_pol), config.rx_hpbw, rx_off_axis);
    Ok(config.raw_level(rcs, range, g_tx, g_rx) - config.cal_offset())
}

/// Uniformly spaced range bins; bin `k` is centred at `origin + k * bin_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeAxis {
    pub bin_count: usize,
    pub bin_width: f64,
    pub origin: f64,
}

impl RangeAxis {
    pub fn new(bin_count: usize, bin_width: f64, origin: f64) -> Result<Self> {
        if bin_count == 0 {
            return Err(Error::validation("range axis needs at least one bin"));
        }
        if !bin_width.is_finite() || bin_width <= 0.0 || !origin.is_finite() {
            return Err(Error::validation(
                "range axis bin width must be finite and > 0",
            ));
        }
        Ok(Self {
            bin_count,
            bin_width,
            origin,
        })
    }

    pub fn bin_to_range(&self, bin: usize) -> f64 {
        self.origin + bin as f64 * self.bin_width
    }

    /// Fractional bin coordinate of `range` (no bounds check).
    pub fn position(&self, range: f64) -> f64 {
        (range - self.origin) / self.bin_width
    }

    /// Nearest bin, rounding exact midpoints up.
    pub fn range_to_bin(&self, range: f64) -> Result<usize> {
        let end = self.origin + self.bin_count as f64 * self.bin_width;
        if !(range >= self.origin && range < end) {
            return Err(Error::out_of_range(format!(
                "range {range} m outside axis [{}, {end})",
                self.origin
            )));
        }
        let k = (self.position(range) + 0.5).floor() as usize;
        Ok(k.min(self.bin_count - 1))
    }

    pub fn max_range(&self) -> f64 {
        self.bin_to_range(self.bin_count - 1)
    }
}
