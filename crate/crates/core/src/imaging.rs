//! Mechanical beam scan, beat-spectrum synthesis and the 3D polarimetric
//! image.
//!
//! The dechirped spectrum is synthesized directly in the range domain: each
//! scatterer deposits a Hann-windowed sinc² point-spread response, truncated
//! at ±4 resolution cells and normalized so the nearest bin reads the
//! scatterer's echo level. Contributions and noise add in linear power.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise;
use crate::radar::{echo_level, Polarization, RadarConfig, RangeAxis};
use crate::scene::{angle_between, direction_of, effective_rcs, unit_vector, Scenario};

/// Half-width of the range point-spread kernel, in resolution cells.
pub const KERNEL_HALF_WIDTH: f64 = 4.0;

/// A uniformly sampled angle axis in degrees; samples are
/// `start + i * step` for `i < count()`, the last one not beyond `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleAxis {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl AngleAxis {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let a = Self { start, stop, step };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::validation("angle axis values must be finite"));
        }
        if self.step <= 0.0 {
            return Err(Error::validation("angle step must be > 0"));
        }
        if self.start >= self.stop {
            return Err(Error::validation("angle axis needs start < stop"));
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    /// Fractional index of `angle`.
    pub fn position(&self, angle: f64) -> f64 {
        (angle - self.start) / self.step
    }

    pub fn contains(&self, angle: f64) -> bool {
        let tol = 1e-9 * self.step;
        angle >= self.start - tol && angle <= self.value(self.count() - 1) + tol
    }

    /// Nearest sample index, clamped to the axis.
    pub fn nearest(&self, angle: f64) -> usize {
        let p = (self.position(angle) + 0.5).floor();
        p.clamp(0.0, (self.count() - 1) as f64) as usize
    }

    /// Inclusive index range of samples inside `[lo, hi]`, if any.
    pub fn index_span(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let tol = 1e-9;
        let first = (self.position(lo) - tol).ceil().max(0.0);
        let last = (self.position(hi) + tol)
            .floor()
            .min((self.count() - 1) as f64);
        (first <= last).then_some((first as usize, last as usize))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub theta: AngleAxis,
    pub phi: AngleAxis,
    pub range_axis: RangeAxis,
}

impl ScanGrid {
    pub fn new(theta: AngleAxis, phi: AngleAxis, range_axis: RangeAxis) -> Result<Self> {
        let g = Self {
            theta,
            phi,
            range_axis,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid with the bundled default steps (1° elevation, 0.3° azimuth).
    pub fn with_default_steps(
        theta: (f64, f64),
        phi: (f64, f64),
        range_axis: RangeAxis,
    ) -> Result<Self> {
        Self::new(
            AngleAxis::new(theta.0, theta.1, 1.0)?,
            AngleAxis::new(phi.0, phi.1, 0.3)?,
            range_axis,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.theta.validate()?;
        self.phi.validate()?;
        RangeAxis::new(
            self.range_axis.bin_count,
            self.range_axis.bin_width,
            self.range_axis.origin,
        )?;
        Ok(())
    }

    /// (θ samples, φ samples, range bins).
    pub fn shape(&self) -> (usize, usize, usize) {
        (
            self.theta.count(),
            self.phi.count(),
            self.range_axis.bin_count,
        )
    }

    pub fn voxel_count(&self) -> usize {
        let (a, b, c) = self.shape();
        a * b * c
    }

    /// Same sample positions along all three axes.
    pub fn same_samples(&self, other: &ScanGrid) -> bool {
        self.shape() == other.shape()
            && self.theta.start == other.theta.start
            && self.theta.step == other.theta.step
            && self.phi.start == other.phi.start
            && self.phi.step == other.phi.step
            && self.range_axis.bin_width == other.range_axis.bin_width
            && self.range_axis.origin == other.range_axis.origin
    }
}

/// Dense 3D field of dB values indexed (θ, φ, range bin), θ-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3 {
    shape: (usize, usize, usize),
    data: Vec<f32>,
}

impl Field3 {
    pub fn filled(shape: (usize, usize, usize), value: f32) -> Self {
        Self {
            shape,
            data: vec![value; shape.0 * shape.1 * shape.2],
        }
    }

    pub fn from_vec(shape: (usize, usize, usize), data: Vec<f32>) -> Result<Self> {
        if data.len() != shape.0 * shape.1 * shape.2 {
            return Err(Error::validation(format!(
                "field of shape {shape:?} needs {} values, got {}",
                shape.0 * shape.1 * shape.2,
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.shape
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.shape.1 + j) * self.shape.2 + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f32 {
        self.data[self.index(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f32) {
        let idx = self.index(i, j, k);
        self.data[idx] = v;
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Spectrum (all range bins) at one direction.
    pub fn spectrum(&self, i: usize, j: usize) -> &[f32] {
        let start = self.index(i, j, 0);
        &self.data[start..start + self.shape.2]
    }

    /// Maximum over all voxels; `-inf` for an all-`-inf` field.
    pub fn max(&self) -> f64 {
        self.data
            .iter()
            .fold(f64::NEG_INFINITY, |m, &v| m.max(v as f64))
    }

    /// 2D (θ, φ) slice at range bin `k`.
    pub fn slice(&self, k: usize) -> Result<crate::isolines::Slice> {
        if k >= self.shape.2 {
            return Err(Error::out_of_range(format!(
                "range bin {k} beyond {} bins",
                self.shape.2
            )));
        }
        let (rows, cols, _) = self.shape;
        let values = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j, k) as f64)
            .collect();
        crate::isolines::Slice::new(rows, cols, values)
    }

    /// Maximum over range for every direction.
    pub fn max_projection(&self) -> crate::isolines::Slice {
        let (rows, cols, _) = self.shape;
        let values = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| {
                self.spectrum(i, j)
                    .iter()
                    .fold(f64::NEG_INFINITY, |m, &v| m.max(v as f64))
            })
            .collect();
        crate::isolines::Slice::new(rows, cols, values).expect("shape matches")
    }
}

/// Co- and cross-polarized images over one scan grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarimetricImage {
    pub grid: ScanGrid,
    pub vv: Field3,
    pub vh: Field3,
}

impl PolarimetricImage {
    pub fn new(grid: ScanGrid, vv: Field3, vh: Field3) -> Result<Self> {
        if vv.shape() != grid.shape() || vh.shape() != grid.shape() {
            return Err(Error::validation(format!(
                "field shapes {:?}/{:?} do not match grid {:?}",
                vv.shape(),
                vh.shape(),
                grid.shape()
            )));
        }
        if vv
            .as_slice()
            .iter()
            .chain(vh.as_slice())
            .any(|v| v.is_nan())
        {
            return Err(Error::validation("image contains NaN"));
        }
        Ok(Self { grid, vv, vh })
    }

    pub fn field(&self, pol: Polarization) -> &Field3 {
        match pol {
            Polarization::V => &self.vv,
            Polarization::H => &self.vh,
        }
    }
}

/// How receiver noise is added to synthesized spectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// No noise; empty bins read `-inf`.
    None,
    /// Constant mean noise power at the configured floor in every bin.
    Floor,
    /// Exponentially distributed noise power (mean at the floor) drawn from
    /// a counter-based stream keyed by seed, polarization, direction and bin.
    Seeded(u64),
}

/// Normalized power response of a Hann-windowed range FFT at an offset of
/// `x` bins from the target.
pub fn kernel_power(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-12 {
        return 1.0;
    }
    let denom = 1.0 - x * x;
    let amp = if denom.abs() < 1e-9 {
        0.5
    } else {
        (PI * x).sin() / (PI * x) / denom
    };
    amp * amp
}

/// Linear-power range spectrum accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeSpectrum {
    axis: RangeAxis,
    power: Vec<f64>,
}

impl RangeSpectrum {
    pub fn new(axis: RangeAxis) -> Self {
        Self {
            axis,
            power: vec![0.0; axis.bin_count],
        }
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    /// Deposit a return of `level_db` at `range` metres.
    pub fn deposit(&mut self, level_db: f64, range: f64) {
        if level_db == f64::NEG_INFINITY {
            return;
        }
        let p = 10f64.powf(level_db / 10.0);
        let pos = self.axis.position(range);
        let nearest = (pos + 0.5).floor();
        let norm = kernel_power(nearest - pos);
        let last = self.axis.bin_count as f64 - 1.0;
        let lo = (pos - KERNEL_HALF_WIDTH).ceil().max(0.0);
        let hi = (pos + KERNEL_HALF_WIDTH).floor().min(last);
        if lo > hi {
            return;
        }
        for k in lo as usize..=hi as usize {
            self.power[k] += p * kernel_power(k as f64 - pos) / norm;
        }
    }

    /// Add the power of another spectrum on the same axis.
    pub fn merge(&mut self, other: &RangeSpectrum) {
        for (a, b) in self.power.iter_mut().zip(&other.power) {
            *a += b;
        }
    }

    pub fn add_noise(&mut self, floor_db: f64, model: NoiseModel, key: [u64; 3]) {
        let floor = 10f64.powf(floor_db / 10.0);
        match model {
            NoiseModel::None => {}
            NoiseModel::Floor => self.power.iter_mut().for_each(|p| *p += floor),
            NoiseModel::Seeded(seed) => {
                for (k, p) in self.power.iter_mut().enumerate() {
                    *p += floor * noise::exponential(seed, &[key[0], key[1], key[2], k as u64]);
                }
            }
        }
    }

    pub fn to_db(&self) -> Vec<f64> {
        self.power.iter().map(|&p| 10.0 * p.log10()).collect()
    }
}

/// Scatterer as seen from the radar with the per-channel RCS for the
/// scenario's sensor states.
#[derive(Debug, Clone, Copy)]
struct Target {
    dir: [f64; 3],
    range: f64,
    rcs: [f64; 2],
}

fn targets(scenario: &Scenario) -> Result<Vec<Target>> {
    scenario
        .scatterers
        .iter()
        .map(|s| {
            let d = direction_of(s.position)?;
            let state = scenario.state_of(&s.id);
            Ok(Target {
                dir: unit_vector(d.theta, d.phi),
                range: d.range,
                rcs: [
                    effective_rcs(s, state, Polarization::V),
                    effective_rcs(s, state, Polarization::H),
                ],
            })
        })
        .collect()
}

fn pol_slot(pol: Polarization) -> usize {
    match pol {
        Polarization::V => 0,
        Polarization::H => 1,
    }
}

fn synthesize(
    config: &RadarConfig,
    axis: RangeAxis,
    targets: &[Target],
    theta: f64,
    phi: f64,
    pol: Polarization,
    noise: NoiseModel,
) -> RangeSpectrum {
    let beam = unit_vector(theta, phi);
    let mut spectrum = RangeSpectrum::new(axis);
    for t in targets {
        let off = angle_between(beam, t.dir);
        // range > 0 is a scenario invariant
        let level = echo_level(config, t.rcs[pol_slot(pol)], t.range, off, off, pol)
            .expect("scatterer range is positive");
        spectrum.deposit(level, t.range);
    }
    spectrum.add_noise(
        config.noise_floor,
        noise,
        [pol_slot(pol) as u64, theta.to_bits(), phi.to_bits()],
    );
    spectrum
}

/// Echo level (dB) versus range bin for one beam direction and receive
/// channel.
pub fn beat_spectrum(
    scenario: &Scenario,
    direction: (f64, f64),
    rx_pol: Polarization,
    noise: NoiseModel,
) -> Result<Vec<f64>> {
    let (theta, phi) = direction;
    if !scenario.grid.theta.contains(theta) || !scenario.grid.phi.contains(phi) {
        return Err(Error::out_of_range(format!(
            "direction ({theta}°, {phi}°) outside the scan grid"
        )));
    }
    let targets = targets(scenario)?;
    let axis = scenario.grid.range_axis;
    Ok(synthesize(&scenario.config, axis, &targets, theta, phi, rx_pol, noise).to_db())
}

/// Scan every grid direction and assemble the VV and VH images.
///
/// Directions are processed in parallel; the result is identical to a
/// sequential scan because noise is keyed by direction, not drawn in order.
pub fn build_image(scenario: &Scenario, noise: NoiseModel) -> Result<PolarimetricImage> {
    scenario.validate()?;
    let grid = scenario.grid;
    let shape = grid.shape();
    let targets = targets(scenario)?;
    let mut vv = Field3::filled(shape, 0.0);
    let mut vh = Field3::filled(shape, 0.0);
    let bins = shape.2;
    vv.data
        .par_chunks_mut(bins)
        .zip(vh.data.par_chunks_mut(bins))
        .enumerate()
        .for_each(|(n, (row_v, row_h))| {
            let theta = grid.theta.value(n / shape.1);
            let phi = grid.phi.value(n % shape.1);
            for (pol, row) in [(Polarization::V, row_v), (Polarization::H, row_h)] {
                let s = synthesize(
                    &scenario.config,
                    grid.range_axis,
                    &targets,
                    theta,
                    phi,
                    pol,
                    noise,
                );
                for (dst, p) in row.iter_mut().zip(s.power()) {
                    *dst = (10.0 * p.log10()) as f32;
                }
            }
        });
    PolarimetricImage::new(grid, vv, vh)
}

/// Axis-aligned box in (θ°, φ°, R m); bounds are inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub theta: (f64, f64),
    pub phi: (f64, f64),
    pub range: (f64, f64),
}

impl Window {
    pub fn new(theta: (f64, f64), phi: (f64, f64), range: (f64, f64)) -> Self {
        Self { theta, phi, range }
    }

    /// Box spanning whole grid samples `lo..=hi` along each axis.
    pub fn from_indices(grid: &ScanGrid, lo: [usize; 3], hi: [usize; 3]) -> Self {
        Self {
            theta: (grid.theta.value(lo[0]), grid.theta.value(hi[0])),
            phi: (grid.phi.value(lo[1]), grid.phi.value(hi[1])),
            range: (
                grid.range_axis.bin_to_range(lo[2]),
                grid.range_axis.bin_to_range(hi[2]),
            ),
        }
    }

    /// Box centred on a point, `half` = (θ°, φ°, m).
    pub fn around(theta: f64, phi: f64, range: f64, half: (f64, f64, f64)) -> Self {
        Self {
            theta: (theta - half.0, theta + half.0),
            phi: (phi - half.1, phi + half.1),
            range: (range - half.2, range + half.2),
        }
    }

    pub fn union(&self, other: &Window) -> Window {
        Window {
            theta: (
                self.theta.0.min(other.theta.0),
                self.theta.1.max(other.theta.1),
            ),
            phi: (self.phi.0.min(other.phi.0), self.phi.1.max(other.phi.1)),
            range: (
                self.range.0.min(other.range.0),
                self.range.1.max(other.range.1),
            ),
        }
    }

    pub fn contains(&self, theta: f64, phi: f64, range: f64) -> bool {
        (self.theta.0..=self.theta.1).contains(&theta)
            && (self.phi.0..=self.phi.1).contains(&phi)
            && (self.range.0..=self.range.1).contains(&range)
    }

    /// Inclusive index spans of the grid samples inside the box.
    pub fn index_spans(&self, grid: &ScanGrid) -> Result<[(usize, usize); 3]> {
        let axis = grid.range_axis;
        let lo = ((self.range.0 - axis.origin) / axis.bin_width - 1e-9)
            .ceil()
            .max(0.0);
        let hi = ((self.range.1 - axis.origin) / axis.bin_width + 1e-9)
            .floor()
            .min(axis.bin_count as f64 - 1.0);
        let t = grid.theta.index_span(self.theta.0, self.theta.1);
        let p = grid.phi.index_span(self.phi.0, self.phi.1);
        match (t, p, lo <= hi) {
            (Some(t), Some(p), true) => Ok([t, p, (lo as usize, hi as usize)]),
            _ => Err(Error::out_of_range(format!(
                "window {self:?} does not intersect the grid"
            ))),
        }
    }
}

/// Highest value inside `window` and its grid indices; ties resolve to the
/// first voxel in θ-major scan order.
pub fn image_max_in_window(
    field: &Field3,
    grid: &ScanGrid,
    window: &Window,
) -> Result<(f64, [usize; 3])> {
    if field.shape() != grid.shape() {
        return Err(Error::validation("field shape does not match grid"));
    }
    let [(t0, t1), (p0, p1), (k0, k1)] = window.index_spans(grid)?;
    let mut best = (f64::NEG_INFINITY, [t0, p0, k0]);
    let mut first = true;
    for i in t0..=t1 {
        for j in p0..=p1 {
            for k in k0..=k1 {
                let v = field.get(i, j, k) as f64;
                if first || v > best.0 {
                    best = (v, [i, j, k]);
                    first = false;
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::scene::{Direction, Position, Scatterer, ScatteringMatrix, SensorState};

    pub(crate) fn grid(theta: (f64, f64, f64), phi: (f64, f64, f64), bins: usize) -> ScanGrid {
        ScanGrid::new(
            AngleAxis::new(theta.0, theta.1, theta.2).unwrap(),
            AngleAxis::new(phi.0, phi.1, phi.2).unwrap(),
            RangeAxis::new(
                bins,
                crate::radar::range_resolution(&RadarConfig::default()),
                0.0,
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn scenario(scatterers: Vec<Scatterer>, states: &[(&str, SensorState)]) -> Scenario {
        let states: BTreeMap<_, _> = states.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Scenario::new(
            "t",
            RadarConfig::default(),
            grid((-4.0, 4.0, 1.0), (-6.0, 6.0, 0.3), 107),
            scatterers,
            states,
        )
        .unwrap()
    }

    /// Amplitude that makes a boresight target at `range` read `level` dB.
    fn amplitude_for(level: f64, range: f64) -> f64 {
        let cfg = RadarConfig::default();
        let e0 = echo_level(&cfg, 0.0, range, 0.0, 0.0, Polarization::V).unwrap();
        10f64.powf((level - e0) / 20.0)
    }

    #[test]
    fn axis_counts_and_spans() {
        let a = AngleAxis::new(-30.0, 30.0, 0.3).unwrap();
        assert_eq!(a.count(), 201);
        assert_eq!(a.nearest(-15.0), 50);
        assert_eq!(a.index_span(-0.3, 0.3), Some((99, 101)));
        assert_eq!(a.index_span(40.0, 50.0), None);
        assert!(AngleAxis::new(1.0, 1.0, 0.1).is_err());
        assert!(AngleAxis::new(0.0, 1.0, 0.0).is_err());
        let b = AngleAxis::new(0.0, 1.0, 0.4).unwrap();
        assert_eq!(b.count(), 3);
        assert!(!b.contains(0.9));
    }

    #[test]
    fn kernel_shape() {
        assert_eq!(kernel_power(0.0), 1.0);
        assert!((kernel_power(1.0) - 0.25).abs() < 1e-12);
        assert!((kernel_power(1.0 + 1e-7) - 0.25).abs() < 1e-6);
        for n in 2..=4 {
            assert!(kernel_power(n as f64) < 1e-30);
        }
        assert!(kernel_power(0.5) < 1.0 && kernel_power(0.5) > kernel_power(1.0));
        assert_eq!(kernel_power(-0.3), kernel_power(0.3));
    }

    #[test]
    fn empty_scene_reads_noise_floor() {
        let s = scenario(vec![], &[]);
        let spec = beat_spectrum(&s, (0.0, 0.0), Polarization::V, NoiseModel::Floor).unwrap();
        assert!(spec
            .iter()
            .all(|&v| (v - s.config.noise_floor).abs() < 1e-12));
        let spec = beat_spectrum(&s, (0.0, 0.0), Polarization::H, NoiseModel::None).unwrap();
        assert!(spec.iter().all(|&v| v == f64::NEG_INFINITY));
    }

    #[test]
    fn boresight_scatterer_peaks_at_its_bin() {
        let e = -3.5;
        let amp = amplitude_for(e, 2.5);
        let s = scenario(
            vec![Scatterer::clutter(
                "c",
                Position::new(0.0, 2.5, 0.0),
                ScatteringMatrix::new(amp, amp),
            )],
            &[],
        );
        let spec = beat_spectrum(&s, (0.0, 0.0), Polarization::V, NoiseModel::None).unwrap();
        let (k, v) =
            spec.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |b, (k, &v)| if v > b.1 { (k, v) } else { b },
            );
        assert_eq!(k, s.grid.range_axis.range_to_bin(2.5).unwrap());
        assert_eq!(k, 33);
        assert!((v - e).abs() <= 0.1, "{v}");
    }

    #[test]
    fn equal_contributions_add_three_db() {
        let amp = amplitude_for(0.0, 3.0);
        let one = scenario(
            vec![Scatterer::clutter(
                "a",
                Position::new(0.0, 3.0, 0.0),
                ScatteringMatrix::new(amp, amp),
            )],
            &[],
        );
        let two = scenario(
            vec![
                Scatterer::clutter(
                    "a",
                    Position::new(0.0, 3.0, 0.0),
                    ScatteringMatrix::new(amp, amp),
                ),
                Scatterer::clutter(
                    "b",
                    Position::new(0.0, 3.0, 0.0),
                    ScatteringMatrix::new(amp, amp),
                ),
            ],
            &[],
        );
        let k = one.grid.range_axis.range_to_bin(3.0).unwrap();
        let a = beat_spectrum(&one, (0.0, 0.0), Polarization::V, NoiseModel::None).unwrap()[k];
        let b = beat_spectrum(&two, (0.0, 0.0), Polarization::V, NoiseModel::None).unwrap()[k];
        assert!((b - a - 10.0 * 2f64.log10()).abs() < 1e-9);
        assert!((b - a - 3.01).abs() < 0.001);
    }

    #[test]
    fn direction_outside_grid_is_rejected() {
        let s = scenario(vec![], &[]);
        assert!(matches!(
            beat_spectrum(&s, (10.0, 0.0), Polarization::V, NoiseModel::None),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn pure_depolarizer_dominates_vh() {
        let s = scenario(
            vec![Scatterer::sensor(
                "s",
                Position::new(0.0, 2.0, 0.0),
                ScatteringMatrix::new(0.0, 1.0),
                ScatteringMatrix::new(1.0, 0.1),
            )],
            &[("s", SensorState::On)],
        );
        let img = build_image(&s, NoiseModel::Seeded(1)).unwrap();
        assert!(img.vh.max() > img.vv.max());
    }

    #[test]
    fn build_matches_beat_spectrum_and_is_deterministic() {
        let s = scenario(
            vec![Scatterer::clutter(
                "c",
                Direction::new(1.0, 2.1, 4.0).to_position(),
                ScatteringMatrix::new(0.3, 0.02),
            )],
            &[],
        );
        let a = build_image(&s, NoiseModel::Seeded(9)).unwrap();
        let b = build_image(&s, NoiseModel::Seeded(9)).unwrap();
        assert_eq!(a, b);
        let c = build_image(&s, NoiseModel::Seeded(10)).unwrap();
        assert_ne!(a.vh, c.vh);
        let (i, j) = (5, 27);
        let spec = beat_spectrum(
            &s,
            (s.grid.theta.value(i), s.grid.phi.value(j)),
            Polarization::H,
            NoiseModel::Seeded(9),
        )
        .unwrap();
        for (k, v) in spec.iter().enumerate() {
            assert_eq!(a.vh.get(i, j, k), *v as f32);
        }
    }

    #[test]
    fn window_max() {
        let g = grid((0.0, 3.0, 1.0), (0.0, 3.0, 1.0), 5);
        let mut f = Field3::filled(g.shape(), -7.0);
        let full = Window::from_indices(&g, [0, 0, 0], [3, 3, 4]);
        assert_eq!(
            image_max_in_window(&f, &g, &full).unwrap(),
            (-7.0, [0, 0, 0])
        );
        f.set(2, 1, 3, 4.5);
        assert_eq!(
            image_max_in_window(&f, &g, &full).unwrap(),
            (4.5, [2, 1, 3])
        );
        let sub = Window::from_indices(&g, [0, 0, 0], [1, 3, 4]);
        assert_eq!(
            image_max_in_window(&f, &g, &sub).unwrap(),
            (-7.0, [0, 0, 0])
        );
        let outside = Window::new((10.0, 12.0), (0.0, 1.0), (0.0, 1.0));
        assert!(matches!(
            image_max_in_window(&f, &g, &outside),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn image_rejects_mismatched_fields() {
        let g = grid((0.0, 3.0, 1.0), (0.0, 3.0, 1.0), 5);
        let ok = Field3::filled(g.shape(), 0.0);
        let bad = Field3::filled((4, 4, 6), 0.0);
        assert!(PolarimetricImage::new(g, ok.clone(), bad).is_err());
        let mut nan = ok.clone();
        nan.set(0, 0, 0, f32::NAN);
        assert!(PolarimetricImage::new(g, ok, nan).is_err());
    }

    #[test]
    fn depositing_in_parts_equals_all_at_once() {
        let axis = RangeAxis::new(100, 0.075, 0.0).unwrap();
        let returns = [(-3.0, 2.51), (-10.0, 2.55), (1.5, 4.0), (-20.0, 2.43)];
        let mut all = RangeSpectrum::new(axis);
        for (l, r) in returns {
            all.deposit(l, r);
        }
        let mut merged = RangeSpectrum::new(axis);
        for (l, r) in returns.iter().rev() {
            let mut one = RangeSpectrum::new(axis);
            one.deposit(*l, *r);
            merged.merge(&one);
        }
        for (a, b) in all.power().iter().zip(merged.power()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
    }
}
