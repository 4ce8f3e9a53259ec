//! Per-sensor readings: highest echo level per polarization in the ON and
//! OFF scenarios and the resulting dynamic range.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::imaging::{image_max_in_window, PolarimetricImage, ScanGrid, Window};
use crate::isolines::{cluster_regions, extract_isolines, IsolineSet, Linkage, Region};
use crate::radar::Polarization;
use crate::scene::{direction_of, Direction, Scenario};

/// Table row for one sensor. Levels in dB, range in metres.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorReading {
    pub sensor_id: String,
    pub range: f64,
    pub e_max_vv_on: f64,
    pub e_max_vv_off: f64,
    pub delta_vv: f64,
    pub e_max_vh_on: f64,
    pub e_max_vh_off: f64,
    pub delta_vh: f64,
}

/// Matching tolerance between a region centroid and a sensor's expected
/// position, in grid units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub theta_steps: f64,
    pub phi_steps: f64,
    pub range_bins: f64,
}

impl Default for Gate {
    fn default() -> Self {
        Self {
            theta_steps: 3.0,
            phi_steps: 3.0,
            range_bins: 3.0,
        }
    }
}

/// Sensor id with its expected position as seen from the radar.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedSensor {
    pub id: String,
    pub direction: Direction,
}

pub fn expected_sensors(scenario: &Scenario) -> Result<Vec<ExpectedSensor>> {
    scenario
        .sensors()
        .map(|s| {
            Ok(ExpectedSensor {
                id: s.id.clone(),
                direction: direction_of(s.position)?,
            })
        })
        .collect()
}

/// Matched region indices for one sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RegionMatch {
    pub on: Option<usize>,
    pub off: Option<usize>,
}

fn nearest_within_gate(
    regions: &[Region],
    sensor: &ExpectedSensor,
    grid: &ScanGrid,
    gate: Gate,
) -> Option<usize> {
    let d = sensor.direction;
    regions
        .iter()
        .enumerate()
        .filter_map(|(n, r)| {
            let (t, p, rr) = r.centroid();
            let dt = (t - d.theta).abs() / grid.theta.step;
            let dp = (p - d.phi).abs() / grid.phi.step;
            let dr = (rr - d.range).abs() / grid.range_axis.bin_width;
            (dt <= gate.theta_steps && dp <= gate.phi_steps && dr <= gate.range_bins)
                .then_some((n, dt * dt + dp * dp + dr * dr))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(n, _)| n)
}

fn assign(
    regions: &[Region],
    sensors: &[ExpectedSensor],
    grid: &ScanGrid,
    gate: Gate,
) -> Result<Vec<Option<usize>>> {
    let mut owner: BTreeMap<usize, &str> = BTreeMap::new();
    let mut out = Vec::with_capacity(sensors.len());
    for s in sensors {
        let m = nearest_within_gate(regions, s, grid, gate);
        if let Some(r) = m {
            if let Some(first) = owner.insert(r, &s.id) {
                return Err(Error::Ambiguous {
                    first: first.to_string(),
                    second: s.id.clone(),
                    region: regions[r].id.clone(),
                });
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Associate each sensor with its nearest ON and OFF region within `gate`.
/// Sensors with nothing in range get `None` (e.g. a sub-threshold state).
pub fn match_regions(
    on_regions: &[Region],
    off_regions: &[Region],
    sensors: &[ExpectedSensor],
    grid: &ScanGrid,
    gate: Gate,
) -> Result<BTreeMap<String, RegionMatch>> {
    let mut ids = BTreeSet::new();
    for s in sensors {
        if !ids.insert(&s.id) {
            return Err(Error::validation(format!("sensor `{}` listed twice", s.id)));
        }
    }
    for (n, a) in sensors.iter().enumerate() {
        if sensors[n + 1..].iter().any(|b| b.direction == a.direction) {
            return Err(Error::validation(format!(
                "sensor `{}` shares its expected position with another sensor",
                a.id
            )));
        }
    }
    let on = assign(on_regions, sensors, grid, gate)?;
    let off = assign(off_regions, sensors, grid, gate)?;
    Ok(sensors
        .iter()
        .zip(on.into_iter().zip(off))
        .map(|(s, (on, off))| (s.id.clone(), RegionMatch { on, off }))
        .collect())
}

/// Highest level inside `window` in each image and their absolute
/// difference: `(e_on, e_off, |e_on - e_off|)`.
pub fn dynamic_range(
    on_image: &PolarimetricImage,
    off_image: &PolarimetricImage,
    window: &Window,
    polarization: Polarization,
) -> Result<(f64, f64, f64)> {
    if !on_image.grid.same_samples(&off_image.grid) {
        return Err(Error::validation("ON and OFF images use different grids"));
    }
    let grid = &on_image.grid;
    let (e_on, _) = image_max_in_window(on_image.field(polarization), grid, window)?;
    let (e_off, _) = image_max_in_window(off_image.field(polarization), grid, window)?;
    Ok((e_on, e_off, (e_on - e_off).abs()))
}

/// Processing parameters shared by both scenarios of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessingOptions {
    pub min_threshold: f64,
    pub levels: Vec<f64>,
    pub linkage: Linkage,
    pub gate: Gate,
}

impl Default for ProcessingOptions {
    fn default() -> Self {
        Self {
            min_threshold: -10.0,
            levels: crate::isolines::default_levels(-10.0, &[]),
            linkage: Linkage::default(),
            gate: Gate::default(),
        }
    }
}

/// An image with its isolines and regions for both polarizations.
#[derive(Debug, Clone)]
pub struct ProcessedScenario {
    pub sensors: Vec<ExpectedSensor>,
    pub image: PolarimetricImage,
    pub isolines_vv: IsolineSet,
    pub isolines_vh: IsolineSet,
    pub regions_vv: Vec<Region>,
    pub regions_vh: Vec<Region>,
}

impl ProcessedScenario {
    pub fn process(
        sensors: Vec<ExpectedSensor>,
        image: PolarimetricImage,
        options: &ProcessingOptions,
    ) -> Result<Self> {
        let run = |pol| -> Result<(IsolineSet, Vec<Region>)> {
            let set = extract_isolines(&image, pol, &options.levels, options.min_threshold)?;
            let regions = cluster_regions(&set, image.field(pol), &image.grid, options.linkage)?;
            Ok((set, regions))
        };
        let (isolines_vv, regions_vv) = run(Polarization::V)?;
        let (isolines_vh, regions_vh) = run(Polarization::H)?;
        Ok(Self {
            sensors,
            image,
            isolines_vv,
            isolines_vh,
            regions_vv,
            regions_vh,
        })
    }

    pub fn regions(&self, pol: Polarization) -> &[Region] {
        match pol {
            Polarization::V => &self.regions_vv,
            Polarization::H => &self.regions_vh,
        }
    }

    pub fn isolines(&self, pol: Polarization) -> &IsolineSet {
        match pol {
            Polarization::V => &self.isolines_vv,
            Polarization::H => &self.isolines_vh,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Sorted by range.
    pub readings: Vec<SensorReading>,
    /// Sensors without any matched region, in either state, for at least one
    /// polarization.
    pub unmatched: Vec<String>,
}

/// Measurement window for one sensor and polarization: the union of its
/// matched ON and OFF regions, or a box of `gate` size around the expected
/// position when neither state produced isolines there.
pub fn measurement_window(
    matched: RegionMatch,
    on_regions: &[Region],
    off_regions: &[Region],
    sensor: &ExpectedSensor,
    grid: &ScanGrid,
    gate: Gate,
) -> (Window, bool) {
    let on = matched.on.map(|n| on_regions[n].search_window(grid));
    let off = matched.off.map(|n| off_regions[n].search_window(grid));
    match (on, off) {
        (Some(a), Some(b)) => (a.union(&b), true),
        (Some(w), None) | (None, Some(w)) => (w, true),
        (None, None) => {
            let d = sensor.direction;
            let half = (
                gate.theta_steps * grid.theta.step,
                gate.phi_steps * grid.phi.step,
                gate.range_bins * grid.range_axis.bin_width,
            );
            (Window::around(d.theta, d.phi, d.range, half), false)
        }
    }
}

/// One reading per sensor from an ON and an OFF scenario on the same grid.
pub fn report(on: &ProcessedScenario, off: &ProcessedScenario, gate: Gate) -> Result<Report> {
    let grid = on.image.grid;
    if !grid.same_samples(&off.image.grid) {
        return Err(Error::validation(format!(
            "grid mismatch: ON {:?} vs OFF {:?}",
            grid.shape(),
            off.image.grid.shape()
        )));
    }
    let on_ids: BTreeSet<_> = on.sensors.iter().map(|s| &s.id).collect();
    let off_ids: BTreeSet<_> = off.sensors.iter().map(|s| &s.id).collect();
    if let Some(id) = on_ids.symmetric_difference(&off_ids).next() {
        return Err(Error::validation(format!(
            "sensor `{id}` appears in only one scenario"
        )));
    }

    let mut per_pol = Vec::new();
    for pol in Polarization::BOTH {
        let m = match_regions(on.regions(pol), off.regions(pol), &on.sensors, &grid, gate)?;
        per_pol.push((pol, m));
    }

    let mut readings = Vec::with_capacity(on.sensors.len());
    let mut unmatched = Vec::new();
    for sensor in &on.sensors {
        let mut values = [(0.0, 0.0, 0.0); 2];
        let mut range = sensor.direction.range;
        let mut matched_all = true;
        for (slot, (pol, matches)) in per_pol.iter().enumerate() {
            let (window, matched) = measurement_window(
                matches[&sensor.id],
                on.regions(*pol),
                off.regions(*pol),
                sensor,
                &grid,
                gate,
            );
            matched_all &= matched;
            values[slot] = dynamic_range(&on.image, &off.image, &window, *pol)?;
            if *pol == Polarization::H {
                let (_, at) = image_max_in_window(on.image.field(*pol), &grid, &window)?;
                range = grid.range_axis.bin_to_range(at[2]);
            }
        }
        if !matched_all {
            unmatched.push(sensor.id.clone());
        }
        let [(vv_on, vv_off, dvv), (vh_on, vh_off, dvh)] = values;
        readings.push(SensorReading {
            sensor_id: sensor.id.clone(),
            range,
            e_max_vv_on: vv_on,
            e_max_vv_off: vv_off,
            delta_vv: dvv,
            e_max_vh_on: vh_on,
            e_max_vh_off: vh_off,
            delta_vh: dvh,
        });
    }
    readings.sort_by(|a, b| {
        a.range
            .total_cmp(&b.range)
            .then(a.sensor_id.cmp(&b.sensor_id))
    });
    Ok(Report {
        readings,
        unmatched,
    })
}
