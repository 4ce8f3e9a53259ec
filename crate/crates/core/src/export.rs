//! CSV codecs for isolines, regions, image slices and sensor reports, plus
//! the aligned text table printed by the report command.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::analysis::SensorReading;
use crate::error::{Error, Result};
use crate::imaging::{ScanGrid, Window};
use crate::isolines::{Isoline, IsolineSet, Region, Slice};
use crate::radar::{Polarization, RangeAxis};

#[derive(Debug, Serialize, Deserialize)]
struct IsolineRow {
    polarization: String,
    #[serde(rename = "level_dB")]
    level_db: f64,
    range_m: f64,
    vertex_index: usize,
    theta_deg: f64,
    phi_deg: f64,
    closed: bool,
}

pub fn write_isolines_csv(set: &IsolineSet, axis: &RangeAxis, w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for iso in &set.isolines {
        for (n, &(theta, phi)) in iso.vertices.iter().enumerate() {
            wtr.serialize(IsolineRow {
                polarization: set.polarization.channel().into(),
                level_db: iso.level,
                range_m: axis.bin_to_range(iso.range_bin),
                vertex_index: n,
                theta_deg: theta,
                phi_deg: phi,
                closed: iso.closed,
            })?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Isolines back from CSV; a new isoline starts at every `vertex_index` 0.
pub fn read_isolines_csv(r: impl Read, axis: &RangeAxis) -> Result<Vec<(Polarization, Isoline)>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out: Vec<(Polarization, Isoline)> = Vec::new();
    for (line, row) in rdr.deserialize::<IsolineRow>().enumerate() {
        let row = row?;
        let pol: Polarization = row.polarization.parse()?;
        if row.vertex_index == 0 {
            let bin = axis
                .range_to_bin(row.range_m)
                .map_err(|e| Error::validation(format!("isoline row {}: {e}", line + 1)))?;
            out.push((
                pol,
                Isoline {
                    level: row.level_db,
                    range_bin: bin,
                    vertices: Vec::new(),
                    closed: row.closed,
                },
            ));
        }
        let (_, iso) = out.last_mut().ok_or_else(|| {
            Error::validation("isoline CSV must start with vertex_index 0".to_string())
        })?;
        if row.vertex_index != iso.vertices.len() {
            return Err(Error::validation(format!(
                "isoline row {}: vertex_index {} out of sequence",
                line + 1,
                row.vertex_index
            )));
        }
        iso.vertices.push((row.theta_deg, row.phi_deg));
    }
    Ok(out)
}

/// Flat view of a [`Region`] as stored in CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub region_id: String,
    pub polarization: String,
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub phi_min_deg: f64,
    pub phi_max_deg: f64,
    pub range_min_m: f64,
    pub range_max_m: f64,
    pub peak_db: f64,
    pub peak_theta_deg: f64,
    pub peak_phi_deg: f64,
    pub peak_range_m: f64,
    pub peak_theta_idx: usize,
    pub peak_phi_idx: usize,
    pub peak_bin: usize,
    pub isolines: usize,
}

impl RegionRecord {
    pub fn from_region(region: &Region, pol: Polarization, grid: &ScanGrid) -> Self {
        let [i, j, k] = region.peak_index;
        Self {
            region_id: region.id.clone(),
            polarization: pol.channel().into(),
            theta_min_deg: region.bbox.theta.0,
            theta_max_deg: region.bbox.theta.1,
            phi_min_deg: region.bbox.phi.0,
            phi_max_deg: region.bbox.phi.1,
            range_min_m: region.bbox.range.0,
            range_max_m: region.bbox.range.1,
            peak_db: region.peak_value,
            peak_theta_deg: grid.theta.value(i),
            peak_phi_deg: grid.phi.value(j),
            peak_range_m: grid.range_axis.bin_to_range(k),
            peak_theta_idx: i,
            peak_phi_idx: j,
            peak_bin: k,
            isolines: region.members.len(),
        }
    }

    pub fn bbox(&self) -> Window {
        Window::new(
            (self.theta_min_deg, self.theta_max_deg),
            (self.phi_min_deg, self.phi_max_deg),
            (self.range_min_m, self.range_max_m),
        )
    }
}

pub fn write_regions_csv(
    regions: &[Region],
    pol: Polarization,
    grid: &ScanGrid,
    w: impl Write,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in regions {
        wtr.serialize(RegionRecord::from_region(r, pol, grid))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_regions_csv(r: impl Read) -> Result<Vec<RegionRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

#[derive(Debug, Serialize, Deserialize)]
struct SliceRow {
    theta_deg: f64,
    phi_deg: f64,
    value_db: f64,
}

/// One row per (θ, φ) sample, θ-major.
pub fn write_slice_csv(slice: &Slice, w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for i in 0..slice.rows() {
        for j in 0..slice.cols() {
            wtr.serialize(SliceRow {
                theta_deg: slice.theta.value(i),
                phi_deg: slice.phi.value(j),
                value_db: slice.get(i, j),
            })?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Values of a slice CSV with the number of distinct θ samples (rows).
pub fn read_slice_csv(r: impl Read) -> Result<(usize, usize, Vec<f64>)> {
    let mut rdr = csv::Reader::from_reader(r);
    let rows: Vec<SliceRow> = rdr.deserialize().collect::<Result<_, _>>()?;
    let Some(first) = rows.first() else {
        return Err(Error::validation("empty slice CSV"));
    };
    let cols = rows
        .iter()
        .take_while(|r| r.theta_deg == first.theta_deg)
        .count();
    if !rows.len().is_multiple_of(cols) {
        return Err(Error::validation("slice CSV is not rectangular"));
    }
    Ok((
        rows.len() / cols,
        cols,
        rows.into_iter().map(|r| r.value_db).collect(),
    ))
}

pub const REPORT_HEADER: [&str; 8] = [
    "sensor", "R_m", "evv_on", "evv_off", "dvv", "evh_on", "evh_off", "dvh",
];

pub fn write_report_csv(readings: &[SensorReading], w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(REPORT_HEADER)?;
    for r in readings {
        let mut rec = vec![r.sensor_id.clone()];
        rec.extend(
            [
                r.range,
                r.e_max_vv_on,
                r.e_max_vv_off,
                r.delta_vv,
                r.e_max_vh_on,
                r.e_max_vh_off,
                r.delta_vh,
            ]
            .iter()
            .map(|v| format!("{v:.1}")),
        );
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_report_csv(r: impl Read) -> Result<Vec<SensorReading>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(REPORT_HEADER) {
        return Err(Error::validation(format!(
            "unexpected report header {header:?}"
        )));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i].trim().parse().map_err(|_| {
                Error::validation(format!(
                    "report column {} is not a number: `{}`",
                    REPORT_HEADER[i], &rec[i]
                ))
            })
        };
        out.push(SensorReading {
            sensor_id: rec[0].to_string(),
            range: num(1)?,
            e_max_vv_on: num(2)?,
            e_max_vv_off: num(3)?,
            delta_vv: num(4)?,
            e_max_vh_on: num(5)?,
            e_max_vh_off: num(6)?,
            delta_vh: num(7)?,
        });
    }
    Ok(out)
}

/// Aligned text rendering of a report, laid out like a two-polarization
/// dynamic-range table.
pub fn format_report_table(readings: &[SensorReading]) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "{:<10} {:>6} | {:^24} | {:^24}\n",
        "sensor", "R (m)", "e_max VV (dB)", "e_max VH (dB)"
    ));
    s.push_str(&format!(
        "{:<10} {:>6} | {:>7} {:>7} {:>8} | {:>7} {:>7} {:>8}\n",
        "", "", "ON", "OFF", "dVV", "ON", "OFF", "dVH"
    ));
    s.push_str(&format!("{}\n", "-".repeat(71)));
    for r in readings {
        s.push_str(&format!(
            "{:<10} {:>6.1} | {:>7.1} {:>7.1} {:>8.1} | {:>7.1} {:>7.1} {:>8.1}\n",
            r.sensor_id,
            r.range,
            r.e_max_vv_on,
            r.e_max_vv_off,
            r.delta_vv,
            r.e_max_vh_on,
            r.e_max_vh_off,
            r.delta_vh
        ));
    }
    s
}
