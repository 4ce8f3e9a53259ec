//! The interrogated environment: polarimetric point scatterers, antenna
//! patterns, geometry and the scenario file schema.
//!
//! Coordinates: the radar sits at the origin with its boresight along +y.
//! Elevation θ is measured from the horizontal (x, y) plane towards +z,
//! azimuth φ in the horizontal plane from +y towards +x.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{AngleAxis, ScanGrid};
use crate::radar::{Polarization, RadarConfig};

/// Gaussian (parabolic in dB) mainlobe without sidelobes; exactly 3 dB down
/// at `hpbw / 2`.
pub fn antenna_gain(peak_gain: f64, hpbw: f64, off_axis: f64) -> f64 {
    let u = 2.0 * off_axis / hpbw;
    peak_gain - 3.0 * u * u
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 3]> for Position {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }
}

impl From<Position> for [f64; 3] {
    fn from(p: Position) -> Self {
        [p.x, p.y, p.z]
    }
}

impl Position {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Spherical coordinates as seen from the radar: degrees, degrees, metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
    pub range: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64, range: f64) -> Self {
        Self { theta, phi, range }
    }

    pub fn to_position(&self) -> Position {
        let (t, p) = (self.theta.to_radians(), self.phi.to_radians());
        Position {
            x: self.range * t.cos() * p.sin(),
            y: self.range * t.cos() * p.cos(),
            z: self.range * t.sin(),
        }
    }
}

/// Unit vector pointing along elevation `theta` and azimuth `phi` (degrees).
pub fn unit_vector(theta: f64, phi: f64) -> [f64; 3] {
    let (t, p) = (theta.to_radians(), phi.to_radians());
    [t.cos() * p.sin(), t.cos() * p.cos(), t.sin()]
}

/// Angle in degrees between two unit vectors.
pub fn angle_between(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let cx = a[1] * b[2] - a[2] * b[1];
    let cy = a[2] * b[0] - a[0] * b[2];
    let cz = a[0] * b[1] - a[1] * b[0];
    (cx * cx + cy * cy + cz * cz).sqrt().atan2(dot).to_degrees()
}

pub fn direction_of(position: Position) -> Result<Direction> {
    let range = position.norm();
    if !range.is_finite() || range <= 0.0 {
        return Err(Error::Domain(format!(
            "direction of a zero or non-finite vector: {position:?}"
        )));
    }
    let horizontal = position.x.hypot(position.y);
    Ok(Direction {
        theta: position.z.atan2(horizontal).to_degrees(),
        phi: position.x.atan2(position.y).to_degrees(),
        range,
    })
}

/// Linear amplitudes of the co- and cross-polarized returns under V
/// illumination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringMatrix {
    #[serde(rename = "vv")]
    pub s_vv: f64,
    #[serde(rename = "vh")]
    pub s_vh: f64,
}

impl ScatteringMatrix {
    pub fn new(s_vv: f64, s_vh: f64) -> Self {
        Self { s_vv, s_vh }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.s_vv) || !ok(self.s_vh) {
            return Err(Error::validation(
                "scattering amplitudes must be finite and >= 0",
            ));
        }
        if self.s_vv == 0.0 && self.s_vh == 0.0 {
            return Err(Error::validation("scattering matrix has no return"));
        }
        Ok(())
    }

    /// Radar cross section in dBsm for the given receive channel; `-inf`
    /// when the amplitude is zero.
    pub fn rcs(&self, pol: Polarization) -> f64 {
        let s = match pol {
            Polarization::V => self.s_vv,
            Polarization::H => self.s_vh,
        };
        20.0 * s.log10()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.s_vv * k, self.s_vh * k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScattererKind {
    Sensor,
    Clutter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorState {
    On,
    Off,
}

impl fmt::Display for SensorState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SensorState::On => "ON",
            SensorState::Off => "OFF",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scatterer {
    pub id: String,
    pub position: Position,
    pub kind: ScattererKind,
    pub state_on: ScatteringMatrix,
    /// Equal to `state_on` for clutter.
    pub state_off: ScatteringMatrix,
}

impl Scatterer {
    pub fn sensor(
        id: impl Into<String>,
        position: Position,
        on: ScatteringMatrix,
        off: ScatteringMatrix,
    ) -> Self {
        Self {
            id: id.into(),
            position,
            kind: ScattererKind::Sensor,
            state_on: on,
            state_off: off,
        }
    }

    pub fn clutter(id: impl Into<String>, position: Position, matrix: ScatteringMatrix) -> Self {
        Self {
            id: id.into(),
            position,
            kind: ScattererKind::Clutter,
            state_on: matrix,
            state_off: matrix,
        }
    }

    pub fn is_sensor(&self) -> bool {
        self.kind == ScattererKind::Sensor
    }

    pub fn matrix(&self, state: SensorState) -> &ScatteringMatrix {
        match (self.kind, state) {
            (ScattererKind::Sensor, SensorState::Off) => &self.state_off,
            _ => &self.state_on,
        }
    }

    /// ON state mostly cross-polarized, OFF state mostly co-polarized.
    pub fn is_depolarizing(&self) -> bool {
        self.is_sensor()
            && self.state_on.s_vh > self.state_on.s_vv
            && self.state_off.s_vv > self.state_off.s_vh
    }

    pub fn validate(&self) -> Result<()> {
        let norm = self.position.norm();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::validation(format!(
                "scatterer `{}` must not sit at the radar origin",
                self.id
            )));
        }
        self.state_on
            .validate()
            .and_then(|_| self.state_off.validate())
            .map_err(|e| Error::validation(format!("scatterer `{}`: {e}", self.id)))
    }
}

/// RCS (dBsm) of `scatterer` in the given state and receive channel.
/// Clutter ignores `state`.
pub fn effective_rcs(scatterer: &Scatterer, state: SensorState, rx_pol: Polarization) -> f64 {
    scatterer.matrix(state).rcs(rx_pol)
}

/// A complete simulation input: reader, scan grid, scene and the state of
/// every sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub config: RadarConfig,
    pub grid: ScanGrid,
    pub scatterers: Vec<Scatterer>,
    pub sensor_states: BTreeMap<String, SensorState>,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        config: RadarConfig,
        grid: ScanGrid,
        scatterers: Vec<Scatterer>,
        sensor_states: BTreeMap<String, SensorState>,
    ) -> Result<Self> {
        let s = Self {
            name: name.into(),
            config,
            grid,
            scatterers,
            sensor_states,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.grid.validate()?;
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.scatterers {
            s.validate()?;
            if !seen.insert(s.id.as_str()) {
                return Err(Error::validation(format!(
                    "duplicate scatterer id `{}`",
                    s.id
                )));
            }
            match (s.is_sensor(), self.sensor_states.contains_key(&s.id)) {
                (true, false) => {
                    return Err(Error::validation(format!("sensor `{}` has no state", s.id)))
                }
                (false, true) => {
                    return Err(Error::validation(format!(
                        "clutter `{}` must not carry a state",
                        s.id
                    )))
                }
                _ => {}
            }
        }
        if let Some(id) = self
            .sensor_states
            .keys()
            .find(|id| !seen.contains(id.as_str()))
        {
            return Err(Error::validation(format!(
                "state given for unknown sensor `{id}`"
            )));
        }
        Ok(())
    }

    pub fn sensors(&self) -> impl Iterator<Item = &Scatterer> {
        self.scatterers.iter().filter(|s| s.is_sensor())
    }

    /// State of a scatterer; clutter reports `On`.
    pub fn state_of(&self, id: &str) -> SensorState {
        self.sensor_states
            .get(id)
            .copied()
            .unwrap_or(SensorState::On)
    }

    /// Copy of this scenario with every sensor forced into `state`.
    pub fn with_all_sensors(&self, state: SensorState) -> Self {
        let mut s = self.clone();
        for v in s.sensor_states.values_mut() {
            *v = state;
        }
        s
    }

    pub fn parse_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Schema {
            path: "<root>".into(),
            message: e.to_string(),
        })?;
        let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Schema {
                path,
                message: e.into_inner().message().trim().to_string(),
            }
        })?;
        file.into_scenario()
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        let file = ScenarioFile::from(self);
        toml::to_string_pretty(&file).expect("scenario serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    name: String,
    #[serde(default)]
    radar: RadarConfig,
    grid: GridSpec,
    #[serde(default)]
    states: BTreeMap<String, SensorState>,
    #[serde(rename = "scatterer", default)]
    scatterers: Vec<ScattererSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    theta: AngleAxis,
    phi: AngleAxis,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScattererSpec {
    id: String,
    kind: ScattererKind,
    position: Position,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    on: Option<ScatteringMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    off: Option<ScatteringMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<ScatteringMatrix>,
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario> {
        self.radar.validate()?;
        let mut scatterers = Vec::with_capacity(self.scatterers.len());
        for (i, spec) in self.scatterers.into_iter().enumerate() {
            let schema = |message: &str| Error::Schema {
                path: format!("scatterer[{i}]"),
                message: message.to_string(),
            };
            let s = match spec.kind {
                ScattererKind::Sensor => {
                    if spec.matrix.is_some() {
                        return Err(schema("sensors take `on` and `off`, not `matrix`"));
                    }
                    let on = spec.on.ok_or_else(|| schema("sensor is missing `on`"))?;
                    let off = spec.off.ok_or_else(|| schema("sensor is missing `off`"))?;
                    Scatterer::sensor(spec.id, spec.position, on, off)
                }
                ScattererKind::Clutter => {
                    if spec.on.is_some() || spec.off.is_some() {
                        return Err(schema("clutter takes `matrix`, not `on`/`off`"));
                    }
                    let m = spec
                        .matrix
                        .ok_or_else(|| schema("clutter is missing `matrix`"))?;
                    Scatterer::clutter(spec.id, spec.position, m)
                }
            };
            scatterers.push(s);
        }
        let grid = ScanGrid::new(self.grid.theta, self.grid.phi, self.radar.range_axis())?;
        Scenario::new(self.name, self.radar, grid, scatterers, self.states)
    }
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        Self {
            name: s.name.clone(),
            radar: s.config.clone(),
            grid: GridSpec {
                theta: s.grid.theta,
                phi: s.grid.phi,
            },
            states: s.sensor_states.clone(),
            scatterers: s
                .scatterers
                .iter()
                .map(|sc| {
                    let sensor = sc.is_sensor();
                    ScattererSpec {
                        id: sc.id.clone(),
                        kind: sc.kind,
                        position: sc.position,
                        on: sensor.then_some(sc.state_on),
                        off: sensor.then_some(sc.state_off),
                        matrix: (!sensor).then_some(sc.state_on),
                    }
                })
                .collect(),
        }
    }
}
