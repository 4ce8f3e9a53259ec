//! Fits sensor scattering amplitudes so simulated peak echo levels land on
//! target values.
//!
//! For every sensor, state and polarization the image value at the voxel
//! nearest to the sensor is a power sum of the sensor's own return, other
//! scatterers and the mean noise floor. The own return scales with the
//! squared amplitude, so the amplitude is solved in closed form and the
//! fit is repeated to settle the coupling between sensors.

use crate::error::{Error, Result};
use crate::imaging::{beat_spectrum, NoiseModel};
use crate::radar::Polarization;
use crate::scene::{direction_of, Scatterer, ScatteringMatrix, Scenario, SensorState};

/// Target peak levels (dB) for one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorTarget {
    pub id: String,
    pub vv_on: f64,
    pub vv_off: f64,
    pub vh_on: f64,
    pub vh_off: f64,
}

impl SensorTarget {
    fn level(&self, state: SensorState, pol: Polarization) -> f64 {
        match (state, pol) {
            (SensorState::On, Polarization::V) => self.vv_on,
            (SensorState::Off, Polarization::V) => self.vv_off,
            (SensorState::On, Polarization::H) => self.vh_on,
            (SensorState::Off, Polarization::H) => self.vh_off,
        }
    }
}

const PASSES: usize = 4;

fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Nearest grid direction and bin of a scatterer.
fn peak_voxel(scenario: &Scenario, s: &Scatterer) -> Result<((f64, f64), usize)> {
    let d = direction_of(s.position)?;
    let g = &scenario.grid;
    let dir = (
        g.theta.value(g.theta.nearest(d.theta)),
        g.phi.value(g.phi.nearest(d.phi)),
    );
    Ok((dir, g.range_axis.range_to_bin(d.range)?))
}

/// Return `scenario` with the ON and OFF matrices of every targeted sensor
/// refitted. Sensor states of the returned scenario are unchanged.
pub fn calibrate(scenario: &Scenario, targets: &[SensorTarget]) -> Result<Scenario> {
    let mut out = scenario.clone();
    for t in targets {
        match out.scatterers.iter().find(|s| s.id == t.id) {
            Some(s) if s.is_sensor() => {}
            _ => {
                return Err(Error::validation(format!(
                    "no sensor `{}` to calibrate",
                    t.id
                )))
            }
        }
    }
    for _ in 0..PASSES {
        for state in [SensorState::On, SensorState::Off] {
            let view = out.with_all_sensors(state);
            let mut fitted = Vec::new();
            for t in targets {
                let idx = view
                    .scatterers
                    .iter()
                    .position(|s| s.id == t.id)
                    .expect("checked");
                let s = &view.scatterers[idx];
                let (dir, bin) = peak_voxel(&view, s)?;
                let current = *s.matrix(state);

                let mut unit = view.clone();
                unit.scatterers = vec![s.clone()];
                let m = ScatteringMatrix::new(1.0, 1.0);
                match state {
                    SensorState::On => unit.scatterers[0].state_on = m,
                    SensorState::Off => unit.scatterers[0].state_off = m,
                }

                let mut amps = [0.0; 2];
                for (slot, pol) in Polarization::BOTH.into_iter().enumerate() {
                    let total =
                        db_to_power(beat_spectrum(&view, dir, pol, NoiseModel::Floor)?[bin]);
                    let own_unit =
                        db_to_power(beat_spectrum(&unit, dir, pol, NoiseModel::None)?[bin]);
                    let amp = match pol {
                        Polarization::V => current.s_vv,
                        Polarization::H => current.s_vh,
                    };
                    let others = total - own_unit * amp * amp;
                    let want = db_to_power(t.level(state, pol));
                    if want.partial_cmp(&others) != Some(std::cmp::Ordering::Greater) {
                        return Err(Error::validation(format!(
                            "sensor `{}` {state} {pol}: target {:.2} dB is below the background there",
                            t.id,
                            t.level(state, pol)
                        )));
                    }
                    amps[slot] = ((want - others) / own_unit).sqrt();
                }
                fitted.push((idx, ScatteringMatrix::new(amps[0], amps[1])));
            }
            for (idx, m) in fitted {
                match state {
                    SensorState::On => out.scatterers[idx].state_on = m,
                    SensorState::Off => out.scatterers[idx].state_off = m,
                }
            }
        }
    }
    out.validate()?;
    Ok(out)
}
