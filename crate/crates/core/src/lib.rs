//! Simulation and processing toolkit for reading depolarizing chipless
//! sensors with a mechanically scanned FM-CW radar.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`scene`] describes the interrogated environment (sensors with ON/OFF
//!    states, clutter, antenna patterns) and the reader configuration.
//! 2. [`imaging`] scans the beam over an elevation/azimuth grid and builds a
//!    3D polarimetric image (VV and VH echo level in dB over θ, φ, R).
//! 3. [`isolines`] extracts constant-level contours from every range slice
//!    above a minimum threshold and clusters them into regions.
//! 4. [`analysis`] matches regions to sensors and computes the dynamic range
//!    between ON and OFF states for each polarization.
//!
//! [`voxel`], [`export`] and [`render`] hold the file codecs and the raster
//! output used by the command-line front end.

pub mod analysis;
pub mod calibrate;
pub mod error;
pub mod export;
pub mod imaging;
pub mod isolines;
pub mod noise;
pub mod radar;
pub mod render;
pub mod scene;
pub mod voxel;

pub use analysis::{dynamic_range, match_regions, report, ProcessedScenario, SensorReading};
pub use error::{Error, Result};
pub use imaging::{
    beat_spectrum, build_image, image_max_in_window, AngleAxis, Field3, NoiseModel,
    PolarimetricImage, ScanGrid, Window,
};
pub use isolines::{
    cluster_regions, extract_isolines, extract_slice_contours, Isoline, IsolineSet, Linkage,
    Region, Slice,
};
pub use radar::{echo_level, range_resolution, Polarization, RadarConfig, RangeAxis};
pub use scene::{
    antenna_gain, direction_of, effective_rcs, Direction, Position, Scatterer, ScattererKind,
    ScatteringMatrix, Scenario, SensorState,
};
