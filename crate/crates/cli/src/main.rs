//! `isoscan` command-line front end.
//!
//! Exit codes: 0 success, 1 other failure, 2 validation, 3 decode,
//! 4 analysis mismatch.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use isoscan::analysis::{expected_sensors, ProcessedScenario, ProcessingOptions};
use isoscan::calibrate::{calibrate, SensorTarget};
use isoscan::export;
use isoscan::isolines::{
    cluster_regions, default_levels, extract_isolines, overlapping_regions, Linkage,
};
use isoscan::render::{render_slice, save_png, RenderOptions};
use isoscan::{build_image, voxel, Error, NoiseModel, Polarization, Scenario};

#[derive(Parser)]
#[command(
    name = "isoscan",
    version,
    about = "Polarimetric FM-CW radar scan simulation and isoline analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pol {
    Vv,
    Vh,
}

impl From<Pol> for Polarization {
    fn from(p: Pol) -> Self {
        match p {
            Pol::Vv => Polarization::V,
            Pol::Vh => Polarization::H,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Scan a scenario and write the ISC1 voxel file.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract isolines and regions from a voxel file.
    Isolines {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        pol: Pol,
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        threshold: f64,
        /// Extra levels in dB, added to the default 2 dB schedule.
        #[arg(long, num_args = 1.., allow_hyphen_values = true, value_delimiter = ',')]
        levels: Vec<f64>,
        /// Output directory; defaults to the input's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dynamic-range table from an ON and an OFF voxel file.
    Report {
        #[arg(long)]
        on: PathBuf,
        #[arg(long)]
        off: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        threshold: f64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a range slice or the max projection to PNG.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "vh")]
        pol: Pol,
        #[arg(long, conflicts_with = "maxproj")]
        slice: Option<usize>,
        #[arg(long)]
        maxproj: bool,
        /// Isoline CSV to draw on top.
        #[arg(long)]
        overlay: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        scale: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export one range slice as CSV.
    Slice {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        pol: Pol,
        #[arg(long)]
        bin: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Refit sensor amplitudes so the scan reproduces target peak levels.
    Calibrate {
        #[arg(long)]
        scenario: PathBuf,
        /// Report-format CSV with the target levels.
        #[arg(long)]
        targets: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Raised when the report cannot match every sensor.
#[derive(Debug)]
struct Mismatch(Vec<String>);

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "no isoline region matched sensors {:?}", self.0)
    }
}

impl std::error::Error for Mismatch {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Mismatch>().is_some() {
        return 4;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::Validation(_) | Error::Schema { .. } | Error::Domain(_) | Error::OutOfRange(_),
        ) => 2,
        Some(Error::Decode { .. } | Error::Csv(_)) => 3,
        Some(Error::Ambiguous { .. } | Error::Unmatched(_)) => 4,
        _ => 1,
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("ISOSCAN_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("ISOSCAN_THREADS=`{v}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring worker threads")?;
    }
    Ok(())
}

fn load_image(path: &Path) -> Result<isoscan::PolarimetricImage> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(voxel::decode(&bytes)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn simulate(scenario: &Path, seed: u64, out: &Path) -> Result<()> {
    let scenario = Scenario::load(scenario)?;
    let image = build_image(&scenario, NoiseModel::Seeded(seed))?;
    std::fs::write(out, voxel::encode(&image))
        .with_context(|| format!("writing {}", out.display()))?;
    let (t, p, b) = image.grid.shape();
    println!("grid: {t} theta x {p} phi x {b} bins");
    println!("max VV: {:.2} dB", image.vv.max());
    println!("max VH: {:.2} dB", image.vh.max());
    Ok(())
}

fn isolines(
    input: &Path,
    pol: Polarization,
    threshold: f64,
    extra: &[f64],
    out: Option<&Path>,
) -> Result<()> {
    let image = load_image(input)?;
    if let Some(l) = extra.iter().find(|l| **l < threshold) {
        return Err(Error::Validation(format!(
            "level {l} dB is below the threshold {threshold} dB"
        ))
        .into());
    }
    let levels = default_levels(threshold, extra);
    let set = extract_isolines(&image, pol, &levels, threshold)?;
    let regions = cluster_regions(&set, image.field(pol), &image.grid, Linkage::default())?;

    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => input.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image");
    let tag = pol.channel().to_ascii_lowercase();
    let iso_path = dir.join(format!("{stem}_{tag}_isolines.csv"));
    let reg_path = dir.join(format!("{stem}_{tag}_regions.csv"));
    export::write_isolines_csv(&set, &image.grid.range_axis, create(&iso_path)?)?;
    export::write_regions_csv(&regions, pol, &image.grid, create(&reg_path)?)?;

    for l in &levels {
        println!("level {l:>6.1} dB: {} isolines", set.count_at(*l));
    }
    println!("regions: {}", regions.len());
    println!("isolines -> {}", iso_path.display());
    println!("regions  -> {}", reg_path.display());
    Ok(())
}

fn report(
    on: &Path,
    off: &Path,
    scenario: &Path,
    threshold: f64,
    out: Option<&Path>,
) -> Result<()> {
    let scenario = Scenario::load(scenario)?;
    let sensors = expected_sensors(&scenario)?;
    let on_img = load_image(on)?;
    let off_img = load_image(off)?;
    if !on_img.grid.same_samples(&off_img.grid) {
        return Err(Error::Validation(format!(
            "ON grid {:?} and OFF grid {:?} differ",
            on_img.grid.shape(),
            off_img.grid.shape()
        ))
        .into());
    }
    let options = ProcessingOptions {
        min_threshold: threshold,
        levels: default_levels(threshold, &[]),
        ..Default::default()
    };
    let on_p = ProcessedScenario::process(sensors.clone(), on_img, &options)?;
    let off_p = ProcessedScenario::process(sensors, off_img, &options)?;
    let rep = isoscan::report(&on_p, &off_p, options.gate)?;

    print!("{}", export::format_report_table(&rep.readings));
    for (state, p) in [("ON", &on_p), ("OFF", &off_p)] {
        let shared = overlapping_regions(&p.regions_vv, &p.regions_vh).len();
        println!(
            "{state}: {} VV regions, {} VH regions, {shared} VV/VH overlaps",
            p.regions_vv.len(),
            p.regions_vh.len()
        );
    }
    match out {
        Some(path) => export::write_report_csv(&rep.readings, create(path)?)?,
        None => export::write_report_csv(&rep.readings, std::io::stdout().lock())?,
    }
    if !rep.unmatched.is_empty() {
        return Err(Mismatch(rep.unmatched).into());
    }
    Ok(())
}

fn render(
    input: &Path,
    pol: Polarization,
    slice: Option<usize>,
    maxproj: bool,
    overlay: Option<&Path>,
    scale: u32,
    out: &Path,
) -> Result<()> {
    let image = load_image(input)?;
    let field = image.field(pol);
    let grid = image.grid;
    let plane = match (slice, maxproj) {
        (Some(k), _) => field.slice(k)?,
        (None, _) => field.max_projection(),
    }
    .with_axes(grid.theta, grid.phi);
    let mut lines = Vec::new();
    if let Some(path) = overlay {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        for (p, iso) in export::read_isolines_csv(file, &grid.range_axis)? {
            if p == pol && slice.is_none_or(|k| iso.range_bin == k) {
                lines.push(iso.vertices);
            }
        }
    }
    let img = render_slice(
        &plane,
        &lines,
        RenderOptions {
            scale,
            ..Default::default()
        },
    );
    save_png(&img, out)?;
    println!(
        "{}x{} raster -> {}",
        img.width(),
        img.height(),
        out.display()
    );
    Ok(())
}

fn slice_csv(input: &Path, pol: Polarization, bin: usize, out: &Path) -> Result<()> {
    let image = load_image(input)?;
    let s = image
        .field(pol)
        .slice(bin)?
        .with_axes(image.grid.theta, image.grid.phi);
    export::write_slice_csv(&s, create(out)?)?;
    Ok(())
}

fn calibrate_cmd(scenario: &Path, targets: &Path, out: &Path) -> Result<()> {
    let scenario = Scenario::load(scenario)?;
    let file = File::open(targets).with_context(|| format!("opening {}", targets.display()))?;
    let targets: Vec<SensorTarget> = export::read_report_csv(file)?
        .into_iter()
        .map(|r| SensorTarget {
            id: r.sensor_id,
            vv_on: r.e_max_vv_on,
            vv_off: r.e_max_vv_off,
            vh_on: r.e_max_vh_on,
            vh_off: r.e_max_vh_off,
        })
        .collect();
    let fitted = calibrate(&scenario, &targets)?;
    std::fs::write(out, fitted.to_toml()).with_context(|| format!("writing {}", out.display()))?;
    for s in fitted.sensors() {
        println!(
            "{:<10} on (vv {:.6}, vh {:.6})  off (vv {:.6}, vh {:.6})",
            s.id, s.state_on.s_vv, s.state_on.s_vh, s.state_off.s_vv, s.state_off.s_vh
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Simulate {
            scenario,
            seed,
            out,
        } => simulate(&scenario, seed, &out),
        Command::Isolines {
            input,
            pol,
            threshold,
            levels,
            out,
        } => isolines(&input, pol.into(), threshold, &levels, out.as_deref()),
        Command::Report {
            on,
            off,
            scenario,
            threshold,
            out,
        } => report(&on, &off, &scenario, threshold, out.as_deref()),
        Command::Render {
            input,
            pol,
            slice,
            maxproj,
            overlay,
            scale,
            out,
        } => render(
            &input,
            pol.into(),
            slice,
            maxproj,
            overlay.as_deref(),
            scale,
            &out,
        ),
        Command::Slice {
            input,
            pol,
            bin,
            out,
        } => slice_csv(&input, pol.into(), bin, &out),
        Command::Calibrate {
            scenario,
            targets,
            out,
        } => calibrate_cmd(&scenario, &targets, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
