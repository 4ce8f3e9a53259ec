//! Checks against the scenario files shipped in `scenarios/`.

use std::path::PathBuf;

use isoscan::analysis::{expected_sensors, ExpectedSensor, Gate};
use isoscan::isolines::default_levels;
use isoscan::{
    build_image, cluster_regions, extract_isolines, image_max_in_window, match_regions, IsolineSet,
    Linkage, NoiseModel, PolarimetricImage, Polarization, Scenario, Window,
};

fn load(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name);
    Scenario::load(path).unwrap()
}

fn scan(name: &str) -> (Scenario, PolarimetricImage) {
    let s = load(name);
    let img = build_image(&s, NoiseModel::Seeded(2024)).unwrap();
    (s, img)
}

fn sensor(s: &Scenario, id: &str) -> ExpectedSensor {
    expected_sensors(s)
        .unwrap()
        .into_iter()
        .find(|e| e.id == id)
        .unwrap()
}

fn window(img: &PolarimetricImage, e: &ExpectedSensor) -> Window {
    let g = img.grid;
    let d = e.direction;
    Window::around(
        d.theta,
        d.phi,
        d.range,
        (
            3.0 * g.theta.step,
            3.0 * g.phi.step,
            3.0 * g.range_axis.bin_width,
        ),
    )
}

fn isolines_in(set: &IsolineSet, img: &PolarimetricImage, w: &Window) -> usize {
    set.isolines
        .iter()
        .filter(|iso| {
            let r = img.grid.range_axis.bin_to_range(iso.range_bin);
            iso.vertices.iter().any(|&(t, p)| w.contains(t, p, r))
        })
        .count()
}

fn vh_isolines(img: &PolarimetricImage) -> IsolineSet {
    extract_isolines(img, Polarization::H, &default_levels(-10.0, &[]), -10.0).unwrap()
}

#[test]
fn sensors_are_depolarizing_and_states_match_file_names() {
    for (name, state) in [
        ("scenario1_all_off.toml", "OFF"),
        ("scenario2_all_on.toml", "ON"),
    ] {
        let s = load(name);
        assert_eq!(s.sensors().count(), 4);
        for sc in s.sensors() {
            assert!(sc.is_depolarizing(), "{}", sc.id);
            assert_eq!(s.state_of(&sc.id).to_string(), state);
        }
    }
    let ranges: Vec<f64> = expected_sensors(&load("scenario2_all_on.toml"))
        .unwrap()
        .iter()
        .map(|e| e.direction.range)
        .collect();
    for (r, want) in ranges.iter().zip([2.5, 3.6, 4.5, 5.8]) {
        assert!((r - want).abs() < 1e-9);
    }
}

#[test]
fn sensor3_on_vh_peak() {
    let (s, img) = scan("scenario2_all_on.toml");
    let (v, _) = image_max_in_window(&img.vh, &img.grid, &window(&img, &sensor(&s, "s3"))).unwrap();
    assert!((v - 1.1).abs() <= 0.2, "{v}");
}

#[test]
fn sensor2_off_vh_peak() {
    let (s, img) = scan("scenario1_all_off.toml");
    let (v, _) = image_max_in_window(&img.vh, &img.grid, &window(&img, &sensor(&s, "s2"))).unwrap();
    assert!((v + 17.3).abs() <= 0.2, "{v}");
}

#[test]
fn off_state_vh_has_no_isolines_at_sensors_2_and_3() {
    let (s, img) = scan("scenario1_all_off.toml");
    let set = vh_isolines(&img);
    assert_eq!(isolines_in(&set, &img, &window(&img, &sensor(&s, "s2"))), 0);
    assert_eq!(isolines_in(&set, &img, &window(&img, &sensor(&s, "s3"))), 0);
    assert!(isolines_in(&set, &img, &window(&img, &sensor(&s, "s1"))) > 0);
    assert!(isolines_in(&set, &img, &window(&img, &sensor(&s, "s4"))) > 0);
}

#[test]
fn on_state_vh_has_isolines_at_every_sensor() {
    let (s, img) = scan("scenario2_all_on.toml");
    let set = vh_isolines(&img);
    for e in expected_sensors(&s).unwrap() {
        assert!(isolines_in(&set, &img, &window(&img, &e)) >= 1, "{}", e.id);
    }
}

#[test]
fn on_state_vh_forms_four_regions_at_sensor_ranges() {
    let (s, img) = scan("scenario2_all_on.toml");
    let set = vh_isolines(&img);
    let regions = cluster_regions(&set, &img.vh, &img.grid, Linkage::default()).unwrap();
    assert_eq!(regions.len(), 4);
    let axis = img.grid.range_axis;
    let mut peaks: Vec<usize> = regions.iter().map(|r| r.peak_index[2]).collect();
    peaks.sort_unstable();
    for (k, want) in peaks.iter().zip([2.5, 3.6, 4.5, 5.8]) {
        assert!(k.abs_diff(axis.range_to_bin(want).unwrap()) <= 1);
    }

    let matches = match_regions(
        &regions,
        &regions,
        &expected_sensors(&s).unwrap(),
        &img.grid,
        Gate::default(),
    )
    .unwrap();
    let mut used: Vec<usize> = matches.values().map(|m| m.on.unwrap()).collect();
    used.sort_unstable();
    assert_eq!(used, vec![0, 1, 2, 3]);
}

#[test]
fn clustering_ignores_isoline_order() {
    let (_, img) = scan("scenario2_all_on.toml");
    let set = vh_isolines(&img);
    let key = |set: &IsolineSet| {
        let mut parts: Vec<Vec<(usize, String)>> =
            cluster_regions(set, &img.vh, &img.grid, Linkage::default())
                .unwrap()
                .into_iter()
                .map(|r| {
                    let mut m: Vec<_> = r
                        .members
                        .iter()
                        .map(|&n| {
                            (
                                set.isolines[n].range_bin,
                                format!("{:?}", set.isolines[n].vertices),
                            )
                        })
                        .collect();
                    m.sort();
                    m
                })
                .collect();
        parts.sort();
        parts
    };
    let mut shuffled = set.clone();
    shuffled.isolines.reverse();
    let n = shuffled.isolines.len();
    shuffled.isolines.rotate_left(n / 3);
    assert_eq!(key(&set), key(&shuffled));
}

#[test]
fn empty_scene_has_no_isolines() {
    let mut s = load("scenario2_all_on.toml");
    s.scatterers.clear();
    s.sensor_states.clear();
    s.config.noise_floor = -25.0;
    let img = build_image(&s, NoiseModel::Floor).unwrap();
    assert!(vh_isolines(&img).isolines.is_empty());
}
