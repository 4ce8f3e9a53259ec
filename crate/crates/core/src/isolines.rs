//! Constant-level contours of the 3D image.
//!
//! Each (θ, φ) slice at a fixed range bin is contoured with marching
//! squares; contours are stacked across range bins rather than stitched into
//! surfaces. Stacked contours are then grouped into regions by single-linkage
//! clustering of their bounding boxes.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::{image_max_in_window, AngleAxis, Field3, PolarimetricImage, ScanGrid, Window};
use crate::radar::Polarization;

/// Polylines with fewer vertices are treated as speckle and dropped by
/// [`extract_isolines`].
pub const MIN_VERTICES: usize = 3;

/// 2D field over (θ rows, φ columns) with the angle axes that place it.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    pub theta: AngleAxis,
    pub phi: AngleAxis,
}

fn unit_axis(n: usize) -> AngleAxis {
    AngleAxis {
        start: 0.0,
        stop: n.saturating_sub(1) as f64,
        step: 1.0,
    }
}

impl Slice {
    /// Slice on unit axes: row `i` sits at θ = i, column `j` at φ = j.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::validation(format!(
                "slice {rows}x{cols} cannot hold {} values",
                values.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            values,
            theta: unit_axis(rows),
            phi: unit_axis(cols),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let values = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Self::new(rows, cols, values).expect("dimensions are consistent")
    }

    pub fn with_axes(mut self, theta: AngleAxis, phi: AngleAxis) -> Self {
        self.theta = theta;
        self.phi = phi;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }
}

/// Polyline of constant level in one range slice. Vertices are (θ°, φ°);
/// a closed isoline repeats its first vertex at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Isoline {
    pub level: f64,
    pub range_bin: usize,
    pub vertices: Vec<(f64, f64)>,
    pub closed: bool,
}

impl Isoline {
    /// (θ min, θ max, φ min, φ max) of the vertices.
    pub fn angular_bounds(&self) -> (f64, f64, f64, f64) {
        self.vertices.iter().fold(
            (
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
            ),
            |(t0, t1, p0, p1), &(t, p)| (t0.min(t), t1.max(t), p0.min(p), p1.max(p)),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsolineSet {
    pub polarization: Polarization,
    pub min_threshold: f64,
    pub levels: Vec<f64>,
    pub isolines: Vec<Isoline>,
}

impl IsolineSet {
    pub fn count_at(&self, level: f64) -> usize {
        self.isolines.iter().filter(|l| l.level == level).count()
    }
}

/// Levels from `min_threshold` up to 0 dB in 2 dB steps, merged with
/// `extra`, sorted and deduplicated.
pub fn default_levels(min_threshold: f64, extra: &[f64]) -> Vec<f64> {
    let mut levels = vec![min_threshold];
    let mut n = 1;
    loop {
        let l = min_threshold + 2.0 * n as f64;
        if l > 0.0 {
            break;
        }
        levels.push(l);
        n += 1;
    }
    levels.extend_from_slice(extra);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    levels
}

// Cell edges: 0 top, 1 right, 2 bottom, 3 left.
const TOP: u8 = 0;
const RIGHT: u8 = 1;
const BOTTOM: u8 = 2;
const LEFT: u8 = 3;

/// Edge pairs joined inside one cell. Corner bits: top-left 8, top-right 4,
/// bottom-right 2, bottom-left 1. Saddles (5, 10) depend on the cell centre.
fn cell_segments(case: u8, centre_inside: bool) -> &'static [(u8, u8)] {
    match case {
        1 | 14 => &[(LEFT, BOTTOM)],
        2 | 13 => &[(BOTTOM, RIGHT)],
        3 | 12 => &[(LEFT, RIGHT)],
        4 | 11 => &[(TOP, RIGHT)],
        6 | 9 => &[(TOP, BOTTOM)],
        7 | 8 => &[(LEFT, TOP)],
        5 if centre_inside => &[(LEFT, TOP), (BOTTOM, RIGHT)],
        5 => &[(TOP, RIGHT), (LEFT, BOTTOM)],
        10 if centre_inside => &[(TOP, RIGHT), (LEFT, BOTTOM)],
        10 => &[(LEFT, TOP), (BOTTOM, RIGHT)],
        _ => &[],
    }
}

struct EdgeIndex {
    rows: usize,
    cols: usize,
}

impl EdgeIndex {
    fn horizontal_count(&self) -> usize {
        self.rows * (self.cols - 1)
    }

    /// Edge between (i, j) and (i, j + 1).
    fn horizontal(&self, i: usize, j: usize) -> usize {
        i * (self.cols - 1) + j
    }

    /// Edge between (i, j) and (i + 1, j).
    fn vertical(&self, i: usize, j: usize) -> usize {
        self.horizontal_count() + i * self.cols + j
    }

    fn cell_edge(&self, i: usize, j: usize, side: u8) -> usize {
        match side {
            TOP => self.horizontal(i, j),
            RIGHT => self.vertical(i, j + 1),
            BOTTOM => self.horizontal(i + 1, j),
            _ => self.vertical(i, j),
        }
    }

    /// Grid endpoints of an edge.
    fn endpoints(&self, e: usize) -> ((usize, usize), (usize, usize)) {
        let nh = self.horizontal_count();
        if e < nh {
            let (i, j) = (e / (self.cols - 1), e % (self.cols - 1));
            ((i, j), (i, j + 1))
        } else {
            let e = e - nh;
            let (i, j) = (e / self.cols, e % self.cols);
            ((i, j), (i + 1, j))
        }
    }
}

/// Where the level crosses an edge, in fractional (row, col) coordinates.
/// With a `-inf` endpoint the vertex sits on the finite, inside node.
fn edge_vertex(slice: &Slice, edges: &EdgeIndex, e: usize, level: f64) -> (f64, f64) {
    let ((i0, j0), (i1, j1)) = edges.endpoints(e);
    let a = slice.get(i0, j0);
    let b = slice.get(i1, j1);
    let t = if a == f64::NEG_INFINITY {
        1.0
    } else if b == f64::NEG_INFINITY {
        0.0
    } else {
        (level - a) / (b - a)
    };
    (
        i0 as f64 + t * (i1 as f64 - i0 as f64),
        j0 as f64 + t * (j1 as f64 - j0 as f64),
    )
}

/// Contour polylines of `slice` at `level` in fractional (row, col)
/// coordinates, with their closed flag.
pub fn contour_paths(slice: &Slice, level: f64) -> Vec<(Vec<(f64, f64)>, bool)> {
    let (rows, cols) = (slice.rows, slice.cols);
    if rows < 2 || cols < 2 || !level.is_finite() {
        return Vec::new();
    }
    let edges = EdgeIndex { rows, cols };
    let inside = |v: f64| v >= level;

    let mut links: HashMap<usize, [usize; 2]> = HashMap::new();
    let mut order: Vec<usize> = Vec::new();
    let mut link = |a: usize, b: usize, links: &mut HashMap<usize, [usize; 2]>| {
        for (from, to) in [(a, b), (b, a)] {
            let slot = links.entry(from).or_insert_with(|| {
                order.push(from);
                [usize::MAX; 2]
            });
            if slot[0] == usize::MAX {
                slot[0] = to;
            } else {
                slot[1] = to;
            }
        }
    };

    for i in 0..rows - 1 {
        for j in 0..cols - 1 {
            let tl = slice.get(i, j);
            let tr = slice.get(i, j + 1);
            let br = slice.get(i + 1, j + 1);
            let bl = slice.get(i + 1, j);
            let case = (inside(tl) as u8) << 3
                | (inside(tr) as u8) << 2
                | (inside(br) as u8) << 1
                | inside(bl) as u8;
            if case == 0 || case == 15 {
                continue;
            }
            let centre_inside = (case == 5 || case == 10) && inside((tl + tr + br + bl) / 4.0);
            for &(s0, s1) in cell_segments(case, centre_inside) {
                link(
                    edges.cell_edge(i, j, s0),
                    edges.cell_edge(i, j, s1),
                    &mut links,
                );
            }
        }
    }

    let mut visited: HashSet<usize> = HashSet::with_capacity(links.len());
    let degree = |e: usize, links: &HashMap<usize, [usize; 2]>| {
        if links[&e][1] == usize::MAX {
            1
        } else {
            2
        }
    };
    let mut starts: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&e| degree(e, &links) == 1)
        .collect();
    starts.sort_unstable();
    let mut rest: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&e| degree(e, &links) == 2)
        .collect();
    rest.sort_unstable();

    let mut paths = Vec::new();
    for (start, closed) in starts
        .into_iter()
        .map(|e| (e, false))
        .chain(rest.into_iter().map(|e| (e, true)))
    {
        if visited.contains(&start) {
            continue;
        }
        let mut path = vec![edge_vertex(slice, &edges, start, level)];
        visited.insert(start);
        let (mut prev, mut cur) = (usize::MAX, start);
        loop {
            let [a, b] = links[&cur];
            let next = if a != prev && !visited.contains(&a) {
                a
            } else if b != usize::MAX && b != prev && !visited.contains(&b) {
                b
            } else {
                break;
            };
            visited.insert(next);
            path.push(edge_vertex(slice, &edges, next, level));
            prev = cur;
            cur = next;
        }
        if closed {
            path.push(path[0]);
        }
        paths.push((path, closed));
    }
    paths
}

/// Marching-squares isolines of one slice. Open polylines end on the slice
/// border; all others are closed. `range_bin` is recorded on each isoline.
pub fn extract_slice_contours(slice: &Slice, level: f64, range_bin: usize) -> Vec<Isoline> {
    contour_paths(slice, level)
        .into_iter()
        .map(|(path, closed)| Isoline {
            level,
            range_bin,
            vertices: path
                .into_iter()
                .map(|(r, c)| {
                    (
                        slice.theta.start + r * slice.theta.step,
                        slice.phi.start + c * slice.phi.step,
                    )
                })
                .collect(),
            closed,
        })
        .collect()
}

/// Isolines of one polarization for every range bin and level, in (bin,
/// level) order. Slices whose maximum stays below a level produce nothing
/// for that level.
pub fn extract_isolines(
    image: &PolarimetricImage,
    polarization: Polarization,
    levels: &[f64],
    min_threshold: f64,
) -> Result<IsolineSet> {
    if !min_threshold.is_finite() {
        return Err(Error::validation("minimum threshold must be finite"));
    }
    if let Some(l) = levels
        .iter()
        .find(|l| !l.is_finite() || **l < min_threshold)
    {
        return Err(Error::validation(format!(
            "level {l} dB is below the minimum threshold {min_threshold} dB"
        )));
    }
    if levels.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::validation("levels must be sorted ascending"));
    }
    let field = image.field(polarization);
    let grid = image.grid;
    let bins = grid.range_axis.bin_count;
    let per_bin: Vec<Vec<Isoline>> = (0..bins)
        .into_par_iter()
        .map(|k| {
            let slice = field
                .slice(k)
                .expect("bin in range")
                .with_axes(grid.theta, grid.phi);
            let top = slice.max();
            levels
                .iter()
                .filter(|&&l| l <= top)
                .flat_map(|&l| extract_slice_contours(&slice, l, k))
                .filter(|iso| iso.vertices.len() >= MIN_VERTICES)
                .collect()
        })
        .collect();
    Ok(IsolineSet {
        polarization,
        min_threshold,
        levels: levels.to_vec(),
        isolines: per_bin.into_iter().flatten().collect(),
    })
}

/// Linkage distances for region clustering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linkage {
    pub theta_steps: f64,
    pub phi_steps: f64,
    pub range_bins: usize,
}

impl Default for Linkage {
    fn default() -> Self {
        Self {
            theta_steps: 2.0,
            phi_steps: 2.0,
            range_bins: 3,
        }
    }
}

/// Connected group of isolines, typically one scatterer.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: String,
    /// Indices into the isoline set.
    pub members: Vec<usize>,
    /// Extent of member vertices in angle and of member bin centres in range.
    pub bbox: Window,
    pub bins: (usize, usize),
    pub peak_value: f64,
    /// Grid indices (θ, φ, bin) of the peak.
    pub peak_index: [usize; 3],
}

impl Region {
    pub fn centroid(&self) -> (f64, f64, f64) {
        let b = &self.bbox;
        (
            (b.theta.0 + b.theta.1) / 2.0,
            (b.phi.0 + b.phi.1) / 2.0,
            (b.range.0 + b.range.1) / 2.0,
        )
    }

    /// The bounding box widened to the enclosing grid samples.
    pub fn search_window(&self, grid: &ScanGrid) -> Window {
        let snap = |axis: &AngleAxis, (lo, hi): (f64, f64)| {
            let a = axis.position(lo).floor().max(0.0) as usize;
            let b = (axis.position(hi).ceil().max(0.0) as usize).min(axis.count() - 1);
            (axis.value(a), axis.value(b.max(a)))
        };
        Window {
            theta: snap(&grid.theta, self.bbox.theta),
            phi: snap(&grid.phi, self.bbox.phi),
            range: self.bbox.range,
        }
    }

    /// Whether two regions' boxes intersect.
    pub fn overlaps(&self, other: &Region) -> bool {
        let hit = |a: (f64, f64), b: (f64, f64)| a.0 <= b.1 && b.0 <= a.1;
        hit(self.bbox.theta, other.bbox.theta)
            && hit(self.bbox.phi, other.bbox.phi)
            && hit(self.bbox.range, other.bbox.range)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Single-linkage clustering of isolines whose bounding boxes lie within the
/// linkage distances; each region's peak is read from `field` over its box.
pub fn cluster_regions(
    set: &IsolineSet,
    field: &Field3,
    grid: &ScanGrid,
    linkage: Linkage,
) -> Result<Vec<Region>> {
    let n = set.isolines.len();
    let bounds: Vec<_> = set.isolines.iter().map(Isoline::angular_bounds).collect();
    let gap = |a0: f64, a1: f64, b0: f64, b1: f64| (b0 - a1).max(a0 - b1).max(0.0);
    let max_dt = linkage.theta_steps * grid.theta.step + 1e-9;
    let max_dp = linkage.phi_steps * grid.phi.step + 1e-9;

    let mut by_bin: Vec<usize> = (0..n).collect();
    by_bin.sort_by_key(|&i| set.isolines[i].range_bin);
    let mut parent: Vec<usize> = (0..n).collect();
    for (pos, &a) in by_bin.iter().enumerate() {
        let bin_a = set.isolines[a].range_bin;
        for &b in &by_bin[pos + 1..] {
            if set.isolines[b].range_bin - bin_a > linkage.range_bins {
                break;
            }
            let (ta0, ta1, pa0, pa1) = bounds[a];
            let (tb0, tb1, pb0, pb1) = bounds[b];
            if gap(ta0, ta1, tb0, tb1) <= max_dt && gap(pa0, pa1, pb0, pb1) <= max_dp {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }

    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }

    let mut regions = Vec::with_capacity(groups.len());
    for members in groups.into_values() {
        let (mut t0, mut t1, mut p0, mut p1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        let (mut k0, mut k1) = (usize::MAX, 0);
        for &m in &members {
            let (a, b, c, d) = bounds[m];
            t0 = t0.min(a);
            t1 = t1.max(b);
            p0 = p0.min(c);
            p1 = p1.max(d);
            k0 = k0.min(set.isolines[m].range_bin);
            k1 = k1.max(set.isolines[m].range_bin);
        }
        let axis = grid.range_axis;
        let mut region = Region {
            id: String::new(),
            members,
            bbox: Window::new(
                (t0, t1),
                (p0, p1),
                (axis.bin_to_range(k0), axis.bin_to_range(k1)),
            ),
            bins: (k0, k1),
            peak_value: f64::NEG_INFINITY,
            peak_index: [0; 3],
        };
        let (v, idx) = image_max_in_window(field, grid, &region.search_window(grid))?;
        region.peak_value = v;
        region.peak_index = idx;
        regions.push(region);
    }
    regions.sort_by(|a, b| {
        (a.bins.0, a.bbox.theta.0, a.bbox.phi.0)
            .partial_cmp(&(b.bins.0, b.bbox.theta.0, b.bbox.phi.0))
            .expect("finite bounds")
            .then(a.members.cmp(&b.members))
    });
    for (n, r) in regions.iter_mut().enumerate() {
        r.id = format!("R{n}");
    }
    Ok(regions)
}

/// Pairs (VV region, VH region) whose boxes intersect.
pub fn overlapping_regions(vv: &[Region], vh: &[Region]) -> Vec<(usize, usize)> {
    vv.iter()
        .enumerate()
        .flat_map(|(a, ra)| {
            vh.iter()
                .enumerate()
                .filter(move |(_, rb)| ra.overlaps(rb))
                .map(move |(b, _)| (a, b))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_has_no_contours() {
        let s = Slice::from_fn(8, 8, |_, _| -4.0);
        assert!(extract_slice_contours(&s, -3.0, 0).is_empty());
        // everything inside: no crossings either
        assert!(extract_slice_contours(&s, -5.0, 0).is_empty());
    }

    #[test]
    fn step_field_gives_one_open_midline() {
        let s = Slice::from_fn(4, 4, |_, j| if j < 2 { -20.0 } else { 0.0 });
        let lines = extract_slice_contours(&s, -10.0, 3);
        assert_eq!(lines.len(), 1);
        let l = &lines[0];
        assert!(!l.closed);
        assert_eq!(l.range_bin, 3);
        assert_eq!(l.vertices.len(), 4);
        for (n, &(theta, phi)) in l.vertices.iter().enumerate() {
            assert_eq!(phi, 1.5);
            assert_eq!(theta, n as f64);
        }
    }

    #[test]
    fn single_node_gives_closed_diamond() {
        let s = Slice::from_fn(3, 3, |i, j| if (i, j) == (1, 1) { 1.0 } else { -1.0 });
        let lines = extract_slice_contours(&s, 0.0, 0);
        assert_eq!(lines.len(), 1);
        let l = &lines[0];
        assert!(l.closed);
        assert_eq!(l.vertices.len(), 5);
        assert_eq!(l.vertices.first(), l.vertices.last());
        let mut pts: Vec<_> = l.vertices[..4].to_vec();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pts, vec![(0.5, 1.0), (1.0, 0.5), (1.0, 1.5), (1.5, 1.0)]);
    }

    #[test]
    fn saddle_follows_cell_average() {
        // corners: tl 1, tr -1, br 1, bl -1 -> case 10
        let joined = Slice::new(2, 2, vec![1.0, -1.0, -1.0, 1.2]).unwrap();
        let split = Slice::new(2, 2, vec![1.0, -1.0, -1.0, 0.8]).unwrap();
        // average 0.05 >= 0: the inside diagonal is connected, so the outside
        // corners are each cut off
        let a = contour_paths(&joined, 0.0);
        let b = contour_paths(&split, 0.0);
        assert_eq!(a.len(), 2);
        assert_eq!(b.len(), 2);
        let cuts_top_right = |paths: &Vec<(Vec<(f64, f64)>, bool)>| {
            paths.iter().any(|(p, _)| {
                p.iter().any(|&(r, c)| r == 0.0 && c > 0.0 && c < 1.0)
                    && p.iter().any(|&(r, c)| c == 1.0 && r > 0.0 && r < 1.0)
            })
        };
        assert!(cuts_top_right(&a));
        assert!(!cuts_top_right(&b));
    }

    #[test]
    fn negative_infinity_counts_as_below() {
        let s = Slice::from_fn(3, 3, |i, j| {
            if (i, j) == (1, 1) {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        });
        let lines = extract_slice_contours(&s, -10.0, 0);
        assert_eq!(lines.len(), 1);
        assert!(lines[0]
            .vertices
            .iter()
            .all(|v| v.0.is_finite() && v.1.is_finite()));
    }

    #[test]
    fn axes_place_vertices_in_degrees() {
        let s = Slice::from_fn(4, 4, |_, j| if j < 2 { -20.0 } else { 0.0 }).with_axes(
            AngleAxis::new(-3.0, 0.0, 1.0).unwrap(),
            AngleAxis::new(10.0, 10.9, 0.3).unwrap(),
        );
        let l = &extract_slice_contours(&s, -10.0, 0)[0];
        assert!((l.vertices[0].1 - 10.45).abs() < 1e-12);
        assert_eq!(l.vertices[0].0, -3.0);
    }

    #[test]
    fn default_level_schedule() {
        assert_eq!(
            default_levels(-10.0, &[]),
            vec![-10.0, -8.0, -6.0, -4.0, -2.0, 0.0]
        );
        assert_eq!(
            default_levels(-3.0, &[-2.0, 5.0]),
            vec![-3.0, -2.0, -1.0, 5.0]
        );
        assert_eq!(default_levels(2.0, &[]), vec![2.0]);
    }
}
