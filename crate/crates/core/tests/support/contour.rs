//! Brute-force level-set oracle for marching squares on random smooth
//! fields, shared by the contouring tests.

use isoscan::isolines::{contour_paths, Slice};
use proptest::prelude::*;

#[derive(Debug, Clone)]
pub struct Bump {
    row: f64,
    col: f64,
    sigma: f64,
    amp: f64,
}

pub fn bumps(n: usize) -> impl Strategy<Value = Vec<Bump>> {
    let size = n as f64;
    prop::collection::vec(
        (
            -2.0..size + 2.0,
            -2.0..size + 2.0,
            1.2..(size / 3.0),
            -15.0..30.0f64,
        )
            .prop_map(|(row, col, sigma, amp)| Bump {
                row,
                col,
                sigma,
                amp,
            }),
        1..6,
    )
}

pub fn field(n: usize, bumps: &[Bump], padded: bool) -> Slice {
    let raw = |i: usize, j: usize| {
        bumps.iter().fold(-30.0, |acc, b| {
            let d2 = (i as f64 - b.row).powi(2) + (j as f64 - b.col).powi(2);
            acc + b.amp * (-d2 / (2.0 * b.sigma * b.sigma)).exp()
        })
    };
    let low = (0..n * n)
        .map(|k| raw(k / n, k % n))
        .fold(f64::INFINITY, f64::min)
        - 10.0;
    Slice::from_fn(n, n, |i, j| {
        if padded && (i == 0 || j == 0 || i == n - 1 || j == n - 1) {
            low
        } else {
            raw(i, j)
        }
    })
}

pub fn inside_polygon(p: (f64, f64), poly: &[(f64, f64)]) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (ri, ci) = poly[i];
        let (rj, cj) = poly[j];
        if (ri > p.0) != (rj > p.0) && p.1 < ci + (p.0 - ri) * (cj - ci) / (rj - ri) {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Level in the open interior of the field's value range.
fn level_in(s: &Slice, u: f64) -> f64 {
    let lo = s.values().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.max();
    lo + (0.05 + 0.9 * u) * (hi - lo)
}

fn is_integral(x: f64) -> bool {
    x == x.round()
}

/// Every vertex sits on a cell edge whose endpoints straddle `level` and
/// interpolates back to it; consecutive vertices share a cell.
fn check_vertices(
    s: &Slice,
    level: f64,
    paths: &[(Vec<(f64, f64)>, bool)],
) -> Result<(), TestCaseError> {
    for (path, closed) in paths {
        prop_assert!(path.len() >= 2);
        if *closed {
            prop_assert_eq!(path.first(), path.last());
        }
        for w in path.windows(2) {
            prop_assert!((w[0].0 - w[1].0).abs() <= 1.0 && (w[0].1 - w[1].1).abs() <= 1.0);
        }
        for &(r, c) in path {
            let (a, b, t) = if is_integral(r) && is_integral(c) {
                let v = s.get(r as usize, c as usize);
                (v, v, 0.0)
            } else if is_integral(r) {
                let j = c.floor();
                (
                    s.get(r as usize, j as usize),
                    s.get(r as usize, j as usize + 1),
                    c - j,
                )
            } else {
                prop_assert!(is_integral(c), "vertex ({r}, {c}) is not on an edge");
                let i = r.floor();
                (
                    s.get(i as usize, c as usize),
                    s.get(i as usize + 1, c as usize),
                    r - i,
                )
            };
            prop_assert!(
                (a >= level) != (b >= level) || a == level || b == level,
                "edge ({a}, {b}) does not straddle {level}"
            );
            let v = a + t * (b - a);
            prop_assert!(
                (v - level).abs() <= 1e-9,
                "interpolated {v} vs level {level}"
            );
        }
    }
    Ok(())
}

/// Above-level components under the contouring's own connectivity.
fn components_above(s: &Slice, level: f64) -> Vec<Vec<(usize, usize)>> {
    let (rows, cols) = (s.rows(), s.cols());
    let mut seen = vec![false; rows * cols];
    let mut out = Vec::new();
    for start in 0..rows * cols {
        if seen[start] || s.values()[start] < level {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut comp = Vec::new();
        while let Some(k) = stack.pop() {
            let (i, j) = (k / cols, k % cols);
            comp.push((i, j));
            let mut push = |i: usize, j: usize| {
                let n = i * cols + j;
                if !seen[n] && s.values()[n] >= level {
                    seen[n] = true;
                    stack.push(n);
                }
            };
            if i > 0 {
                push(i - 1, j);
            }
            if i + 1 < rows {
                push(i + 1, j);
            }
            if j > 0 {
                push(i, j - 1);
            }
            if j + 1 < cols {
                push(i, j + 1);
            }
            // Diagonal neighbours joined through a saddle cell whose
            // average is inside.
            for (di, dj) in [(-1i64, -1i64), (-1, 1), (1, -1), (1, 1)] {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni < 0 || nj < 0 || ni >= rows as i64 || nj >= cols as i64 {
                    continue;
                }
                let (ni, nj) = (ni as usize, nj as usize);
                let (a, b) = (s.get(i, nj), s.get(ni, j));
                let mean = (s.get(i, j) + s.get(ni, nj) + a + b) / 4.0;
                if a < level && b < level && mean >= level {
                    push(ni, nj);
                }
            }
        }
        out.push(comp);
    }
    out
}

fn enclosure(
    s: &Slice,
    level: f64,
    paths: &[(Vec<(f64, f64)>, bool)],
) -> Result<(), TestCaseError> {
    let (rows, cols) = (s.rows(), s.cols());
    let near_contour = |i: usize, j: usize| {
        paths
            .iter()
            .flat_map(|(p, _)| p)
            .any(|&(r, c)| (r - i as f64).abs() <= 1.0 && (c - j as f64).abs() <= 1.0)
    };
    for comp in components_above(s, level) {
        let on_border = comp
            .iter()
            .any(|&(i, j)| i == 0 || j == 0 || i == rows - 1 || j == cols - 1);
        if on_border {
            prop_assert!(
                comp.iter().any(|&(i, j)| near_contour(i, j)),
                "border component of {} nodes has no contour nearby",
                comp.len()
            );
        } else {
            for &(i, j) in &comp {
                if s.get(i, j) == level {
                    continue;
                }
                let p = (i as f64, j as f64);
                prop_assert!(
                    paths
                        .iter()
                        .any(|(poly, closed)| *closed && inside_polygon(p, poly)),
                    "node ({i}, {j}) above {level} is not enclosed"
                );
            }
        }
    }
    Ok(())
}

/// With a low border every contour is closed and even-odd membership
/// reproduces thresholding exactly. Returns the enclosed node count.
fn exact_membership(s: &Slice, level: f64) -> Result<usize, TestCaseError> {
    let paths = contour_paths(s, level);
    check_vertices(s, level, &paths)?;
    prop_assert!(paths.iter().all(|(_, closed)| *closed));
    let mut count = 0;
    for i in 0..s.rows() {
        for j in 0..s.cols() {
            let v = s.get(i, j);
            if v == level {
                continue;
            }
            let p = (i as f64, j as f64);
            let crossings = paths
                .iter()
                .filter(|(poly, _)| inside_polygon(p, poly))
                .count();
            let enclosed = crossings % 2 == 1;
            prop_assert_eq!(
                enclosed,
                v > level,
                "node ({}, {}) value {} level {}",
                i,
                j,
                v,
                level
            );
            count += enclosed as usize;
        }
    }
    Ok(count)
}

pub fn run_case(n: usize, b: &[Bump], u: f64) -> Result<(), TestCaseError> {
    let s = field(n, b, false);
    let level = level_in(&s, u);
    let paths = contour_paths(&s, level);
    check_vertices(&s, level, &paths)?;
    enclosure(&s, level, &paths)?;

    let padded = field(n, b, true);
    let inner_lo = (1..n - 1)
        .flat_map(|i| (1..n - 1).map(move |j| (i, j)))
        .map(|(i, j)| padded.get(i, j))
        .fold(f64::INFINITY, f64::min);
    let hi = padded.max();
    let mut last = usize::MAX;
    for k in 0..4 {
        let level = inner_lo + (0.1 + 0.25 * k as f64 + 0.1 * u) * (hi - inner_lo);
        let count = exact_membership(&padded, level)?;
        prop_assert!(count <= last, "raising the level grew the enclosed set");
        last = count;
    }
    Ok(())
}
