#![allow(dead_code)]

use std::f64::consts::PI;

use circle_pattern::geometry::curvatures;
use circle_pattern::{generate_hex_disk, PatternWeights, Triangulation};
use rand::seq::SliceRandom;
use rand::Rng;

/// Overlap given to the obtuse edges of the obtuse fixtures.
pub const OBTUSE: f64 = 3.0 * PI / 5.0;
/// Overlap on every other edge of the obtuse fixtures; `cos²` of it must
/// exceed `−cos OBTUSE` for the faces to be constructible.
pub const ACUTE: f64 = PI / 4.0;

/// Square split along 0–2 with right-angle corners.
pub fn quad() -> (Triangulation, PatternWeights) {
    let t = Triangulation::new(vec![[0, 1, 2], [0, 2, 3]], 4).unwrap();
    let mut w = PatternWeights::new(&t);
    for v in 0..4 {
        w.set_boundary_angle(v, PI / 2.0).unwrap();
    }
    (t, w)
}

/// Hex disk with `3π/5` on a face-disjoint set of interior edges and `π/4`
/// everywhere else. For one ring, every other spoke is obtuse.
pub fn obtuse_hex(generations: usize) -> (Triangulation, PatternWeights) {
    let (t, mut w) = generate_hex_disk(generations).unwrap();
    let mut used = vec![false; t.faces().len()];
    for e in 0..t.edges().len() {
        let (u, v) = t.edges()[e];
        let faces = t.edge_faces(e);
        let pick = if generations == 1 {
            u == 0 && v % 2 == 1
        } else {
            (u + v) % 3 == 0
        };
        if pick && faces.len() == 2 && faces.iter().all(|&f| !used[f]) {
            for &f in faces {
                used[f] = true;
            }
            w.set_overlap(&t, u, v, OBTUSE).unwrap();
        } else {
            w.set_overlap(&t, u, v, ACUTE).unwrap();
        }
    }
    (t, w)
}

/// Applies up to `flips` random interior edge flips, keeping every vertex
/// of degree at least three (two on the boundary).
pub fn flip_edges<R: Rng>(t: &Triangulation, flips: usize, rng: &mut R) -> Triangulation {
    let mut faces = t.faces().to_vec();
    let n = t.vertex_count();
    let mut current = t.clone();
    for _ in 0..flips {
        let interior: Vec<usize> = (0..current.edges().len())
            .filter(|&e| !current.is_boundary_edge(e))
            .collect();
        let Some(&e) = interior.choose(rng) else { break };
        let (a, b) = current.edges()[e];
        let [f1, f2] = [current.edge_faces(e)[0], current.edge_faces(e)[1]];
        // orient so f1 holds u→v and f2 holds v→u
        let directed = |f: usize, x: usize, y: usize| {
            let face = faces[f];
            (0..3).any(|i| face[i] == x && face[(i + 1) % 3] == y)
        };
        let (u, v) = if directed(f1, a, b) { (a, b) } else { (b, a) };
        let (f1, f2) = if directed(f1, u, v) { (f1, f2) } else { (f2, f1) };
        let third = |f: usize| *faces[f].iter().find(|&&x| x != u && x != v).unwrap();
        let (w, x) = (third(f1), third(f2));
        if current.edge_id(w, x).is_some() {
            continue;
        }
        let min_degree = |p: usize| if current.is_boundary(p) { 3 } else { 4 };
        if current.neighbors(u).len() < min_degree(u) || current.neighbors(v).len() < min_degree(v) {
            continue;
        }
        let mut next = faces.clone();
        next[f1] = [u, x, w];
        next[f2] = [x, v, w];
        if let Ok(t2) = Triangulation::new(next.clone(), n) {
            faces = next;
            current = t2;
        }
    }
    current
}

/// Random overlaps satisfying the constructibility condition: mostly in
/// `[0, π/4]`, with an occasional obtuse edge when neither adjacent face
/// already has one.
pub fn random_overlaps<R: Rng>(t: &Triangulation, w: &mut PatternWeights, rng: &mut R) {
    let mut used = vec![false; t.faces().len()];
    for e in 0..t.edges().len() {
        let (u, v) = t.edges()[e];
        let faces = t.edge_faces(e);
        let theta = if rng.gen_bool(0.2) && faces.iter().all(|&f| !used[f]) {
            for &f in faces {
                used[f] = true;
            }
            rng.gen_range(PI / 2.0..OBTUSE)
        } else {
            rng.gen_range(0.0..ACUTE)
        };
        w.set_overlap(t, u, v, theta).unwrap();
    }
}

/// Boundary angles copied from `from` by vertex; valid because flips keep
/// the boundary.
pub fn carry_boundary(t: &Triangulation, from: &PatternWeights) -> PatternWeights {
    let mut w = PatternWeights::new(t);
    for &v in t.boundary_cycle() {
        w.set_boundary_angle(v, from.boundary_angle(v).unwrap()).unwrap();
    }
    w
}

/// Central difference of `K_row` with respect to `log r_col`.
pub fn fd_curvature(
    t: &Triangulation,
    w: &PatternWeights,
    log_radii: &[f64],
    row: usize,
    col: usize,
    h: f64,
) -> f64 {
    let mut plus = log_radii.to_vec();
    let mut minus = log_radii.to_vec();
    plus[col] += h;
    minus[col] -= h;
    let kp = curvatures(t, w, &plus).unwrap()[row];
    let km = curvatures(t, w, &minus).unwrap()[row];
    (kp - km) / (2.0 * h)
}

/// Central difference of `Σ K²` with respect to `log r_col`.
pub fn fd_energy(t: &Triangulation, w: &PatternWeights, log_radii: &[f64], col: usize, h: f64) -> f64 {
    let e = |u: &[f64]| curvatures(t, w, u).unwrap().iter().map(|k| k * k).sum::<f64>();
    let mut plus = log_radii.to_vec();
    let mut minus = log_radii.to_vec();
    plus[col] += h;
    minus[col] -= h;
    (e(&plus) - e(&minus)) / (2.0 * h)
}

/// `max_v |r_v / r_0 − 1|`.
pub fn ratio_spread(radii: &[f64]) -> f64 {
    radii.iter().map(|r| (r / radii[0] - 1.0).abs()).fold(0.0, f64::max)
}

/// Largest relative difference between two radius vectors after scaling
/// both to unit first entry.
pub fn scale_free_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| ((x / a[0]) / (y / b[0]) - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Hexagon around an interior edge 0–1; boundary 2..=7 with `2π/3` corners.
pub fn two_interior() -> (Triangulation, PatternWeights) {
    let faces = vec![
        [1, 2, 3],
        [1, 3, 0],
        [0, 3, 4],
        [0, 4, 5],
        [0, 5, 6],
        [0, 6, 7],
        [0, 7, 1],
        [1, 7, 2],
    ];
    let t = Triangulation::new(faces, 8).unwrap();
    let mut w = PatternWeights::new(&t);
    for v in 2..8 {
        w.set_boundary_angle(v, 2.0 * PI / 3.0).unwrap();
    }
    (t, w)
}
