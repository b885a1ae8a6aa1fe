mod common;

use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::time::Instant;

use circle_pattern::cg::{conjugate_gradient, CgOptions, Preconditioner};
use circle_pattern::center::{
    assemble_interior_system, layout_boundary, max_edge_length_mismatch, max_overlap_error,
};
use circle_pattern::geometry::{angle_sums, curvatures, edge_length, stiffness, total_angle};
use circle_pattern::radius::energy_gradient;
use circle_pattern::{
    generate_hex_disk, layout, solve_radii, validate_weights, CenterOptions, PatternWeights,
    RadiusMode, RadiusSolveConfig, RadiusState, Triangulation,
};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", items.join(", "))
}

fn random_log_radii<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.5f64..2.0).ln()).collect()
}

fn solve(t: &Triangulation, w: &PatternWeights, init: RadiusState, cfg: &RadiusSolveConfig) -> Vec<f64> {
    let (state, report) = solve_radii(t, w, init, cfg).unwrap();
    assert!(report.converged, "radius solve did not converge: {report:?}");
    state.radii()
}

fn test_meshes() -> Vec<(&'static str, Triangulation, PatternWeights)> {
    let mut out = Vec::new();
    for g in 1..=3 {
        let (t, w) = generate_hex_disk(g).unwrap();
        out.push((["hex1", "hex2", "hex3"][g - 1], t, w));
    }
    for g in 1..=2 {
        let (t, w) = obtuse_hex(g);
        out.push((["obtuse1", "obtuse2"][g - 1], t, w));
    }
    let (t, w) = two_interior();
    out.push(("two_interior", t, w));
    let (t, w) = quad();
    out.push(("quad", t, w));
    out
}

fn hex_symmetry() -> Outcome {
    let (t, w) = generate_hex_disk(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let init = RadiusState::from_log_radii(random_log_radii(t.vertex_count(), &mut rng));
    let started = Instant::now();
    let (state, report) = solve_radii(&t, &w, init, &RadiusSolveConfig::default()).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let spread = ratio_spread(&state.radii());
    let pass = report.converged && report.max_curvature < 1e-8 && spread < 1e-6 && elapsed < 1.0;
    (
        pass,
        format!(
            "max|K|={:.2e} spread={spread:.2e} iterations={} time={elapsed:.3}s",
            report.max_curvature, report.iterations
        ),
    )
}

fn jacobian() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-6;
    let (mut worst, mut worst_transpose, mut exact_symmetric) = (0.0f64, 0.0f64, true);
    for trial in 0..20 {
        let (t, mut w) = if trial % 2 == 0 { generate_hex_disk(1).unwrap() } else { quad() };
        random_overlaps(&t, &mut w, &mut rng);
        let u = random_log_radii(t.vertex_count(), &mut rng);
        let j = stiffness(&t, &w, &u).unwrap();
        let n = t.vertex_count();
        let mut dense = vec![vec![0.0; n]; n];
        for (e, &(a, b)) in t.edges().iter().enumerate() {
            dense[a][b] = j.coefficient(e);
            dense[b][a] = j.coefficient(e);
            exact_symmetric &= dense[a][b].to_bits() == dense[b][a].to_bits();
        }
        for (a, &d) in j.diagonal().iter().enumerate() {
            dense[a][a] = d;
        }
        let scale = dense.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        for row in 0..n {
            for col in 0..n {
                let fd = fd_curvature(&t, &w, &u, row, col, h);
                let fd_t = fd_curvature(&t, &w, &u, col, row, h);
                let denom = dense[row][col].abs().max(scale);
                worst = worst.max((fd - dense[row][col]).abs() / denom);
                worst_transpose = worst_transpose.max((fd_t - dense[row][col]).abs() / denom);
            }
        }
    }
    (
        worst < 1e-6 && worst_transpose < 1e-6 && exact_symmetric,
        format!("fd rel={worst:.2e} transposed fd rel={worst_transpose:.2e} stored symmetric={exact_symmetric}"),
    )
}

fn gauss_bonnet() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst, mut accepted, mut attempts) = (0.0f64, 0, 0);
    while accepted < 50 && attempts < 500 {
        attempts += 1;
        let g = rng.gen_range(1..=3);
        let (hex, base) = generate_hex_disk(g).unwrap();
        let flips = rng.gen_range(0..10);
        let t = flip_edges(&hex, flips, &mut rng);
        let mut w = carry_boundary(&t, &base);
        random_overlaps(&t, &mut w, &mut rng);
        if !validate_weights(&t, &w).is_ok() {
            continue;
        }
        accepted += 1;
        let u = random_log_radii(t.vertex_count(), &mut rng);
        let sigma: f64 = angle_sums(&t, &w, &u).unwrap().iter().sum();
        worst = worst.max((sigma - total_angle(&t)).abs());
    }
    (
        accepted == 50 && worst < 1e-10,
        format!("{accepted} triples, max |Σσ − π|F||={worst:.2e}"),
    )
}

fn scale_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_k, mut worst_sum) = (0.0f64, 0.0f64);
    for trial in 0..20 {
        let (t, mut w) = match trial % 3 {
            0 => generate_hex_disk(1).unwrap(),
            1 => generate_hex_disk(2).unwrap(),
            _ => quad(),
        };
        random_overlaps(&t, &mut w, &mut rng);
        let u = random_log_radii(t.vertex_count(), &mut rng);
        let base = curvatures(&t, &w, &u).unwrap();
        for lambda in [1e-3f64, 1.0, 1e3] {
            let scaled: Vec<f64> = u.iter().map(|x| x + lambda.ln()).collect();
            let k = curvatures(&t, &w, &scaled).unwrap();
            for (a, b) in k.iter().zip(&base) {
                worst_k = worst_k.max((a - b).abs());
            }
            let g = energy_gradient(&t, &w, &scaled).unwrap();
            worst_sum = worst_sum.max(g.iter().sum::<f64>().abs());
        }
    }
    (
        worst_k < 1e-10 && worst_sum < 1e-10,
        format!("max ΔK={worst_k:.2e} max |Σ∇E|={worst_sum:.2e}"),
    )
}

fn realization() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    let cases = [
        ("hex2", generate_hex_disk(2).unwrap()),
        ("obtuse1", obtuse_hex(1)),
        ("obtuse2", obtuse_hex(2)),
    ];
    for (name, (t, w)) in cases {
        let radii = solve(&t, &w, RadiusState::uniform(t.vertex_count()), &RadiusSolveConfig::default());
        let l = layout(&t, &w, &radii, &CenterOptions::default()).unwrap();
        let mismatch = max_edge_length_mismatch(&t, &w, &radii, l.centers());
        let angle = max_overlap_error(&t, &w, &radii, l.centers());
        let obtuse = w.overlaps().iter().filter(|&&th| th > PI / 2.0).count();
        pass &= mismatch < 1e-6 && angle < 1e-6;
        details.push(format!("{name}: length={mismatch:.2e} angle={angle:.2e} obtuse edges={obtuse}"));
    }
    (pass, details.join("; "))
}

fn harmonicity() -> Outcome {
    let mut worst = 0.0f64;
    for (_, t, w) in test_meshes() {
        let radii = solve(&t, &w, RadiusState::uniform(t.vertex_count()), &RadiusSolveConfig::default());
        let l = layout(&t, &w, &radii, &CenterOptions::default()).unwrap();
        let max_len = t
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| edge_length(radii[u], radii[v], w.overlap(e)))
            .fold(0.0, f64::max);
        worst = worst.max(l.harmonic_residual() / max_len);
    }
    (worst < 1e-10, format!("max residual / max edge length={worst:.2e}"))
}

fn closure_monotone() -> Outcome {
    let (t, w) = generate_hex_disk(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let init = random_log_radii(t.vertex_count(), &mut rng);
    let mut closure = Vec::new();
    let mut mismatch = Vec::new();
    for eps in [1e-4, 1e-6, 1e-8] {
        let cfg = RadiusSolveConfig {
            tolerance: eps,
            ..Default::default()
        };
        let radii = solve(&t, &w, RadiusState::from_log_radii(init.clone()), &cfg);
        let l = layout(&t, &w, &radii, &CenterOptions::default()).unwrap();
        closure.push(l.closure_error());
        mismatch.push(max_edge_length_mismatch(&t, &w, &radii, l.centers()));
    }
    let decreasing = |v: &[f64]| v.windows(2).all(|p| p[1] < p[0]);
    (
        decreasing(&closure) && decreasing(&mismatch),
        format!("closure={} mismatch={}", list(&closure), list(&mismatch)),
    )
}

fn cg_systems() -> Outcome {
    let (mut worst_res, mut worst_ratio, mut worst_dense) = (0.0f64, 0.0f64, 0.0f64);
    let mut pass = true;
    for (_, t, w) in test_meshes() {
        let n = t.interior_vertices().len();
        if n == 0 {
            continue;
        }
        let radii = solve(&t, &w, RadiusState::uniform(t.vertex_count()), &RadiusSolveConfig::default());
        let log_radii: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let c = stiffness(&t, &w, &log_radii).unwrap();
        let boundary = layout_boundary(&t, &w, &radii);
        let mut fixed = vec![None; t.vertex_count()];
        for (&v, &z) in t.boundary_cycle().iter().zip(&boundary.centers) {
            fixed[v] = Some(z);
        }
        let system = assemble_interior_system(&t, &c, &fixed).unwrap();
        let opts = CgOptions {
            tolerance: 1e-12,
            max_iterations: 5 * n,
            preconditioner: Preconditioner::None,
        };
        for rhs in [&system.rhs_x, &system.rhs_y] {
            let out = conjugate_gradient(&system.matrix, rhs, vec![1.0; n], &opts);
            pass &= out.converged && out.residual_norm < 1e-12 && out.iterations <= 5 * n;
            worst_res = worst_res.max(out.residual_norm);
            worst_ratio = worst_ratio.max(out.iterations as f64 / n as f64);
            if n <= 20 {
                let exact = dense_solve(system.matrix.to_dense(), rhs.clone());
                for (a, b) in out.solution.iter().zip(&exact) {
                    worst_dense = worst_dense.max((a - b).abs());
                }
            }
        }
    }
    pass &= worst_dense < 1e-10;
    (
        pass,
        format!("max residual={worst_res:.2e} max iterations/n={worst_ratio:.2} dense gap={worst_dense:.2e}"),
    )
}

fn mode_agreement() -> Outcome {
    let (t, w) = generate_hex_disk(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let init = random_log_radii(t.vertex_count(), &mut rng);
    let run = |mode| {
        let cfg = RadiusSolveConfig {
            mode,
            ..Default::default()
        };
        solve_radii(&t, &w, RadiusState::from_log_radii(init.clone()), &cfg).unwrap()
    };
    let (gd, gd_report) = run(RadiusMode::GradientDescent);
    let (lm, lm_report) = run(RadiusMode::LevenbergMarquardt);
    let gap = scale_free_distance(&gd.radii(), &lm.radii());
    (
        gd_report.converged && lm_report.converged && gap < 1e-6 && lm_report.iterations < gd_report.iterations,
        format!(
            "scale-free gap={gap:.2e} gd iterations={} lm iterations={}",
            gd_report.iterations, lm_report.iterations
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (t, w) = obtuse_hex(2);
    let problem = circle_pattern::io::Problem::new(t, w, None).unwrap();
    let input = dir.path().join("problem.json");
    fs::write(&input, problem.to_json()).unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let sol = dir.path().join(format!("solution{run}.json"));
        let svg = dir.path().join(format!("pattern{run}.svg"));
        let status = Command::new(env!("CARGO_BIN_EXE_circle-pattern"))
            .arg("solve")
            .arg(&input)
            .arg("--out")
            .arg(&sol)
            .arg("--svg")
            .arg(&svg)
            .arg("--edges")
            .output()
            .unwrap()
            .status;
        assert!(status.success(), "solve run {run} failed: {status}");
        outputs.push((fs::read(&sol).unwrap(), fs::read(&svg).unwrap()));
    }
    let same = outputs[0] == outputs[1];
    (
        same,
        format!(
            "solution {} bytes, svg {} bytes, identical={same}",
            outputs[0].0.len(),
            outputs[0].1.len()
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("hexagonal symmetry", hex_symmetry),
        ("jacobian matches finite differences", jacobian),
        ("angle sums total π|F|", gauss_bonnet),
        ("scale invariance", scale_invariance),
        ("layout realizes lengths and overlaps", realization),
        ("interior centers are harmonic", harmonicity),
        ("closure error shrinks with tolerance", closure_monotone),
        ("conjugate gradient on interior systems", cg_systems),
        ("gradient descent and LM agree", mode_agreement),
        ("repeated CLI runs are byte-identical", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = check();
        println!("[{}] {} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
