//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Oracles here are computed independently of the code
//! under test (nalgebra for spectra, direct evaluation for inequalities).

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vikit::scenario::MapSpec;
use vikit::{run_scenario, ExitStatus, Overrides, Scenario};
use vikit_core::linalg::{distance, dot, norm, sub};
use vikit_core::operators::certify_cocoercive;
use vikit_core::sampling::{sample_in_set, sample_pairs, uniform_point};
use vikit_core::solvers::{solve_halpern, solve_projected_gradient};
use vikit_core::verification::{
    brute_force_vi, diameter, lemma_cocoercive_expansive, BruteForceGrid,
};
use vikit_core::{certify_moduli, AffineOperator, ConvexSet, Matrix, NonexpansiveMap, Status};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rows_of(op: &AffineOperator) -> DMatrix<f64> {
    let n = op.dim();
    DMatrix::from_fn(n, n, |i, j| op.matrix().get(i, j))
}

fn sigma_min(op: &AffineOperator) -> f64 {
    rows_of(op).singular_values().min()
}

fn load(name: &str) -> Scenario {
    let path = vikit::golden::default_dir().join(format!("{name}.json"));
    Scenario::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const BOX_GOLDENS: [&str; 4] = ["box_identity", "box_diag", "box_rotation", "box_exterior"];
const ALL_GOLDENS: [&str; 5] = [
    "box_identity",
    "box_diag",
    "box_rotation",
    "box_exterior",
    "simplex_rotation",
];

/// `M = BᵀB + δI + K` with `K` skew, so `sym(M) ⪰ δI`.
fn strongly_monotone(rng: &mut ChaCha8Rng, n: usize) -> AffineOperator {
    let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0));
    let delta = rng.random_range(0.05..=1.0);
    let mut k = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0));
    k = (&k - k.transpose()) * 0.5;
    let m = b.transpose() * &b + DMatrix::identity(n, n) * delta + k;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)]).collect())
        .collect();
    AffineOperator::from_rows(&rows, uniform_point(rng, n, 1.0)).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = f64::INFINITY;
    for case in 0..20 {
        let n = 1 + case % 10;
        let op = strongly_monotone(&mut rng, n);
        let moduli = certify_moduli(&op);
        // Alternate between the plain monotone pair and a genuinely relaxed one.
        let m = if case % 2 == 0 {
            0.0
        } else {
            0.5 * moduli.strong_monotonicity / (moduli.lipschitz * moduli.lipschitz)
        };
        let v = certify_cocoercive(&op, m).unwrap().v;
        // Absorb eigen-solver rounding so the sampled hypotheses hold exactly.
        let (v, eps) = (
            v - 1e-12 * v.abs().max(1.0),
            moduli.lipschitz * (1.0 + 1e-12),
        );
        let gamma = v - m * eps * eps;
        ensure(gamma > 0.0, || {
            format!("case {case}: certified gamma {gamma} not positive")
        })?;

        let pairs = sample_pairs(n, 10_000, case as u64);
        let lemma =
            lemma_cocoercive_expansive(&op, m, v, eps, &pairs).map_err(|e| e.to_string())?;
        ensure(lemma.report.status == Status::Pass, || {
            format!("case {case}: {:?}", lemma.report)
        })?;
        for (x, y) in &pairs {
            let az = sub(&op.evaluate(x).unwrap(), &op.evaluate(y).unwrap());
            let slack = norm(&az) - gamma * distance(x, y);
            worst = worst.min(slack);
            ensure(slack >= -1e-9, || {
                format!("case {case}: slack {slack} at x={x:?}, y={y:?}")
            })?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "20 operators x 1e4 pairs, min slack {worst:.3e}, {elapsed:.2?}"
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let h = 0.01;
    let mut details = Vec::new();
    for name in BOX_GOLDENS {
        let s = load(name);
        let op = s.operator.build().unwrap();
        ensure(sigma_min(&op) > 0.0, || format!("{name}: singular"))?;
        let grid =
            BruteForceGrid::new(s.set.build().unwrap(), h, 1e-9).map_err(|e| e.to_string())?;
        let sol = brute_force_vi(&op, &grid).map_err(|e| e.to_string())?;
        let d = diameter(&sol).map_or(f64::NAN, |(d, _, _)| d);
        ensure(!sol.is_empty() && d <= 2.0 * h * 2f64.sqrt(), || {
            format!("{name}: diameter {d}")
        })?;
        details.push(format!("{name}={d:.3}"));
    }
    let zero = AffineOperator::new(Matrix::zeros(2), vec![0.0, 0.0]).unwrap();
    let grid = BruteForceGrid::new(ConvexSet::cube(2, 0.0, 1.0).unwrap(), h, 1e-9).unwrap();
    let sol = brute_force_vi(&zero, &grid).map_err(|e| e.to_string())?;
    let d = diameter(&sol).map_or(f64::NAN, |(d, _, _)| d);
    ensure((d - 2f64.sqrt()).abs() <= 1e-12, || {
        format!("zero control diameter {d}")
    })?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{}, zero control={d:.6}, {elapsed:.2?}",
        details.join(" ")
    ))
}

fn criterion_3() -> Outcome {
    let mut checked = 0;
    for name in ALL_GOLDENS {
        let s = load(name);
        let x_star = s.x_star.clone().unwrap();
        let op = s.operator.build().unwrap();
        let gamma = sigma_min(&op);
        let trace = solve_projected_gradient(
            &op,
            &s.set.build().unwrap(),
            &s.config.build(),
            &s.x0,
            Some(&x_star),
        )
        .map_err(|e| e.to_string())?;
        let ax_star = op.evaluate(&x_star).unwrap();
        for r in &trace.records {
            let s_n = distance(&op.evaluate(&r.x).unwrap(), &ax_star);
            let d = distance(&r.x, &x_star);
            ensure(d <= s_n / gamma + 1e-9, || {
                format!("{name} n={}: {d} > {s_n}/{gamma}", r.n)
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} iterates across {} instances, zero violations",
        ALL_GOLDENS.len()
    ))
}

fn criterion_4() -> Outcome {
    let mut worst_oracle = 0.0f64;
    let mut worst_halpern = 0.0f64;
    for name in ALL_GOLDENS {
        let s = load(name);
        let op = s.operator.build().unwrap();
        let set = s.set.build().unwrap();
        let cfg = s.config.build();
        let pg =
            solve_projected_gradient(&op, &set, &cfg, &s.x0, None).map_err(|e| e.to_string())?;
        ensure(pg.converged(), || {
            format!("{name}: projected gradient did not converge")
        })?;
        let limit = pg.final_iterate().to_vec();

        if matches!(set, ConvexSet::Box { .. }) {
            let h = s.grid.spacing;
            let grid = BruteForceGrid::new(set.clone(), h, s.grid.vi_tolerance)
                .map_err(|e| e.to_string())?;
            let oracle = brute_force_vi(&op, &grid).map_err(|e| e.to_string())?;
            let nearest = oracle
                .iter()
                .map(|p| distance(p, &limit))
                .fold(f64::INFINITY, f64::min);
            let bound = h * (op.dim() as f64).sqrt() + 1e-6;
            ensure(nearest <= bound, || {
                format!("{name}: {nearest} from oracle > {bound}")
            })?;
            worst_oracle = worst_oracle.max(nearest);
        }

        ensure(matches!(s.map_s, None | Some(MapSpec::Identity)), || {
            format!("{name}: S is not the identity")
        })?;
        let mut hcfg = cfg.clone();
        hcfg.residual_tol = s.halpern.tol.unwrap_or(hcfg.residual_tol);
        hcfg.max_iters = s.halpern.max_iters.unwrap_or(hcfg.max_iters);
        hcfg.trace_stride = s.halpern.trace_stride.unwrap_or(hcfg.trace_stride);
        let hal = solve_halpern(
            &op,
            &set,
            &NonexpansiveMap::Identity,
            &hcfg,
            &s.x0,
            &s.x0,
            None,
        )
        .map_err(|e| e.to_string())?;
        ensure(hal.converged(), || {
            format!("{name}: Halpern did not converge")
        })?;
        let gap = distance(hal.final_iterate(), &limit);
        ensure(gap <= 1e-6, || {
            format!("{name}: Halpern vs projected gradient {gap}")
        })?;
        worst_halpern = worst_halpern.max(gap);
    }
    Ok(format!(
        "max distance to oracle {worst_oracle:.3e}, max Halpern gap {worst_halpern:.3e}"
    ))
}

fn projection_sets(rng: &mut ChaCha8Rng, n: usize) -> Vec<(&'static str, ConvexSet)> {
    let lower = uniform_point(rng, n, 1.0);
    let upper: Vec<f64> = lower
        .iter()
        .map(|l| l + rng.random_range(0.0..=2.0))
        .collect();
    let mut normal = uniform_point(rng, n, 1.0);
    normal[0] += 2.0;
    let k = rng.random_range(0..n);
    let q = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0))
        .qr()
        .q();
    let basis: Vec<Vec<f64>> = (0..k)
        .map(|j| q.column(j).iter().copied().collect())
        .collect();
    vec![
        ("box", ConvexSet::new_box(lower, upper).unwrap()),
        (
            "ball",
            ConvexSet::new_ball(uniform_point(rng, n, 1.0), rng.random_range(0.1..=2.0)).unwrap(),
        ),
        (
            "halfspace",
            ConvexSet::new_halfspace(normal, rng.random_range(-1.0..=1.0)).unwrap(),
        ),
        ("simplex", ConvexSet::simplex(n).unwrap()),
        (
            "affine",
            ConvexSet::new_affine(uniform_point(rng, n, 1.0), basis).unwrap(),
        ),
    ]
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut trials = [0usize; 5];
    let mut worst_char = f64::NEG_INFINITY;
    for t in 0..10_000 {
        let n = 1 + t % 6;
        for (k, (name, set)) in projection_sets(&mut rng, n).into_iter().enumerate() {
            let x = uniform_point(&mut rng, n, 3.0);
            let z = uniform_point(&mut rng, n, 3.0);
            let px = set.project(&x).unwrap();
            let pz = set.project(&z).unwrap();
            let ppx = set.project(&px).unwrap();
            let idem = distance(&ppx, &px);
            ensure(idem <= 1e-12, || format!("{name}: idempotence gap {idem}"))?;
            let (dp, dx) = (distance(&px, &pz), distance(&x, &z));
            ensure(dp <= dx + 1e-12, || {
                format!("{name}: expansion {dp} > {dx}")
            })?;
            let y = sample_in_set(&mut rng, &set);
            let c = dot(&sub(&x, &px), &sub(&y, &px));
            ensure(c <= 1e-9, || format!("{name}: <x - Px, y - Px> = {c}"))?;
            worst_char = worst_char.max(c);
            trials[k] += 1;
        }
    }
    Ok(format!("{trials:?} trials (box, ball, halfspace, simplex, affine), max <x-Px,y-Px> {worst_char:.3e}"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let n = 1 + case % 10;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| uniform_point(&mut rng, n, 1.0)).collect();
        let op = AffineOperator::from_rows(&rows, vec![0.0; n]).unwrap();
        let moduli = certify_moduli(&op);
        let m = rows_of(&op);
        let sv = m.clone().singular_values();
        let v = ((&m + m.transpose()) * 0.5).symmetric_eigenvalues().min();
        let pairs = [
            ("lipschitz", moduli.lipschitz, sv.max()),
            ("expansiveness", moduli.expansiveness, sv.min()),
            ("strong_monotonicity", moduli.strong_monotonicity, v),
        ];
        for (what, got, want) in pairs {
            let err = (got - want).abs();
            ensure(err <= 1e-8, || {
                format!("case {case} {what}: {got} vs {want}")
            })?;
            worst = worst.max(err);
        }
        match moduli.ism_alpha {
            Some(alpha) => {
                let err = (alpha - v / (sv.max() * sv.max())).abs();
                ensure(v > 0.0 && err <= 1e-8, || {
                    format!("case {case} alpha {alpha}")
                })?;
                worst = worst.max(err);
            }
            None => ensure(v <= 1e-8, || {
                format!("case {case}: missing alpha with v={v}")
            })?,
        }
    }
    Ok(format!("50 matrices, max deviation {worst:.3e}"))
}

fn criterion_7() -> Outcome {
    let path: PathBuf = vikit::golden::default_dir().join("box_rotation.json");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let outcome = run_scenario(&path, dir.path(), Overrides::default());
        ensure(outcome.exit == ExitStatus::Success, || {
            format!("run exited {:?}", outcome.exit)
        })?;
    }
    let mut compared = 0;
    for suffix in ["trace.csv", "halpern.trace.csv", "compare.trace.csv"] {
        let name = format!("box_rotation.{suffix}");
        let a = std::fs::read(dirs[0].path().join(&name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(&name)).unwrap();
        ensure(a == b, || format!("{name} differs between runs"))?;
        compared += a.len();
    }
    Ok(format!("3 trace files, {compared} bytes identical"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("expansiveness of cocoercive operators", criterion_1),
        ("singleton VI on golden boxes", criterion_2),
        ("shortcut bound soundness", criterion_3),
        ("solver/oracle agreement", criterion_4),
        ("projection correctness", criterion_5),
        ("moduli vs dense spectral oracle", criterion_6),
        ("deterministic traces", criterion_7),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} PASS  {title}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL  {title}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
