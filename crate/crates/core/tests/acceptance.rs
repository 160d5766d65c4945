//! Acceptance checks on the standard suite. Prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.

use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scope_dlo::bench::{self, BenchResult, BenchTask};
use scope_dlo::energy::EnergyModel;
use scope_dlo::geometry::build_guide;
use scope_dlo::planner::Method;
use scope_dlo::scope::{ScopeProblem, SolveStatus, SolverSettings, WarmStart};
use scope_dlo::{render_svg, Configuration, DloParams, PlanStatus, Point2, RenderStyle, Trajectory};

type Check = Result<String, String>;

struct Suite {
    tasks: Vec<BenchTask>,
    results: Vec<(BenchResult, BenchResult)>,
}

fn traj(r: &BenchResult) -> Result<&Trajectory, String> {
    r.trajectory
        .as_ref()
        .ok_or_else(|| format!("{} {} failed: {:?}", r.task, r.method, r.error))
}

fn speed_ordering(s: &Suite) -> Check {
    let mut parts = Vec::new();
    for (sc, en) in &s.results {
        let ratio = en.solve_time / sc.solve_time;
        let need = if sc.task == "QSW-L" { 5.0 } else { 2.0 };
        parts.push(format!("{} {:.1}x", sc.task, ratio));
        if !(sc.solve_time < en.solve_time && ratio >= need) {
            return Err(format!("{}: speedup {ratio:.2} < {need}", sc.task));
        }
    }
    Ok(parts.join(", "))
}

fn scope_length_error(s: &Suite) -> Check {
    let mut parts = Vec::new();
    for ((sc, _), task) in s.results.iter().zip(&s.tasks) {
        let total = task.scene().map_err(|e| e.to_string())?.params.total_rest_length();
        // Independent recomputation from the trajectory.
        let t = traj(sc)?;
        let worst = t
            .steps()
            .iter()
            .map(|c| (c.segment_lengths().iter().sum::<f64>() - total).abs())
            .fold(0.0, f64::max);
        let rel = worst / total;
        let limit = match sc.task.as_str() {
            "QSW-HSW" | "U-QSW" => 0.03,
            _ => 0.08,
        };
        parts.push(format!("{} {:.2}% ({:.2} cm)", sc.task, rel * 100.0, worst * 100.0));
        if (worst - sc.max_length_error).abs() > 1e-12 {
            return Err(format!("{}: reported {} vs recomputed {worst}", sc.task, sc.max_length_error));
        }
        if rel > limit {
            return Err(format!("{}: relative error {rel:.4} > {limit}", sc.task));
        }
    }
    Ok(parts.join(", "))
}

fn energy_accuracy(s: &Suite) -> Check {
    let mut parts = Vec::new();
    for ((_, en), task) in s.results.iter().zip(&s.tasks) {
        let target = task.scene().map_err(|e| e.to_string())?.target;
        let last = traj(en)?.last();
        let err = last
            .nodes()
            .iter()
            .zip(target.nodes())
            .map(|(a, b)| a.distance(*b))
            .fold(0.0, f64::max);
        parts.push(format!("{} {err:.2e} m", en.task));
        if err > 1e-3 {
            return Err(format!("{}: final shape error {err:.3e} m", en.task));
        }
    }
    Ok(parts.join(", "))
}

fn max_coord_gap(a: &Configuration, b: &Configuration) -> f64 {
    a.nodes()
        .iter()
        .zip(b.nodes())
        .map(|(p, q)| (p.x - q.x).abs().max((p.y - q.y).abs()))
        .fold(0.0, f64::max)
}

fn boundary_exactness(s: &Suite) -> Check {
    let mut worst: f64 = 0.0;
    for ((sc, _), task) in s.results.iter().zip(&s.tasks) {
        let scene = task.scene().map_err(|e| e.to_string())?;
        let t = traj(sc)?;
        worst = worst
            .max(max_coord_gap(t.first(), &scene.start))
            .max(max_coord_gap(t.last(), &scene.target));
    }
    if worst <= 1e-9 {
        Ok(format!("max boundary gap {worst:.1e} m"))
    } else {
        Err(format!("boundary gap {worst:.3e} m"))
    }
}

fn constraint_satisfaction(s: &Suite) -> Check {
    let mut worst: f64 = 0.0;
    for ((sc, _), task) in s.results.iter().zip(&s.tasks) {
        if sc.status != PlanStatus::Converged {
            return Err(format!("{}: SCOPE status {:?}", sc.task, sc.status));
        }
        let l0 = task.start_spec.segment_length;
        for c in traj(sc)?.steps() {
            for l in c.segment_lengths() {
                worst = worst.max(l - l0);
            }
        }
    }
    if worst <= 1e-6 {
        Ok(format!("max excess {:.1e} m", worst.max(0.0)))
    } else {
        Err(format!("segment excess {worst:.3e} m"))
    }
}

/// Exact projected gradient for the two-node, three-step program with only
/// the smoothness term: the single free step is projected by keeping the
/// pair's midpoint and clipping its difference to the rest length.
fn tiny_oracle(start: &[Point2; 2], target: &[Point2; 2], l0: f64) -> ([Point2; 2], f64) {
    let mut p = [Point2::new(0.7, -0.3), Point2::new(-0.4, 0.9)];
    let step = 0.125;
    for _ in 0..10_000 {
        let mut q = [Point2::ZERO; 2];
        for i in 0..2 {
            let g = (p[i] - start[i]) * 2.0 + (p[i] - target[i]) * 2.0;
            q[i] = p[i] - g * step;
        }
        let mid = (q[0] + q[1]) * 0.5;
        let mut d = q[1] - q[0];
        if d.norm() > l0 {
            d = d * (l0 / d.norm());
        }
        p = [mid - d * 0.5, mid + d * 0.5];
    }
    let j: f64 = (0..2)
        .map(|i| (p[i] - start[i]).norm_squared() + (target[i] - p[i]).norm_squared())
        .sum();
    (p, j)
}

fn global_optimum(s: &Suite) -> Check {
    let mut worst: f64 = 0.0;
    for task in &s.tasks {
        let scene = task.scene().map_err(|e| e.to_string())?;
        let problem = ScopeProblem::assemble(
            &scene.start,
            &scene.target,
            scene.params,
            scene.n_steps,
            scene.w1,
            scene.w2,
            None,
        )
        .map_err(|e| e.to_string())?;
        let a = problem.solve(&SolverSettings::default()).map_err(|e| e.to_string())?;
        let b = problem
            .solve(&SolverSettings {
                warm_start: WarmStart::Zero,
                ..SolverSettings::default()
            })
            .map_err(|e| e.to_string())?;
        if b.status != SolveStatus::Converged {
            return Err(format!("{}: zero start {:?}", task.name, b.status));
        }
        let rel = (a.objective_value - b.objective_value).abs() / a.objective_value.abs();
        worst = worst.max(rel);
    }
    if worst > 1e-4 {
        return Err(format!("warm starts disagree by {worst:.3e}"));
    }

    let start = [Point2::new(0.0, 0.0), Point2::new(0.1, 0.0)];
    let target = [Point2::new(0.0, 0.0), Point2::new(0.0, 0.1)];
    let (p, j) = tiny_oracle(&start, &target, 0.15);
    let problem = ScopeProblem::assemble(
        &Configuration::new(start.to_vec()).unwrap(),
        &Configuration::new(target.to_vec()).unwrap(),
        DloParams::new(2, 0.15).unwrap(),
        3,
        1.0,
        0.0,
        None,
    )
    .map_err(|e| e.to_string())?;
    let sol = problem.solve(&SolverSettings::default()).map_err(|e| e.to_string())?;
    let obj_rel = (sol.objective_value - j).abs() / j;
    let pos = sol
        .trajectory
        .step(1)
        .nodes()
        .iter()
        .zip(&p)
        .map(|(a, b)| a.distance(*b))
        .fold(0.0, f64::max);
    if obj_rel > 1e-4 || pos > 1e-4 {
        return Err(format!("tiny instance: objective rel {obj_rel:.2e}, position {pos:.2e}"));
    }
    Ok(format!(
        "suite warm-start spread {worst:.1e}; tiny instance J={:.6} (oracle {j:.6})",
        sol.objective_value
    ))
}

fn gradient_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let polyline = |rng: &mut ChaCha8Rng, n: usize| {
        let mut p = Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let mut heading: f64 = rng.gen_range(-3.0..3.0);
        let mut nodes = vec![p];
        for _ in 1..n {
            heading += rng.gen_range(-2.0..2.0);
            p = p + Point2::new(heading.cos(), heading.sin()) * rng.gen_range(0.03..0.08);
            nodes.push(p);
        }
        nodes
    };
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(3..16);
        let rest = Configuration::new(polyline(&mut rng, n)).unwrap();
        let model = EnergyModel::from_rest_shape(&rest, 100.0, 1.0, 0.05).unwrap();
        let mut nodes = polyline(&mut rng, n);
        let c = Configuration::new(nodes.clone()).unwrap();
        let (_, grad) = model.internal_energy_and_gradient(&c).map_err(|e| e.to_string())?;
        let e = |nodes: &[Point2]| model.internal_energy(&Configuration::new(nodes.to_vec()).unwrap()).unwrap();
        let (mut diff, mut scale): (f64, f64) = (0.0, 0.0);
        for i in 0..n {
            for bump in [Point2::new(h, 0.0), Point2::new(0.0, h)] {
                let orig = nodes[i];
                nodes[i] = orig + bump;
                let fp = e(&nodes);
                nodes[i] = orig - bump;
                let fm = e(&nodes);
                nodes[i] = orig;
                let fd = (fp - fm) / (2.0 * h);
                let an = grad[i].dot(bump) / h;
                diff = diff.max((an - fd).abs());
                scale = scale.max(an.abs());
            }
        }
        worst = worst.max(diff / scale);
    }
    if worst <= 1e-5 {
        Ok(format!("max relative error {worst:.2e} over 100 configurations"))
    } else {
        Err(format!("max relative error {worst:.3e}"))
    }
}

fn step_displacements(t: &Trajectory) -> Vec<f64> {
    t.steps()
        .windows(2)
        .map(|w| {
            w[0].nodes()
                .iter()
                .zip(w[1].nodes())
                .map(|(a, b)| a.distance(*b))
                .fold(0.0, f64::max)
        })
        .collect()
}

fn smoothness(s: &Suite) -> Check {
    let mut worst: f64 = 0.0;
    for ((sc, _), task) in s.results.iter().zip(&s.tasks) {
        let scene = task.scene().map_err(|e| e.to_string())?;
        let guide = build_guide(&scene.start, &scene.target, scene.n_steps).map_err(|e| e.to_string())?;
        let g = step_displacements(&guide);
        for (d, gd) in step_displacements(traj(sc)?).iter().zip(&g) {
            worst = worst.max(d / gd);
        }
    }
    if worst <= 2.0 {
        Ok(format!("worst step ratio to guide {worst:.3}"))
    } else {
        Err(format!("step ratio {worst:.3} > 2"))
    }
}

fn determinism_and_rendering(s: &Suite) -> Check {
    let rerun = bench::run_suite(&s.tasks, 1);
    let style = RenderStyle::default();
    for ((a_s, a_e), (b_s, b_e)) in s.results.iter().zip(&rerun) {
        for (a, b) in [(a_s, b_s), (a_e, b_e)] {
            let (ta, tb) = (traj(a)?, traj(b)?);
            let bits = |t: &Trajectory| -> Vec<u64> {
                t.steps().iter().flat_map(|c| c.nodes()).flat_map(|p| [p.x.to_bits(), p.y.to_bits()]).collect()
            };
            if bits(ta) != bits(tb) || a.max_length_error.to_bits() != b.max_length_error.to_bits() {
                return Err(format!("{} {}: rerun differs", a.task, a.method));
            }
        }
        let pair = [traj(a_s)?.clone(), traj(a_e)?.clone()];
        let svg1 = render_svg(&pair, &style).map_err(|e| e.to_string())?;
        let svg2 = render_svg(&[traj(b_s)?.clone(), traj(b_e)?.clone()], &style).map_err(|e| e.to_string())?;
        if svg1 != svg2 {
            return Err(format!("{}: SVG bytes differ", a_s.task));
        }
        let doc = roxmltree::Document::parse(&svg1).map_err(|e| format!("{}: {e}", a_s.task))?;
        let dashed = doc.descendants().filter(|n| n.has_attribute("stroke-dasharray")).count();
        if dashed != 1 {
            return Err(format!("{}: expected one dashed group, found {dashed}", a_s.task));
        }
    }

    let csv = bench::emit_table(&s.results);
    let rows = bench::parse_table(&csv).map_err(|e| e.to_string())?;
    if rows.len() != s.results.len() {
        return Err(format!("csv has {} rows", rows.len()));
    }
    for (row, (sc, en)) in rows.iter().zip(&s.results) {
        let pairs = [
            (row.scope_time_s, sc.solve_time),
            (row.scope_max_err_m, sc.max_length_error),
            (row.energy_time_s, en.solve_time),
            (row.energy_max_err_m, en.max_length_error),
            (row.speedup, en.solve_time / sc.solve_time),
        ];
        for (parsed, orig) in pairs {
            // Four significant digits: half a unit in the last place.
            if (parsed - orig).abs() > 5e-4 * orig.abs() * (1.0 + 1e-12) {
                return Err(format!("{}: csv {parsed} vs {orig}", row.task));
            }
            if bench::sig4(parsed) != bench::sig4(orig) {
                return Err(format!("{}: csv reprints {parsed} differently", row.task));
            }
        }
    }
    Ok(format!("{} tasks bit-identical; SVG stable and well-formed; CSV round-trips", s.tasks.len()))
}

fn main() -> ExitCode {
    let tasks = bench::standard_suite();
    let results = bench::run_suite(&tasks, 1);
    for (sc, en) in &results {
        assert_eq!((sc.method, en.method), (Method::Scope, Method::EnergyBased));
    }
    let suite = Suite { tasks, results };
    print!("{}", bench::format_report(&suite.results));

    let checks: Vec<(&str, Check)> = vec![
        ("1 speed ordering", speed_ordering(&suite)),
        ("2 SCOPE length error", scope_length_error(&suite)),
        ("3 energy-baseline accuracy", energy_accuracy(&suite)),
        ("4 boundary exactness", boundary_exactness(&suite)),
        ("5 constraint satisfaction", constraint_satisfaction(&suite)),
        ("6 global optimum", global_optimum(&suite)),
        ("7 gradient oracle", gradient_oracle()),
        ("8 smoothness", smoothness(&suite)),
        ("9 determinism and rendering", determinism_and_rendering(&suite)),
    ];
    let mut failed = 0;
    for (name, result) in &checks {
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
