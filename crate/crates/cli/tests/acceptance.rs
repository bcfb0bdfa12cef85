//! Runs the ten acceptance criteria and prints one line per criterion.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hopf_core::analysis::{
    blowup_compare, comparison_check, comparison_configs, estimate_is1_trend, find_solution, FindOptions, Verdict,
};
use hopf_core::closed_forms::identity_solution;
use hopf_core::hopf_map::{
    alpha_hopf_eval, eigenvalue_check, norm, orthmul_eval, quadratic_forms, BiEigenmap, OrthogonalMultiplication,
};
use hopf_core::shooting::{match_shooting, ShootOptions};
use hopf_core::variational::{glue, GlueOptions};
use hopf_core::HopfParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn hopf(out: &Path, args: &[&str]) -> (i32, Duration) {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_hopf"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("run hopf");
    (output.status.code().unwrap_or(-1), start.elapsed())
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap_or_default();
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn params(p: u32, q: u32, lambda: f64, mu: f64) -> HopfParams {
    HopfParams::new(p, q, lambda, mu).expect("valid parameters")
}

fn criterion_1() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (code, took) = hopf(dir.path(), &["verify", "--nodes", "2000"]);
    let rows = csv_rows(&dir.path().join("verify.csv"));
    ensure(code == 0, format!("verify exited {code}"))?;
    ensure(!rows.is_empty() && rows.iter().all(|r| r[3] == "true"), "oracle rows not all pass".into())?;
    for r in &rows {
        let bound = if r[0].starts_with("phi") || r[0].starts_with("psi_residual") { 1e-6 } else { 1e-8 };
        let v: f64 = r[1].parse().map_err(|_| format!("bad value in {r:?}"))?;
        ensure(v <= bound, format!("{} = {v:e}", r[0]))?;
    }
    ensure(took < Duration::from_secs(5), format!("runtime {took:?}"))?;
    Ok(format!("{} oracle rows pass in {:.2}s", rows.len(), took.as_secs_f64()))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let params = params(1, 1, 1.0, 1.0);
    let opts = GlueOptions::default();
    let g = glue(PI / 4.0, &params, &opts).map_err(|e| e.to_string())?;
    let p = g.profile().map_err(|e| e.to_string())?;
    let glued_err =
        p.nodes().iter().zip(p.values()).fold(0.0f64, |m, (&t, &a)| m.max((a - identity_solution(t)).abs()));
    let sol = match_shooting(&params, &ShootOptions::default()).map_err(|e| e.to_string())?;
    let shoot_err = (1..2000)
        .map(|k| FRAC_PI_2 * k as f64 / 2000.0)
        .fold(0.0f64, |m, t| m.max((sol.alpha(t) - identity_solution(t)).abs()));
    let mut worst_l = 0.0f64;
    for s in [0.1, 0.4, PI / 4.0, 1.1, 1.4] {
        worst_l = worst_l.max(glue(s, &params, &opts).map_err(|e| e.to_string())?.l.abs());
    }
    let took = start.elapsed();
    ensure(glued_err <= 1e-6, format!("glued sup error {glued_err:e}"))?;
    ensure(shoot_err <= 1e-6, format!("shooting sup error {shoot_err:e}"))?;
    ensure(worst_l <= 1e-5, format!("max |l| {worst_l:e}"))?;
    ensure(took < Duration::from_secs(10), format!("runtime {took:?}"))?;
    Ok(format!(
        "sup errors {glued_err:.1e} (glued) {shoot_err:.1e} (shooting), max |l| {worst_l:.1e}, {:.2}s",
        took.as_secs_f64()
    ))
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let params = params(1, 2, 1.0, 4.0);
    let opts = FindOptions { glue: GlueOptions { n: 2000, ..GlueOptions::default() }, ..FindOptions::default() };
    let found = match find_solution(&params, &opts).map_err(|e| e.to_string())? {
        Verdict::Solution(f) => f,
        Verdict::NoSignChange(_) => return Err("no sign change".into()),
    };
    let g = &found.glued;
    let p = g.profile().map_err(|e| e.to_string())?;
    let sol = match_shooting(&params, &ShootOptions::default()).map_err(|e| e.to_string())?;
    let dist = p.nodes().iter().zip(p.values()).fold(0.0f64, |m, (&t, &a)| m.max((sol.alpha(t) - a).abs()));
    let v = p.values();
    let took = start.elapsed();
    ensure(found.scan.has_sign_change(), "scan has no bracket".into())?;
    ensure(found.nodes == 2000, format!("needed {} nodes", found.nodes))?;
    ensure(g.l.abs() <= 1e-6, format!("|l(s*)| = {:e}", g.l.abs()))?;
    ensure(dist <= 1e-4, format!("glued vs shooting {dist:e}"))?;
    ensure(p.is_strictly_increasing(), "profile not strictly increasing".into())?;
    ensure(v[0] <= 1e-3 && PI - v[v.len() - 1] <= 1e-3, format!("endpoints {} {}", v[0], v[v.len() - 1]))?;
    ensure(took < Duration::from_secs(60), format!("runtime {took:?}"))?;
    Ok(format!(
        "s* = {:.6}, |l| = {:.1e}, glued vs shooting {dist:.1e}, residual {:.1e}, {:.2}s",
        g.s,
        g.l.abs(),
        found.max_residual,
        took.as_secs_f64()
    ))
}

fn criterion_4() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (code, _) = hopf(dir.path(), &["scan-jump", "--s-min", "0.01", "--s-max", "1.5", "--n", "40"]);
    ensure(code == 0, format!("scan-jump exited {code}"))?;
    let num = |s: &str| s.parse::<f64>().unwrap_or(f64::NAN);
    let rows: Vec<(f64, f64, f64)> =
        csv_rows(&dir.path().join("scan.csv")).iter().map(|r| (num(&r[0]), num(&r[1]), num(&r[3]))).collect();
    ensure(rows.len() == 40, format!("{} scan rows", rows.len()))?;
    for &(s, l, i_s) in &rows[..3] {
        ensure(l > 0.0 && i_s > 0.0, format!("s = {s}: l = {l:e}, I_s = {i_s:e}"))?;
    }
    let near: Vec<_> = rows.iter().filter(|r| r.0 > FRAC_PI_2 - 0.1).collect();
    ensure(!near.is_empty(), "no scanned s near pi/2".into())?;
    for &&(s, l, _) in &near {
        ensure(l < 0.0, format!("s = {s}: l = {l:e}"))?;
    }
    Ok(format!("l > 0 and I_s > 0 for s <= {:.4}, l < 0 on {} rows with s > pi/2 - 0.1", rows[2].0, near.len()))
}

fn criterion_5() -> Check {
    let mut notes = Vec::new();
    for mu in ["1.5", "1.9"] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let (code, _) = hopf(dir.path(), &["solve", "--p", "1", "--q", "2", "--lambda", "1", "--mu", mu]);
        ensure(code == 2, format!("mu = {mu}: exit {code}"))?;
        let rows = csv_rows(&dir.path().join("scan.csv"));
        ensure(rows.len() == 40, format!("mu = {mu}: {} scan rows", rows.len()))?;
        let negative: Vec<bool> = rows.iter().map(|r| r[1].parse::<f64>().unwrap_or(f64::NAN) < 0.0).collect();
        ensure(negative.iter().all(|&b| b) || negative.iter().all(|&b| !b), format!("mu = {mu}: sign change"))?;
        notes.push(format!("mu = {mu} exit 2"));
    }
    Ok(notes.join(", "))
}

fn criterion_6() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (code, took) =
        hopf(dir.path(), &["map", "--lambda", "1:2:5", "--mu", "1:6:10", "--p", "1", "--q", "2", "--threads", "4"]);
    ensure(code == 0, format!("map exited {code}"))?;
    let rows = csv_rows(&dir.path().join("map.csv"));
    ensure(rows.len() == 50, format!("{} map cells", rows.len()))?;
    let (mut above, mut below) = (0, 0);
    for r in &rows {
        let (lambda, mu): (f64, f64) = (r[0].parse().unwrap_or(f64::NAN), r[1].parse().unwrap_or(f64::NAN));
        if mu > 2.0 * lambda + 0.2 {
            ensure(r[2] == "solution_found", format!("lambda = {lambda}, mu = {mu}: {}", r[2]))?;
            above += 1;
        } else if mu < 2.0 * lambda - 0.2 {
            ensure(r[2] == "no_sign_change", format!("lambda = {lambda}, mu = {mu}: {}", r[2]))?;
            below += 1;
        }
    }
    ensure(took < Duration::from_secs(900), format!("runtime {took:?}"))?;
    Ok(format!("{above} cells solved above, {below} cells without sign change below, {:.1}s", took.as_secs_f64()))
}

fn criterion_7() -> Check {
    let params = params(1, 2, 1.0, 4.0);
    let opts = GlueOptions::default();
    let d: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&s| blowup_compare(s, &params, 0.1, &opts))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(d[0] > d[1] && d[1] > d[2], format!("not decreasing: {d:?}"))?;
    ensure(d[2] <= 0.05, format!("distance at s = 0.01 is {}", d[2]))?;
    Ok(format!("sup distances {:.4} {:.4} {:.4}", d[0], d[1], d[2]))
}

fn criterion_8() -> Check {
    let opts = GlueOptions::default();
    let strong = estimate_is1_trend(&params(1, 2, 4.0, 12.0), &[0.01], &opts).map_err(|e| e.to_string())?;
    ensure(strong[0] >= 0.95 * FRAC_PI_2, format!("s^-2 I_s^1 = {} at lambda = 4", strong[0]))?;
    let trend =
        estimate_is1_trend(&params(1, 2, 1.0, 4.0), &[0.08, 0.04, 0.02, 0.01], &opts).map_err(|e| e.to_string())?;
    ensure(trend.windows(2).all(|w| w[1] > w[0]), format!("not increasing: {trend:?}"))?;
    Ok(format!(
        "lambda = 4: {:.4} >= {:.4}; lambda = 1: {}",
        strong[0],
        0.95 * FRAC_PI_2,
        trend.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" < ")
    ))
}

fn criterion_9() -> Check {
    let params = params(1, 2, 1.0, 4.0);
    let opts = GlueOptions::default();
    let configs = comparison_configs(&params, 10, (0.004, 0.02), 50.0, 7).map_err(|e| e.to_string())?;
    ensure(configs.len() == 10, format!("{} configurations", configs.len()))?;
    let mut min_gap = f64::INFINITY;
    for c in &configs {
        let r = comparison_check(c.s, c.d, c.t0, &params, &opts).map_err(|e| e.to_string())?;
        ensure(r.hypothesis_met, format!("hypothesis fails at {c:?}"))?;
        ensure(r.ordering_holds(1e-6), format!("ordering fails at {c:?}: gap {:e}", r.min_gap))?;
        ensure(r.supersolution_positive(), format!("supersolution fails at {c:?}: {:e}", r.min_supersolution))?;
        min_gap = min_gap.min(r.min_gap);
    }
    Ok(format!("10 configurations, smallest gap {min_gap:.1e}"))
}

fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let r = norm(&v);
    v.into_iter().map(|x| x / r).collect()
}

fn criterion_10() -> Check {
    use OrthogonalMultiplication::*;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let kinds = [Complex, Quaternion, Octonion, Restricted { l: 3 }, Restricted { l: 5 }, Restricted { l: 9 }];
    let mut worst = 0.0f64;
    for m in kinds {
        let (k, l, _) = m.dims();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let z = orthmul_eval(m, &x, &y).map_err(|e| e.to_string())?;
            worst = worst.max((norm(&z) - norm(&x) * norm(&y)).abs());
        }
    }
    ensure(worst <= 1e-12, format!("norm defect {worst:e}"))?;
    let mut eigen = Vec::new();
    for m in [Complex, Quaternion, Octonion] {
        for f in &quadratic_forms(m).map_err(|e| e.to_string())? {
            let trace: i64 = (0..f.len()).map(|j| f[j][j]).sum();
            ensure(trace == 0, format!("{} component trace {trace}", m.name()))?;
        }
        eigen.push(eigenvalue_check(m).map_err(|e| e.to_string())?);
    }
    ensure(eigen == [8, 16, 32], format!("eigenvalues {eigen:?}"))?;

    let map = BiEigenmap::new(1, Complex).map_err(|e| e.to_string())?;
    let p = map.params().map_err(|e| e.to_string())?;
    let profile = glue(PI / 4.0, &p, &GlueOptions::default()).and_then(|g| g.profile()).map_err(|e| e.to_string())?;
    let (dx, dy, _) = map.dims();
    let mut defect = 0.0f64;
    for _ in 0..10_000 {
        let t = rng.gen_range(1e-6..FRAC_PI_2 - 1e-6);
        let u = alpha_hopf_eval(&profile, &map, t, &unit(&mut rng, dx), &unit(&mut rng, dy))
            .map_err(|e| e.to_string())?;
        defect = defect.max((norm(&u) - 1.0).abs());
    }
    ensure(defect <= 1e-10, format!("|u| defect {defect:e}"))?;
    Ok(format!("norm defect {worst:.1e}, traces zero, eigenvalues {eigen:?}, |u| defect {defect:.1e}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("closed-form oracle suite", criterion_1),
        ("exact solution recovery", criterion_2),
        ("solution for p=1 q=2 lambda=1 mu=4", criterion_3),
        ("sign structure of the jump", criterion_4),
        ("no sign change below threshold", criterion_5),
        ("solvability map", criterion_6),
        ("blow-up convergence", criterion_7),
        ("I_s^1 asymptotics", criterion_8),
        ("comparison bound", criterion_9),
        ("eigenmap algebra", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
