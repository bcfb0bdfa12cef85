use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hopf_core::analysis::{
    blowup_distance, comparison_configs, comparison_on, find_solution, solvability_map, write_map_csv,
    CellVerdict, FindOptions, Verdict,
};
use hopf_core::closed_forms::oracle_suite;
use hopf_core::hopf_map::{alpha_hopf_eval, norm, BiEigenmap, OrthogonalMultiplication};
use hopf_core::ode;
use hopf_core::shooting::{match_shooting, ShootOptions};
use hopf_core::variational::{glue, GlueOptions, SolverOptions};
use hopf_core::{HopfParams, Profile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{Range, RunConfig};

pub struct Outcome {
    pub code: u8,
    pub status: &'static str,
    pub details: Map<String, Value>,
    pub files: Vec<String>,
}

impl Outcome {
    fn new(code: u8, status: &'static str) -> Self {
        Self { code, status, details: Map::new(), files: Vec::new() }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.details.insert(key.into(), value);
        self
    }
}

type CmdResult = Result<Outcome, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn params(cfg: &RunConfig) -> Result<HopfParams, String> {
    HopfParams::new(cfg.p, cfg.q, cfg.lambda, cfg.mu).map_err(|e| format!("usage error: {e}"))
}

fn glue_options(cfg: &RunConfig) -> GlueOptions {
    GlueOptions {
        n: cfg.nodes,
        solver: SolverOptions {
            gradient_tol: cfg.gradient_tol,
            max_iter: cfg.max_iter,
            boundary_tol: cfg.boundary_tol,
            endpoint_offset: cfg.endpoint_offset,
        },
    }
}

fn find_options(cfg: &RunConfig) -> FindOptions {
    FindOptions {
        s_min: cfg.s_min,
        s_max: cfg.s_max,
        n_scan: cfg.n_scan,
        root_tol: cfg.root_tol,
        residual_tol: cfg.residual_tol,
        residual_window: cfg.residual_window,
        boundary_tol: cfg.boundary_tol,
        glue: glue_options(cfg),
        ..FindOptions::default()
    }
}

/// Creates `name` in the output directory and records it.
fn write_file(
    cfg: &RunConfig,
    files: &mut Vec<String>,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> Result<(), String>,
) -> Result<(), String> {
    let path = cfg.out_dir.join(name);
    let mut w = BufWriter::new(File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?);
    body(&mut w)?;
    w.flush().map_err(err)?;
    files.push(name.to_string());
    Ok(())
}

fn profile_csv(profile: &Profile, params: &HopfParams, w: &mut impl Write) -> Result<(), String> {
    let res = ode::residual(profile, params).map_err(err)?;
    profile.write_csv(w, &res.per_node(profile.len())).map_err(err)
}

pub fn solve(cfg: &RunConfig, shoot: bool) -> CmdResult {
    let params = params(cfg)?;
    let verdict = find_solution(&params, &find_options(cfg)).map_err(err)?;
    match verdict {
        Verdict::NoSignChange(scan) => {
            let mut out = Outcome::new(2, "no_sign_change")
                .with("params", json!(params))
                .with("verdict", json!(CellVerdict::NoSignChange.as_str()))
                .with("s_star", Value::Null)
                .with("outside_proven_regime", json!(params.outside_proven_regime()));
            write_file(cfg, &mut out.files, "scan.csv", |w| scan.write_csv(w).map_err(err))?;
            Ok(out)
        }
        Verdict::Solution(found) => {
            let profile = found.glued.profile().map_err(err)?;
            let mut out = Outcome::new(0, "solution_found")
                .with("params", json!(params))
                .with("verdict", json!(CellVerdict::SolutionFound.as_str()))
                .with("s_star", json!(found.glued.s))
                .with("l_at_s_star", json!(found.glued.l))
                .with("bisections", json!(found.bisections))
                .with("nodes_used", json!(found.nodes))
                .with("refinements", json!(found.refinements))
                .with("max_residual", json!(found.max_residual))
                .with("strictly_increasing", json!(profile.is_strictly_increasing()))
                .with("glued", json!(found.glued.summary(&params)))
                .with("brackets", json!(found.scan.brackets))
                .with("outside_proven_regime", json!(params.outside_proven_regime()));
            if shoot {
                let sol = match_shooting(&params, &ShootOptions::default()).map_err(err)?;
                let dist = profile
                    .nodes()
                    .iter()
                    .zip(profile.values())
                    .fold(0.0f64, |m, (&t, &a)| m.max((sol.alpha(t) - a).abs()));
                out = out.with(
                    "shooting",
                    json!({ "c0": sol.state.c0, "c1": sol.state.c1, "mismatch": sol.state.mismatch, "sup_distance": dist }),
                );
            }
            write_file(cfg, &mut out.files, "profile.csv", |w| profile_csv(&profile, &params, w))?;
            write_file(cfg, &mut out.files, "scan.csv", |w| found.scan.write_csv(w).map_err(err))?;
            Ok(out)
        }
    }
}

pub fn scan_jump(cfg: &RunConfig) -> CmdResult {
    let params = params(cfg)?;
    let scan = hopf_core::analysis::scan_jump(&params, cfg.s_min, cfg.s_max, cfg.n_scan, &glue_options(cfg))
        .map_err(err)?;
    let brackets: Vec<Value> =
        scan.brackets.iter().map(|&(i, j)| json!([scan.rows[i].s, scan.rows[j].s])).collect();
    let failed = scan.rows.iter().filter(|r| !r.converged).count();
    let mut out = Outcome::new(0, if scan.has_sign_change() { "sign_change" } else { "no_sign_change" })
        .with("params", json!(params))
        .with("brackets", json!(brackets))
        .with("unconverged_rows", json!(failed));
    write_file(cfg, &mut out.files, "scan.csv", |w| scan.write_csv(w).map_err(err))?;
    Ok(out)
}

pub fn map(cfg: &RunConfig, lambda: &Range, mu: &Range) -> CmdResult {
    let cells = solvability_map(cfg.p, cfg.q, &lambda.values(), &mu.values(), &find_options(cfg));
    let count = |v: CellVerdict| cells.iter().filter(|c| c.verdict == v).count();
    let mut out = Outcome::new(0, "ok")
        .with("lambda", json!(lambda.to_string()))
        .with("mu", json!(mu.to_string()))
        .with("solution_found", json!(count(CellVerdict::SolutionFound)))
        .with("no_sign_change", json!(count(CellVerdict::NoSignChange)))
        .with("inconclusive", json!(count(CellVerdict::Inconclusive)))
        .with("cells", json!(cells));
    write_file(cfg, &mut out.files, "map.csv", |w| write_map_csv(&cells, w).map_err(err))?;
    Ok(out)
}

pub fn blowup(cfg: &RunConfig, s_values: &[f64], eps: f64) -> CmdResult {
    let params = params(cfg)?;
    if s_values.is_empty() {
        return Err("usage error: no junctions given".into());
    }
    let opts = glue_options(cfg);
    let dist: Vec<f64> = s_values
        .par_iter()
        .map(|&s| {
            if !(eps > 0.0 && eps < 1.0 && s > 0.0 && s / eps < std::f64::consts::FRAC_PI_2) {
                return Err(format!("usage error: need 0 < eps < 1 and 0 < s/eps < pi/2 (s = {s}, eps = {eps})"));
            }
            let g = glue(s, &params, &opts).map_err(err)?;
            blowup_distance(&g.profile().map_err(err)?, s, params.lambda(), eps).map_err(err)
        })
        .collect::<Result<_, _>>()?;
    let mut out = Outcome::new(0, "ok")
        .with("params", json!(params))
        .with("eps", json!(eps))
        .with("s", json!(s_values))
        .with("sup_distance", json!(dist));
    write_file(cfg, &mut out.files, "blowup.csv", |w| {
        writeln!(w, "s,sup_distance").map_err(err)?;
        for (s, d) in s_values.iter().zip(&dist) {
            writeln!(w, "{s:.17e},{d:.17e}").map_err(err)?;
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn compare(cfg: &RunConfig, count: usize, seed: u64, s_range: (f64, f64), r: f64, tol: f64) -> CmdResult {
    let params = params(cfg)?;
    if !(s_range.0 > 0.0 && s_range.0 < s_range.1) {
        return Err(format!("usage error: bad junction range {s_range:?}"));
    }
    let configs = comparison_configs(&params, count, s_range, r, seed).map_err(err)?;
    let opts = glue_options(cfg);
    let reports = configs
        .par_iter()
        .map(|c| {
            let g = glue(c.s, &params, &opts).map_err(err)?;
            comparison_on(&g.profile().map_err(err)?, c.s, c.d, c.t0, &params).map_err(err)
        })
        .collect::<Result<Vec<_>, String>>()?;
    let failures: Vec<usize> = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| !(r.hypothesis_met && r.ordering_holds(tol) && r.supersolution_positive()))
        .map(|(i, _)| i)
        .collect();
    let (code, status) = if failures.is_empty() { (0, "ok") } else { (1, "check_failed") };
    let mut out = Outcome::new(code, status)
        .with("params", json!(params))
        .with("seed", json!(seed))
        .with("tolerance", json!(tol))
        .with("failures", json!(failures))
        .with("reports", json!(reports));
    write_file(cfg, &mut out.files, "compare.csv", |w| {
        writeln!(w, "s,d,t0,theta,hypothesis_met,min_gap,min_supersolution,nodes_checked,ordering,supersolution")
            .map_err(err)?;
        for r in &reports {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e},{:.17e},{},{},{}",
                r.s,
                r.d,
                r.t0,
                r.theta,
                r.hypothesis_met,
                r.min_gap,
                r.min_supersolution,
                r.nodes_checked,
                r.ordering_holds(tol),
                r.supersolution_positive()
            )
            .map_err(err)?;
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn verify(cfg: &RunConfig, as_json: bool) -> CmdResult {
    let checks = oracle_suite(cfg.nodes).map_err(err)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(4);
    println!("{:<width$}  {:>12}  {:>9}  result", "name", "value", "tolerance");
    for c in &checks {
        println!(
            "{:<width$}  {:>12.3e}  {:>9.1e}  {}",
            c.name,
            c.value,
            c.tolerance,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    if as_json {
        println!("{}", serde_json::to_string_pretty(&checks).map_err(err)?);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let (code, status) = if failed == 0 { (0, "ok") } else { (1, "check_failed") };
    let mut out = Outcome::new(code, status).with("failed", json!(failed)).with("checks", json!(checks));
    write_file(cfg, &mut out.files, "verify.csv", |w| {
        writeln!(w, "name,value,tolerance,pass").map_err(err)?;
        for c in &checks {
            writeln!(w, "{},{:.17e},{:.17e},{}", c.name, c.value, c.tolerance, c.pass).map_err(err)?;
        }
        Ok(())
    })?;
    Ok(out)
}

fn unit_sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let r = norm(&v);
        if r > 1e-3 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

pub fn hopf_eval(cfg: &RunConfig, path: &Path, kind: &str, lambda_hat: u32, samples: usize, seed: u64) -> CmdResult {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let profile = Profile::read_csv(&text).map_err(err)?;
    let kind = OrthogonalMultiplication::parse(kind).map_err(|e| format!("usage error: {e}"))?;
    let map = BiEigenmap::new(lambda_hat, kind).map_err(|e| format!("usage error: {e}"))?;
    let (dx, dy, dout) = map.dims();
    let (t_lo, t_hi) = (profile.nodes()[0], profile.nodes()[profile.len() - 1]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_norm_defect = 0.0f64;
    let mut pole0 = 0.0f64;
    let mut pole1 = 0.0f64;
    for _ in 0..samples {
        let x = unit_sample(&mut rng, dx);
        let y = unit_sample(&mut rng, dy);
        let t = rng.gen_range(t_lo..=t_hi);
        let u = alpha_hopf_eval(&profile, &map, t, &x, &y).map_err(err)?;
        max_norm_defect = max_norm_defect.max((1.0 - norm(&u)).abs());
        for (te, target, worst) in [(t_lo, 1.0, &mut pole0), (t_hi, -1.0, &mut pole1)] {
            let u = alpha_hopf_eval(&profile, &map, te, &x, &y).map_err(err)?;
            let mut d = u;
            d[dout] -= target;
            *worst = worst.max(norm(&d));
        }
    }
    let report = json!({
        "kind": kind.name(),
        "lambda_hat": lambda_hat,
        "params": map.params().map_err(err)?,
        "samples": samples,
        "seed": seed,
        "max_norm_defect": max_norm_defect,
        "pole_error_t0": pole0,
        "pole_error_pi2": pole1,
        "t_range": [t_lo, t_hi],
    });
    let text = serde_json::to_string_pretty(&report).map_err(err)?;
    println!("{text}");
    let mut out = Outcome::new(0, "ok").with("report", report);
    write_file(cfg, &mut out.files, "hopf_eval.json", |w| writeln!(w, "{text}").map_err(err))?;
    Ok(out)
}
