//! Experiments on the glued family `α_s`: jump scans, root finding, the
//! solvability map, blow-up behaviour at small `s`, the integrals `I_s¹`,
//! `I_s²`, and the comparison argument near `π/2`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::closed_forms::{phi_limit, psi_comparison, supersolution_quantity, theta_threshold};
use crate::error::{HopfError, Result};
use crate::fd::Stencil;
use crate::grid::{log_tan, sin_cos_of};
use crate::ode;
use crate::params::HopfParams;
use crate::profile::Profile;
use crate::quadrature::GAUSS4;
use crate::variational::{glue, GlueOptions, GluedSolution};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanRow {
    pub s: f64,
    pub l: f64,
    pub l_tilde: f64,
    #[serde(rename = "I_s")]
    pub i_s: f64,
    #[serde(rename = "I_s1")]
    pub i_s1: f64,
    #[serde(rename = "I_s2")]
    pub i_s2: f64,
    /// Both sides converged and attached to their endpoint values.
    pub converged: bool,
}

impl ScanRow {
    fn failed(s: f64) -> Self {
        Self { s, l: f64::NAN, l_tilde: f64::NAN, i_s: f64::NAN, i_s1: f64::NAN, i_s2: f64::NAN, converged: false }
    }

    fn from_glued(g: &GluedSolution, params: &HopfParams) -> Self {
        Self {
            s: g.s,
            l: g.l,
            l_tilde: g.l_tilde(params).unwrap_or(f64::NAN),
            i_s: g.i_s,
            i_s1: g.i_s1,
            i_s2: g.i_s2,
            converged: g.attached(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub params: HopfParams,
    pub rows: Vec<ScanRow>,
    /// Index pairs `(i, j)` of consecutive converged rows with opposite
    /// signs of `l`.
    pub brackets: Vec<(usize, usize)>,
    pub s_star: Option<f64>,
}

impl ScanResult {
    pub fn has_sign_change(&self) -> bool {
        !self.brackets.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "s,l,l_tilde,I_s,I_s1,I_s2,converged")?;
        for r in &self.rows {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
                r.s, r.l, r.l_tilde, r.i_s, r.i_s1, r.i_s2, r.converged
            )?;
        }
        Ok(())
    }
}

pub fn geometric_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn brackets(rows: &[ScanRow]) -> Vec<(usize, usize)> {
    let conv: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].converged).collect();
    conv.windows(2)
        .filter(|w| rows[w[0]].l * rows[w[1]].l < 0.0)
        .map(|w| (w[0], w[1]))
        .collect()
}

/// Glues at `n` geometrically spaced junctions in `[s_min, s_max]`.
pub fn scan_jump(params: &HopfParams, s_min: f64, s_max: f64, n: usize, opts: &GlueOptions) -> Result<ScanResult> {
    if !(s_min > 0.0 && s_min < s_max && s_max < FRAC_PI_2) {
        return Err(HopfError::InvalidParams(format!("need 0 < s_min < s_max < pi/2, got [{s_min}, {s_max}]")));
    }
    if n < 2 {
        return Err(HopfError::InvalidParams(format!("need at least 2 scan points, got {n}")));
    }
    let rows: Vec<ScanRow> = geometric_space(s_min, s_max, n)
        .par_iter()
        .map(|&s| match glue(s, params, opts) {
            Ok(g) => ScanRow::from_glued(&g, params),
            Err(_) => ScanRow::failed(s),
        })
        .collect();
    let brackets = brackets(&rows);
    Ok(ScanResult { params: *params, rows, brackets, s_star: None })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FindOptions {
    pub s_min: f64,
    pub s_max: f64,
    pub n_scan: usize,
    pub root_tol: f64,
    pub max_bisections: usize,
    /// Grid doublings allowed when the residual check fails.
    pub max_refinements: usize,
    pub residual_tol: f64,
    /// Residuals are checked on `[window, π/2 − window]`.
    pub residual_window: f64,
    pub boundary_tol: f64,
    pub glue: GlueOptions,
}

impl Default for FindOptions {
    fn default() -> Self {
        Self {
            s_min: 0.01,
            s_max: 1.5,
            n_scan: 40,
            root_tol: 1e-6,
            max_bisections: 100,
            max_refinements: 2,
            residual_tol: 1e-4,
            residual_window: 0.01,
            boundary_tol: 1e-3,
            glue: GlueOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FoundSolution {
    pub glued: GluedSolution,
    pub scan: ScanResult,
    pub max_residual: f64,
    pub bisections: usize,
    /// Total node count of the grid that passed the checks.
    pub nodes: usize,
    pub refinements: usize,
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Solution(Box<FoundSolution>),
    NoSignChange(ScanResult),
}

/// Five-point residual of the glued solution at element vertices, on
/// `[window, π/2 − window]`.
pub fn glued_residual(glued: &GluedSolution, params: &HopfParams, window: f64) -> Result<f64> {
    let r = ode::residual_with(&glued.vertex_profile()?, params, Stencil::Five)?;
    Ok(r.max_abs_within(window, FRAC_PI_2 - window))
}

fn check_solution(glued: &GluedSolution, params: &HopfParams, opts: &FindOptions) -> Result<f64> {
    let profile = glued.profile()?;
    let v = profile.values();
    if v[0] > opts.boundary_tol || PI - v[v.len() - 1] > opts.boundary_tol {
        return Err(HopfError::Constraint(format!(
            "boundary values {} and {} not within {} of 0 and pi",
            v[0],
            v[v.len() - 1],
            opts.boundary_tol
        )));
    }
    let res = glued_residual(glued, params, opts.residual_window)?;
    if !(res <= opts.residual_tol) {
        return Err(HopfError::Constraint(format!("residual {res:.3e} exceeds {:.1e}", opts.residual_tol)));
    }
    Ok(res)
}

/// Scans `l(s)`, bisects the first bracket in `s` to `|l| ≤ root_tol`
/// and checks the glued profile against the equation. A failed residual
/// check doubles the grid and repeats the bisection, at most
/// `max_refinements` times.
pub fn find_solution(params: &HopfParams, opts: &FindOptions) -> Result<Verdict> {
    let mut scan = scan_jump(params, opts.s_min, opts.s_max, opts.n_scan, &opts.glue)?;
    let direct = scan
        .rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.converged && r.l.abs() <= opts.root_tol)
        .min_by(|a, b| a.1.l.abs().total_cmp(&b.1.l.abs()))
        .map(|(i, _)| i);
    let bracket = match (direct, scan.brackets.first()) {
        (Some(_), _) => None,
        (None, Some(&b)) => Some(b),
        (None, None) => return Ok(Verdict::NoSignChange(scan)),
    };
    let mut level = *opts;
    let mut refinements = 0;
    loop {
        let (glued, bisections) = match (direct, bracket) {
            (Some(i), _) => {
                let g = glue(scan.rows[i].s, params, &level.glue)?;
                if g.l.abs() > opts.root_tol {
                    return Err(HopfError::Constraint(format!(
                        "|l| = {:.3e} at s = {} after refinement",
                        g.l.abs(),
                        g.s
                    )));
                }
                (g, 0)
            }
            (None, Some((i, j))) => bisect(params, scan.rows[i], scan.rows[j], &level)?,
            (None, None) => unreachable!(),
        };
        match check_solution(&glued, params, opts) {
            Ok(max_residual) => {
                scan.s_star = Some(glued.s);
                let nodes = level.glue.n;
                return Ok(Verdict::Solution(Box::new(FoundSolution {
                    glued,
                    scan,
                    max_residual,
                    bisections,
                    nodes,
                    refinements,
                })));
            }
            Err(HopfError::Constraint(_)) if refinements < opts.max_refinements => {
                level.glue.n = 2 * level.glue.n - 1;
                refinements += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn bisect(params: &HopfParams, lo: ScanRow, hi: ScanRow, opts: &FindOptions) -> Result<(GluedSolution, usize)> {
    let (mut a, mut b) = (lo.s, hi.s);
    let sign_a = lo.l.signum();
    for k in 1..=opts.max_bisections {
        let m = 0.5 * (a + b);
        let g = glue(m, params, &opts.glue)?;
        if !g.attached() {
            return Err(HopfError::Constraint(format!("glued solution at s = {m} does not attach")));
        }
        if g.l.abs() <= opts.root_tol {
            return Ok((g, k));
        }
        if g.l.signum() == sign_a {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 4.0 * f64::EPSILON * b {
            return Err(HopfError::NoConvergence { iterations: k, gradient_norm: g.l.abs() });
        }
    }
    Err(HopfError::NoConvergence { iterations: opts.max_bisections, gradient_norm: f64::NAN })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellVerdict {
    SolutionFound,
    NoSignChange,
    Inconclusive,
}

impl CellVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellVerdict::SolutionFound => "solution_found",
            CellVerdict::NoSignChange => "no_sign_change",
            CellVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolvabilityCell {
    pub lambda: f64,
    pub mu: f64,
    pub verdict: CellVerdict,
    pub s_star: Option<f64>,
    pub max_residual: Option<f64>,
    #[serde(skip)]
    pub profile: Option<Profile>,
}

/// Runs [`find_solution`] on every `(λ, μ)` pair, `λ` outermost.
pub fn solvability_map(p: u32, q: u32, lambdas: &[f64], mus: &[f64], opts: &FindOptions) -> Vec<SolvabilityCell> {
    let pairs: Vec<(f64, f64)> = lambdas.iter().flat_map(|&l| mus.iter().map(move |&m| (l, m))).collect();
    pairs
        .par_iter()
        .map(|&(lambda, mu)| {
            let found = HopfParams::new(p, q, lambda, mu).and_then(|params| find_solution(&params, opts));
            let (verdict, s_star, max_residual, profile) = match found {
                Ok(Verdict::Solution(f)) => {
                    (CellVerdict::SolutionFound, Some(f.glued.s), Some(f.max_residual), f.glued.profile().ok())
                }
                Ok(Verdict::NoSignChange(_)) => (CellVerdict::NoSignChange, None, None, None),
                Err(_) => (CellVerdict::Inconclusive, None, None, None),
            };
            SolvabilityCell { lambda, mu, verdict, s_star, max_residual, profile }
        })
        .collect()
}

pub fn write_map_csv<W: Write>(cells: &[SolvabilityCell], mut out: W) -> Result<()> {
    writeln!(out, "lambda,mu,verdict,s_star")?;
    for c in cells {
        let s = c.s_star.map(|s| format!("{s:.17e}")).unwrap_or_default();
        writeln!(out, "{:.17e},{:.17e},{},{}", c.lambda, c.mu, c.verdict.as_str(), s)?;
    }
    Ok(())
}

/// `sup |γ_s(x) − φ(x)|` over `x ∈ [eps, 1/eps]`, `γ_s(x) = α_s(s x)`,
/// `φ(x) = 2 atan(x^√λ)`.
pub fn blowup_compare(s: f64, params: &HopfParams, eps: f64, opts: &GlueOptions) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0 && s / eps < FRAC_PI_2) {
        return Err(HopfError::InvalidParams(format!("need 0 < eps < 1 and s/eps < pi/2 (s = {s}, eps = {eps})")));
    }
    let glued = glue(s, params, opts)?;
    blowup_distance(&glued.profile()?, s, params.lambda(), eps)
}

/// The sup-distance of [`blowup_compare`] for an already glued profile.
pub fn blowup_distance(profile: &Profile, s: f64, lambda: f64, eps: f64) -> Result<f64> {
    let (lo, hi) = (s * eps, s / eps);
    let mut ts: Vec<f64> = profile.nodes().iter().copied().filter(|&t| t > lo && t < hi).collect();
    ts.extend([lo, hi]);
    let mut sup = 0.0f64;
    for t in ts {
        sup = sup.max((profile.eval(t)? - phi_limit(t / s, 1.0, lambda)?).abs());
    }
    Ok(sup)
}

/// `s⁻² I_s¹` along `s_values`.
pub fn estimate_is1_trend(params: &HopfParams, s_values: &[f64], opts: &GlueOptions) -> Result<Vec<f64>> {
    s_values
        .par_iter()
        .map(|&s| glue(s, params, opts).map(|g| g.i_s1 / (s * s)))
        .collect()
}

/// `∫_lo^hi g(t, α(t)) dt` over a profile, by four-point Gauss in
/// `ln tan t` on every node interval, clipped to `[lo, hi]`.
pub fn integrate_profile(profile: &Profile, lo: f64, hi: f64, g: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let nodes = profile.nodes();
    let (zlo, zhi) = (log_tan(lo.max(nodes[0])), log_tan(hi.min(nodes[nodes.len() - 1])));
    let mut total = 0.0;
    for w in nodes.windows(2) {
        let (a, b) = (log_tan(w[0]).max(zlo), log_tan(w[1]).min(zhi));
        if b <= a {
            continue;
        }
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (xi, wt) in GAUSS4 {
            let z = mid + half * xi;
            let (sn, cs) = sin_cos_of(z);
            let t = sn.atan2(cs);
            total += wt * half * g(t, profile.eval(t.clamp(nodes[0], nodes[nodes.len() - 1]))?) * sn * cs;
        }
    }
    Ok(total)
}

/// Split of `I_s²` at `t = Rs` into the inner part `B_s` and the outer
/// part `A_s`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Is2Estimate {
    pub s: f64,
    pub r: f64,
    pub a_s: f64,
    pub b_s: f64,
    pub i_s1: f64,
    pub i_s2: f64,
    /// `tan²(Rs)·I_s¹`.
    pub b_bound: f64,
    pub ratio: f64,
}

impl Is2Estimate {
    pub fn bound_holds(&self) -> bool {
        self.b_s <= self.b_bound
    }
}

pub fn estimate_is2(params: &HopfParams, s: f64, r: f64, opts: &GlueOptions) -> Result<Is2Estimate> {
    if !(r > 1.0 && r * s < FRAC_PI_2) {
        return Err(HopfError::InvalidParams(format!("need R > 1 and Rs < pi/2 (R = {r}, s = {s})")));
    }
    if params.p() != 1 {
        return Err(HopfError::InvalidParams("the split of I_s^2 is defined for p = 1".into()));
    }
    let glued = glue(s, params, opts)?;
    let profile = glued.profile()?;
    let q = params.q() as i32;
    let inner = |t: f64, a: f64| {
        let (sn, cs) = t.sin_cos();
        sn.powi(3) * cs.powi(2 * q - 3) * a.sin().powi(2)
    };
    let b_s = integrate_profile(&profile, 0.0, r * s, inner)?;
    let total = integrate_profile(&profile, 0.0, FRAC_PI_2, inner)?;
    let i_s1 = integrate_profile(&profile, 0.0, FRAC_PI_2, |t, a| {
        let (sn, cs) = t.sin_cos();
        sn * cs.powi(2 * q - 1) * a.sin().powi(2)
    })?;
    Ok(Is2Estimate {
        s,
        r,
        a_s: total - b_s,
        b_s,
        i_s1,
        i_s2: total,
        b_bound: (r * s).tan().powi(2) * i_s1,
        ratio: total / i_s1,
    })
}

/// Outcome of the comparison `α_s ≥ ψ_{ds}` on `(t0, π/2)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComparisonReport {
    pub s: f64,
    pub d: f64,
    pub t0: f64,
    pub theta: f64,
    pub hypothesis_met: bool,
    /// `min (α_s − ψ_{ds})` over nodes in `(t0, π/2)`.
    pub min_gap: f64,
    /// Minimum of the supersolution quantity over nodes where `ψ > θ`.
    pub min_supersolution: f64,
    pub nodes_checked: usize,
}

impl ComparisonReport {
    pub fn ordering_holds(&self, tol: f64) -> bool {
        self.hypothesis_met && self.min_gap >= -tol
    }

    pub fn supersolution_positive(&self) -> bool {
        self.hypothesis_met && self.min_supersolution > 0.0
    }
}

pub fn comparison_check(s: f64, d: f64, t0: f64, params: &HopfParams, opts: &GlueOptions) -> Result<ComparisonReport> {
    let glued = glue(s, params, opts)?;
    comparison_on(&glued.profile()?, s, d, t0, params)
}

/// [`comparison_check`] against an already glued profile.
pub fn comparison_on(profile: &Profile, s: f64, d: f64, t0: f64, params: &HopfParams) -> Result<ComparisonReport> {
    if !(d > 0.0 && d * s < FRAC_PI_2 && t0 > 0.0 && t0 < FRAC_PI_2) {
        return Err(HopfError::InvalidParams(format!("invalid comparison setup (s = {s}, d = {d}, t0 = {t0})")));
    }
    let theta = theta_threshold(params)?;
    let lambda = params.lambda();
    let psi = |t: f64| psi_comparison(t, d * s, lambda);
    let psi0 = psi(t0)?;
    let hypothesis_met = profile.eval(t0)? > psi0 && psi0 > theta.max(0.75 * PI);
    let mut report = ComparisonReport {
        s,
        d,
        t0,
        theta,
        hypothesis_met,
        min_gap: f64::INFINITY,
        min_supersolution: f64::INFINITY,
        nodes_checked: 0,
    };
    if !hypothesis_met {
        return Ok(report);
    }
    for (&t, &a) in profile.nodes().iter().zip(profile.values()) {
        if t <= t0 {
            continue;
        }
        let p = psi(t)?;
        report.nodes_checked += 1;
        report.min_gap = report.min_gap.min(a - p);
        if p > theta {
            report.min_supersolution = report.min_supersolution.min(supersolution_quantity(t, p, params));
        }
    }
    Ok(report)
}

/// Largest `d ∈ (1, R)` with `ψ_{ds}(Rs) ≥ max(θ, 3π/4) + 0.01`.
pub fn comparison_scale(s: f64, r: f64, params: &HopfParams) -> Result<Option<f64>> {
    let target = theta_threshold(params)?.max(0.75 * PI) + 0.01;
    if r * s >= FRAC_PI_2 {
        return Ok(None);
    }
    let value = |d: f64| psi_comparison(r * s, d * s, params.lambda());
    let (mut lo, mut hi) = (1.0, r);
    if value(lo)? < target {
        return Ok(None);
    }
    if value(hi)? >= target {
        return Ok(Some(hi));
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if value(m)? >= target {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(Some(lo))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComparisonConfig {
    pub s: f64,
    pub d: f64,
    pub t0: f64,
}

/// Random `(s, d, t0)` meeting the comparison hypothesis on `ψ`: `s`
/// log-uniform in `s_range`, `t0 = Rs`, `d` uniform between 1 and the
/// largest admissible scale. When no scale is admissible `s` is halved,
/// at most twice.
pub fn comparison_configs(params: &HopfParams, count: usize, s_range: (f64, f64), r: f64, seed: u64) -> Result<Vec<ComparisonConfig>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut s = (rng.gen_range(s_range.0.ln()..s_range.1.ln())).exp();
        let u: f64 = rng.gen_range(0.0..1.0);
        let mut picked = None;
        for _ in 0..3 {
            if let Some(dmax) = comparison_scale(s, r, params)? {
                picked = Some(ComparisonConfig { s, d: 1.0 + u * (dmax - 1.0), t0: r * s });
                break;
            }
            s *= 0.5;
        }
        match picked {
            Some(c) => out.push(c),
            None => return Err(HopfError::Degenerate(format!("no admissible comparison scale near s = {s}"))),
        }
    }
    Ok(out)
}

/// Distances of `cos α_s(Rs)` and `cos ψ_{ds}(Rs)` from their small-`s`
/// limits `−1 + 2/(1 + Rᵃ)` and `−1 + 2/(1 + (R/d)ᵃ)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct JunctionAsymptotics {
    pub s: f64,
    pub cos_alpha: f64,
    pub alpha_limit: f64,
    pub alpha_error: f64,
    pub cos_psi: f64,
    pub psi_limit: f64,
    pub psi_error: f64,
}

pub fn junction_limits(r: f64, d: f64, lambda: f64) -> (f64, f64) {
    let a = 2.0 * lambda.sqrt();
    (-1.0 + 2.0 / (1.0 + r.powf(a)), -1.0 + 2.0 / (1.0 + (r / d).powf(a)))
}

pub fn junction_asymptotics_check(s: f64, r: f64, d: f64, params: &HopfParams, opts: &GlueOptions) -> Result<JunctionAsymptotics> {
    if !(r * s < FRAC_PI_4 && d * s < FRAC_PI_2 && d > 0.0) {
        return Err(HopfError::InvalidParams(format!("need Rs < pi/4 and ds < pi/2 (s = {s}, R = {r}, d = {d})")));
    }
    let glued = glue(s, params, opts)?;
    let cos_alpha = glued.profile()?.eval(r * s)?.cos();
    let cos_psi = psi_comparison(r * s, d * s, params.lambda())?.cos();
    let (alpha_limit, psi_limit) = junction_limits(r, d, params.lambda());
    Ok(JunctionAsymptotics {
        s,
        cos_alpha,
        alpha_limit,
        alpha_error: (cos_alpha - alpha_limit).abs(),
        cos_psi,
        psi_limit,
        psi_error: (cos_psi - psi_limit).abs(),
    })
}

/// `|I_s − (2(μ − λq) I_s¹ − 2μ(q − 1) I_s²)|` for `p = 1`.
pub fn decomposition_defect(row: &ScanRow, params: &HopfParams) -> f64 {
    let (l, m, q) = (params.lambda(), params.mu(), f64::from(params.q()));
    (row.i_s - (2.0 * (m - l * q) * row.i_s1 - 2.0 * m * (q - 1.0) * row.i_s2)).abs()
}
