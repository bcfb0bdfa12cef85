//! Shooting from both singular endpoints with matching at `t_match`.
//!
//! Near `t = 0` solutions behave like `c0 t^r0`; near `π/2`, with
//! `τ = π/2 − t`, like `π − c1 τ^r1`. Each shot carries the sensitivity
//! `v = ∂α/∂ln c`, so the matching Jacobian is exact.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HopfError, Result};
use crate::grid::{Grading, Grid};
use crate::ode::{coeff_q, drift};
use crate::params::HopfParams;
use crate::profile::Profile;
use crate::rk::{integrate, RkOptions, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum End {
    Zero,
    HalfPi,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShootState {
    pub c0: f64,
    pub c1: f64,
    pub t_match: f64,
    /// `(α_left − α_right, α̇_left − α̇_right)` at `t_match`.
    pub mismatch: [f64; 2],
}

#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    pub t_match: f64,
    /// Largest seed distance from the endpoint.
    pub t_start: f64,
    pub rk: RkOptions,
    pub scan_min: f64,
    pub scan_max: f64,
    pub scan_points: usize,
    pub tol: f64,
    pub max_newton: usize,
    pub max_seeds: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            t_match: FRAC_PI_4,
            t_start: 1e-4,
            rk: RkOptions::default(),
            scan_min: 1e-3,
            scan_max: 1e3,
            scan_points: 41,
            tol: 1e-8,
            max_newton: 60,
            max_seeds: 8,
        }
    }
}

/// Local series at an endpoint in the distance `x` to it, for the
/// equation with exponent pair `(k, e)` at that end and `(k', e')` at the
/// other: `c x^r (1 + A x²) + B c³ x^(3r)`.
#[derive(Debug, Clone, Copy)]
struct Series {
    r: f64,
    a: f64,
    b: f64,
}

impl Series {
    fn new(end: End, params: &HopfParams) -> Self {
        let (k, e, k2, e2, r) = match end {
            End::Zero => (params.p() as f64, params.lambda(), params.q() as f64, params.mu(), params.r0()),
            End::HalfPi => (params.q() as f64, params.mu(), params.p() as f64, params.lambda(), params.r1()),
        };
        let indicial = |m: f64| m * m + (k - 1.0) * m - e;
        let a = (k * r / 3.0 + k2 * r + e / 3.0 + e2) / indicial(r + 2.0);
        let b = -2.0 * e / (3.0 * indicial(3.0 * r));
        Self { r, a, b }
    }

    /// `(u, u_x, ∂u/∂ln c, ∂²u/∂x∂ln c)`.
    fn eval(&self, c: f64, x: f64) -> [f64; 4] {
        let Self { r, a, b } = *self;
        let lead = c * x.powf(r);
        let cube = b * c * c * c * x.powf(3.0 * r);
        let u = lead * (1.0 + a * x * x) + cube;
        let ux = lead * (r / x + a * (r + 2.0) * x) + 3.0 * r * cube / x;
        let v = lead * (1.0 + a * x * x) + 3.0 * cube;
        let vx = lead * (r / x + a * (r + 2.0) * x) + 9.0 * r * cube / x;
        [u, ux, v, vx]
    }

    /// Seed distance keeping the neglected terms below `1e-6` relative.
    fn seed_distance(&self, c: f64, cap: f64) -> f64 {
        let mut x = cap;
        if self.a != 0.0 {
            x = x.min((1e-6 / self.a.abs()).sqrt());
        }
        if self.b != 0.0 {
            x = x.min((1e-6 / (self.b.abs() * c * c)).powf(0.5 / self.r));
        }
        x.max(1e-9)
    }
}

/// One integrated branch, in `t`, with state `(α, α̇, v, v̇)`.
#[derive(Debug, Clone)]
pub struct Shot {
    pub end: End,
    pub c: f64,
    pub seed_distance: f64,
    series: Series,
    trajectory: Trajectory<4>,
}

impl Shot {
    /// State at the far end of the integration.
    pub fn terminal(&self) -> [f64; 4] {
        self.trajectory.last().1
    }

    pub fn steps(&self) -> usize {
        self.trajectory.len() - 1
    }

    /// `α(t)`: the series inside the seed distance, dense output elsewhere.
    pub fn alpha(&self, t: f64) -> f64 {
        match self.end {
            End::Zero if t <= self.seed_distance => self.series.eval(self.c, t)[0],
            End::HalfPi if FRAC_PI_2 - t <= self.seed_distance => PI - self.series.eval(self.c, FRAC_PI_2 - t)[0],
            _ => self.trajectory.eval(t)[0],
        }
    }

    /// Accepted integration nodes as a profile, ascending in `t`.
    pub fn to_profile(&self) -> Result<Profile> {
        let mut pts: Vec<(f64, f64)> = self.trajectory.t.iter().zip(&self.trajectory.y).map(|(&t, y)| (t, y[0])).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let grid = Grid::new(pts.iter().map(|p| p.0).collect(), Grading::Custom)?;
        Profile::new(grid, pts.iter().map(|p| p.1).collect())
    }

    fn stays_in_range(&self) -> bool {
        self.trajectory.y.iter().all(|y| y[0] > 0.0 && y[0] < PI)
    }
}

fn rhs(params: HopfParams) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] {
    move |t, y| {
        let d = drift(t, &params).unwrap_or(f64::NAN);
        let q = coeff_q(t, &params).unwrap_or(f64::NAN);
        let (s2, c2) = (2.0 * y[0]).sin_cos();
        [y[1], -d * y[1] + 0.5 * q * s2, y[3], -d * y[3] + q * c2 * y[2]]
    }
}

fn guard(t: f64, y: &[f64; 4]) -> Result<()> {
    if y[0] < -PI || y[0] > 2.0 * PI {
        Err(HopfError::BlowUp { t })
    } else {
        Ok(())
    }
}

fn shoot(end: End, c: f64, params: &HopfParams, t_end: f64, opts: &ShootOptions) -> Result<Shot> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(HopfError::InvalidParams(format!("amplitude must be positive, got {c}")));
    }
    if !(t_end > 0.0 && t_end < FRAC_PI_2) {
        return Err(HopfError::Domain(format!("t_end = {t_end} outside (0, pi/2)")));
    }
    let series = Series::new(end, params);
    let x0 = series.seed_distance(c, opts.t_start);
    let [u, ux, v, vx] = series.eval(c, x0);
    let (t0, y0) = match end {
        End::Zero => (x0, [u, ux, v, vx]),
        End::HalfPi => (FRAC_PI_2 - x0, [PI - u, ux, -v, vx]),
    };
    let ok = match end {
        End::Zero => t_end > t0,
        End::HalfPi => t_end < t0,
    };
    if !ok {
        return Err(HopfError::Domain(format!("t_end = {t_end} lies inside the seed region")));
    }
    let rk = RkOptions { h0: 0.1 * x0, ..opts.rk };
    let trajectory = integrate(rhs(*params), t0, y0, t_end, &rk, guard)?;
    Ok(Shot { end, c, seed_distance: x0, series, trajectory })
}

/// Integrates outward from `t = 0` with amplitude `c0` up to `t_end`.
pub fn integrate_from_zero(c0: f64, params: &HopfParams, t_end: f64, opts: &ShootOptions) -> Result<Shot> {
    shoot(End::Zero, c0, params, t_end, opts)
}

/// Integrates backward from `t = π/2` with amplitude `c1` down to `t_end`.
pub fn integrate_from_pi2(c1: f64, params: &HopfParams, t_end: f64, opts: &ShootOptions) -> Result<Shot> {
    shoot(End::HalfPi, c1, params, t_end, opts)
}

/// Converged shooting solution.
#[derive(Debug, Clone)]
pub struct ShootingSolution {
    pub state: ShootState,
    pub left: Shot,
    pub right: Shot,
    pub newton_iterations: usize,
}

impl ShootingSolution {
    pub fn alpha(&self, t: f64) -> f64 {
        if t <= self.state.t_match {
            self.left.alpha(t)
        } else {
            self.right.alpha(t)
        }
    }

    /// The merged solution sampled on `grid`.
    pub fn to_profile(&self, grid: Grid) -> Result<Profile> {
        Profile::from_fn(grid, |t| self.alpha(t))
    }

    pub fn in_range(&self) -> bool {
        self.left.stays_in_range() && self.right.stays_in_range()
    }
}

/// Mismatch at `t_match` and its Jacobian with respect to `(ln c0, ln c1)`.
#[derive(Debug, Clone)]
pub struct Mismatch {
    pub value: [f64; 2],
    pub jacobian: [[f64; 2]; 2],
    pub left: Shot,
    pub right: Shot,
}

pub fn mismatch(params: &HopfParams, c0: f64, c1: f64, opts: &ShootOptions) -> Result<Mismatch> {
    let left = integrate_from_zero(c0, params, opts.t_match, opts)?;
    let right = integrate_from_pi2(c1, params, opts.t_match, opts)?;
    let (l, r) = (left.terminal(), right.terminal());
    Ok(Mismatch { value: [l[0] - r[0], l[1] - r[1]], jacobian: [[l[2], -r[2]], [l[3], -r[3]]], left, right })
}

/// Mismatch sampled on a separable log grid of amplitudes.
#[derive(Debug, Clone)]
pub struct MismatchMap {
    pub c0: Vec<f64>,
    pub c1: Vec<f64>,
    /// `values[i][j]` at `(c0[i], c1[j])`; `None` where a shot failed.
    pub values: Vec<Vec<Option<[f64; 2]>>>,
}

impl MismatchMap {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "c0,c1,dalpha,ddalpha")?;
        for (i, &c0) in self.c0.iter().enumerate() {
            for (j, &c1) in self.c1.iter().enumerate() {
                match self.values[i][j] {
                    Some([a, b]) => writeln!(out, "{c0:.17e},{c1:.17e},{a:.17e},{b:.17e}")?,
                    None => writeln!(out, "{c0:.17e},{c1:.17e},NaN,NaN")?,
                }
            }
        }
        Ok(())
    }

    /// Cells whose four corners show both signs in both components.
    pub fn sign_change_cells(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for i in 0..self.c0.len().saturating_sub(1) {
            for j in 0..self.c1.len().saturating_sub(1) {
                let corners = [self.values[i][j], self.values[i + 1][j], self.values[i][j + 1], self.values[i + 1][j + 1]];
                if corners.iter().any(Option::is_none) {
                    continue;
                }
                let changes = |k: usize| {
                    let pos = corners.iter().any(|c| c.unwrap()[k] > 0.0);
                    let neg = corners.iter().any(|c| c.unwrap()[k] < 0.0);
                    pos && neg
                };
                if changes(0) && changes(1) {
                    cells.push((i, j));
                }
            }
        }
        cells
    }
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp()).collect()
}

pub fn mismatch_map(params: &HopfParams, opts: &ShootOptions) -> MismatchMap {
    let cs = log_space(opts.scan_min, opts.scan_max, opts.scan_points);
    let left: Vec<Option<[f64; 4]>> =
        cs.par_iter().map(|&c| integrate_from_zero(c, params, opts.t_match, opts).ok().map(|s| s.terminal())).collect();
    let right: Vec<Option<[f64; 4]>> =
        cs.par_iter().map(|&c| integrate_from_pi2(c, params, opts.t_match, opts).ok().map(|s| s.terminal())).collect();
    let values = left
        .iter()
        .map(|l| right.iter().map(|r| Some(((*l)?, (*r)?)).map(|(l, r)| [l[0] - r[0], l[1] - r[1]])).collect())
        .collect();
    MismatchMap { c0: cs.clone(), c1: cs, values }
}

fn scaled(f: [f64; 2]) -> f64 {
    f[0].abs().max(f[1].abs())
}

/// Amplitude for which the shot from `end` passes `π/2` at `t_match`.
fn junction_amplitude(end: End, params: &HopfParams, opts: &ShootOptions) -> Option<f64> {
    let (lo, hi) = (opts.scan_min.ln(), opts.scan_max.ln());
    let mut x = 0.0f64;
    let value = |x: f64| shoot(end, x.exp(), params, opts.t_match, opts).ok().map(|s| s.terminal());
    let mut y = value(x)?;
    for _ in 0..opts.max_newton {
        let f = y[0] - FRAC_PI_2;
        if f.abs() <= 1e-12 {
            return Some(x.exp());
        }
        let dx = (-f / y[2]).clamp(-2.0, 2.0);
        if !dx.is_finite() {
            return None;
        }
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let nx = (x + step * dx).clamp(lo, hi);
            if let Some(ny) = value(nx) {
                if (ny[0] - FRAC_PI_2).abs() < f.abs() {
                    (x, y) = (nx, ny);
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            return None;
        }
    }
    None
}

fn newton(params: &HopfParams, c0: f64, c1: f64, opts: &ShootOptions) -> Option<ShootingSolution> {
    let (lo, hi) = (opts.scan_min.ln(), opts.scan_max.ln());
    let inside = |v: f64| v >= lo && v <= hi;
    let (mut x, mut y) = (c0.ln(), c1.ln());
    let Mismatch { value: mut f, jacobian: mut jac, mut left, mut right } = mismatch(params, x.exp(), y.exp(), opts).ok()?;
    for it in 0..=opts.max_newton {
        if scaled(f) <= opts.tol {
            let state = ShootState { c0: x.exp(), c1: y.exp(), t_match: opts.t_match, mismatch: f };
            return Some(ShootingSolution { state, left, right, newton_iterations: it });
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !(det.abs() > 0.0) || !det.is_finite() {
            return None;
        }
        let mut dx = -(jac[1][1] * f[0] - jac[0][1] * f[1]) / det;
        let mut dy = -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det;
        let big = dx.abs().max(dy.abs());
        if big > 2.0 {
            dx *= 2.0 / big;
            dy *= 2.0 / big;
        }
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let (nx, ny) = (x + step * dx, y + step * dy);
            if !inside(nx) || !inside(ny) {
                step *= 0.5;
                continue;
            }
            if let Ok(m) = mismatch(params, nx.exp(), ny.exp(), opts) {
                if scaled(m.value) < scaled(f) {
                    (x, y, f, jac, left, right) = (nx, ny, m.value, m.jacobian, m.left, m.right);
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            return None;
        }
    }
    None
}

/// Newton on `(ln c0, ln c1)` inside the scan box. Seeds, in order: the
/// pair of amplitudes that each reach `π/2` at `t_match`, the centres of
/// sign-change cells of the coarse mismatch map, and its best points. The
/// first solution staying inside `(0, π)` is returned.
pub fn match_shooting(params: &HopfParams, opts: &ShootOptions) -> Result<ShootingSolution> {
    if !(opts.t_match > 0.0 && opts.t_match < FRAC_PI_2) {
        return Err(HopfError::Domain(format!("t_match = {} outside (0, pi/2)", opts.t_match)));
    }
    let map = mismatch_map(params, opts);
    let cells = map.sign_change_cells();
    let mut seeds: Vec<(f64, f64)> = Vec::new();
    if let (Some(c0), Some(c1)) = (junction_amplitude(End::Zero, params, opts), junction_amplitude(End::HalfPi, params, opts)) {
        seeds.push((c0, c1));
    }
    seeds.extend(cells.iter().map(|&(i, j)| ((map.c0[i] * map.c0[i + 1]).sqrt(), (map.c1[j] * map.c1[j + 1]).sqrt())));
    let mut ranked: Vec<(f64, usize, usize)> = Vec::new();
    for (i, row) in map.values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if let Some(v) = v {
                ranked.push((scaled(*v), i, j));
            }
        }
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    seeds.extend(ranked.iter().take(opts.max_seeds).map(|&(_, i, j)| (map.c0[i], map.c1[j])));

    let found: Vec<Option<ShootingSolution>> = seeds.par_iter().map(|&(c0, c1)| newton(params, c0, c1, opts)).collect();
    let mut fallback = None;
    for sol in found.into_iter().flatten() {
        if sol.in_range() {
            return Ok(sol);
        }
        fallback.get_or_insert(sol);
    }
    fallback.ok_or(HopfError::NoSolution { sign_change_cells: cells.len(), seeds_tried: seeds.len() })
}
