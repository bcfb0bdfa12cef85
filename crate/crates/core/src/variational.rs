//! One-sided energy minimizers and the glued curve `α_s`.
//!
//! Both energies are discretized in the coordinate `z = ln tan t`, where
//!
//! ```text
//! J = ∫ (α_t² + Q sin²α) f dt = ∫ (w α_z² + V sin²α) dz,
//! w = sin^(p−1)t cos^(q−1)t,   V = w (λ cos²t + μ sin²t),
//! ```
//!
//! with continuous piecewise-quadratic elements on consecutive node triples
//! and four-point Gauss quadrature per element. The singular endpoints are
//! pushed to `z = ±∞`, so a grid uniform in `z` resolves the power-law
//! behaviour at both ends and the scale `s` of the junction alike.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::banded::SymBand;
use crate::error::{HopfError, Result};
use crate::fd;
use crate::grid::{log_tan, sin_cos_of, Grading, Grid};
use crate::ode::weight_f;
use crate::params::HopfParams;
use crate::profile::Profile;
use crate::quadrature::{composite_simpson, GAUSS4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    /// `(0, s]`, energy `J_s`.
    Interior,
    /// `[s, π/2)`, energy `J_s*`.
    Exterior,
}

/// Which energy is being minimized, on which grid.
#[derive(Debug, Clone)]
pub struct FunctionalSpec {
    pub side: Side,
    pub s: f64,
    pub grid: Grid,
    pub params: HopfParams,
}

impl FunctionalSpec {
    pub fn new(side: Side, s: f64, grid: Grid, params: HopfParams) -> Result<Self> {
        let ok = match side {
            Side::Interior => grid.last() == s,
            Side::Exterior => grid.first() == s,
        };
        if !ok {
            return Err(HopfError::Constraint(format!(
                "{side:?} grid [{}, {}] must have s = {s} as its {} node",
                grid.first(),
                grid.last(),
                if side == Side::Interior { "last" } else { "first" }
            )));
        }
        if grid.len() < 3 || grid.len().is_multiple_of(2) {
            return Err(HopfError::InvalidParams(format!(
                "quadratic elements need an odd node count >= 3, got {}",
                grid.len()
            )));
        }
        Ok(Self { side, s, grid, params })
    }

    fn pinned(&self) -> usize {
        match self.side {
            Side::Interior => self.grid.len() - 1,
            Side::Exterior => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverOptions {
    /// Max-norm of the discrete Euler–Lagrange residual, each component
    /// divided by its lumped weight.
    pub gradient_tol: f64,
    pub max_iter: usize,
    /// How close the free endpoint must come to `0` (interior) or `π`
    /// (exterior) to count as attached.
    pub boundary_tol: f64,
    /// Distance of the outermost nodes from `0` and `π/2`.
    pub endpoint_offset: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { gradient_tol: 1e-10, max_iter: 200, boundary_tol: 1e-3, endpoint_offset: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy)]
struct GaussPoint {
    weight: f64,
    basis: [f64; 3],
    dbasis: [f64; 3],
    w: f64,
    v: f64,
}

#[derive(Debug, Clone)]
struct Element {
    first: usize,
    points: [GaussPoint; 4],
}

/// The discrete energy on one grid.
#[derive(Debug, Clone)]
struct Discretization {
    n: usize,
    elements: Vec<Element>,
    lumped: Vec<f64>,
}

fn reduced_weights(z: f64, params: &HopfParams) -> (f64, f64) {
    let (s, c) = sin_cos_of(z);
    let w = s.powi(params.p() as i32 - 1) * c.powi(params.q() as i32 - 1);
    (w, w * (params.lambda() * c * c + params.mu() * s * s))
}

impl Discretization {
    fn new(grid: &Grid, params: &HopfParams) -> Result<Self> {
        let n = grid.len();
        if n < 3 || n.is_multiple_of(2) {
            return Err(HopfError::InvalidParams(format!("need an odd node count >= 3, got {n}")));
        }
        let z: Vec<f64> = grid.nodes().iter().map(|&t| log_tan(t)).collect();
        let mut lumped = vec![0.0; n];
        let elements = (0..(n - 1) / 2)
            .map(|e| {
                let first = 2 * e;
                let zs = [z[first], z[first + 1], z[first + 2]];
                let (mid, half) = (0.5 * (zs[0] + zs[2]), 0.5 * (zs[2] - zs[0]));
                let points = GAUSS4.map(|(xi, wt)| {
                    let zg = mid + half * xi;
                    let c = fd::weights(zg, &zs, 1);
                    let (w, v) = reduced_weights(zg, params);
                    GaussPoint {
                        weight: wt * half,
                        basis: [c[0][0], c[0][1], c[0][2]],
                        dbasis: [c[1][0], c[1][1], c[1][2]],
                        w,
                        v,
                    }
                });
                for g in &points {
                    for k in 0..3 {
                        lumped[first + k] += g.weight * g.basis[k].abs() * (g.w + g.v);
                    }
                }
                Element { first, points }
            })
            .collect();
        Ok(Self { n, elements, lumped })
    }

    fn local(el: &Element, g: &GaussPoint, alpha: &[f64]) -> (f64, f64) {
        let a = &alpha[el.first..el.first + 3];
        let val = g.basis[0] * a[0] + g.basis[1] * a[1] + g.basis[2] * a[2];
        let der = g.dbasis[0] * a[0] + g.dbasis[1] * a[1] + g.dbasis[2] * a[2];
        (val, der)
    }

    fn energy(&self, alpha: &[f64]) -> f64 {
        let mut e = 0.0;
        for el in &self.elements {
            for g in &el.points {
                let (val, der) = Self::local(el, g, alpha);
                let s = val.sin();
                e += g.weight * (g.w * der * der + g.v * s * s);
            }
        }
        e
    }

    fn gradient(&self, alpha: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.n];
        for el in &self.elements {
            for g in &el.points {
                let (val, der) = Self::local(el, g, alpha);
                let flux = 2.0 * g.w * der;
                let src = g.v * (2.0 * val).sin();
                for k in 0..3 {
                    grad[el.first + k] += g.weight * (flux * g.dbasis[k] + src * g.basis[k]);
                }
            }
        }
        grad
    }

    fn hessian(&self, alpha: &[f64]) -> SymBand {
        let mut h = SymBand::zeros(self.n, 2);
        for el in &self.elements {
            for g in &el.points {
                let (val, _) = Self::local(el, g, alpha);
                let curv = 2.0 * g.v * (2.0 * val).cos();
                for i in 0..3 {
                    for j in 0..=i {
                        let v = g.weight * (2.0 * g.w * g.dbasis[i] * g.dbasis[j] + curv * g.basis[i] * g.basis[j]);
                        h.add(el.first + i, el.first + j, v);
                    }
                }
            }
        }
        h
    }

    fn equator_energy(&self) -> f64 {
        self.elements.iter().flat_map(|el| el.points.iter()).map(|g| g.weight * g.v).sum()
    }
}

/// Result of one constrained minimization.
#[derive(Debug, Clone)]
pub struct Minimizer {
    pub side: Side,
    pub profile: Profile,
    pub energy: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// Energy after every accepted iteration, starting with the initial guess.
    pub energy_history: Vec<f64>,
    /// The free endpoint reached `0` (interior) or `π` (exterior).
    pub attached: bool,
    /// `w α_z` at the junction from the weak form (the reaction at the
    /// pinned node); superconvergent.
    pub junction_flux: f64,
    /// Energy of the constant `π/2` on the same grid.
    pub equator_energy: f64,
}

impl Minimizer {
    /// One-sided `dα/dt` at the junction.
    pub fn junction_slope(&self, params: &HopfParams) -> f64 {
        let s = match self.side {
            Side::Interior => self.profile.grid().last(),
            Side::Exterior => self.profile.grid().first(),
        };
        let (w, _) = reduced_weights(log_tan(s), params);
        let (sn, cs) = sin_cos_of(log_tan(s));
        self.junction_flux / (w * sn * cs)
    }

    /// Three-point one-sided difference at the junction.
    pub fn junction_slope_stencil(&self) -> f64 {
        let t = self.profile.nodes();
        let v = self.profile.values();
        let n = t.len();
        match self.side {
            Side::Interior => fd::one_sided_derivative([t[n - 3], t[n - 2], t[n - 1]], [v[n - 3], v[n - 2], v[n - 1]], 2),
            Side::Exterior => fd::one_sided_derivative([t[0], t[1], t[2]], [v[0], v[1], v[2]], 0),
        }
    }
}

/// Evaluates the discrete `J_s` or `J_s*` of `profile` on `spec`'s grid.
pub fn eval_functional(spec: &FunctionalSpec, profile: &Profile) -> Result<f64> {
    if profile.nodes() != spec.grid.nodes() {
        return Err(HopfError::Constraint("profile is not defined on the functional's grid".into()));
    }
    let pinned = profile.values()[spec.pinned()];
    if (pinned - FRAC_PI_2).abs() > 1e-12 {
        return Err(HopfError::Constraint(format!("profile value at s is {pinned}, expected pi/2")));
    }
    Ok(Discretization::new(&spec.grid, &spec.params)?.energy(profile.values()))
}

/// Initial guess `2 atan(exp(r (z − z_s)))`: equal to `π/2` at `s`, with
/// the indicial decay `t^r0` toward `0` and `(π/2 − t)^r1` toward `π/2`.
fn initial_guess(spec: &FunctionalSpec) -> Vec<f64> {
    let zs = log_tan(spec.s);
    let r = match spec.side {
        Side::Interior => spec.params.r0(),
        Side::Exterior => spec.params.r1(),
    };
    spec.grid.nodes().iter().map(|&t| 2.0 * (r * (log_tan(t) - zs)).exp().atan()).collect()
}

/// Damped Newton on the discrete Euler–Lagrange system with a monotone
/// backtracking line search on the energy; falls back to a preconditioned
/// gradient step when the Newton direction is unusable.
pub fn minimize(spec: &FunctionalSpec, opts: &SolverOptions) -> Result<Minimizer> {
    let disc = Discretization::new(&spec.grid, &spec.params)?;
    let n = disc.n;
    let pinned = spec.pinned();
    let free: Vec<usize> = (0..n).filter(|&i| i != pinned).collect();
    let offset = if pinned == 0 { 1 } else { 0 };

    let mut alpha = initial_guess(spec);
    alpha[pinned] = FRAC_PI_2;
    let mut energy = disc.energy(&alpha);
    let mut history = vec![energy];
    let mut grad = disc.gradient(&alpha);
    let scaled_norm = |g: &[f64]| free.iter().fold(0.0f64, |m, &i| m.max(g[i].abs() / disc.lumped[i]));
    let mut gnorm = scaled_norm(&grad);
    let mut iterations = 0;

    while gnorm > opts.gradient_tol {
        if iterations >= opts.max_iter {
            return Err(HopfError::NoConvergence { iterations, gradient_norm: gnorm });
        }
        iterations += 1;

        let full = disc.hessian(&alpha);
        let mut h = SymBand::zeros(free.len(), 2);
        for (a, &i) in free.iter().enumerate() {
            for (b, &j) in free.iter().enumerate().skip(a.saturating_sub(2)).take(5) {
                if b <= a && i.abs_diff(j) <= 2 {
                    h.add(a, b, full.get(i, j));
                }
            }
        }
        let rhs: Vec<f64> = free.iter().map(|&i| -grad[i]).collect();
        let newton = solve_shifted(&h, &rhs, &free.iter().map(|&i| disc.lumped[i]).collect::<Vec<_>>());

        let mut accepted = false;
        let candidates: Vec<Vec<f64>> = {
            let mut c = Vec::new();
            if let Some(d) = newton {
                c.push(d);
            }
            c.push(free.iter().map(|&i| -grad[i] / disc.lumped[i]).collect());
            c
        };
        for dir in candidates {
            let slope: f64 = dir.iter().zip(&free).map(|(d, &i)| d * grad[i]).sum();
            if !(slope < 0.0) {
                continue;
            }
            if -slope <= 1e3 * f64::EPSILON * energy.abs() {
                // decrease below energy resolution: judge by the gradient instead
                let mut trial = alpha.clone();
                for (k, d) in dir.iter().enumerate() {
                    trial[k + offset] += d;
                }
                let g = disc.gradient(&trial);
                if scaled_norm(&g) < gnorm {
                    energy = disc.energy(&trial);
                    alpha = trial;
                    accepted = true;
                    break;
                }
            }
            let mut step = 1.0;
            for _ in 0..60 {
                let mut trial = alpha.clone();
                for (k, d) in dir.iter().enumerate() {
                    trial[k + offset] += step * d;
                }
                let e = disc.energy(&trial);
                if e.is_finite() && e <= energy + 1e-4 * step * slope + 4.0 * f64::EPSILON * energy.abs() {
                    alpha = trial;
                    energy = e;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if accepted {
                break;
            }
        }
        if !accepted {
            // no descent left at working precision
            if gnorm <= 1e3 * opts.gradient_tol {
                break;
            }
            return Err(HopfError::NoConvergence { iterations, gradient_norm: gnorm });
        }
        history.push(energy);
        grad = disc.gradient(&alpha);
        gnorm = scaled_norm(&grad);
    }

    let attached = match spec.side {
        Side::Interior => alpha[0] <= opts.boundary_tol,
        Side::Exterior => alpha[n - 1] >= PI - opts.boundary_tol,
    };
    let junction_flux = match spec.side {
        Side::Interior => 0.5 * grad[pinned],
        Side::Exterior => -0.5 * grad[pinned],
    };
    let profile = Profile::new(spec.grid.clone(), alpha)?;
    Ok(Minimizer {
        side: spec.side,
        profile,
        energy,
        iterations,
        gradient_norm: gnorm,
        energy_history: history,
        attached,
        junction_flux,
        equator_energy: disc.equator_energy(),
    })
}

/// Solves `(H + τ D) x = b`, raising `τ` until the factorization succeeds.
fn solve_shifted(h: &SymBand, b: &[f64], d: &[f64]) -> Option<Vec<f64>> {
    if let Some(ch) = h.cholesky() {
        return Some(ch.solve(b));
    }
    let mut tau = 1e-8;
    for _ in 0..30 {
        let mut shifted = h.clone();
        shifted.add_diagonal(&d.iter().map(|v| tau * v).collect::<Vec<_>>());
        if let Some(ch) = shifted.cholesky() {
            return Some(ch.solve(b));
        }
        tau *= 10.0;
    }
    None
}

/// Minimizer `β_s` of `J_s` over `(0, s]` with `β_s(s) = π/2`.
pub fn minimize_interior(s: f64, params: &HopfParams, grid: Grid, opts: &SolverOptions) -> Result<Minimizer> {
    minimize(&FunctionalSpec::new(Side::Interior, s, grid, *params)?, opts)
}

/// Minimizer `β_s*` of `J_s*` over `[s, π/2)` with `β_s*(s) = π/2`.
pub fn minimize_exterior(s: f64, params: &HopfParams, grid: Grid, opts: &SolverOptions) -> Result<Minimizer> {
    minimize(&FunctionalSpec::new(Side::Exterior, s, grid, *params)?, opts)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GlueOptions {
    /// Total node count over both sides.
    pub n: usize,
    pub solver: SolverOptions,
}

impl Default for GlueOptions {
    fn default() -> Self {
        Self { n: 2001, solver: SolverOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SideStatus {
    pub iterations: usize,
    pub gradient_norm: f64,
    pub attached: bool,
}

/// The glued curve `α_s` and everything measured on it.
#[derive(Debug, Clone)]
pub struct GluedSolution {
    pub s: f64,
    pub beta: Profile,
    pub beta_star: Profile,
    /// `d_plus − d_minus`.
    pub l: f64,
    pub d_minus: f64,
    pub d_plus: f64,
    pub d_minus_stencil: f64,
    pub d_plus_stencil: f64,
    pub j_interior: f64,
    pub j_exterior: f64,
    pub equator_interior: f64,
    pub equator_exterior: f64,
    pub i_s: f64,
    pub i_s1: f64,
    pub i_s2: f64,
    pub interior: SideStatus,
    pub exterior: SideStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct GluedSummary {
    pub s: f64,
    pub l: f64,
    pub l_tilde: Option<f64>,
    pub d_minus: f64,
    pub d_plus: f64,
    #[serde(rename = "I_s")]
    pub i_s: f64,
    #[serde(rename = "I_s1")]
    pub i_s1: f64,
    #[serde(rename = "I_s2")]
    pub i_s2: f64,
    #[serde(rename = "J_interior")]
    pub j_interior: f64,
    #[serde(rename = "J_exterior")]
    pub j_exterior: f64,
    pub interior_converged: bool,
    pub exterior_converged: bool,
    pub interior_attached: bool,
    pub exterior_attached: bool,
}

impl GluedSolution {
    /// Both sides attached to their endpoint values.
    pub fn attached(&self) -> bool {
        self.interior.attached && self.exterior.attached
    }

    /// The glued profile on the union grid, with the one-sided slopes at `s`.
    pub fn profile(&self) -> Result<Profile> {
        let grid = self.beta.grid().join(self.beta_star.grid())?;
        let mut values = self.beta.values().to_vec();
        values.extend_from_slice(&self.beta_star.values()[1..]);
        Ok(Profile::new(grid, values)?.with_junction_slopes(self.d_minus, self.d_plus))
    }

    /// The glued profile restricted to element vertices, where the
    /// quadratic-element solution is superconvergent. Finite-difference
    /// residuals should be taken here.
    pub fn vertex_profile(&self) -> Result<Profile> {
        let full = self.profile()?;
        let junction = full.grid().junction().unwrap_or(0);
        let idx: Vec<usize> = (0..full.len()).step_by(2).collect();
        let grid = Grid::new(idx.iter().map(|&i| full.nodes()[i]).collect(), Grading::Custom)?.with_junction(junction / 2)?;
        Ok(Profile::new(grid, idx.iter().map(|&i| full.values()[i]).collect())?.with_junction_slopes(self.d_minus, self.d_plus))
    }

    /// `J_s(α_s)` over the whole interval.
    pub fn total_energy(&self) -> f64 {
        self.j_interior + self.j_exterior
    }

    pub fn l_tilde(&self, params: &HopfParams) -> Option<f64> {
        jump_via_integral(self, params).ok()
    }

    pub fn summary(&self, params: &HopfParams) -> GluedSummary {
        GluedSummary {
            s: self.s,
            l: self.l,
            l_tilde: self.l_tilde(params),
            d_minus: self.d_minus,
            d_plus: self.d_plus,
            i_s: self.i_s,
            i_s1: self.i_s1,
            i_s2: self.i_s2,
            j_interior: self.j_interior,
            j_exterior: self.j_exterior,
            interior_converged: true,
            exterior_converged: true,
            interior_attached: self.interior.attached,
            exterior_attached: self.exterior.attached,
        }
    }
}

/// Solves both sides at junction `s` on the default split grid and glues.
pub fn glue(s: f64, params: &HopfParams, opts: &GlueOptions) -> Result<GluedSolution> {
    let (inner, outer) = Grid::junction_pair(s, opts.n, opts.solver.endpoint_offset)?;
    glue_on(s, params, inner, outer, &opts.solver)
}

pub fn glue_on(s: f64, params: &HopfParams, inner: Grid, outer: Grid, opts: &SolverOptions) -> Result<GluedSolution> {
    let (lo, hi) = rayon::join(
        || minimize_interior(s, params, inner, opts),
        || minimize_exterior(s, params, outer, opts),
    );
    let (lo, hi) = (lo?, hi?);
    let d_minus = lo.junction_slope(params);
    let d_plus = hi.junction_slope(params);
    let (i_s, i_s1, i_s2) = jump_integrals(&lo.profile, &hi.profile, params);
    Ok(GluedSolution {
        s,
        l: d_plus - d_minus,
        d_minus,
        d_plus,
        d_minus_stencil: lo.junction_slope_stencil(),
        d_plus_stencil: hi.junction_slope_stencil(),
        j_interior: lo.energy,
        j_exterior: hi.energy,
        equator_interior: lo.equator_energy,
        equator_exterior: hi.equator_energy,
        i_s,
        i_s1,
        i_s2,
        interior: SideStatus { iterations: lo.iterations, gradient_norm: lo.gradient_norm, attached: lo.attached },
        exterior: SideStatus { iterations: hi.iterations, gradient_norm: hi.gradient_norm, attached: hi.attached },
        beta: lo.profile,
        beta_star: hi.profile,
    })
}

/// `d/dt (sinᴬt cosᴮt)` from `(sin t, cos t)`.
fn d_sin_cos_power(a: i32, b: i32, s: f64, c: f64) -> f64 {
    let mut d = 0.0;
    if a != 0 {
        d += f64::from(a) * s.powi(a - 1) * c.powi(b + 1);
    }
    if b != 0 {
        d -= f64::from(b) * s.powi(a + 1) * c.powi(b - 1);
    }
    d
}

/// `(f²Q)'` expanded analytically for general `p`:
/// `f²Q = λ sin^(2p−2) cos^(2q) + μ sin^(2p) cos^(2q−2)`.
pub fn f2q_derivative(s: f64, c: f64, params: &HopfParams) -> f64 {
    let (p, q) = (params.p() as i32, params.q() as i32);
    params.lambda() * d_sin_cos_power(2 * p - 2, 2 * q, s, c) + params.mu() * d_sin_cos_power(2 * p, 2 * q - 2, s, c)
}

/// `(I_s, I_s¹, I_s²)` by the composite three-point rule in `z` over both
/// sides. `I_s¹` and `I_s²` use the `p = 1` weights
/// `sin t cos^(2q−1) t` and `sin³t cos^(2q−3) t`.
fn jump_integrals(inner: &Profile, outer: &Profile, params: &HopfParams) -> (f64, f64, f64) {
    let q = params.q() as i32;
    let mut z = Vec::with_capacity(inner.len() + outer.len());
    let mut a = Vec::with_capacity(z.capacity());
    for (p, skip) in [(inner, 0), (outer, 1)] {
        z.extend(p.nodes()[skip..].iter().map(|&t| log_tan(t)));
        a.extend_from_slice(&p.values()[skip..]);
    }
    let mut g0 = Vec::with_capacity(z.len());
    let mut g1 = Vec::with_capacity(z.len());
    let mut g2 = Vec::with_capacity(z.len());
    for (&zi, &ai) in z.iter().zip(&a) {
        let (s, c) = sin_cos_of(zi);
        let jac = s * c;
        let sa = ai.sin();
        let s2 = sa * sa;
        g0.push(f2q_derivative(s, c, params) * s2 * jac);
        g1.push(s * c.powi(2 * q - 1) * s2 * jac);
        g2.push(s * s * s * c.powi(2 * q - 3) * s2 * jac);
    }
    (composite_simpson(&z, &g0), composite_simpson(&z, &g1), composite_simpson(&z, &g2))
}

/// The jump recovered from the energy identity
/// `f(s)²(α̇(s+)² − α̇(s−)²) = ∫ (f²Q)' sin²α_s dt`:
/// `l̃ = I_s / (f(s)² (d_plus + d_minus))`.
pub fn jump_via_integral(glued: &GluedSolution, params: &HopfParams) -> Result<f64> {
    let sum = glued.d_plus + glued.d_minus;
    if !(sum.abs() > 1e-12 * (glued.d_plus.abs() + glued.d_minus.abs() + 1e-300)) {
        return Err(HopfError::Degenerate(format!("d_plus + d_minus = {sum}")));
    }
    let f = weight_f(glued.s, params);
    Ok(glued.i_s / (f * f * sum))
}
