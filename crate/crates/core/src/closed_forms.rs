//! Exact solutions and constants used as oracles.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::Serialize;

use crate::error::{HopfError, Result};
use crate::fd::Stencil;
use crate::grid::Grid;
use crate::ode::{self, Residual};
use crate::params::HopfParams;
use crate::profile::Profile;
use crate::quadrature;

/// Which closed form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ClosedFormKind {
    /// `φ_s` on `(0, ∞)`, `s > 0`.
    LimitPhi { s: f64 },
    /// `ψ_s` on `(0, π/2)`, `s ∈ (0, π/2)`.
    ComparisonPsi { s: f64 },
    /// `α(t) = 2t`.
    Identity2t,
}

impl ClosedFormKind {
    pub fn eval(&self, t: f64, lambda: f64) -> Result<f64> {
        match *self {
            ClosedFormKind::LimitPhi { s } => phi_limit(t, s, lambda),
            ClosedFormKind::ComparisonPsi { s } => psi_comparison(t, s, lambda),
            ClosedFormKind::Identity2t => Ok(identity_solution(t)),
        }
    }
}

/// The blow-up family `φ_s(t) = arccos((sᵃ − tᵃ)/(sᵃ + tᵃ))`, `a = 2√λ`.
///
/// Evaluated as `2 atan((t/s)^(a/2))`, which is the same function without
/// the loss of precision of `arccos` near `±1`.
pub fn phi_limit(t: f64, s: f64, lambda: f64) -> Result<f64> {
    if !(t > 0.0 && s > 0.0 && lambda > 0.0) {
        return Err(HopfError::Domain(format!("phi needs t, s, lambda > 0 (t = {t}, s = {s}, lambda = {lambda})")));
    }
    Ok(2.0 * (t / s).powf(lambda.sqrt()).atan())
}

/// The comparison family `ψ_s(t) = 2 atan(cot^(a/2)(s)·tan^(a/2)(t))`.
///
/// The exponent `a/2` applies to `tan t`, as in the form `ψ_{ds}` used for
/// the junction estimates.
pub fn psi_comparison(t: f64, s: f64, lambda: f64) -> Result<f64> {
    check_quarter(t, "t")?;
    check_quarter(s, "s")?;
    Ok(2.0 * (tan(t) / tan(s)).powf(lambda.sqrt()).atan())
}

/// Returns `(ψ̇ by a five-point difference, √λ sin ψ/(sin t cos t))`.
pub fn psi_derivative_identity(t: f64, s: f64, lambda: f64) -> Result<(f64, f64)> {
    let psi = psi_comparison(t, s, lambda)?;
    let h = 1e-3 * t.min(FRAC_PI_2 - t);
    let f = |x: f64| psi_comparison(x, s, lambda);
    let lhs = (f(t - 2.0 * h)? - 8.0 * f(t - h)? + 8.0 * f(t + h)? - f(t + 2.0 * h)?) / (12.0 * h);
    let rhs = lambda.sqrt() * psi.sin() / (t.sin() * (FRAC_PI_2 - t).sin());
    Ok((lhs, rhs))
}

/// Residual of the equation solved by every `ψ_s`:
/// `ψ'' + (cot t − tan t) ψ' − λ sin ψ cos ψ/(sin²t cos²t)`.
///
/// This is the reduced equation with `p = q = 1` and `λ = μ`. With the
/// drift `cot t` alone the family leaves a residual of exactly `tan t·ψ'`.
pub fn comparison_residual(profile: &Profile, lambda: f64, stencil: Stencil) -> Result<Residual> {
    let params = HopfParams::new(1, 1, lambda, lambda)?;
    ode::residual_with(profile, &params, stencil)
}

/// `θ = arccos(−λ(q − 1)/(μ − λ))`.
pub fn theta_threshold(params: &HopfParams) -> Result<f64> {
    let (l, m) = (params.lambda(), params.mu());
    if m <= l {
        return Err(HopfError::Domain(format!("theta needs mu > lambda (lambda = {l}, mu = {m})")));
    }
    let ratio = l * f64::from(params.q() - 1) / (m - l);
    if ratio > 1.0 {
        return Err(HopfError::Domain(format!("lambda(q-1)/(mu-lambda) = {ratio} exceeds 1")));
    }
    Ok((-ratio).acos())
}

/// `(fψ̇)' − fQ sin ψ cos ψ` for `ψ` from the comparison family, in closed
/// form: `sin t cos^(q−2) t ((λ − μ) cos ψ − λ(q − 1)) sin ψ` (`p = 1`).
pub fn supersolution_quantity(t: f64, psi: f64, params: &HopfParams) -> f64 {
    let q = params.q() as i32;
    t.sin() * (FRAC_PI_2 - t).sin().powi(q - 2) * supersolution_factor(psi, params) * psi.sin()
}

/// The sign-carrying factor `(λ − μ) cos ψ − λ(q − 1)`.
pub fn supersolution_factor(psi: f64, params: &HopfParams) -> f64 {
    (params.lambda() - params.mu()) * psi.cos() - params.lambda() * f64::from(params.q() - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupConstant {
    /// `∫₀^∞ 4t^(a+1)/(1 + tᵃ)² dt`, or `None` when it diverges (`λ ≤ 1`).
    pub value: Option<f64>,
    pub error_estimate: f64,
    pub outside_proven_regime: bool,
}

impl BlowupConstant {
    pub fn is_divergent(&self) -> bool {
        self.value.is_none()
    }
}

/// The lower bound for `s⁻²·I_s¹` as `s → 0`, by adaptive quadrature.
///
/// With `u = tᵃ` the integral becomes `(4/a)∫₀^∞ u^(2/a)/(1 + u)² du`; the
/// part over `[1, ∞)` is mapped to `[0, 1]` by `u = x^(−a/(a−2))`, which
/// makes the transformed integrand smooth.
pub fn blowup_constant(lambda: f64) -> Result<BlowupConstant> {
    if !(lambda > 0.0) {
        return Err(HopfError::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let outside = lambda < 1.0;
    let a = 2.0 * lambda.sqrt();
    if a <= 2.0 {
        return Ok(BlowupConstant { value: None, error_estimate: f64::INFINITY, outside_proven_regime: outside });
    }
    let e = 2.0 / a;
    let tol = 1e-12;
    let head = quadrature::integrate(|u: f64| u.powf(e) / ((1.0 + u) * (1.0 + u)), 0.0, 1.0, tol)?;
    let m = a / (a - 2.0);
    let tail = quadrature::integrate(
        |x: f64| {
            let xm = x.powf(m);
            m / ((1.0 + xm) * (1.0 + xm))
        },
        0.0,
        1.0,
        tol,
    )?;
    let scale = 4.0 / a;
    Ok(BlowupConstant {
        value: Some(scale * (head.value + tail.value)),
        error_estimate: scale * (head.error + tail.error),
        outside_proven_regime: outside,
    })
}

/// Beta-function value of the same integral: `8π/(a² sin(2π/a))` for `a > 2`.
pub fn blowup_constant_beta(lambda: f64) -> Option<f64> {
    let a = 2.0 * lambda.sqrt();
    (a > 2.0).then(|| 8.0 * PI / (a * a * (2.0 * PI / a).sin()))
}

/// `α(t) = 2t`, the solution for `p = q = 1`, `λ = μ = 1`.
pub fn identity_solution(t: f64) -> f64 {
    2.0 * t
}

/// One row of the closed-form oracle suite.
#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleCheck {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

/// Residuals of `φ_s` and `ψ_s` on `n`-node grids (five-point stencil),
/// the derivative identity for `ψ_s`, and the quadrature of `A(λ)`
/// against its closed form.
pub fn oracle_suite(n: usize) -> Result<Vec<OracleCheck>> {
    let mut out = Vec::new();
    let half_line = Grid::log_half_line(0.01, 100.0, n)?;
    let angle = Grid::log_tan(0.02, FRAC_PI_2 - 0.02, n)?;
    for lambda in [1.0f64, 2.25, 4.0] {
        for s in [0.5, 1.0, 2.0] {
            let p = Profile::from_fn(half_line.clone(), |t| 2.0 * (t / s).powf(lambda.sqrt()).atan())?;
            let r = ode::limit_residual_with(&p, lambda, Stencil::Five)?.max_abs();
            out.push(OracleCheck::new(format!("phi_residual lambda={lambda} s={s}"), r, 1e-6));
        }
        for s in [0.1, 0.3, FRAC_PI_4, 1.2, 1.4] {
            let p = Profile::from_fn(angle.clone(), |t| 2.0 * (tan(t) / tan(s)).powf(lambda.sqrt()).atan())?;
            let r = comparison_residual(&p, lambda, Stencil::Five)?.max_abs();
            out.push(OracleCheck::new(format!("psi_residual lambda={lambda} s={s:.6}"), r, 1e-6));
        }
        let mut worst = 0.0f64;
        for s in [0.1, 0.5, 1.0, 1.4] {
            for k in 1..50 {
                let t = FRAC_PI_2 * k as f64 / 50.0;
                let (lhs, rhs) = psi_derivative_identity(t, s, lambda)?;
                worst = worst.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
            }
        }
        out.push(OracleCheck::new(format!("psi_derivative_identity lambda={lambda}"), worst, 1e-8));
    }
    for lambda in [2.25, 4.0, 9.0] {
        let quad = blowup_constant(lambda)?.value.unwrap_or(f64::NAN);
        let exact = blowup_constant_beta(lambda).unwrap_or(f64::NAN);
        out.push(OracleCheck::new(format!("blowup_constant lambda={lambda}"), (quad - exact).abs(), 1e-8));
    }
    Ok(out)
}

fn tan(t: f64) -> f64 {
    t.sin() / (FRAC_PI_2 - t).sin()
}

fn check_quarter(x: f64, name: &str) -> Result<()> {
    if x > 0.0 && x < FRAC_PI_2 {
        Ok(())
    } else {
        Err(HopfError::Domain(format!("{name} = {x} outside (0, pi/2)")))
    }
}
