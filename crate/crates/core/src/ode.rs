//! Coefficients and residual evaluators for the reduced equation
//!
//! ```text
//! α'' + (p cot t − q tan t) α' − Q(t) sin α cos α = 0,   Q = λ/sin²t + μ/cos²t
//! ```
//!
//! in its original, flux (`(f α')' = f Q sin α cos α`), rescaled and limit
//! forms.

use std::f64::consts::FRAC_PI_2;

use crate::error::{HopfError, Result};
use crate::fd::{self, Stencil};
use crate::grid::GridDomain;
use crate::params::HopfParams;
use crate::profile::Profile;

/// `Q(t) = λ/sin²t + μ/cos²t` on the open interval.
pub fn coeff_q(t: f64, params: &HopfParams) -> Result<f64> {
    check_open(t)?;
    let (s, c) = (t.sin(), (FRAC_PI_2 - t).sin());
    Ok(params.lambda() / (s * s) + params.mu() / (c * c))
}

/// `f(t) = sinᵖt·cosᵠt`; arguments outside `[0, π/2]` are clamped.
pub fn weight_f(t: f64, params: &HopfParams) -> f64 {
    let t = t.clamp(0.0, FRAC_PI_2);
    t.sin().powi(params.p() as i32) * (FRAC_PI_2 - t).sin().powi(params.q() as i32)
}

/// `f'(t)/f(t) = p cot t − q tan t`.
pub fn drift(t: f64, params: &HopfParams) -> Result<f64> {
    check_open(t)?;
    let (s, c) = (t.sin(), (FRAC_PI_2 - t).sin());
    Ok(f64::from(params.p()) * c / s - f64::from(params.q()) * s / c)
}

/// Positive roots of the indicial equations at `t = 0` and `t = π/2`.
pub fn indicial_exponents(params: &HopfParams) -> (f64, f64) {
    (params.r0(), params.r1())
}

/// Coefficients of the rescaled equation for `γ(x) = α(s x)`:
/// `(s(p cot(sx) − q tan(sx)), s² Q(sx))`.
pub fn rescaled_coefficients(x: f64, s: f64, params: &HopfParams) -> Result<(f64, f64)> {
    let t = s * x;
    if !(t > 0.0 && t < FRAC_PI_2) {
        return Err(HopfError::Domain(format!("s*t = {t} outside (0, pi/2)")));
    }
    Ok((s * drift(t, params)?, s * s * coeff_q(t, params)?))
}

/// Pointwise residual values with the node each one belongs to.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Residual {
    pub index: Vec<usize>,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl Residual {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|r|` over nodes with `lo ≤ t ≤ hi`.
    pub fn max_abs_within(&self, lo: f64, hi: f64) -> f64 {
        self.t
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= lo && **t <= hi)
            .fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    /// Per-node values for CSV output (`None` where no residual was formed).
    pub fn per_node(&self, n: usize) -> Vec<Option<f64>> {
        let mut out = vec![None; n];
        for (&i, &v) in self.index.iter().zip(&self.values) {
            out[i] = Some(v);
        }
        out
    }
}

/// Residual of the original equation at interior nodes (second order).
pub fn residual(profile: &Profile, params: &HopfParams) -> Result<Residual> {
    residual_with(profile, params, Stencil::Three)
}

pub fn residual_with(profile: &Profile, params: &HopfParams, stencil: Stencil) -> Result<Residual> {
    check_angle_profile(profile)?;
    evaluate(profile, stencil, |t, a, d1, d2| {
        Ok(d2 + drift(t, params)? * d1 - coeff_q(t, params)? * a.sin() * a.cos())
    })
}

/// Residual of the flux form `(f α')' − f Q sin α cos α`.
///
/// With the three-point stencil the flux is differenced conservatively
/// between half-nodes; with five points the product rule is applied to
/// nodal derivatives.
pub fn flux_residual(profile: &Profile, params: &HopfParams) -> Result<Residual> {
    flux_residual_with(profile, params, Stencil::Three)
}

pub fn flux_residual_with(profile: &Profile, params: &HopfParams, stencil: Stencil) -> Result<Residual> {
    check_angle_profile(profile)?;
    if stencil == Stencil::Five {
        return evaluate(profile, stencil, |t, a, d1, d2| {
            let f = weight_f(t, params);
            Ok(f * (d2 + drift(t, params)? * d1) - f * coeff_q(t, params)? * a.sin() * a.cos())
        });
    }
    let t = profile.nodes();
    let v = profile.values();
    let mut out = Residual::default();
    let half = stencil.width() / 2;
    for (lo, hi) in pieces(profile) {
        for i in lo + half..(hi + 1).saturating_sub(half) {
            let (hl, hr) = (t[i] - t[i - 1], t[i + 1] - t[i]);
            let fl = weight_f(0.5 * (t[i] + t[i - 1]), params) * (v[i] - v[i - 1]) / hl;
            let fr = weight_f(0.5 * (t[i + 1] + t[i]), params) * (v[i + 1] - v[i]) / hr;
            let div = (fr - fl) / (0.5 * (hl + hr));
            let src = weight_f(t[i], params) * coeff_q(t[i], params)? * v[i].sin() * v[i].cos();
            out.index.push(i);
            out.t.push(t[i]);
            out.values.push(div - src);
        }
    }
    Ok(out)
}

/// Residual of the limit equation `φ'' + φ'/t − (λ/t²) sin φ cos φ`.
pub fn limit_residual(profile: &Profile, lambda: f64) -> Result<Residual> {
    limit_residual_with(profile, lambda, Stencil::Three)
}

pub fn limit_residual_with(profile: &Profile, lambda: f64, stencil: Stencil) -> Result<Residual> {
    if profile.nodes()[0] <= 0.0 {
        return Err(HopfError::Domain("limit equation needs positive nodes".into()));
    }
    evaluate(profile, stencil, |t, a, d1, d2| Ok(d2 + d1 / t - lambda / (t * t) * a.sin() * a.cos()))
}

/// Residual of the rescaled equation for `γ_s(x) = α_s(s x)`.
pub fn rescaled_residual(profile: &Profile, s: f64, params: &HopfParams) -> Result<Residual> {
    rescaled_residual_with(profile, s, params, Stencil::Three)
}

pub fn rescaled_residual_with(profile: &Profile, s: f64, params: &HopfParams, stencil: Stencil) -> Result<Residual> {
    if let Some(&x) = profile.nodes().iter().find(|&&x| !(s * x > 0.0 && s * x < FRAC_PI_2)) {
        return Err(HopfError::Domain(format!("node {x} maps to s*t = {} outside (0, pi/2)", s * x)));
    }
    evaluate(profile, stencil, |x, a, d1, d2| {
        let (b, c) = rescaled_coefficients(x, s, params)?;
        Ok(d2 + b * d1 - c * a.sin() * a.cos())
    })
}

/// Applies `op(t, α, α', α'')` at the nodes of each smooth piece of the
/// profile where the stencil fits centred; a junction with distinct
/// one-sided slopes splits the profile into two pieces.
pub(crate) fn evaluate(
    profile: &Profile,
    stencil: Stencil,
    op: impl Fn(f64, f64, f64, f64) -> Result<f64>,
) -> Result<Residual> {
    let t = profile.nodes();
    let v = profile.values();
    if t.len() < 3 {
        return Err(HopfError::InvalidParams("residual needs at least 3 nodes".into()));
    }
    let mut out = Residual::default();
    let half = stencil.width() / 2;
    for (lo, hi) in pieces(profile) {
        for i in lo + half..(hi + 1).saturating_sub(half) {
            let (d1, d2) = fd::derivatives_at(t, v, i, lo, hi, stencil);
            out.index.push(i);
            out.t.push(t[i]);
            out.values.push(op(t[i], v[i], d1, d2)?);
        }
    }
    Ok(out)
}

fn pieces(profile: &Profile) -> Vec<(usize, usize)> {
    let n = profile.len();
    match profile.grid().junction() {
        Some(j) if profile.has_kink() && j > 0 && j + 1 < n => vec![(0, j), (j, n - 1)],
        _ => vec![(0, n - 1)],
    }
}

fn check_open(t: f64) -> Result<()> {
    if t > 0.0 && t < FRAC_PI_2 {
        Ok(())
    } else {
        Err(HopfError::Domain(format!("t = {t} outside (0, pi/2)")))
    }
}

fn check_angle_profile(profile: &Profile) -> Result<()> {
    if profile.grid().domain() != GridDomain::Angle {
        return Err(HopfError::Domain("profile grid must lie in (0, pi/2)".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grading, Grid};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};

    fn hp(p: u32, q: u32, l: f64, m: f64) -> HopfParams {
        HopfParams::new(p, q, l, m).unwrap()
    }

    #[test]
    fn q_values() {
        assert!((coeff_q(FRAC_PI_4, &hp(1, 2, 1.0, 4.0)).unwrap() - 10.0).abs() < 1e-12);
        assert!((coeff_q(FRAC_PI_6, &hp(1, 1, 1.0, 1.0)).unwrap() - 16.0 / 3.0).abs() < 1e-12);
        let near = coeff_q(1e-6, &hp(1, 1, 1.0, 1.0)).unwrap();
        assert!((near / 1e12 - 1.0).abs() < 1e-6);
        assert!(coeff_q(0.0, &hp(1, 1, 1.0, 1.0)).is_err());
        assert!(coeff_q(FRAC_PI_2, &hp(1, 1, 1.0, 1.0)).is_err());
    }

    #[test]
    fn q_reflection_symmetry() {
        let a = hp(1, 2, 1.3, 4.7);
        let b = hp(1, 2, 4.7, 1.3);
        for &t in &[0.1, 0.4, 0.9, 1.3] {
            let l = coeff_q(t, &a).unwrap();
            let r = coeff_q(FRAC_PI_2 - t, &b).unwrap();
            assert!((l - r).abs() < 1e-12 * l);
        }
    }

    #[test]
    fn f_values() {
        assert!((weight_f(FRAC_PI_4, &hp(1, 2, 1.0, 1.0)) - 2f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((weight_f(PI / 3.0, &hp(1, 1, 1.0, 1.0)) - 3f64.sqrt() / 4.0).abs() < 1e-15);
        assert_eq!(weight_f(0.0, &hp(1, 2, 1.0, 1.0)), 0.0);
        assert!(weight_f(FRAC_PI_2, &hp(1, 2, 1.0, 1.0)).abs() < 1e-30);
    }

    #[test]
    fn indicial_examples() {
        assert_eq!(indicial_exponents(&hp(1, 1, 1.0, 1.0)).0, 1.0);
        assert_eq!(indicial_exponents(&hp(1, 1, 4.0, 1.0)).0, 2.0);
        let r1 = indicial_exponents(&hp(1, 2, 1.0, 4.0)).1;
        assert!((r1 - 1.561_552_812_808_830).abs() < 1e-12);
        for l in [0.3, 1.0, 2.25, 7.0] {
            assert!((hp(1, 3, l, 5.0).r0() - l.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn constants_have_zero_residual() {
        let g = Grid::power(0.01, FRAC_PI_2 - 0.01, 101, 2.0).unwrap();
        let params = hp(1, 2, 1.0, 4.0);
        for c in [FRAC_PI_2, PI, 0.0] {
            let p = Profile::from_fn(g.clone(), |_| c).unwrap();
            let r = residual(&p, &params).unwrap().max_abs();
            assert!(r < 1e-6, "{c} {r}");
            assert!(flux_residual(&p, &params).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_half_line_profiles() {
        let g = Grid::half_line(vec![1.0, 2.0, 3.0], Grading::Custom).unwrap();
        let p = Profile::from_fn(g, |_| 1.0).unwrap();
        assert!(residual(&p, &hp(1, 1, 1.0, 1.0)).is_err());
    }

    #[test]
    fn rescaled_coefficients_approach_limit() {
        let params = hp(1, 2, 1.0, 4.0);
        let s = 1e-4;
        let (b, c) = rescaled_coefficients(1.0, s, &params).unwrap();
        assert!((b - 1.0).abs() < 10.0 * s * s);
        assert!((c - 1.0).abs() < 10.0 * s * s);
        assert!(rescaled_coefficients(2e4, s, &params).is_err());
    }
}
