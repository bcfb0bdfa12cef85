//! Problem data for the reduced harmonic-map equation.

use serde::Serialize;

use crate::error::{HopfError, Result};

/// The problem quadruple `(p, q, λ, μ)` with its derived constants.
///
/// `p` and `q` are the dimensions of the two factor spheres of the domain,
/// `λ` and `μ` the bi-eigenvalue of the eigenmap being suspended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopfParams {
    p: u32,
    q: u32,
    lambda: f64,
    mu: f64,
    a: f64,
    r0: f64,
    r1: f64,
}

impl HopfParams {
    pub fn new(p: u32, q: u32, lambda: f64, mu: f64) -> Result<Self> {
        if p < 1 || q < 1 {
            return Err(HopfError::InvalidParams(format!(
                "sphere exponents must be >= 1 (p = {p}, q = {q})"
            )));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(HopfError::InvalidParams(format!("lambda must be positive, got {lambda}")));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(HopfError::InvalidParams(format!("mu must be positive, got {mu}")));
        }
        let r0 = positive_indicial_root(f64::from(p), lambda);
        let r1 = positive_indicial_root(f64::from(q), mu);
        Ok(Self { p, q, lambda, mu, a: 2.0 * lambda.sqrt(), r0, r1 })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Exponent of the blow-up profile, `2√λ`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Indicial exponent at `t = 0`: `α ≈ c·t^r0`.
    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Indicial exponent at `t = π/2`: `π − α ≈ c·(π/2 − t)^r1`.
    pub fn r1(&self) -> f64 {
        self.r1
    }

    /// `p = 1, q > 1, λ ≥ 1, μ > λq`: the regime where existence is known.
    pub fn in_proven_regime(&self) -> bool {
        self.p == 1 && self.q > 1 && self.lambda >= 1.0 && self.mu > self.lambda * f64::from(self.q)
    }

    /// Results for `λ < 1` are computed but carry this label.
    pub fn outside_proven_regime(&self) -> bool {
        self.lambda < 1.0
    }
}

/// Positive root of `r² + (k − 1) r − e = 0`.
fn positive_indicial_root(k: f64, e: f64) -> f64 {
    let b = k - 1.0;
    // (−b + √(b² + 4e))/2 rewritten to avoid cancellation for large b
    2.0 * e / (b + (b * b + 4.0 * e).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(HopfParams::new(0, 1, 1.0, 1.0).is_err());
        assert!(HopfParams::new(1, 0, 1.0, 1.0).is_err());
        assert!(HopfParams::new(1, 1, 0.0, 1.0).is_err());
        assert!(HopfParams::new(1, 1, 1.0, -1.0).is_err());
        assert!(HopfParams::new(1, 1, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn derived_constants() {
        let hp = HopfParams::new(1, 2, 2.25, 4.0).unwrap();
        assert_eq!(hp.a(), 2.0 * 2.25f64.sqrt());
        assert!((hp.r0() - 1.5).abs() < 1e-15);
        let r1 = hp.r1();
        assert!((r1 * r1 + r1 - 4.0).abs() < 1e-13);
        assert!((r1 - (-1.0 + 17f64.sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn regime_labels() {
        assert!(HopfParams::new(1, 2, 1.0, 4.0).unwrap().in_proven_regime());
        assert!(!HopfParams::new(1, 2, 1.0, 1.5).unwrap().in_proven_regime());
        assert!(HopfParams::new(1, 2, 0.5, 4.0).unwrap().outside_proven_regime());
    }
}
