//! Orthogonal multiplications, Hopf constructions and the map
//! `u(sin t·x, cos t·y) = (sin α(t)·f(x, y), cos α(t))`.

use serde::Serialize;

use crate::error::{HopfError, Result};
use crate::params::HopfParams;
use crate::profile::Profile;

/// A bilinear `f: Rᵏ × Rˡ → Rⁿ` with `|f(x, y)| = |x||y|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrthogonalMultiplication {
    Complex,
    Quaternion,
    Octonion,
    /// `R² × Rˡ → Rˡ⁺¹` for odd `l`: `y` is placed in the first `l` real
    /// coordinates of `C^((l+1)/2)` and multiplied by the complex scalar `x`.
    Restricted { l: usize },
}

impl OrthogonalMultiplication {
    pub fn restricted(l: usize) -> Result<Self> {
        if l.is_multiple_of(2) {
            return Err(HopfError::InvalidParams(format!("restricted multiplication needs odd l, got {l}")));
        }
        Ok(Self::Restricted { l })
    }

    /// `(k, l, n)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        match *self {
            Self::Complex => (2, 2, 2),
            Self::Quaternion => (4, 4, 4),
            Self::Octonion => (8, 8, 8),
            Self::Restricted { l } => (2, l, l + 1),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Complex => "complex".into(),
            Self::Quaternion => "quaternion".into(),
            Self::Octonion => "octonion".into(),
            Self::Restricted { l } => format!("restricted-{l}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "complex" => Ok(Self::Complex),
            "quaternion" => Ok(Self::Quaternion),
            "octonion" => Ok(Self::Octonion),
            _ => match s.strip_prefix("restricted-").and_then(|l| l.parse().ok()) {
                Some(l) => Self::restricted(l),
                None => Err(HopfError::Parse(format!("unknown multiplication kind {s:?}"))),
            },
        }
    }
}

fn conj(a: &[f64]) -> Vec<f64> {
    let mut c: Vec<f64> = a.iter().map(|v| -v).collect();
    c[0] = a[0];
    c
}

/// Cayley–Dickson product `(a, b)(c, d) = (ac − d̄b, da + bc̄)` on
/// power-of-two lengths.
fn cayley_dickson(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 1 {
        return vec![x[0] * y[0]];
    }
    let h = n / 2;
    let (a, b) = x.split_at(h);
    let (c, d) = y.split_at(h);
    let ac = cayley_dickson(a, c);
    let db = cayley_dickson(&conj(d), b);
    let da = cayley_dickson(d, a);
    let bc = cayley_dickson(b, &conj(c));
    let mut out: Vec<f64> = ac.iter().zip(&db).map(|(u, v)| u - v).collect();
    out.extend(da.iter().zip(&bc).map(|(u, v)| u + v));
    out
}

pub fn orthmul_eval(m: OrthogonalMultiplication, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let (k, l, n) = m.dims();
    if x.len() != k {
        return Err(HopfError::DimensionMismatch { expected: k, got: x.len() });
    }
    if y.len() != l {
        return Err(HopfError::DimensionMismatch { expected: l, got: y.len() });
    }
    Ok(match m {
        OrthogonalMultiplication::Restricted { .. } => {
            let mut out = vec![0.0; n];
            let mut padded = y.to_vec();
            padded.push(0.0);
            for j in 0..n / 2 {
                let (re, im) = (padded[2 * j], padded[2 * j + 1]);
                out[2 * j] = x[0] * re - x[1] * im;
                out[2 * j + 1] = x[0] * im + x[1] * re;
            }
            out
        }
        _ => cayley_dickson(x, y),
    })
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `F_f(x, y) = (2 f(x, y), |x|² − |y|²)`.
pub fn hopf_construction_eval(m: OrthogonalMultiplication, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = orthmul_eval(m, x, y)?.into_iter().map(|v| 2.0 * v).collect();
    let (nx, ny) = (norm(x), norm(y));
    out.push(nx * nx - ny * ny);
    Ok(out)
}

/// Integer coefficient matrices of the components of `F_f` as quadratic
/// forms on `R^(2k)`, in the symmetric convention `F_i(z) = zᵀ M_i z`
/// scaled by two so that all entries are integers.
pub fn quadratic_forms(m: OrthogonalMultiplication) -> Result<Vec<Vec<Vec<i64>>>> {
    let (k, l, n) = m.dims();
    if k != l {
        return Err(HopfError::InvalidParams(format!("{} has k = {k} != l = {l}", m.name())));
    }
    let dim = 2 * k;
    let mut forms = vec![vec![vec![0i64; dim]; dim]; n + 1];
    for j in 0..k {
        for jj in 0..k {
            let mut x = vec![0.0; k];
            let mut y = vec![0.0; k];
            x[j] = 1.0;
            y[jj] = 1.0;
            for (i, c) in orthmul_eval(m, &x, &y)?.into_iter().enumerate() {
                if c.fract() != 0.0 {
                    return Err(HopfError::Degenerate(format!("non-integer structure constant {c}")));
                }
                // 2 c x_j y_jj = z^T M z with M[j][k+jj] = M[k+jj][j] = c
                forms[i][j][k + jj] += c as i64;
                forms[i][k + jj][j] += c as i64;
            }
        }
    }
    for j in 0..k {
        forms[n][j][j] = 1;
        forms[n][k + j][k + j] = -1;
    }
    Ok(forms)
}

/// Checks that every component of `F_f` is harmonic (its Hessian
/// `2M` has zero trace, computed exactly) and returns the eigenvalue
/// `2(2 + q − 2) = 2q` of the restriction to `S^(q−1)`, `q = 2k`.
pub fn eigenvalue_check(m: OrthogonalMultiplication) -> Result<u32> {
    let forms = quadratic_forms(m)?;
    for (i, f) in forms.iter().enumerate() {
        let trace: i64 = (0..f.len()).map(|j| 2 * f[j][j]).sum();
        if trace != 0 {
            return Err(HopfError::Constraint(format!("component {i} of F_f has Hessian trace {trace}")));
        }
    }
    let q = 2 * m.dims().0 as u32;
    Ok(2 * q)
}

/// `f(x, y) = g(e^(iλ̂θ), F_h(y))` on `S¹ × S^(2k−1)`, with `F_h` the Hopf
/// construction of `h` and `g` the restricted multiplication into
/// `S^(n+1)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BiEigenmap {
    pub lambda_hat: u32,
    pub hopf: OrthogonalMultiplication,
}

impl BiEigenmap {
    pub fn new(lambda_hat: u32, hopf: OrthogonalMultiplication) -> Result<Self> {
        if lambda_hat == 0 {
            return Err(HopfError::InvalidParams("circle degree must be positive".into()));
        }
        if matches!(hopf, OrthogonalMultiplication::Restricted { .. }) {
            return Err(HopfError::InvalidParams("the Hopf factor needs a square multiplication".into()));
        }
        Ok(Self { lambda_hat, hopf })
    }

    /// `d²/dθ² e^(iλ̂θ) = −λ̂² e^(iλ̂θ)`.
    pub fn circle_eigenvalue(&self) -> f64 {
        f64::from(self.lambda_hat * self.lambda_hat)
    }

    pub fn sphere_eigenvalue(&self) -> Result<f64> {
        Ok(f64::from(eigenvalue_check(self.hopf)?))
    }

    pub fn outer(&self) -> OrthogonalMultiplication {
        OrthogonalMultiplication::Restricted { l: self.hopf.dims().2 + 1 }
    }

    /// Input dimensions `(2, 2k)` and output dimension `n + 2`.
    pub fn dims(&self) -> (usize, usize, usize) {
        let (k, _, n) = self.hopf.dims();
        (2, 2 * k, n + 2)
    }

    /// Parameters of the reduced equation: `p = 1`, `q = 2k − 1`.
    pub fn params(&self) -> Result<HopfParams> {
        let k = self.hopf.dims().0 as u32;
        HopfParams::new(1, 2 * k - 1, self.circle_eigenvalue(), self.sphere_eigenvalue()?)
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let (kx, ky, _) = self.dims();
        if x.len() != kx {
            return Err(HopfError::DimensionMismatch { expected: kx, got: x.len() });
        }
        if y.len() != ky {
            return Err(HopfError::DimensionMismatch { expected: ky, got: y.len() });
        }
        let theta = x[1].atan2(x[0]) * f64::from(self.lambda_hat);
        let r = norm(x);
        let circle = [r * theta.cos(), r * theta.sin()];
        let (a, b) = y.split_at(ky / 2);
        let psi = hopf_construction_eval(self.hopf, a, b)?;
        orthmul_eval(self.outer(), &circle, &psi)
    }
}

fn check_unit(v: &[f64], what: &str) -> Result<()> {
    let n = norm(v);
    if (n - 1.0).abs() > 1e-12 {
        return Err(HopfError::Domain(format!("{what} must be a unit vector, |{what}| = {n}")));
    }
    Ok(())
}

/// `u(sin t·x, cos t·y) = (sin α(t)·f(x, y), cos α(t))`.
pub fn alpha_hopf_eval(profile: &Profile, map: &BiEigenmap, t: f64, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_unit(x, "x")?;
    check_unit(y, "y")?;
    let alpha = profile.eval(t)?;
    let (s, c) = alpha.sin_cos();
    let mut out: Vec<f64> = map.eval(x, y)?.into_iter().map(|v| s * v).collect();
    out.push(c);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use OrthogonalMultiplication::*;

    fn basis(n: usize, i: usize) -> Vec<f64> {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    }

    #[test]
    fn complex_unit() {
        assert_eq!(orthmul_eval(Complex, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(orthmul_eval(Complex, &[0.0, 1.0], &[0.0, 1.0]).unwrap(), vec![-1.0, 0.0]);
    }

    #[test]
    fn quaternion_table() {
        let e = |i| basis(4, i);
        assert_eq!(orthmul_eval(Quaternion, &e(1), &e(2)).unwrap(), e(3));
        assert_eq!(orthmul_eval(Quaternion, &e(2), &e(1)).unwrap(), e(3).iter().map(|v| -v).collect::<Vec<_>>());
        assert_eq!(orthmul_eval(Quaternion, &e(3), &e(3)).unwrap()[0], -1.0);
    }

    #[test]
    fn octonion_basis_products_are_signed_units() {
        for i in 0..8 {
            for j in 0..8 {
                let p = orthmul_eval(Octonion, &basis(8, i), &basis(8, j)).unwrap();
                assert_eq!(p.iter().filter(|v| **v != 0.0).count(), 1);
                assert_eq!(p.iter().map(|v| v.abs()).sum::<f64>(), 1.0);
                if i != j && i > 0 && j > 0 {
                    let q = orthmul_eval(Octonion, &basis(8, j), &basis(8, i)).unwrap();
                    assert!(p.iter().zip(&q).all(|(a, b)| a == &-b));
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            orthmul_eval(Quaternion, &[1.0; 3], &[1.0; 4]),
            Err(HopfError::DimensionMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn equator_and_pole_of_hopf_construction() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let f = hopf_construction_eval(Complex, &[h, 0.0], &[0.0, h]).unwrap();
        assert_eq!(f[2], 0.0);
        assert!((norm(&f[..2]) - 1.0).abs() < 1e-15);
        assert_eq!(hopf_construction_eval(Complex, &[0.6, 0.8], &[0.0, 0.0]).unwrap(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn eigenvalues() {
        assert_eq!(eigenvalue_check(Complex).unwrap(), 8);
        assert_eq!(eigenvalue_check(Quaternion).unwrap(), 16);
        assert_eq!(eigenvalue_check(Octonion).unwrap(), 32);
        assert!(eigenvalue_check(Restricted { l: 3 }).is_err());
    }

    #[test]
    fn bi_eigenmap_params() {
        let b = BiEigenmap::new(2, Complex).unwrap();
        let p = b.params().unwrap();
        assert_eq!((p.p(), p.q(), p.lambda(), p.mu()), (1, 3, 4.0, 8.0));
        assert_eq!(b.dims(), (2, 4, 4));
        assert!(BiEigenmap::new(1, Restricted { l: 3 }).is_err());
    }

    #[test]
    fn parse_round_trip() {
        for m in [Complex, Quaternion, Octonion, Restricted { l: 9 }] {
            assert_eq!(OrthogonalMultiplication::parse(&m.name()).unwrap(), m);
        }
        assert!(OrthogonalMultiplication::parse("restricted-4").is_err());
    }
}
