//! Node sequences on the open quarter period `(0, π/2)` (or on `(0, ∞)` for
//! the rescaled and limit problems).

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{HopfError, Result};

/// How the nodes of a [`Grid`] were distributed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Grading {
    Uniform,
    /// Algebraic clustering toward both ends with the given exponent (≥ 1).
    Power(f64),
    /// Uniform in `z = ln tan t`: geometric clustering at `0` and at `π/2`.
    LogTan,
    /// Uniform in `ln t`.
    Log,
    /// Nodes supplied by the caller.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GridDomain {
    /// Nodes in `(0, π/2)`.
    Angle,
    /// Nodes in `(0, ∞)`.
    HalfLine,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    nodes: Vec<f64>,
    grading: Grading,
    domain: GridDomain,
    junction: Option<usize>,
}

impl Grid {
    /// Grid on `(0, π/2)`; nodes must be strictly increasing.
    pub fn new(nodes: Vec<f64>, grading: Grading) -> Result<Self> {
        check_increasing(&nodes)?;
        if nodes[0] <= 0.0 || *nodes.last().unwrap() >= FRAC_PI_2 {
            return Err(HopfError::Domain(format!(
                "grid nodes must lie in (0, pi/2), got [{}, {}]",
                nodes[0],
                nodes.last().unwrap()
            )));
        }
        Ok(Self { nodes, grading, domain: GridDomain::Angle, junction: None })
    }

    /// Grid on `(0, ∞)` for the rescaled and limit equations.
    pub fn half_line(nodes: Vec<f64>, grading: Grading) -> Result<Self> {
        check_increasing(&nodes)?;
        if nodes[0] <= 0.0 {
            return Err(HopfError::Domain(format!("half-line nodes must be positive, got {}", nodes[0])));
        }
        Ok(Self { nodes, grading, domain: GridDomain::HalfLine, junction: None })
    }

    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        check_range(lo, hi, n)?;
        Self::new(map_unit(n, |x| lo + (hi - lo) * x, lo, hi), Grading::Uniform)
    }

    /// Nodes clustered algebraically toward both `lo` and `hi`:
    /// `t = lo + (hi − lo)·xᵏ/(xᵏ + (1 − x)ᵏ)` for uniform `x`.
    pub fn power(lo: f64, hi: f64, n: usize, exponent: f64) -> Result<Self> {
        check_range(lo, hi, n)?;
        if !(exponent >= 1.0) {
            return Err(HopfError::InvalidParams(format!("grading exponent must be >= 1, got {exponent}")));
        }
        let g = |x: f64| {
            let a = x.powf(exponent);
            let b = (1.0 - x).powf(exponent);
            a / (a + b)
        };
        Self::new(map_unit(n, |x| lo + (hi - lo) * g(x), lo, hi), Grading::Power(exponent))
    }

    /// Nodes uniform in `z = ln tan t` between `lo` and `hi`.
    pub fn log_tan(lo: f64, hi: f64, n: usize) -> Result<Self> {
        check_range(lo, hi, n)?;
        if lo <= 0.0 || hi >= FRAC_PI_2 {
            return Err(HopfError::Domain(format!("log-tan grid needs 0 < lo < hi < pi/2, got [{lo}, {hi}]")));
        }
        let (za, zb) = (log_tan(lo), log_tan(hi));
        Self::new(map_unit(n, |x| angle_of(za + (zb - za) * x), lo, hi), Grading::LogTan)
    }

    /// Nodes uniform in `ln t` on `[lo, hi] ⊂ (0, ∞)`.
    pub fn log_half_line(lo: f64, hi: f64, n: usize) -> Result<Self> {
        check_range(lo, hi, n)?;
        if lo <= 0.0 {
            return Err(HopfError::Domain(format!("log grid needs lo > 0, got {lo}")));
        }
        let (la, lb) = (lo.ln(), hi.ln());
        Self::half_line(map_unit(n, |x| (la + (lb - la) * x).exp(), lo, hi), Grading::Log)
    }

    /// Splits `(offset, π/2 − offset)` at the junction `s` into an interior
    /// grid ending at `s` and an exterior grid starting at `s`, both uniform
    /// in `ln tan t` with (nearly) equal spacing. Each side gets an odd node
    /// count so that consecutive triples form quadratic elements; the two
    /// sides together hold about `n_total` nodes.
    pub fn junction_pair(s: f64, n_total: usize, offset: f64) -> Result<(Grid, Grid)> {
        if !(offset > 0.0 && offset < s && s < FRAC_PI_2 - offset) {
            return Err(HopfError::Domain(format!(
                "junction s = {s} must lie in ({offset}, pi/2 - {offset})"
            )));
        }
        if n_total < 16 {
            return Err(HopfError::InvalidParams(format!("need at least 16 nodes, got {n_total}")));
        }
        let z_lo = log_tan(offset);
        let z_hi = log_tan(FRAC_PI_2 - offset);
        let z_s = log_tan(s);
        let elements = (n_total - 1) / 2;
        let share = (z_s - z_lo) / (z_hi - z_lo);
        let min_el = 4;
        let inner_el = ((elements as f64 * share).round() as usize).clamp(min_el, elements.saturating_sub(min_el).max(min_el));
        let outer_el = elements.saturating_sub(inner_el).max(min_el);

        let mut inner = Grid::log_tan(offset, s, 2 * inner_el + 1)?;
        let mut outer = Grid::log_tan(s, FRAC_PI_2 - offset, 2 * outer_el + 1)?;
        let last = inner.len() - 1;
        inner.nodes[last] = s;
        inner.junction = Some(last);
        outer.nodes[0] = s;
        outer.junction = Some(0);
        Ok((inner, outer))
    }

    pub fn with_junction(mut self, index: usize) -> Result<Self> {
        if index >= self.nodes.len() {
            return Err(HopfError::DimensionMismatch { expected: self.nodes.len(), got: index });
        }
        self.junction = Some(index);
        Ok(self)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn domain(&self) -> GridDomain {
        self.domain
    }

    pub fn junction(&self) -> Option<usize> {
        self.junction
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Concatenates `self` and `other` where `other` starts at `self`'s last
    /// node; the shared node becomes the junction.
    pub fn join(&self, other: &Grid) -> Result<Grid> {
        if self.last() != other.first() {
            return Err(HopfError::Constraint(format!(
                "grids do not share an end node ({} vs {})",
                self.last(),
                other.first()
            )));
        }
        let mut nodes = self.nodes.clone();
        nodes.extend_from_slice(&other.nodes[1..]);
        let grading = if self.grading == other.grading { self.grading } else { Grading::Custom };
        let mut g = match self.domain {
            GridDomain::Angle => Grid::new(nodes, grading)?,
            GridDomain::HalfLine => Grid::half_line(nodes, grading)?,
        };
        g.junction = Some(self.len() - 1);
        Ok(g)
    }
}

/// `ln tan t`, accurate near both ends of `(0, π/2)`.
pub fn log_tan(t: f64) -> f64 {
    (t.sin() / (FRAC_PI_2 - t).sin()).ln()
}

/// Inverse of [`log_tan`].
pub fn angle_of(z: f64) -> f64 {
    if z <= 0.0 {
        z.exp().atan()
    } else {
        FRAC_PI_2 - (-z).exp().atan()
    }
}

/// `(sin t, cos t)` for `t = atan(eᶻ)`, without cancellation at either end.
pub fn sin_cos_of(z: f64) -> (f64, f64) {
    if z <= 0.0 {
        let e = z.exp();
        let r = (1.0 + e * e).sqrt();
        (e / r, 1.0 / r)
    } else {
        let e = (-z).exp();
        let r = (1.0 + e * e).sqrt();
        (1.0 / r, e / r)
    }
}

fn map_unit(n: usize, f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|i| f(i as f64 / (n - 1) as f64)).collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

fn check_range(lo: f64, hi: f64, n: usize) -> Result<()> {
    if n < 3 {
        return Err(HopfError::InvalidParams(format!("grid needs at least 3 nodes, got {n}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(HopfError::Domain(format!("invalid grid range [{lo}, {hi}]")));
    }
    Ok(())
}

fn check_increasing(nodes: &[f64]) -> Result<()> {
    if nodes.len() < 2 {
        return Err(HopfError::InvalidParams("grid needs at least 2 nodes".into()));
    }
    if nodes.iter().any(|t| !t.is_finite()) {
        return Err(HopfError::Domain("grid nodes must be finite".into()));
    }
    if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
        return Err(HopfError::Domain(format!(
            "grid nodes must be strictly increasing (index {}: {} >= {})",
            i,
            nodes[i],
            nodes[i + 1]
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_monotone_and_out_of_domain() {
        assert!(Grid::new(vec![0.1, 0.1, 0.2], Grading::Custom).is_err());
        assert!(Grid::new(vec![0.0, 0.1], Grading::Custom).is_err());
        assert!(Grid::new(vec![0.1, FRAC_PI_2], Grading::Custom).is_err());
        assert!(Grid::half_line(vec![1.0, 10.0, 100.0], Grading::Custom).is_ok());
    }

    #[test]
    fn log_tan_round_trip() {
        for &t in &[1e-6, 0.01, 0.5, 1.2, FRAC_PI_2 - 1e-6] {
            let back = angle_of(log_tan(t));
            assert!((back - t).abs() <= 1e-15 * t.max(1e-3), "{t} -> {back}");
        }
        let (s, c) = sin_cos_of(log_tan(1e-6));
        assert!((s - 1e-6).abs() < 1e-18 && (c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_grid_clusters_at_ends() {
        let g = Grid::power(1e-3, FRAC_PI_2 - 1e-3, 101, 2.0).unwrap();
        let n = g.nodes();
        assert!(n[1] - n[0] < n[51] - n[50]);
        assert!(n[100] - n[99] < n[51] - n[50]);
        assert_eq!(g.grading(), Grading::Power(2.0));
    }

    #[test]
    fn junction_pair_shares_node() {
        let s = 0.3;
        let (a, b) = Grid::junction_pair(s, 2001, 1e-6).unwrap();
        assert_eq!(a.last(), s);
        assert_eq!(b.first(), s);
        assert_eq!(a.len() % 2, 1);
        assert_eq!(b.len() % 2, 1);
        assert_eq!(a.junction(), Some(a.len() - 1));
        assert_eq!(b.junction(), Some(0));
        let joined = a.join(&b).unwrap();
        assert_eq!(joined.nodes()[joined.junction().unwrap()], s);
        assert!((joined.len() as i64 - 2001).abs() <= 2);
        // spacing in z nearly equal on both sides
        let dz = |g: &Grid| log_tan(g.nodes()[1]) - log_tan(g.nodes()[0]);
        assert!((dz(&a) / dz(&b) - 1.0).abs() < 0.02);
    }
}
