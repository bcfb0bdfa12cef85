//! Angle profiles `α(t)` sampled on a grid.

use std::io::Write;

use crate::error::{HopfError, Result};
use crate::fd::{self, Stencil};
use crate::grid::{log_tan, Grading, Grid, GridDomain};

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
    junction_slopes: Option<(f64, f64)>,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(HopfError::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(HopfError::Domain(format!("non-finite profile value at node {i}")));
        }
        Ok(Self { grid, values, junction_slopes: None })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    /// Attaches the one-sided derivatives `(left, right)` at the junction node.
    pub fn with_junction_slopes(mut self, left: f64, right: f64) -> Self {
        self.junction_slopes = Some((left, right));
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn junction_slopes(&self) -> Option<(f64, f64)> {
        self.junction_slopes
    }

    /// True when the junction carries distinct one-sided derivatives.
    pub fn has_kink(&self) -> bool {
        match (self.grid.junction(), self.junction_slopes) {
            (Some(_), Some((l, r))) => (l - r).abs() > 1e-12 * (1.0 + l.abs().max(r.abs())),
            _ => false,
        }
    }

    /// All values in `[−tol, π + tol]`.
    pub fn values_in_range(&self, tol: f64) -> bool {
        self.values.iter().all(|&v| v >= -tol && v <= std::f64::consts::PI + tol)
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] > w[0])
    }

    fn coordinate(&self, t: f64) -> f64 {
        match self.grid.domain() {
            GridDomain::Angle => log_tan(t),
            GridDomain::HalfLine => t.ln(),
        }
    }

    /// Piecewise-quadratic interpolation over consecutive node triples, in
    /// the coordinate `ln tan t` (or `ln t` on the half line).
    pub fn eval(&self, t: f64) -> Result<f64> {
        let nodes = self.grid.nodes();
        let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
        if !(t >= lo && t <= hi) {
            return Err(HopfError::Domain(format!("t = {t} outside profile range [{lo}, {hi}]")));
        }
        let n = nodes.len();
        if n < 3 {
            let w = (t - lo) / (hi - lo);
            return Ok(self.values[0] * (1.0 - w) + self.values[1] * w);
        }
        let k = nodes.partition_point(|&x| x <= t).saturating_sub(1).min(n - 2);
        let start = (k / 2 * 2).min(n - 3);
        let xs: Vec<f64> = nodes[start..start + 3].iter().map(|&x| self.coordinate(x)).collect();
        let c = fd::weights(self.coordinate(t), &xs, 0);
        Ok((0..3).map(|j| c[0][j] * self.values[start + j]).sum())
    }

    /// Nodal derivative estimate `dα/dt` (three-point, one-sided at the ends
    /// and on each side of a junction).
    pub fn derivatives(&self) -> Vec<f64> {
        let t = self.grid.nodes();
        let n = t.len();
        let mut d = vec![0.0; n];
        let pieces: Vec<(usize, usize)> = match self.grid.junction() {
            Some(j) if j > 0 && j + 1 < n => vec![(0, j), (j, n - 1)],
            _ => vec![(0, n - 1)],
        };
        for &(lo, hi) in &pieces {
            for i in lo..=hi {
                d[i] = fd::derivatives_at(t, &self.values, i, lo, hi, Stencil::Three).0;
            }
        }
        if let (Some(j), Some((l, r))) = (self.grid.junction(), self.junction_slopes) {
            d[j] = 0.5 * (l + r);
        }
        d
    }

    /// `γ(x) = α(s·x)` on the half line.
    pub fn rescaled(&self, s: f64) -> Result<Profile> {
        if !(s > 0.0) {
            return Err(HopfError::Domain(format!("scale must be positive, got {s}")));
        }
        let nodes = self.grid.nodes().iter().map(|t| t / s).collect();
        let mut grid = Grid::half_line(nodes, Grading::Custom)?;
        if let Some(j) = self.grid.junction() {
            grid = grid.with_junction(j)?;
        }
        let mut p = Profile::new(grid, self.values.clone())?;
        p.junction_slopes = self.junction_slopes.map(|(l, r)| (l * s, r * s));
        Ok(p)
    }

    /// Writes `t,alpha,dalpha,residual`, one row per node. `residual` may be
    /// shorter than the profile; missing entries are written as `nan`.
    pub fn write_csv<W: Write>(&self, mut out: W, residual: &[Option<f64>]) -> Result<()> {
        writeln!(out, "t,alpha,dalpha,residual")?;
        let d = self.derivatives();
        for (i, (&t, &a)) in self.grid.nodes().iter().zip(&self.values).enumerate() {
            let r = residual.get(i).copied().flatten().unwrap_or(f64::NAN);
            writeln!(out, "{t:.17e},{a:.17e},{:.17e},{r:.17e}", d[i])?;
        }
        Ok(())
    }

    /// Reads the `t,alpha,...` CSV written by [`Profile::write_csv`]; only
    /// the first two columns are used.
    pub fn read_csv(text: &str) -> Result<Profile> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| HopfError::Parse("empty profile file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols[0] != "t" || cols[1] != "alpha" {
            return Err(HopfError::Parse(format!("unexpected header '{header}'")));
        }
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (k, line) in lines.enumerate() {
            let mut it = line.split(',');
            let mut next = || -> Result<f64> {
                it.next()
                    .ok_or_else(|| HopfError::Parse(format!("row {}: missing column", k + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| HopfError::Parse(format!("row {}: {e}", k + 1)))
            };
            nodes.push(next()?);
            values.push(next()?);
        }
        Profile::new(Grid::new(nodes, Grading::Custom)?, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_mismatch_is_rejected() {
        let g = Grid::uniform(0.1, 1.0, 5).unwrap();
        assert!(matches!(Profile::new(g, vec![0.0; 4]), Err(HopfError::DimensionMismatch { .. })));
    }

    #[test]
    fn interpolation_is_exact_on_quadratics_in_log_tan() {
        let g = Grid::log_tan(0.01, 1.5, 21).unwrap();
        let f = |t: f64| {
            let z = log_tan(t);
            0.3 * z * z - z + 2.0
        };
        let p = Profile::from_fn(g, f).unwrap();
        for &t in &[0.01, 0.02, 0.3, 0.77, 1.49, 1.5] {
            assert!((p.eval(t).unwrap() - f(t)).abs() < 1e-12);
        }
        assert!(p.eval(1.6).is_err());
    }

    #[test]
    fn csv_round_trip_keeps_values() {
        let g = Grid::uniform(0.1, 1.0, 7).unwrap();
        let p = Profile::from_fn(g, |t| 2.0 * t).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,alpha,dalpha,residual\n"));
        let back = Profile::read_csv(&text).unwrap();
        assert_eq!(back.values(), p.values());
        assert_eq!(back.nodes(), p.nodes());
    }
}
