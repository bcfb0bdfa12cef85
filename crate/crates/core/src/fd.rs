//! Finite-difference weights on arbitrary node sets.

/// Weights for derivatives `0..=order` at `x0` from the stencil `xs`
/// (Fornberg's recursion). Row `m` holds the weights of the `m`-th
/// derivative.
pub fn weights(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Number of points in a finite-difference stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    /// Three points, second order.
    #[default]
    Three,
    /// Five points, fourth order.
    Five,
}

impl Stencil {
    pub fn width(self) -> usize {
        match self {
            Stencil::Three => 3,
            Stencil::Five => 5,
        }
    }
}

/// First and second derivative at node `i` using a stencil of the given
/// width kept inside `[lo, hi]` (inclusive index range).
pub fn derivatives_at(xs: &[f64], ys: &[f64], i: usize, lo: usize, hi: usize, stencil: Stencil) -> (f64, f64) {
    let w = stencil.width().min(hi - lo + 1);
    let half = w / 2;
    let start = i.saturating_sub(half).max(lo).min(hi + 1 - w);
    let idx = start..start + w;
    let c = weights(xs[i], &xs[idx.clone()], 2);
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for (k, j) in idx.enumerate() {
        d1 += c[1][k] * ys[j];
        d2 += c[2][k] * ys[j];
    }
    (d1, d2)
}

/// One-sided derivative at `xs[at]` from three nodes on one side.
pub fn one_sided_derivative(xs: [f64; 3], ys: [f64; 3], at: usize) -> f64 {
    let c = weights(xs[at], &xs, 1);
    c[1].iter().zip(ys.iter()).map(|(w, y)| w * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_three_point() {
        let c = weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(c[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(c[2], vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn exact_on_polynomials() {
        let xs = [0.1, 0.13, 0.2, 0.31, 0.35];
        let f = |x: f64| 3.0 * x.powi(4) - x.powi(3) + 2.0 * x - 1.0;
        let df = |x: f64| 12.0 * x.powi(3) - 3.0 * x * x + 2.0;
        let d2f = |x: f64| 36.0 * x * x - 6.0 * x;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        for i in 0..5 {
            let (d1, d2) = derivatives_at(&xs, &ys, i, 0, 4, Stencil::Five);
            assert!((d1 - df(xs[i])).abs() < 1e-9);
            assert!((d2 - d2f(xs[i])).abs() < 1e-7);
        }
    }

    #[test]
    fn one_sided_is_second_order() {
        let err = |h: f64| {
            let xs = [1.0 - 2.0 * h, 1.0 - h, 1.0];
            let ys = xs.map(f64::sin);
            (one_sided_derivative(xs, ys, 2) - 1f64.cos()).abs()
        };
        let ratio = err(1e-2) / err(5e-3);
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }
}
