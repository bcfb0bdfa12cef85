//! Dormand–Prince 5(4) for small fixed-size systems.

use crate::error::{HopfError, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct RkOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step, as a magnitude.
    pub h0: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for RkOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-10, h0: 1e-4, h_min: 1e-14, max_steps: 200_000 }
    }
}

/// Accepted steps with derivatives, for cubic Hermite dense output.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub dy: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.t.last().unwrap(), *self.y.last().unwrap())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Dense output at `t`, clamped to the integrated range.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let n = self.t.len();
        if n == 1 {
            return self.y[0];
        }
        let increasing = self.t[n - 1] > self.t[0];
        let key = |x: f64| if increasing { x } else { -x };
        let k = self.t.partition_point(|&ti| key(ti) <= key(t)).clamp(1, n - 1);
        let (t0, t1) = (self.t[k - 1], self.t[k]);
        let h = t1 - t0;
        let u = ((t - t0) / h).clamp(0.0, 1.0);
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = h00 * self.y[k - 1][i] + h10 * h * self.dy[k - 1][i] + h01 * self.y[k][i] + h11 * h * self.dy[k][i];
        }
        out
    }
}

fn stages<const N: usize>(f: &impl Fn(f64, &[f64; N]) -> [f64; N], t: f64, y: &[f64; N], k0: [f64; N], h: f64) -> [[f64; N]; 7] {
    let mut k = [[0.0; N]; 7];
    k[0] = k0;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..N {
                ys[i] += h * A[s][j] * kj[i];
            }
        }
        k[s] = f(t + C[s] * h, &ys);
    }
    k
}

/// Adaptive integration from `t0` to `t1` (either direction). `guard` may
/// reject a state, aborting the integration with its error.
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &RkOptions,
    guard: impl Fn(f64, &[f64; N]) -> Result<()>,
) -> Result<Trajectory<N>> {
    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut dy = f(t, &y);
    let mut traj = Trajectory { t: vec![t], y: vec![y], dy: vec![dy] };
    let mut h = opts.h0.min((t1 - t0).abs());
    let mut steps = 0;
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(HopfError::StepUnderflow { t });
        }
        h = h.min((t1 - t).abs());
        let k = stages(&f, t, &y, dy, dir * h);
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..N {
            let (mut s5, mut s4) = (0.0, 0.0);
            for s in 0..7 {
                s5 += B5[s] * k[s][i];
                s4 += B4[s] * k[s][i];
            }
            y5[i] = y[i] + dir * h * s5;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((h * (s5 - s4)).abs() / sc);
        }
        if !err.is_finite() || y5.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
            if h < opts.h_min {
                return Err(HopfError::BlowUp { t });
            }
            continue;
        }
        if err <= 1.0 {
            let tn = if (t1 - t).abs() <= h { t1 } else { t + dir * h };
            guard(tn, &y5)?;
            t = tn;
            y = y5;
            dy = k[6];
            traj.t.push(t);
            traj.y.push(y);
            traj.dy.push(dy);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < opts.h_min && (t1 - t).abs() > opts.h_min {
            return Err(HopfError::StepUnderflow { t });
        }
    }
    Ok(traj)
}

/// `steps` equal fifth-order steps from `t0` to `t1`.
pub fn integrate_fixed<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t1: f64,
    steps: usize,
) -> [f64; N] {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        let k = stages(&f, t, &y, f(t, &y), h);
        for i in 0..N {
            y[i] += h * (0..7).map(|s| B5[s] * k[s][i]).sum::<f64>();
        }
    }
    y
}
