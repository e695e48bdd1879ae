use super::Tolerances;
use crate::error::{Error, Result};

/// Solution sampled at the requested output points.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 5_000_000;

/// Adaptive embedded Runge–Kutta integration of `y' = rhs(t, y)`.
///
/// `outputs` must be strictly increasing; `y0` is the state at `outputs[0]`
/// and the returned trajectory holds the state at every output point. Steps
/// are clipped so every output is hit exactly.
pub fn integrate_ode<F>(rhs: F, y0: &[f64], outputs: &[f64], tol: &Tolerances) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    integrate_ode_limited(rhs, |_, _| f64::INFINITY, y0, outputs, tol)
}

/// [`integrate_ode`] with a state-dependent cap on the step size, used to
/// keep stiff components inside the damping region of the method.
pub fn integrate_ode_limited<F, L>(
    mut rhs: F,
    mut max_step: L,
    y0: &[f64],
    outputs: &[f64],
    tol: &Tolerances,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    L: FnMut(f64, &[f64]) -> f64,
{
    if outputs.is_empty() || outputs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("ODE output points must be strictly increasing".into()));
    }
    let dim = y0.len();
    let mut t = outputs[0];
    let mut y = y0.to_vec();
    let mut traj = Trajectory {
        times: vec![t],
        states: vec![y.clone()],
        accepted_steps: 0,
        rejected_steps: 0,
    };
    if outputs.len() == 1 {
        return Ok(traj);
    }

    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    rhs(t, &y, &mut k[0]);
    if k[0].iter().any(|v| !v.is_finite()) {
        return Err(Error::StepUnderflow { r: t });
    }

    let mut h = initial_step(&y, &k[0], outputs[outputs.len() - 1] - t, tol);
    let mut target_idx = 1;
    let mut total = 0usize;
    while target_idx < outputs.len() {
        let target = outputs[target_idx];
        let remaining = target - t;
        h = h.min(max_step(t, &y));
        let clipped = h >= remaining;
        let step = if clipped { remaining } else { h };
        if step <= 1e-14 * t.abs().max(1.0) && !clipped {
            return Err(Error::StepUnderflow { r: t });
        }
        total += 1;
        if total > MAX_STEPS {
            return Err(Error::StepUnderflow { r: t });
        }

        for s in 1..7 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                stage[i] = y[i] + step * acc;
            }
            rhs(t + C[s] * step, &stage, &mut k[s]);
        }
        let mut err_sq = 0.0;
        let mut finite = true;
        for i in 0..dim {
            let mut hi = 0.0;
            let mut lo = 0.0;
            for s in 0..7 {
                hi += B5[s] * k[s][i];
                lo += B4[s] * k[s][i];
            }
            y_new[i] = y[i] + step * hi;
            let e = step * (hi - lo);
            let scale = tol.ode_abs_tol + tol.ode_rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
            finite &= y_new[i].is_finite() && e.is_finite();
        }
        let err = if finite {
            (err_sq / dim.max(1) as f64).sqrt()
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            t = if clipped { target } else { t + step };
            std::mem::swap(&mut y, &mut y_new);
            // FSAL: the last stage is the derivative at the new point.
            let last = k[6].clone();
            k[0] = last;
            traj.accepted_steps += 1;
            if clipped {
                traj.times.push(t);
                traj.states.push(y.clone());
                target_idx += 1;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            // A clipped step says nothing about the attainable step size.
            h = if clipped { h.max(step * factor) } else { step * factor };
        } else {
            traj.rejected_steps += 1;
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.25
            };
            h = step * factor;
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { r: t });
            }
        }
    }
    Ok(traj)
}

fn initial_step(y: &[f64], f0: &[f64], span: f64, tol: &Tolerances) -> f64 {
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for (yi, fi) in y.iter().zip(f0) {
        let sc = tol.ode_abs_tol + tol.ode_rel_tol * yi.abs();
        d0 = d0.max((yi / sc).abs());
        d1 = d1.max((fi / sc).abs());
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span).max(1e-12 * span)
}
