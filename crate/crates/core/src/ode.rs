//! Adaptive Dormand–Prince 5(4) integrator for scalar ODEs, with the
//! method's free 4th-order continuous extension for sampling between steps.

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Local error tolerance per step, relative to `max(1, |y|)`.
    pub tol: f64,
    /// Largest step as a fraction of the whole span.
    pub max_step_fraction: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            max_step_fraction: 1.0 / 16.0,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Values at the requested output points.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution {
    pub values: Vec<f64>,
    pub stats: StepStats,
}

/// Integration stopped early. `values` holds the outputs reached before the
/// failure; `(t, y)` is the last accepted state.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeFailure {
    pub t: f64,
    pub y: f64,
    pub reason: String,
    pub values: Vec<f64>,
    pub stats: StepStats,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
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
// 5th-order minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// Continuous-extension weights (Hairer, Nørsett & Wanner, dopri5).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

// Interpolant over one accepted step of signed length `hs` from `(t, y)`
// to `y_new`, given its seven stages.
fn interpolate(t: f64, y: f64, y_new: f64, hs: f64, k: &[f64; 7], at: f64) -> f64 {
    let diff = y_new - y;
    let b = hs * k[0] - diff;
    let c = diff - hs * k[6] - b;
    let d = hs * (0..7).map(|j| D[j] * k[j]).sum::<f64>();
    let th = (at - t) / hs;
    let th1 = 1.0 - th;
    y + th * (diff + th1 * (b + th * (c + th1 * d)))
}

/// Integrates `dy/dt = rhs(t, y)` from `(t0, y0)` and reports `y` at each
/// point of `outputs`, which must be monotone in the direction of
/// integration and lie on the same side of `t0`.
///
/// `rhs` returns `Err(reason)` when the state leaves its domain.
pub fn integrate<F>(
    mut rhs: F,
    t0: f64,
    y0: f64,
    outputs: &[f64],
    ctrl: &StepControl,
) -> Result<DenseSolution, OdeFailure>
where
    F: FnMut(f64, f64) -> Result<f64, String>,
{
    let mut stats = StepStats::default();
    let mut values = Vec::with_capacity(outputs.len());
    let fail = |t: f64, y: f64, reason: String, values: Vec<f64>, stats: StepStats| OdeFailure {
        t,
        y,
        reason,
        values,
        stats,
    };

    let Some(&t_end) = outputs.last() else {
        return Ok(DenseSolution { values, stats });
    };
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();

    let mut out = outputs.iter().peekable();
    while let Some(&&t) = out.peek() {
        if (t - t0) * dir > 0.0 {
            break;
        }
        values.push(y0);
        out.next();
    }
    if span == 0.0 {
        return Ok(DenseSolution { values, stats });
    }

    let h_max = span * ctrl.max_step_fraction;
    let mut t = t0;
    let mut y = y0;
    let mut f = match rhs(t, y) {
        Ok(v) => v,
        Err(e) => return Err(fail(t, y, e, values, stats)),
    };

    // Hairer's initial step heuristic, simplified for a scalar problem.
    let sc = ctrl.tol * y.abs().max(1.0);
    let d0 = y.abs() / sc;
    let d1 = f.abs() / sc;
    let mut h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h = h.min(h_max);

    let mut k = [0.0; 7];
    loop {
        if stats.accepted + stats.rejected >= ctrl.max_steps {
            return Err(fail(t, y, "step budget exhausted".into(), values, stats));
        }
        let remaining = (t_end - t) * dir;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = h * dir;

        k[0] = f;
        let mut stage_err = None;
        for i in 1..7 {
            let yi = y + hs * (0..i).map(|j| A[i][j] * k[j]).sum::<f64>();
            match rhs(t + C[i] * hs, yi) {
                Ok(v) => k[i] = v,
                Err(e) => {
                    stage_err = Some(e);
                    break;
                }
            }
        }
        let (y_new, err) = if stage_err.is_none() {
            // Row 6 of A holds the 5th-order weights (FSAL).
            let y_new = y + hs * (0..6).map(|j| A[6][j] * k[j]).sum::<f64>();
            let err_abs = (hs * (0..7).map(|j| E[j] * k[j]).sum::<f64>()).abs();
            let scale = ctrl.tol * y.abs().max(y_new.abs()).max(1.0);
            (y_new, err_abs / scale)
        } else {
            (f64::NAN, f64::INFINITY)
        };

        if err <= 1.0 && y_new.is_finite() {
            stats.accepted += 1;
            let t_new = if last { t_end } else { t + hs };
            let f_new = k[6];
            while let Some(&&to) = out.peek() {
                if (to - t_new) * dir > 0.0 {
                    break;
                }
                let v = if to == t_new {
                    y_new
                } else {
                    interpolate(t, y, y_new, hs, &k, to)
                };
                values.push(v);
                out.next();
            }
            t = t_new;
            y = y_new;
            f = f_new;
            if last {
                return Ok(DenseSolution { values, stats });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(h_max);
        } else {
            stats.rejected += 1;
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            h *= factor;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            let reason = match stage_err {
                Some(e) => format!("step size underflow ({e})"),
                None => "step size underflow".into(),
            };
            return Err(fail(t, y, reason, values, stats));
        }
    }
}
