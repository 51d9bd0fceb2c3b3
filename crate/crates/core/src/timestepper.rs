//! Adaptive Dormand–Prince 5(4) integration of spectral ODE systems.
//!
//! States are flat vectors of complex Fourier coefficients. The step size is
//! set by a PI controller on the embedded error estimate
//! `‖err‖ / (abs_tol + rel_tol · max(‖y_n‖, ‖y_{n+1}‖))` with RMS norms.
//! Trial steps that produce non-finite values are rejected and retried with a
//! smaller step; a state that stays non-finite or exceeds the blow-up ceiling
//! ends the integration with [`Error::BlowUp`].

use crate::error::{Error, Result};
use crate::models::{rhs_bidirectional_full, rhs_bidirectional_reduced, ModelKind, ModelParams, WaveState};
use crate::spectral::{FourierGrid, SpectralField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_dt: f64,
    /// First trial step; `0` selects one automatically.
    pub initial_dt: f64,
    pub max_steps: usize,
    /// Largest admissible coefficient magnitude before declaring blow-up.
    pub blowup_ceiling: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_dt: 0.1,
            initial_dt: 0.0,
            max_steps: 1_000_000,
            blowup_ceiling: 1e12,
        }
    }
}

impl StepControl {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        StepControl {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::validation("step.rel_tol", "must be > 0"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::validation("step.abs_tol", "must be > 0"));
        }
        if !(self.max_dt > 0.0) {
            return Err(Error::validation("step.max_dt", "must be > 0"));
        }
        if !(self.initial_dt >= 0.0) {
            return Err(Error::validation("step.initial_dt", "must be >= 0"));
        }
        if self.max_steps == 0 {
            return Err(Error::validation("step.max_steps", "must be > 0"));
        }
        if !(self.blowup_ceiling > 0.0) {
            return Err(Error::validation("step.blowup_ceiling", "must be > 0"));
        }
        Ok(())
    }
}

/// One accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct Integration {
    pub t: f64,
    pub state: Vec<Complex64>,
    pub log: Vec<StepRecord>,
    pub rejected: usize,
    pub evaluations: usize,
    /// Step size the controller proposes next; reuse it to continue.
    pub next_dt: f64,
}

impl Integration {
    pub fn accepted(&self) -> usize {
        self.log.len()
    }
}

// Dormand & Prince (1980), RK5(4)7M.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const PI_BETA: f64 = 0.04;
const PI_ALPHA: f64 = 0.2 - 0.75 * PI_BETA;
const MIN_SHRINK: f64 = 0.2;
const MAX_GROW: f64 = 10.0;

fn rms(v: &[Complex64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().map(|c| c.norm_sqr()).sum::<f64>() / v.len() as f64).sqrt()
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn all_finite(v: &[Complex64]) -> bool {
    v.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// `out = y + h · Σ a_i k_i`
fn combine(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, k) in terms {
            acc += k[i] * *a;
        }
        *o = y[i] + acc * h;
    }
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1 > t0`.
///
/// `observer` is called after every accepted step with the new time and state;
/// the last call is at exactly `t1`.
pub fn integrate<F, O>(
    mut rhs: F,
    y0: &[Complex64],
    t_span: (f64, f64),
    ctrl: &StepControl,
    mut observer: O,
) -> Result<Integration>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]) -> Result<()>,
    O: FnMut(f64, &[Complex64]),
{
    ctrl.validate()?;
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(Error::Usage(format!("integration needs t1 > t0, got [{t0}, {t1}]")));
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    if !all_finite(&y) {
        return Err(Error::BlowUp {
            time: t0,
            reason: "initial state is not finite".into(),
            state: y,
        });
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut stage = vec![zero; n];
    let mut y_new = vec![zero; n];
    let mut err = vec![zero; n];

    let mut t = t0;
    let mut evaluations = 0usize;
    rhs(t, &y, &mut k1)?;
    evaluations += 1;
    let span = t1 - t0;
    let mut h = if ctrl.initial_dt > 0.0 {
        ctrl.initial_dt
    } else {
        initial_step(&y, &k1, ctrl)
    };
    h = h.min(ctrl.max_dt).min(span);
    let h_min = 1e-14 * t0.abs().max(t1.abs()).max(span);

    let mut log = Vec::new();
    let mut rejected = 0usize;
    let mut err_prev: f64 = 1e-4;
    let mut last_reject = false;
    let mut blowup_reason: Option<String> = None;

    while t < t1 {
        if log.len() >= ctrl.max_steps {
            return Err(Error::StepLimit {
                time: t,
                steps: log.len(),
                state: y,
            });
        }
        if !all_finite(&k1) {
            return Err(Error::BlowUp {
                time: t,
                reason: "right-hand side is not finite".into(),
                state: y,
            });
        }
        let mut last = false;
        if t + h >= t1 || t + 1.01 * h >= t1 {
            h = t1 - t;
            last = true;
        }

        combine(&mut stage, &y, h, &[(A21, &k1)]);
        rhs(t + C2 * h, &stage, &mut k2)?;
        combine(&mut stage, &y, h, &[(A31, &k1), (A32, &k2)]);
        rhs(t + C3 * h, &stage, &mut k3)?;
        combine(&mut stage, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(t + C4 * h, &stage, &mut k4)?;
        combine(&mut stage, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(t + C5 * h, &stage, &mut k5)?;
        combine(
            &mut stage,
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        rhs(t + h, &stage, &mut k6)?;
        combine(
            &mut y_new,
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let t_new = if last { t1 } else { t + h };
        rhs(t_new, &y_new, &mut k7)?;
        evaluations += 6;

        for i in 0..n {
            err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        }
        let scale = ctrl.abs_tol + ctrl.rel_tol * rms(&y).max(rms(&y_new));
        let mut err_norm = rms(&err) / scale;
        let finite = all_finite(&y_new) && all_finite(&k7) && err_norm.is_finite();
        if !finite {
            err_norm = f64::INFINITY;
        }

        if err_norm <= 1.0 {
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            log.push(StepRecord { t, dt: h, error: err_norm });
            let peak = max_abs(&y);
            if peak > ctrl.blowup_ceiling {
                blowup_reason = Some(format!(
                    "coefficient magnitude {peak:e} exceeds ceiling {:e}",
                    ctrl.blowup_ceiling
                ));
            }
            observer(t, &y);
            if blowup_reason.is_some() {
                break;
            }
            let e = err_norm.max(1e-10);
            let mut fac = SAFETY * e.powf(-PI_ALPHA) * err_prev.powf(PI_BETA);
            fac = fac.clamp(1.0 / MAX_GROW, MAX_GROW);
            if last_reject {
                fac = fac.min(1.0);
            }
            err_prev = err_norm.max(1e-4);
            h = (h * fac).min(ctrl.max_dt);
            last_reject = false;
        } else {
            rejected += 1;
            let fac = if err_norm.is_finite() {
                (SAFETY * err_norm.powf(-PI_ALPHA)).max(MIN_SHRINK)
            } else {
                0.25
            };
            h *= fac.min(1.0);
            last_reject = true;
            if h < h_min {
                return Err(Error::BlowUp {
                    time: t,
                    reason: if finite {
                        format!("step size underflow (dt = {h:e})")
                    } else {
                        "non-finite values persist at vanishing step size".into()
                    },
                    state: y,
                });
            }
        }
    }

    if let Some(reason) = blowup_reason {
        return Err(Error::BlowUp { time: t, reason, state: y });
    }
    Ok(Integration {
        t,
        state: y,
        log,
        rejected,
        evaluations,
        next_dt: h,
    })
}

/// Hairer–Nørsett–Wanner starting step heuristic (explicit Euler probe omitted).
fn initial_step(y: &[Complex64], f0: &[Complex64], ctrl: &StepControl) -> f64 {
    let scale = ctrl.abs_tol + ctrl.rel_tol * rms(y);
    let d0 = rms(y) / scale;
    let d1 = rms(f0) / scale;
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.max(1e-10)
}

/// Packs a wave state as `[f̂ ; f̂_t]`.
pub fn pack_wave_state(state: &WaveState) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(2 * state.f.coefficients().len());
    out.extend_from_slice(state.f.coefficients());
    out.extend_from_slice(state.f_t.coefficients());
    out
}

pub fn unpack_wave_state(grid: &Arc<FourierGrid>, flat: &[Complex64]) -> Result<WaveState> {
    let n = grid.n_points();
    if flat.len() != 2 * n {
        return Err(Error::Usage(format!(
            "expected {} coefficients for a wave state, got {}",
            2 * n,
            flat.len()
        )));
    }
    WaveState::new(
        SpectralField::from_coefficients(grid, flat[..n].to_vec())?,
        SpectralField::from_coefficients(grid, flat[n..].to_vec())?,
    )
}

/// A first-order system `(f, g)' = (g, RHS(f, g))` for a bidirectional model.
#[derive(Debug, Clone)]
pub struct SecondOrderSystem {
    grid: Arc<FourierGrid>,
    params: ModelParams,
}

impl SecondOrderSystem {
    pub fn grid(&self) -> &Arc<FourierGrid> {
        &self.grid
    }

    /// `(g, RHS(f, g))`.
    pub fn eval(&self, state: &WaveState) -> Result<WaveState> {
        let accel = match self.params.model {
            ModelKind::BidirectionalFull => rhs_bidirectional_full(state, &self.params)?,
            ModelKind::BidirectionalReduced => rhs_bidirectional_reduced(state, &self.params)?,
            _ => unreachable!("constructor rejects unidirectional models"),
        };
        WaveState::new(state.f_t.clone(), accel)
    }

    /// Flat-vector form for [`integrate`].
    pub fn eval_flat(&self, y: &[Complex64], dy: &mut [Complex64]) -> Result<()> {
        let state = unpack_wave_state(&self.grid, y)?;
        let d = self.eval(&state)?;
        let n = self.grid.n_points();
        dy[..n].copy_from_slice(d.f.coefficients());
        dy[n..].copy_from_slice(d.f_t.coefficients());
        Ok(())
    }
}

/// Rewrites a bidirectional model as a first-order system in `(f, f_t)`.
pub fn lift_second_order(grid: &Arc<FourierGrid>, params: &ModelParams) -> Result<SecondOrderSystem> {
    if !params.model.is_bidirectional() {
        return Err(Error::Usage(format!(
            "{} is first order in time; only bidirectional models can be lifted",
            params.model.name()
        )));
    }
    Ok(SecondOrderSystem {
        grid: Arc::clone(grid),
        params: *params,
    })
}

/// Integrates a bidirectional model from `state` over `t_span`.
pub fn integrate_wave(
    system: &SecondOrderSystem,
    state: &WaveState,
    t_span: (f64, f64),
    ctrl: &StepControl,
) -> Result<(WaveState, Integration)> {
    let y0 = pack_wave_state(state);
    let run = integrate(
        |_, y, dy| system.eval_flat(y, dy),
        &y0,
        t_span,
        ctrl,
        |_, _| {},
    )?;
    let end = unpack_wave_state(&system.grid, &run.state)?;
    Ok((end, run))
}
