use super::config::RunConfig;
use crate::ck_series::{ck_assemble, existence_time};
use crate::error::{Error, Result};
use crate::models::{ModelKind, WaveState};
use crate::timestepper::{integrate_wave, lift_second_order, StepControl};
use serde::Serialize;

/// Fraction of the existence time used when no comparison time is given.
pub const DEFAULT_TIME_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderDistance {
    pub order: usize,
    /// Max over the collocation points of `|f_series - f_rk|`.
    pub f: f64,
    pub f_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CkComparison {
    pub time: f64,
    pub existence_time: f64,
    pub distances: Vec<OrderDistance>,
    pub ledger_holds: bool,
    /// Largest `B_ℓ(t) / (C_ℓ t^ℓ)` in the ledger.
    pub worst_majorant_ratio: f64,
    pub mesh_intervals: usize,
}

/// Compares truncations of the power series of orders `0..=max_order` with a
/// tightly toleranced Runge–Kutta solution of the full bidirectional model.
pub fn ck_compare(config: &RunConfig, max_order: usize, time: Option<f64>) -> Result<CkComparison> {
    if config.model != ModelKind::BidirectionalFull {
        return Err(Error::Usage(format!(
            "the series solves bidirectional_full, the config selects {}",
            config.model.name()
        )));
    }
    let grid = config.grid()?;
    let params = config.model_params();
    let (f0, f1) = config.initial_fields(&grid)?;
    let t_star = existence_time(&f0, &f1, &params)?;
    let t = match time {
        Some(t) => t,
        None if t_star.is_finite() => DEFAULT_TIME_FRACTION * t_star,
        None => config.t_final,
    };
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Usage(format!("comparison time must be finite and > 0, got {t}")));
    }
    let series = ck_assemble(&f0, &f1, t, max_order, &params)?;
    let system = lift_second_order(&grid, &params)?;
    let ctrl = StepControl {
        max_dt: t / 4.0,
        ..StepControl::with_tolerances(1e-12, 1e-16)
    };
    let (reference, _) = integrate_wave(&system, &WaveState::new(f0, f1)?, (0.0, t), &ctrl)?;
    let distances = (0..=max_order)
        .map(|order| {
            let s = series.solution.state(&grid, order)?;
            Ok(OrderDistance {
                order,
                f: s.f.sup_distance(&reference.f)?,
                f_t: s.f_t.sup_distance(&reference.f_t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ledger = &series.solution.majorants;
    Ok(CkComparison {
        time: t,
        existence_time: t_star,
        distances,
        ledger_holds: ledger.holds(),
        worst_majorant_ratio: ledger.worst_ratio(),
        mesh_intervals: series.mesh_intervals,
    })
}
