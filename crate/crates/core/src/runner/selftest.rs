use crate::ck_series::{ck_assemble, ck_order0};
use crate::diagnostics::{cubic_residual, sobolev_norm, tricomi_residual};
use crate::error::Result;
use crate::models::{ModelKind, ModelParams, WaveState};
use crate::spectral::{FourierGrid, Mode, SpectralField};
use crate::timestepper::{integrate_wave, lift_second_order, StepControl};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl SelfCheck {
    fn new(name: &'static str, value: f64, tolerance: f64) -> Self {
        SelfCheck {
            name,
            passed: value.is_finite() && value < tolerance,
            value,
            tolerance,
        }
    }
}

/// `[H, f]g` by direct convolution of the spectra, truncated to the 2/3 band.
pub fn commutator_by_convolution(f: &SpectralField, g: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let cutoff = grid.dealias_cutoff();
    let mut out = SpectralField::zeros(grid);
    let active = |field: &SpectralField| -> Vec<(i64, Complex64)> {
        grid.wavenumbers()
            .iter()
            .zip(field.coefficients())
            .filter(|(k, c)| k.abs() <= cutoff && c.norm() > 0.0)
            .map(|(&k, &c)| (k, c))
            .collect()
    };
    let sgn = |k: i64| k.signum() as f64;
    for (m, fm) in active(f) {
        for (n, gn) in active(g) {
            let k = m + n;
            if k.abs() > cutoff {
                continue;
            }
            let idx = grid.index_of(k).expect("inside the band");
            out.coefficients_mut()[idx] += Complex64::new(0.0, -(sgn(k) - sgn(n))) * fm * gn;
        }
    }
    out
}

fn random(grid: &std::sync::Arc<FourierGrid>, seed: u64, max_k: u32) -> Result<SpectralField> {
    SpectralField::random_band_limited(grid, 8, max_k, 1.0, seed)
}

/// The invariant suite run by `oddwave selftest`.
pub fn selftest() -> Result<Vec<SelfCheck>> {
    let g = FourierGrid::standard(256)?;
    let sin = SpectralField::from_modes(&g, &[Mode::sine(1, 1.0)])?;
    let cos = SpectralField::from_modes(&g, &[Mode::cosine(1, 1.0)])?;
    let mut checks = vec![SelfCheck::new("hilbert(sin) = -cos", sin.hilbert().sup_distance(&-&cos)?, 1e-12)];

    let mut hh: f64 = 0.0;
    let mut lam: f64 = 0.0;
    let mut tri: f64 = 0.0;
    let mut cub: f64 = 0.0;
    let mut comm: f64 = 0.0;
    for seed in 0..100 {
        let f = random(&g, seed, 40)?;
        let scale = 1.0 + f.sup_norm().powi(2);
        hh = hh.max(f.hilbert().hilbert().sup_distance(&-&f)?);
        lam = lam.max(f.lambda().sup_distance(&f.deriv(1).hilbert())? / (1.0 + f.deriv(1).sup_norm()));
        tri = tri.max(tricomi_residual(&f) / scale);
        cub = cub.max(cubic_residual(&f) / (1.0 + sobolev_norm(&f, 1.0).powi(3)));
        let h = random(&g, seed + 1000, 40)?;
        comm = comm.max(f.commutator_h(&h)?.sup_distance(&commutator_by_convolution(&f, &h))?);
    }
    checks.push(SelfCheck::new("hilbert∘hilbert = -I on mean-zero fields", hh, 1e-12));
    checks.push(SelfCheck::new("Λ = H∂x", lam, 1e-12));
    checks.push(SelfCheck::new("Tricomi identity", tri, 1e-10));
    checks.push(SelfCheck::new("cubic integral vanishes", cub, 1e-10));
    checks.push(SelfCheck::new("commutator matches convolution", comm, 1e-11));

    let small = FourierGrid::standard(32)?;
    let p = ModelParams::new(ModelKind::BidirectionalFull, 0.0, 1.0, 1.0);
    let f0 = SpectralField::from_modes(&small, &[Mode::sine(2, 1.0)])?;
    let state = WaveState::new(f0.clone(), SpectralField::zeros(&small))?;
    let (end, _) = integrate_wave(
        &lift_second_order(&small, &p)?,
        &state,
        (0.0, 1.0),
        &StepControl::with_tolerances(1e-11, 1e-13),
    )?;
    let (c, _) = ck_order0(f0.coefficient(2), Complex64::new(0.0, 0.0), 2.0, 1.0, &p);
    checks.push(SelfCheck::new(
        "linear mode follows the dispersion rates",
        (end.f.coefficient(2) - c).norm(),
        1e-8,
    ));

    let p = ModelParams::new(ModelKind::BidirectionalFull, 1.0, 1.0, 1.0);
    let f0 = SpectralField::from_modes(&small, &[Mode::sine(1, 0.1)])?;
    let f1 = SpectralField::zeros(&small);
    let series = ck_assemble(&f0, &f1, 0.1, 6, &p)?;
    let (rk, _) = integrate_wave(
        &lift_second_order(&small, &p)?,
        &WaveState::new(f0, f1)?,
        (0.0, 0.1),
        &StepControl::with_tolerances(1e-12, 1e-16),
    )?;
    checks.push(SelfCheck::new(
        "power series agrees with Runge-Kutta",
        series.state.f.sup_distance(&rk.f)?,
        1e-9,
    ));
    checks.push(SelfCheck::new(
        "majorant ledger B_l(t) <= C_l t^l",
        series.solution.majorants.violations().len() as f64,
        0.5,
    ));
    Ok(checks)
}
