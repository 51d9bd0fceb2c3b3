//! Periodic Fourier representation of real fields and the Fourier multipliers
//! used by the wave models.
//!
//! A [`SpectralField`] stores the Fourier-series coefficients `c_k` of a real
//! periodic function, `f(x) = Σ_k c_k exp(i κ_k x)` with `κ_k = 2πk / period`,
//! on the collocation grid `x_j = -period/2 + j·period/n`. Coefficients are
//! kept in FFT order: index `j` holds wavenumber `j` for `j ≤ n/2` and `j - n`
//! otherwise, so the stored ladder is `{-n/2+1, …, n/2}`.
//!
//! Every multiplier zeroes the Nyquist mode, and every physical-space product
//! is dealiased with the 2/3 rule.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Uniform periodic collocation grid together with its FFT plans.
pub struct FourierGrid {
    n: usize,
    period: f64,
    wavenumbers: Vec<i64>,
    kappa: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FourierGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierGrid")
            .field("n", &self.n)
            .field("period", &self.period)
            .finish()
    }
}

impl PartialEq for FourierGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.period == other.period
    }
}

impl FourierGrid {
    /// Builds a grid with `n_points` collocation points on `[-period/2, period/2)`.
    ///
    /// `n_points` must be a power of two and at least 8.
    pub fn new(n_points: usize, period: f64) -> Result<Arc<Self>> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_points must be a power of two >= 8, got {n_points}"
            )));
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::Config(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        let half = (n_points / 2) as i64;
        let wavenumbers: Vec<i64> = (0..n_points as i64)
            .map(|j| if j <= half { j } else { j - n_points as i64 })
            .collect();
        let scale = 2.0 * PI / period;
        let kappa = wavenumbers.iter().map(|&k| k as f64 * scale).collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_points);
        let inverse = planner.plan_fft_inverse(n_points);
        Ok(Arc::new(FourierGrid {
            n: n_points,
            period,
            wavenumbers,
            kappa,
            forward,
            inverse,
        }))
    }

    /// The default `[-π, π)` grid.
    pub fn standard(n_points: usize) -> Result<Arc<Self>> {
        Self::new(n_points, 2.0 * PI)
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dx(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Collocation points `x_j = -period/2 + j·dx`.
    pub fn points(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n)
            .map(|j| -0.5 * self.period + j as f64 * dx)
            .collect()
    }

    /// Integer wavenumbers in ladder order `-n/2+1, …, n/2`.
    pub fn ladder(&self) -> Vec<i64> {
        let half = (self.n / 2) as i64;
        (-half + 1..=half).collect()
    }

    /// Integer wavenumber stored at FFT index `idx`.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        self.wavenumbers[idx]
    }

    /// Integer wavenumbers in FFT storage order.
    pub fn wavenumbers(&self) -> &[i64] {
        &self.wavenumbers
    }

    /// Physical wavenumbers `2πk/period` in FFT storage order.
    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    /// Physical wavenumber of one unit of integer wavenumber.
    pub fn kappa_unit(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// FFT index of integer wavenumber `k`, if it is on the ladder.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k > half || k <= -half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((self.n as i64 + k) as usize)
        }
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Largest integer wavenumber kept by the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }
}

/// `sgn` with `sgn(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Sine,
    Cosine,
}

/// One trigonometric term `amplitude · sin(κx)` or `amplitude · cos(κx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub kind: ModeKind,
    pub wavenumber: u32,
    pub amplitude: f64,
}

impl Mode {
    pub fn sine(wavenumber: u32, amplitude: f64) -> Self {
        Mode {
            kind: ModeKind::Sine,
            wavenumber,
            amplitude,
        }
    }

    pub fn cosine(wavenumber: u32, amplitude: f64) -> Self {
        Mode {
            kind: ModeKind::Cosine,
            wavenumber,
            amplitude,
        }
    }
}

/// A real periodic field held by its Hermitian-symmetric spectrum.
#[derive(Clone)]
pub struct SpectralField {
    grid: Arc<FourierGrid>,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField")
            .field("grid", &self.grid)
            .field("max_coeff", &self.max_coefficient())
            .finish()
    }
}

impl SpectralField {
    pub fn zeros(grid: &Arc<FourierGrid>) -> Self {
        SpectralField {
            grid: Arc::clone(grid),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    pub fn constant(grid: &Arc<FourierGrid>, value: f64) -> Self {
        let mut field = Self::zeros(grid);
        field.coeffs[0] = Complex64::new(value, 0.0);
        field
    }

    /// Transforms collocation samples into a spectral field.
    pub fn from_physical(grid: &Arc<FourierGrid>, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::Usage(format!(
                "expected {} samples, got {}",
                grid.n,
                samples.len()
            )));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.forward.process(&mut buf);
        let inv_n = 1.0 / grid.n as f64;
        // x_0 = -period/2 contributes the phase exp(-iπk) = (-1)^k.
        for (idx, c) in buf.iter_mut().enumerate() {
            let parity = if grid.wavenumbers[idx] % 2 == 0 { 1.0 } else { -1.0 };
            *c *= inv_n * parity;
        }
        Ok(SpectralField {
            grid: Arc::clone(grid),
            coeffs: buf,
        })
    }

    /// Samples `f` on the collocation points and transforms.
    pub fn from_fn(grid: &Arc<FourierGrid>, f: impl Fn(f64) -> f64) -> Self {
        let samples: Vec<f64> = grid.points().into_iter().map(f).collect();
        Self::from_physical(grid, &samples).expect("sample count matches grid")
    }

    /// Wraps raw coefficients given in FFT storage order.
    pub fn from_coefficients(grid: &Arc<FourierGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n {
            return Err(Error::Usage(format!(
                "expected {} coefficients, got {}",
                grid.n,
                coeffs.len()
            )));
        }
        Ok(SpectralField {
            grid: Arc::clone(grid),
            coeffs,
        })
    }

    /// Builds the exact spectrum of a finite trigonometric sum.
    pub fn from_modes(grid: &Arc<FourierGrid>, modes: &[Mode]) -> Result<Self> {
        let mut field = Self::zeros(grid);
        let half = (grid.n / 2) as i64;
        for mode in modes {
            let k = i64::from(mode.wavenumber);
            if k >= half {
                return Err(Error::Domain(format!(
                    "wavenumber {k} is not resolved by a grid of {} points",
                    grid.n
                )));
            }
            let a = mode.amplitude;
            if k == 0 {
                if mode.kind == ModeKind::Cosine {
                    field.coeffs[0] += a;
                }
                continue;
            }
            let (pos, neg) = match mode.kind {
                ModeKind::Cosine => (Complex64::new(0.5 * a, 0.0), Complex64::new(0.5 * a, 0.0)),
                ModeKind::Sine => (Complex64::new(0.0, -0.5 * a), Complex64::new(0.0, 0.5 * a)),
            };
            let ip = grid.index_of(k).expect("checked above");
            let ineg = grid.index_of(-k).expect("checked above");
            field.coeffs[ip] += pos;
            field.coeffs[ineg] += neg;
        }
        Ok(field)
    }

    /// A reproducible random real field with `n_modes` active wavenumbers in
    /// `1..=max_k`, each with amplitude at most `amplitude`.
    pub fn random_band_limited(
        grid: &Arc<FourierGrid>,
        n_modes: usize,
        max_k: u32,
        amplitude: f64,
        seed: u64,
    ) -> Result<Self> {
        if max_k == 0 || i64::from(max_k) >= (grid.n / 2) as i64 {
            return Err(Error::Domain(format!(
                "max_k = {max_k} outside 1..{} for this grid",
                grid.n / 2
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut modes = Vec::with_capacity(n_modes);
        for _ in 0..n_modes {
            let k = rng.random_range(1..=max_k);
            let kind = if rng.random_bool(0.5) {
                ModeKind::Sine
            } else {
                ModeKind::Cosine
            };
            let a = amplitude * rng.random_range(-1.0..=1.0);
            modes.push(Mode {
                kind,
                wavenumber: k,
                amplitude: a,
            });
        }
        Self::from_modes(grid, &modes)
    }

    pub fn grid(&self) -> &Arc<FourierGrid> {
        &self.grid
    }

    /// Coefficients in FFT storage order.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient `c_k`; zero for wavenumbers off the ladder.
    pub fn coefficient(&self, k: i64) -> Complex64 {
        self.grid
            .index_of(k)
            .map_or(Complex64::new(0.0, 0.0), |idx| self.coeffs[idx])
    }

    /// Samples on the collocation points.
    pub fn to_physical(&self) -> Vec<f64> {
        let grid = &self.grid;
        let mut buf: Vec<Complex64> = self
            .coeffs
            .iter()
            .zip(&grid.wavenumbers)
            .map(|(&c, &k)| if k % 2 == 0 { c } else { -c })
            .collect();
        grid.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn max_coefficient(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest `|c_{-k} - conj(c_k)|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_coefficient();
        if scale == 0.0 {
            return 0.0;
        }
        let half = (self.grid.n / 2) as i64;
        let mut worst: f64 = 0.0;
        for k in 0..half {
            let d = (self.coefficient(-k) - self.coefficient(k).conj()).norm();
            worst = worst.max(d);
        }
        worst.max(self.coeffs[self.grid.nyquist_index()].im.abs()) / scale
    }

    /// Largest `|k|` carrying a coefficient above `rel_tol · max|c|`.
    pub fn support(&self, rel_tol: f64) -> i64 {
        let threshold = rel_tol * self.max_coefficient();
        self.coeffs
            .iter()
            .zip(&self.grid.wavenumbers)
            .filter(|(c, _)| c.norm() > threshold)
            .map(|(_, k)| k.abs())
            .max()
            .unwrap_or(0)
    }

    /// Applies the Fourier multiplier `symbol(κ)` and zeroes the Nyquist mode.
    pub fn apply_multiplier(&self, symbol: impl Fn(f64) -> Complex64) -> Self {
        let mut coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .zip(&self.grid.kappa)
            .map(|(&c, &k)| c * symbol(k))
            .collect();
        coeffs[self.grid.nyquist_index()] = Complex64::new(0.0, 0.0);
        SpectralField {
            grid: Arc::clone(&self.grid),
            coeffs,
        }
    }

    /// Real-symbol variant of [`apply_multiplier`](Self::apply_multiplier).
    pub fn apply_real_multiplier(&self, symbol: impl Fn(f64) -> f64) -> Self {
        self.apply_multiplier(|k| Complex64::new(symbol(k), 0.0))
    }

    /// Hilbert transform, symbol `-i·sgn(k)`.
    pub fn hilbert(&self) -> Self {
        self.apply_multiplier(|k| -I * sign(k))
    }

    /// `Λ^s` with symbol `|k|^s`; `Λ⁰` is the identity.
    pub fn lambda_pow(&self, s: f64) -> Result<Self> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!(
                "lambda_pow needs s >= 0 (got {s}); use inverse_lambda for Λ⁻¹"
            )));
        }
        if s == 0.0 {
            return Ok(self.apply_real_multiplier(|_| 1.0));
        }
        Ok(self.apply_real_multiplier(|k| k.abs().powf(s)))
    }

    /// `Λ = |∂_x|`.
    pub fn lambda(&self) -> Self {
        self.apply_real_multiplier(f64::abs)
    }

    /// `∂_x^n`, symbol `(ik)^n`.
    pub fn deriv(&self, n: u32) -> Self {
        match n % 4 {
            0 => self.apply_real_multiplier(|k| k.powi(n as i32)),
            1 => self.apply_multiplier(|k| I * k.powi(n as i32)),
            2 => self.apply_real_multiplier(|k| -k.powi(n as i32)),
            _ => self.apply_multiplier(|k| -I * k.powi(n as i32)),
        }
    }

    /// `(a + bΛ)⁻¹`.
    pub fn inverse_helmholtz(&self, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !(b >= 0.0) {
            return Err(Error::Config(format!(
                "inverse_helmholtz needs a > 0 and b >= 0, got a = {a}, b = {b}"
            )));
        }
        Ok(self.apply_real_multiplier(|k| 1.0 / (a + b * k.abs())))
    }

    /// `Λ⁻¹` on mean-zero fields; the mean of the result is 0.
    pub fn inverse_lambda(&self) -> Result<Self> {
        let scale = self.max_coefficient();
        if self.coeffs[0].norm() > 1e-12 * scale {
            return Err(Error::Domain(format!(
                "Λ is not invertible on constants (mean = {:e})",
                self.coeffs[0].re
            )));
        }
        Ok(self.apply_real_multiplier(|k| if k == 0.0 { 0.0 } else { 1.0 / k.abs() }))
    }

    /// 2/3-rule truncation: zeroes `|k| > n/3` and the Nyquist mode.
    pub fn dealias(&self) -> Self {
        let cutoff = self.grid.dealias_cutoff();
        let mut out = self.clone();
        for (c, &k) in out.coeffs.iter_mut().zip(&self.grid.wavenumbers) {
            if k.abs() > cutoff {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out.coeffs[self.grid.nyquist_index()] = Complex64::new(0.0, 0.0);
        out
    }

    fn check_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::Usage(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }

    /// Collocation product `f·g`, dealiased.
    pub fn product(&self, other: &SpectralField) -> Result<Self> {
        self.check_grid(other)?;
        let a = self.to_physical();
        let b = other.to_physical();
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(Self::from_physical(&self.grid, &prod)?.dealias())
    }

    /// Dealiased square `f²`.
    pub fn square(&self) -> Self {
        let a = self.to_physical();
        let sq: Vec<f64> = a.iter().map(|x| x * x).collect();
        Self::from_physical(&self.grid, &sq)
            .expect("sample count matches grid")
            .dealias()
    }

    /// Commutator `[H, f]g = H(fg) - f·H(g)`, with both products dealiased.
    pub fn commutator_h(&self, g: &SpectralField) -> Result<Self> {
        self.check_grid(g)?;
        let fg = self.product(g)?;
        let f_hg = self.product(&g.hilbert())?;
        Ok(&fg.hilbert() - &f_hg)
    }

    /// `∫ f·g dx` by the trapezoid rule on the collocation grid.
    pub fn integrate_product(&self, other: &SpectralField) -> Result<f64> {
        self.check_grid(other)?;
        let a = self.to_physical();
        let b = other.to_physical();
        Ok(self.grid.dx() * a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>())
    }

    /// Max of `|f|` over the collocation points.
    pub fn sup_norm(&self) -> f64 {
        self.to_physical().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Σ_k |c_k|²`.
    pub fn coefficient_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SpectralField {
            grid: Arc::clone(&self.grid),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `self + factor·other`.
    pub fn add_scaled(&self, factor: f64, other: &SpectralField) -> Result<Self> {
        self.check_grid(other)?;
        Ok(SpectralField {
            grid: Arc::clone(&self.grid),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * factor)
                .collect(),
        })
    }

    /// Max-norm distance between coefficient vectors.
    pub fn max_coefficient_distance(&self, other: &SpectralField) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Max over collocation points of `|self - other|`.
    pub fn sup_distance(&self, other: &SpectralField) -> Result<f64> {
        Ok(self.add_scaled(-1.0, other)?.sup_norm())
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;

    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.add_scaled(1.0, rhs).expect("operands share a grid")
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.add_scaled(-1.0, rhs).expect("operands share a grid")
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;

    fn mul(self, rhs: f64) -> SpectralField {
        self.scaled(rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;

    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}
