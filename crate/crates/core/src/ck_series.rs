//! Constructive power-series solution of the full bidirectional model.
//!
//! The solution is sought as `f = Σ_ℓ λ^{ℓ+1} f^{(ℓ)}`. Each order solves the
//! forced linear mode equation
//!
//! ```text
//! f̂_tt = -(|k| + β|k|³) f̂ + iαk|k| f̂_t + F_ℓ(k, t)
//! ```
//!
//! where `F_ℓ` collects the quadratic interactions of orders `j` and
//! `ℓ-1-j`. Order 0 carries the data `(f₀/λ, f₁/λ)` and has a closed form;
//! higher orders start from rest and are obtained by Duhamel's formula, with
//! the time integral evaluated by the composite trapezoid rule on a uniform
//! mesh that is refined until the assembled series stops changing.
//!
//! Alongside the coefficients, the solver keeps the majorant ledger
//! `B_ℓ(t) = e² C(α,β) exp(-(ℓ+1)/(1+ℓR²)·D(R+1)) (‖f^{(ℓ)}‖_{A_{R+1-ℓ}} + ‖f_t^{(ℓ)}‖_{A_{R+1-ℓ}})`,
//! which the Catalan recursion bounds by `C_ℓ t^ℓ`.

use crate::error::{Error, Result};
use crate::models::{dispersion_rates, ModelParams, WaveState};
use crate::spectral::{sign, FourierGrid, SpectralField};
use num_complex::Complex64;
use std::f64::consts::E;
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Highest order the solver accepts.
pub const MAX_SERIES_ORDER: usize = 20;

/// `ℓ`-th Catalan number via `C_ℓ = Σ_{j<ℓ} C_j C_{ℓ-1-j}`.
pub fn catalan(ell: u32) -> Result<u64> {
    if ell > 30 {
        return Err(Error::Range(format!("catalan({ell}) is beyond the supported range 0..=30")));
    }
    let mut c = vec![1u64; ell as usize + 1];
    for l in 1..=ell as usize {
        c[l] = (0..l).map(|j| c[j] * c[l - 1 - j]).sum();
    }
    Ok(c[ell as usize])
}

/// Order-0 mode solution `(f̂, f̂_t)` at time `t` for physical wavenumber `k`.
///
/// At `k = 0` both rates vanish and the mode moves linearly, `f̂₀ + t f̂₁`.
pub fn ck_order0(
    f0_hat: Complex64,
    f1_hat: Complex64,
    k: f64,
    t: f64,
    params: &ModelParams,
) -> (Complex64, Complex64) {
    if k == 0.0 {
        return (f0_hat + f1_hat * t, f1_hat);
    }
    let (rp, rm) = dispersion_rates(k, params);
    let ep = (I * rp * t).exp();
    let em = (I * rm * t).exp();
    let a = f1_hat - I * rm * f0_hat;
    let b = f1_hat - I * rp * f0_hat;
    let f = (a * ep - b * em) / (I * (rp - rm));
    let ft = (a * rp * ep - b * rm * em) / (rp - rm);
    (f, ft)
}

/// Integer wavenumbers `-half_width..=half_width` with their physical scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub half_width: i64,
    pub kappa_unit: f64,
}

impl Band {
    pub fn len(&self) -> usize {
        (2 * self.half_width + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, k: i64) -> Option<usize> {
        (k.abs() <= self.half_width).then(|| (k + self.half_width) as usize)
    }

    pub fn wavenumber(&self, idx: usize) -> i64 {
        idx as i64 - self.half_width
    }

    pub fn kappa(&self, k: i64) -> f64 {
        k as f64 * self.kappa_unit
    }
}

/// Spectrum of one order at one time, indexed over a [`Band`].
#[derive(Debug, Clone, PartialEq)]
pub struct OrderSample {
    pub f: Vec<Complex64>,
    pub ft: Vec<Complex64>,
}

impl OrderSample {
    fn zeros(len: usize) -> Self {
        OrderSample {
            f: vec![ZERO; len],
            ft: vec![ZERO; len],
        }
    }
}

/// Quadratic forcing of order `ell` at integer wavenumber `k`, given all lower
/// orders sampled at the same time.
pub fn ck_forcing(
    orders: &[OrderSample],
    ell: usize,
    k: i64,
    band: &Band,
    params: &ModelParams,
) -> Result<Complex64> {
    if ell == 0 {
        return Err(Error::Usage("order 0 carries no forcing".into()));
    }
    if orders.len() < ell {
        return Err(Error::Usage(format!(
            "forcing of order {ell} needs orders 0..{ell}, only {} given",
            orders.len()
        )));
    }
    let kk = band.kappa(k);
    let mut total = ZERO;
    for j in 0..ell {
        let a = &orders[j];
        let b = &orders[ell - 1 - j];
        for m in -band.half_width..=band.half_width {
            let n = k - m;
            let (Some(im), Some(inn)) = (band.index(m), band.index(n)) else {
                continue;
            };
            total += interaction(kk, band.kappa(m), band.kappa(n), a, im, b, inn, params);
        }
    }
    Ok(total * params.epsilon)
}

/// Contribution of the pair `(m, n = k - m)` to `F(k)` for orders `(a, b)`.
#[allow(clippy::too_many_arguments)]
#[inline]
fn interaction(
    kk: f64,
    km: f64,
    kn: f64,
    a: &OrderSample,
    im: usize,
    b: &OrderSample,
    inn: usize,
    params: &ModelParams,
) -> Complex64 {
    let dispersive = kk.abs() * sign(km) * sign(kn) * a.ft[im] * b.ft[inn];
    // |k||k-m| - k(k-m): vanishes unless k and k-m have opposite signs
    let s = kk.abs() * kn.abs() - kk * kn;
    if s == 0.0 {
        return dispersive;
    }
    let ff = a.f[im] * b.f[inn];
    let gravity = ff * s;
    let odd = -I * params.alpha_o * kn * s * a.f[im] * b.ft[inn];
    let capillary = ff * (params.beta * kn * kn * s);
    dispersive + gravity + odd + capillary
}

/// All forcing coefficients of order `ell` over the band, summing only over the
/// spectral supports of the interacting orders.
fn forcing_all(
    orders: &[OrderSample],
    supports: &[i64],
    ell: usize,
    band: &Band,
    params: &ModelParams,
) -> Vec<Complex64> {
    let mut out = vec![ZERO; band.len()];
    for j in 0..ell {
        let i = ell - 1 - j;
        let (a, b) = (&orders[j], &orders[i]);
        let (sa, sb) = (supports[j], supports[i]);
        for m in -sa..=sa {
            let im = band.index(m).expect("support inside band");
            let km = band.kappa(m);
            for n in -sb..=sb {
                let k = m + n;
                let Some(ik) = band.index(k) else { continue };
                let inn = band.index(n).expect("support inside band");
                out[ik] += interaction(band.kappa(k), km, band.kappa(n), a, im, b, inn, params);
            }
        }
    }
    for v in &mut out {
        *v *= params.epsilon;
    }
    out
}

/// Duhamel solution `(f̂, f̂_t)` at the last node of a uniform mesh with spacing
/// `dt`, for forcing samples `forcing[i] = F(k, i·dt)` and zero initial data.
pub fn ck_duhamel(forcing: &[Complex64], dt: f64, k: f64, params: &ModelParams) -> Result<(Complex64, Complex64)> {
    if forcing.is_empty() {
        return Err(Error::Usage("forcing needs at least one sample".into()));
    }
    if !(dt > 0.0) && forcing.len() > 1 {
        return Err(Error::Usage("mesh spacing must be positive".into()));
    }
    let history = duhamel_history(forcing, dt, k, params);
    Ok(*history.last().expect("non-empty"))
}

/// Duhamel solution at every node of the mesh (cumulative trapezoid rule).
fn duhamel_history(forcing: &[Complex64], dt: f64, k: f64, params: &ModelParams) -> Vec<(Complex64, Complex64)> {
    let mut out = Vec::with_capacity(forcing.len());
    if k == 0.0 {
        // f(t) = ∫₀ᵗ (t-s) F(s) ds, f_t(t) = ∫₀ᵗ F(s) ds
        let mut int_f = ZERO;
        let mut int_sf = ZERO;
        out.push((ZERO, ZERO));
        for i in 1..forcing.len() {
            let s0 = (i - 1) as f64 * dt;
            let s1 = i as f64 * dt;
            int_f += (forcing[i - 1] + forcing[i]) * (0.5 * dt);
            int_sf += (forcing[i - 1] * s0 + forcing[i] * s1) * (0.5 * dt);
            out.push((int_f * s1 - int_sf, int_f));
        }
        return out;
    }
    let (rp, rm) = dispersion_rates(k, params);
    let gap = rp - rm;
    let mut int_p = ZERO;
    let mut int_m = ZERO;
    let mut prev_p = ZERO;
    let mut prev_m = ZERO;
    for (i, &fv) in forcing.iter().enumerate() {
        let s = i as f64 * dt;
        let gp = fv * (-I * rp * s).exp();
        let gm = fv * (-I * rm * s).exp();
        if i > 0 {
            int_p += (prev_p + gp) * (0.5 * dt);
            int_m += (prev_m + gm) * (0.5 * dt);
        }
        prev_p = gp;
        prev_m = gm;
        let ep = (I * rp * s).exp();
        let em = (I * rm * s).exp();
        let f = (ep * int_p - em * int_m) / (I * gap);
        let ft = (ep * int_p * rp - em * int_m * rm) / gap;
        out.push((f, ft));
    }
    out
}

/// The constant `C(α, β)` of the order recursion, with every symbol bound of
/// the estimate instantiated:
///
/// * `C₁ = max{1, 2, 2α·2!, 2β·3!}` from the four bracket terms after
///   `|k-m|ⁿ ≤ n! e^{|k-m|}` and `1 + |m| ≤ e^{|m|}`;
/// * `C₂ = C₁ · (1 + α·2! + α·3!)` from the extra factor
///   `|m| + α|m|² + α|m|³` of the `f_t` bound;
/// * `C(α, β) = 2 max{C₁, C₂}`.
pub fn c_alpha_beta(alpha_o: f64, beta: f64) -> f64 {
    let c1 = [1.0, 2.0, 4.0 * alpha_o, 12.0 * beta]
        .into_iter()
        .fold(0.0, f64::max);
    let c2 = c1 * (1.0 + 2.0 * alpha_o + 6.0 * alpha_o);
    2.0 * c1.max(c2)
}

/// Smallest integer `R > max(D, 1)` with `D(R+1)/(1+R²) ≤ 1`.
pub fn admissible_r(d: f64) -> u32 {
    let mut r = d.max(1.0).floor() as u32 + 1;
    while d * f64::from(r + 1) / (1.0 + f64::from(r) * f64::from(r)) > 1.0 {
        r += 1;
    }
    r
}

/// Mode-wise sup-in-time bounds of the order-0 solution,
/// `|f̂⁽⁰⁾| ≤ |f̂₀| + 2|f̂₁|/(r₊-r₋)` and `|f̂_t⁽⁰⁾| ≤ |f̂₁| + 2ω²|f̂₀|/(r₊-r₋)`
/// with `ω² = |k| + β|k|³ = -r₊r₋`.
fn order0_bound(f0: Complex64, f1: Complex64, k: f64, params: &ModelParams) -> f64 {
    let (rp, rm) = dispersion_rates(k, params);
    let gap = rp - rm;
    let omega_sq = -rp * rm;
    let bf = f0.norm() + 2.0 * f1.norm() / gap;
    let bft = f1.norm() + 2.0 * omega_sq * f0.norm() / gap;
    bf + bft
}

/// Support, ε-scaled data norm and scaling `λ = C(‖f₀‖, ‖f₁‖, ‖f₁‖_{L¹})` of the
/// data. The mean mode is excluded: it decouples from every interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataScale {
    /// Largest integer wavenumber in the data support.
    pub band_limit: i64,
    /// `D`, the band limit in physical wavenumber units.
    pub d: f64,
    pub r: u32,
    pub c_alpha_beta: f64,
    /// `λ`; zero for data without non-constant modes.
    pub lambda: f64,
}

fn data_support(f0: &SpectralField, f1: &SpectralField) -> i64 {
    let scale = f0.max_coefficient().max(f1.max_coefficient());
    let threshold = 1e-12 * scale;
    let g = f0.grid();
    (0..g.n_points())
        .filter(|&i| f0.coefficients()[i].norm() > threshold || f1.coefficients()[i].norm() > threshold)
        .map(|i| g.wavenumber(i).abs())
        .max()
        .unwrap_or(0)
}

pub fn data_scale(f0: &SpectralField, f1: &SpectralField, params: &ModelParams) -> Result<DataScale> {
    if f0.grid() != f1.grid() {
        return Err(Error::Usage("f0 and f1 live on different grids".into()));
    }
    let grid = f0.grid();
    let band_limit = data_support(f0, f1);
    let d = band_limit as f64 * grid.kappa_unit();
    let r = admissible_r(d);
    let cab = c_alpha_beta(params.alpha_o, params.beta);
    let mut sum = 0.0;
    for k in -band_limit..=band_limit {
        if k == 0 {
            continue;
        }
        let kk = k as f64 * grid.kappa_unit();
        sum += order0_bound(
            f0.coefficient(k) * params.epsilon,
            f1.coefficient(k) * params.epsilon,
            kk,
            params,
        );
    }
    Ok(DataScale {
        band_limit,
        d,
        r,
        c_alpha_beta: cab,
        lambda: E * E * cab * sum,
    })
}

/// Existence time `T* = 1/(4e·λ)`; `+∞` when the data has no non-constant modes.
pub fn existence_time(f0: &SpectralField, f1: &SpectralField, params: &ModelParams) -> Result<f64> {
    let scale = data_scale(f0, f1, params)?;
    if scale.lambda == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (4.0 * E * scale.lambda))
}

/// Per-order, per-time values of the majorant `B_ℓ(t)`.
#[derive(Debug, Clone)]
pub struct MajorantLedger {
    pub r: u32,
    pub d: f64,
    pub c_alpha_beta: f64,
    pub times: Vec<f64>,
    /// `bounds[ℓ][i] = B_ℓ(times[i])`
    pub bounds: Vec<Vec<f64>>,
}

/// One ledger entry exceeding its Catalan bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorantViolation {
    pub order: usize,
    pub time: f64,
    pub value: f64,
    pub bound: f64,
}

impl MajorantLedger {
    /// Entries with `B_ℓ(t) > C_ℓ t^ℓ` (relative slack `1e-12` for rounding).
    pub fn violations(&self) -> Vec<MajorantViolation> {
        let mut out = Vec::new();
        for (ell, row) in self.bounds.iter().enumerate() {
            let c = catalan(ell as u32).expect("orders are capped below 30") as f64;
            for (&t, &b) in self.times.iter().zip(row) {
                let bound = c * t.powi(ell as i32);
                if b > bound * (1.0 + 1e-12) + 1e-300 {
                    out.push(MajorantViolation {
                        order: ell,
                        time: t,
                        value: b,
                        bound,
                    });
                }
            }
        }
        out
    }

    pub fn holds(&self) -> bool {
        self.violations().is_empty()
    }

    /// Largest `B_ℓ(t) / (C_ℓ t^ℓ)` over the ledger (orders ≥ 1, t > 0).
    pub fn worst_ratio(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (ell, row) in self.bounds.iter().enumerate() {
            let c = catalan(ell as u32).expect("orders are capped below 30") as f64;
            for (&t, &b) in self.times.iter().zip(row) {
                if t > 0.0 {
                    worst = worst.max(b / (c * t.powi(ell as i32)));
                }
            }
        }
        worst
    }
}

/// Tuning of the Duhamel quadrature refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkOptions {
    pub initial_intervals: usize,
    pub max_intervals: usize,
    /// Stop refining once the assembled coefficients change by less than this
    /// (relative to their max).
    pub refine_tol: f64,
}

impl Default for CkOptions {
    fn default() -> Self {
        CkOptions {
            initial_intervals: 16,
            max_intervals: 4096,
            refine_tol: 1e-9,
        }
    }
}

/// Coefficients of every order on a uniform time mesh.
#[derive(Debug, Clone)]
pub struct SeriesSolution {
    pub lambda: f64,
    pub band: Band,
    /// Integer band limit `D` of the data.
    pub band_limit: i64,
    pub times: Vec<f64>,
    /// `orders[ℓ][i]` is order `ℓ` at `times[i]`.
    pub orders: Vec<Vec<OrderSample>>,
    /// `forcing[ℓ]` at the final time (order 0 has none).
    pub final_forcing: Vec<Vec<Complex64>>,
    pub majorants: MajorantLedger,
}

impl SeriesSolution {
    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    /// Largest `|k|` carrying a coefficient above `rel_tol` (relative to the
    /// order's own max) anywhere on the mesh.
    pub fn order_support(&self, ell: usize, rel_tol: f64) -> i64 {
        let samples = &self.orders[ell];
        let scale = samples
            .iter()
            .flat_map(|s| s.f.iter().chain(&s.ft))
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let mut support = 0;
        for s in samples {
            for idx in 0..self.band.len() {
                if s.f[idx].norm() > rel_tol * scale || s.ft[idx].norm() > rel_tol * scale {
                    support = support.max(self.band.wavenumber(idx).abs());
                }
            }
        }
        support
    }

    /// Truncated series `Σ_{ℓ≤L} λ^{ℓ+1} (f^{(ℓ)}, f_t^{(ℓ)})` at mesh node `i`.
    fn assembled_at(&self, i: usize, max_order: usize) -> OrderSample {
        let mut out = OrderSample::zeros(self.band.len());
        let mut weight = self.lambda;
        for order in self.orders.iter().take(max_order + 1) {
            let s = &order[i];
            for idx in 0..self.band.len() {
                out.f[idx] += s.f[idx] * weight;
                out.ft[idx] += s.ft[idx] * weight;
            }
            weight *= self.lambda;
        }
        out
    }

    /// Truncated series at the final time, mapped onto `grid`.
    pub fn state(&self, grid: &Arc<FourierGrid>, max_order: usize) -> Result<WaveState> {
        let last = self.times.len() - 1;
        let sum = self.assembled_at(last, max_order.min(self.max_order()));
        band_to_state(grid, &self.band, &sum)
    }

    /// `Σ λ^{ℓ+1} f_tt^{(ℓ)}` at the final time from each order's mode equation.
    pub fn acceleration(&self, grid: &Arc<FourierGrid>, params: &ModelParams) -> Result<SpectralField> {
        let last = self.times.len() - 1;
        let mut acc = vec![ZERO; self.band.len()];
        let mut weight = self.lambda;
        for (ell, order) in self.orders.iter().enumerate() {
            let s = &order[last];
            for idx in 0..self.band.len() {
                let kk = self.band.kappa(self.band.wavenumber(idx));
                let omega_sq = kk.abs() + params.beta * kk.abs().powi(3);
                let mut v = -s.f[idx] * omega_sq + I * params.alpha_o * kk * kk.abs() * s.ft[idx];
                if ell > 0 {
                    v += self.final_forcing[ell][idx];
                }
                acc[idx] += v * weight;
            }
            weight *= self.lambda;
        }
        let placeholder = OrderSample {
            f: acc,
            ft: vec![ZERO; self.band.len()],
        };
        Ok(band_to_state(grid, &self.band, &placeholder)?.f)
    }
}

fn band_to_state(grid: &Arc<FourierGrid>, band: &Band, sample: &OrderSample) -> Result<WaveState> {
    let mut f = SpectralField::zeros(grid);
    let mut ft = SpectralField::zeros(grid);
    for idx in 0..band.len() {
        let k = band.wavenumber(idx);
        let gi = grid.index_of(k).ok_or_else(|| {
            Error::Domain(format!("series wavenumber {k} is not resolved by the grid"))
        })?;
        f.coefficients_mut()[gi] = sample.f[idx];
        ft.coefficients_mut()[gi] = sample.ft[idx];
    }
    WaveState::new(f, ft)
}

/// Output of [`ck_assemble`].
#[derive(Debug, Clone)]
pub struct CkAssembly {
    pub state: WaveState,
    pub solution: SeriesSolution,
    pub mesh_intervals: usize,
    /// Relative change of the assembled coefficients at the last refinement.
    pub quadrature_change: f64,
}

/// Truncated series at time `t` with default quadrature options.
pub fn ck_assemble(
    f0: &SpectralField,
    f1: &SpectralField,
    t: f64,
    max_order: usize,
    params: &ModelParams,
) -> Result<CkAssembly> {
    ck_assemble_with(f0, f1, t, max_order, params, &CkOptions::default())
}

pub fn ck_assemble_with(
    f0: &SpectralField,
    f1: &SpectralField,
    t: f64,
    max_order: usize,
    params: &ModelParams,
    options: &CkOptions,
) -> Result<CkAssembly> {
    if max_order > MAX_SERIES_ORDER {
        return Err(Error::Range(format!(
            "series order {max_order} exceeds the supported maximum {MAX_SERIES_ORDER}"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Usage(format!("series time must be finite and >= 0, got {t}")));
    }
    let scale = data_scale(f0, f1, params)?;
    let grid = f0.grid();
    let half = (grid.n_points() / 2) as i64;
    let width = (max_order as i64 + 1) * scale.band_limit;
    if width >= half {
        return Err(Error::Domain(format!(
            "data support |k| <= {} grows to {width} at order {max_order}, beyond the grid's |k| < {half}",
            scale.band_limit
        )));
    }
    let band = Band {
        half_width: width,
        kappa_unit: grid.kappa_unit(),
    };
    // λ only rescales the orders; any positive value gives the same sum.
    let lambda = if scale.lambda > 0.0 { scale.lambda } else { 1.0 };

    let mut intervals = if t == 0.0 { 1 } else { options.initial_intervals.max(1) };
    let mut previous = build_series(f0, f1, t, max_order, params, &band, &scale, lambda, intervals);
    let mut change = f64::INFINITY;
    if t == 0.0 {
        change = 0.0;
    }
    while change > options.refine_tol && intervals * 2 <= options.max_intervals {
        intervals *= 2;
        let next = build_series(f0, f1, t, max_order, params, &band, &scale, lambda, intervals);
        change = relative_change(&previous, &next, max_order);
        previous = next;
    }
    let state = previous.state(grid, max_order)?;
    Ok(CkAssembly {
        state,
        solution: previous,
        mesh_intervals: intervals,
        quadrature_change: change,
    })
}

fn relative_change(a: &SeriesSolution, b: &SeriesSolution, max_order: usize) -> f64 {
    let sa = a.assembled_at(a.times.len() - 1, max_order);
    let sb = b.assembled_at(b.times.len() - 1, max_order);
    let mut diff: f64 = 0.0;
    let mut size: f64 = 0.0;
    for idx in 0..sa.f.len() {
        diff = diff.max((sa.f[idx] - sb.f[idx]).norm()).max((sa.ft[idx] - sb.ft[idx]).norm());
        size = size.max(sb.f[idx].norm()).max(sb.ft[idx].norm());
    }
    if size == 0.0 {
        0.0
    } else {
        diff / size
    }
}

#[allow(clippy::too_many_arguments)]
fn build_series(
    f0: &SpectralField,
    f1: &SpectralField,
    t: f64,
    max_order: usize,
    params: &ModelParams,
    band: &Band,
    scale: &DataScale,
    lambda: f64,
    intervals: usize,
) -> SeriesSolution {
    let nodes = intervals + 1;
    let dt = t / intervals as f64;
    let times: Vec<f64> = (0..nodes).map(|i| i as f64 * dt).collect();
    let len = band.len();

    let mut orders: Vec<Vec<OrderSample>> = Vec::with_capacity(max_order + 1);
    let mut order0 = vec![OrderSample::zeros(len); nodes];
    for idx in 0..len {
        let k = band.wavenumber(idx);
        let a = f0.coefficient(k) / lambda;
        let b = f1.coefficient(k) / lambda;
        if a == ZERO && b == ZERO {
            continue;
        }
        for (i, &s) in times.iter().enumerate() {
            let (f, ft) = ck_order0(a, b, band.kappa(k), s, params);
            order0[i].f[idx] = f;
            order0[i].ft[idx] = ft;
        }
    }
    orders.push(order0);

    let supports: Vec<i64> = (0..=max_order as i64)
        .map(|l| ((l + 1) * scale.band_limit).min(band.half_width))
        .collect();
    let mut final_forcing = vec![Vec::new()];
    for ell in 1..=max_order {
        // forcing[i][idx]
        let forcing: Vec<Vec<Complex64>> = (0..nodes)
            .map(|i| {
                let lower: Vec<OrderSample> = orders.iter().map(|o| o[i].clone()).collect();
                forcing_all(&lower, &supports, ell, band, params)
            })
            .collect();
        let mut current = vec![OrderSample::zeros(len); nodes];
        let mut series = vec![ZERO; nodes];
        for idx in 0..len {
            for i in 0..nodes {
                series[i] = forcing[i][idx];
            }
            if series.iter().all(|v| *v == ZERO) {
                continue;
            }
            let k = band.kappa(band.wavenumber(idx));
            for (i, (f, ft)) in duhamel_history(&series, dt, k, params).into_iter().enumerate() {
                current[i].f[idx] = f;
                current[i].ft[idx] = ft;
            }
        }
        final_forcing.push(forcing[nodes - 1].clone());
        orders.push(current);
    }

    let majorants = ledger(&orders, &times, band, scale, params);
    SeriesSolution {
        lambda,
        band: *band,
        band_limit: scale.band_limit,
        times,
        orders,
        final_forcing,
        majorants,
    }
}

fn ledger(
    orders: &[Vec<OrderSample>],
    times: &[f64],
    band: &Band,
    scale: &DataScale,
    params: &ModelParams,
) -> MajorantLedger {
    let r = f64::from(scale.r);
    let prefactor = E * E * scale.c_alpha_beta;
    let bounds = orders
        .iter()
        .enumerate()
        .map(|(ell, samples)| {
            let l = ell as f64;
            let decay = (-(l + 1.0) / (1.0 + l * r * r) * scale.d * (r + 1.0)).exp();
            let tau = r + 1.0 - l;
            samples
                .iter()
                .map(|s| {
                    let mut norm = 0.0;
                    for idx in 0..band.len() {
                        let k = band.wavenumber(idx);
                        if k == 0 {
                            continue;
                        }
                        let w = (tau * band.kappa(k).abs()).exp();
                        norm += w * (s.f[idx].norm() + s.ft[idx].norm());
                    }
                    prefactor * decay * norm * params.epsilon
                })
                .collect()
        })
        .collect();
    MajorantLedger {
        r: scale.r,
        d: scale.d,
        c_alpha_beta: scale.c_alpha_beta,
        times: times.to_vec(),
        bounds,
    }
}
