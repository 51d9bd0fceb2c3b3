//! Right-hand sides of the bidirectional and unidirectional wave models.
//!
//! With `H` the Hilbert transform, `Λ = |∂_x|` and `[H, f]g = H(fg) - f·H(g)`:
//!
//! * full bidirectional model
//!   `f_tt = -Λf - βΛ³f + αΛ∂_x f_t + ε∂_x[-H((Hf_t)²) + [H,f]Λf - α[H,f]Λ∂_x f_t + β[H,f]Λ³f]`
//! * reduced bidirectional model: the same without the `εα` and `εβ` commutators
//! * unidirectional model in `f`
//!   `(2 + αΛ) f_t = ε⁻¹{f_x + Hf + (α-β)Hf_xx} + H((Λf)²) - [H,f]Λf + (α-β)[H,f]Λ³f + μf_xx`
//! * unidirectional model in `u = Λf`
//!   `(2 + αΛ) u_t = ε⁻¹{u_x + Hu + (α-β)Hu_xx} - ∂_x(u²) - Λ[H,f]u + (α-β)Λ[H,f]Λ²u + μu_xx`
//!
//! `μ ≥ 0` is the artificial viscosity of the regularized unidirectional problem.

use crate::error::{Error, Result};
use crate::spectral::SpectralField;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    BidirectionalFull,
    BidirectionalReduced,
    UnidirectionalF,
    UnidirectionalU,
}

impl ModelKind {
    pub fn is_bidirectional(self) -> bool {
        matches!(
            self,
            ModelKind::BidirectionalFull | ModelKind::BidirectionalReduced
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::BidirectionalFull => "bidirectional_full",
            ModelKind::BidirectionalReduced => "bidirectional_reduced",
            ModelKind::UnidirectionalF => "unidirectional_f",
            ModelKind::UnidirectionalU => "unidirectional_u",
        }
    }
}

/// Dimensionless parameters: steepness `ε`, odd Reynolds number `α_o`,
/// Bond number `β` and artificial viscosity `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub epsilon: f64,
    pub alpha_o: f64,
    pub beta: f64,
    #[serde(default)]
    pub mu: f64,
    pub model: ModelKind,
}

impl ModelParams {
    pub fn new(model: ModelKind, epsilon: f64, alpha_o: f64, beta: f64) -> Self {
        ModelParams {
            epsilon,
            alpha_o,
            beta,
            mu: 0.0,
            model,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.epsilon, self.alpha_o, self.beta, self.mu]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::validation("params", "all parameters must be finite"));
        }
        if self.model.is_bidirectional() {
            if self.epsilon < 0.0 {
                return Err(Error::validation("params.epsilon", "must be >= 0"));
            }
        } else if !(self.epsilon > 0.0) {
            return Err(Error::validation(
                "params.epsilon",
                "must be > 0 for unidirectional models",
            ));
        }
        if self.alpha_o < 0.0 {
            return Err(Error::validation("params.alpha_o", "must be >= 0"));
        }
        if self.beta < 0.0 {
            return Err(Error::validation("params.beta", "must be >= 0"));
        }
        if self.mu < 0.0 {
            return Err(Error::validation("params.mu", "must be >= 0"));
        }
        if self.model.is_bidirectional() && self.mu != 0.0 {
            return Err(Error::validation(
                "params.mu",
                "artificial viscosity applies only to unidirectional models",
            ));
        }
        Ok(())
    }
}

/// `(f, f_t)` for the bidirectional models.
#[derive(Debug, Clone)]
pub struct WaveState {
    pub f: SpectralField,
    pub f_t: SpectralField,
}

impl WaveState {
    pub fn new(f: SpectralField, f_t: SpectralField) -> Result<Self> {
        if f.grid() != f_t.grid() {
            return Err(Error::Usage("f and f_t live on different grids".into()));
        }
        Ok(WaveState { f, f_t })
    }

    pub fn zeros(grid: &std::sync::Arc<crate::spectral::FourierGrid>) -> Self {
        WaveState {
            f: SpectralField::zeros(grid),
            f_t: SpectralField::zeros(grid),
        }
    }
}

/// Roots `r₊ ≥ r₋` of `r² - α k|k| r - (|k| + β|k|³) = 0`, the frequencies of
/// the linear mode equation `f̂_tt = -(|k| + β|k|³) f̂ + iαk|k| f̂_t`.
pub fn dispersion_rates(k: f64, params: &ModelParams) -> (f64, f64) {
    let a = params.alpha_o * k * k.abs();
    let omega_sq = k.abs() + params.beta * k.abs().powi(3);
    let disc = (a * a + 4.0 * omega_sq).sqrt();
    (0.5 * (a + disc), 0.5 * (a - disc))
}

/// Linear part `-Λf - βΛ³f + αΛ∂_x f_t`.
pub fn bidirectional_linear(state: &WaveState, params: &ModelParams) -> SpectralField {
    let beta = params.beta;
    let alpha = params.alpha_o;
    let restoring = state
        .f
        .apply_real_multiplier(|k| -(k.abs() + beta * k.abs().powi(3)));
    let odd = state
        .f_t
        .apply_multiplier(|k| Complex64::new(0.0, alpha * k * k.abs()));
    &restoring + &odd
}

fn bidirectional_quadratic(state: &WaveState, params: &ModelParams, full: bool) -> Result<SpectralField> {
    let f = &state.f;
    let g = &state.f_t;
    let self_term = g.hilbert().square().hilbert();
    // [H, f] is linear in its argument, so the commutator terms share one product.
    let mut argument = f.lambda();
    if full {
        let alpha = params.alpha_o;
        let beta = params.beta;
        let odd = g.apply_multiplier(|k| Complex64::new(0.0, alpha * k * k.abs()));
        let capillary = f.apply_real_multiplier(|k| beta * k.abs().powi(3));
        argument = &(&argument - &odd) + &capillary;
    }
    let commutator = f.commutator_h(&argument)?;
    Ok((&commutator - &self_term).deriv(1))
}

fn bidirectional_rhs(state: &WaveState, params: &ModelParams, full: bool) -> Result<SpectralField> {
    if state.f.grid() != state.f_t.grid() {
        return Err(Error::Usage("f and f_t live on different grids".into()));
    }
    let linear = bidirectional_linear(state, params);
    if params.epsilon == 0.0 {
        return Ok(linear);
    }
    let nonlinear = bidirectional_quadratic(state, params, full)?;
    linear.add_scaled(params.epsilon, &nonlinear)
}

/// `f_tt` for the full bidirectional model.
pub fn rhs_bidirectional_full(state: &WaveState, params: &ModelParams) -> Result<SpectralField> {
    bidirectional_rhs(state, params, true)
}

/// `f_tt` for the reduced bidirectional model (no `εα`, `εβ` commutators).
pub fn rhs_bidirectional_reduced(state: &WaveState, params: &ModelParams) -> Result<SpectralField> {
    bidirectional_rhs(state, params, false)
}

/// The individual right-hand-side contributions of the unidirectional
/// `f`-model, before the resolvent `(2 + αΛ)⁻¹` is applied.
#[derive(Debug, Clone)]
pub struct UnidirectionalTerms {
    /// `f_x + Hf`
    pub transport: SpectralField,
    /// `(α-β) H f_xx`
    pub dispersion: SpectralField,
    /// `H((Λf)²)`
    pub self_interaction: SpectralField,
    /// `-[H,f]Λf`
    pub commutator: SpectralField,
    /// `(α-β)[H,f]Λ³f`
    pub capillary_commutator: SpectralField,
    /// `μ f_xx`
    pub viscous: SpectralField,
}

impl UnidirectionalTerms {
    pub fn compute(f: &SpectralField, params: &ModelParams) -> Result<Self> {
        let diff = params.alpha_o - params.beta;
        let zero = SpectralField::zeros(f.grid());
        let transport = &f.deriv(1) + &f.hilbert();
        let lf = f.lambda();
        let self_interaction = lf.square().hilbert();
        let commutator = -&f.commutator_h(&lf)?;
        let (dispersion, capillary_commutator) = if diff == 0.0 {
            (zero.clone(), zero.clone())
        } else {
            (
                f.deriv(2).hilbert().scaled(diff),
                f.commutator_h(&f.lambda_pow(3.0)?)?.scaled(diff),
            )
        };
        let viscous = if params.mu == 0.0 {
            zero
        } else {
            f.deriv(2).scaled(params.mu)
        };
        Ok(UnidirectionalTerms {
            transport,
            dispersion,
            self_interaction,
            commutator,
            capillary_commutator,
            viscous,
        })
    }

    /// Everything inside `(2 + αΛ)⁻¹`.
    pub fn total(&self, epsilon: f64) -> SpectralField {
        let linear = (&self.transport + &self.dispersion).scaled(1.0 / epsilon);
        let nonlinear = &(&self.self_interaction + &self.commutator) + &self.capillary_commutator;
        &(&linear + &nonlinear) + &self.viscous
    }
}

/// `f_t` for the unidirectional `f`-model.
pub fn rhs_unidirectional_f(f: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    if !(params.epsilon > 0.0) {
        return Err(Error::Config("unidirectional models need epsilon > 0".into()));
    }
    let terms = UnidirectionalTerms::compute(f, params)?;
    terms.total(params.epsilon).inverse_helmholtz(2.0, params.alpha_o)
}

/// `u_t` for the unidirectional model in `u = Λf`; `f` is rebuilt as `Λ⁻¹u`.
pub fn rhs_unidirectional_u(u: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    if !(params.epsilon > 0.0) {
        return Err(Error::Config("unidirectional models need epsilon > 0".into()));
    }
    let f = u.inverse_lambda()?;
    let diff = params.alpha_o - params.beta;
    let mut linear = &u.deriv(1) + &u.hilbert();
    if diff != 0.0 {
        linear = linear.add_scaled(diff, &u.deriv(2).hilbert())?;
    }
    let burgers = u.square().deriv(1);
    let mut nonlinear = &(-&burgers) - &f.commutator_h(u)?.lambda();
    if diff != 0.0 {
        let cap = f.commutator_h(&u.lambda_pow(2.0)?)?.lambda();
        nonlinear = nonlinear.add_scaled(diff, &cap)?;
    }
    let mut total = linear.scaled(1.0 / params.epsilon).add_scaled(1.0, &nonlinear)?;
    if params.mu != 0.0 {
        total = total.add_scaled(params.mu, &u.deriv(2))?;
    }
    total.inverse_helmholtz(2.0, params.alpha_o)
}
