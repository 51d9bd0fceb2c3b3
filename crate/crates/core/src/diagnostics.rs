//! Norms, energies and identity residuals.

use crate::error::Result;
use crate::models::{rhs_unidirectional_f, rhs_unidirectional_u, ModelParams, WaveState};
use crate::spectral::SpectralField;
use serde::Serialize;

/// `‖f‖_{H^s} = (Σ_k (1 + |k|^{2s}) |c_k|²)^{1/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    f.coefficients()
        .iter()
        .zip(f.grid().kappa())
        .map(|(c, k)| (1.0 + k.abs().powf(2.0 * s)) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `‖f‖_{A_τ} = Σ_k e^{τ|k|} |c_k|`.
pub fn wiener_norm(f: &SpectralField, tau: f64) -> f64 {
    f.coefficients()
        .iter()
        .zip(f.grid().kappa())
        .map(|(c, k)| (tau * k.abs()).exp() * c.norm())
        .sum()
}

/// `β‖f‖_{H^{4.5}} + ‖f‖_{H^{3.5}} + ‖f_t‖_{H^3}`, a sum of norms rather than
/// squares.
pub fn energy_teo2(state: &WaveState, beta: f64) -> f64 {
    beta * sobolev_norm(&state.f, 4.5) + sobolev_norm(&state.f, 3.5) + sobolev_norm(&state.f_t, 3.0)
}

/// `Σ_{s ∈ {0, ½, 1, 3/2}} ‖Λ^s f‖²` with `‖g‖² = Σ_k |c_k|²`.
pub fn energy_teo4(f: &SpectralField) -> f64 {
    f.coefficients()
        .iter()
        .zip(f.grid().kappa())
        .map(|(c, k)| {
            let a = k.abs();
            (1.0 + a + a * a + a * a * a) * c.norm_sqr()
        })
        .sum()
}

/// Max over the collocation points of `|∂_x^n f|`.
pub fn sup_norm_deriv(f: &SpectralField, n: u32) -> f64 {
    if n == 0 {
        f.sup_norm()
    } else {
        f.deriv(n).sup_norm()
    }
}

/// Sup norm of `(Hf)² - f² - 2H(f·Hf)` after removing its mean.
pub fn tricomi_residual(f: &SpectralField) -> f64 {
    let hf = f.hilbert();
    let lhs = &hf.square() - &f.square();
    let rhs = f
        .product(&hf)
        .expect("same grid")
        .hilbert()
        .scaled(2.0);
    let mut residual = &lhs - &rhs;
    residual.coefficients_mut()[0] = num_complex::Complex64::new(0.0, 0.0);
    residual.sup_norm()
}

/// `|∫ H((Λu)²) Λ²u dx|` by the collocation quadrature.
pub fn cubic_residual(u: &SpectralField) -> f64 {
    let lu = u.lambda();
    let integrand = lu.square().hilbert();
    integrand
        .integrate_product(&lu.lambda())
        .expect("same grid")
        .abs()
}

/// `L²` norm by quadrature, `(P Σ|c_k|²)^{1/2}`.
pub fn l2_norm(f: &SpectralField) -> f64 {
    (f.grid().period() * f.coefficient_energy()).sqrt()
}

/// Ratio `‖∂_x [H, f] ∂_x g‖_{L²} / (‖∂²_x f‖_∞ ‖g‖_{L²})`; 0 when the
/// denominator vanishes.
pub fn commutator_ratio(f: &SpectralField, g: &SpectralField) -> Result<f64> {
    let num = l2_norm(&f.commutator_h(&g.deriv(1))?.deriv(1));
    let den = f.deriv(2).sup_norm() * l2_norm(g);
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

/// Which norms a record carries.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct DiagnosticsSpec {
    pub sobolev_orders: Vec<f64>,
    pub wiener_weights: Vec<f64>,
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        DiagnosticsSpec {
            sobolev_orders: vec![0.0, 1.0, 2.0],
            wiener_weights: vec![0.0, 0.1],
        }
    }
}

/// The evolved state, tagged by what the stored field means.
#[derive(Debug, Clone, Copy)]
pub enum Snapshot<'a> {
    /// Bidirectional `(f, f_t)`.
    Wave(&'a WaveState),
    /// Unidirectional elevation `f`.
    Elevation(&'a SpectralField),
    /// Unidirectional slope variable `u = Λf`.
    Slope(&'a SpectralField),
}

impl Snapshot<'_> {
    /// The profile plotted and measured by the sup norms: `u = Λf`, or the
    /// evolved field itself in the slope formulation.
    pub fn profile(&self) -> SpectralField {
        match self {
            Snapshot::Wave(s) => s.f.lambda(),
            Snapshot::Elevation(f) => f.lambda(),
            Snapshot::Slope(u) => (*u).clone(),
        }
    }

    /// The field that is actually integrated in time.
    pub fn evolved(&self) -> &SpectralField {
        match self {
            Snapshot::Wave(s) => &s.f,
            Snapshot::Elevation(f) => f,
            Snapshot::Slope(u) => u,
        }
    }

    /// Elevation `f`; in the slope formulation the mean of `u` is dropped
    /// before inverting `Λ`.
    pub fn elevation(&self) -> SpectralField {
        match self {
            Snapshot::Wave(s) => s.f.clone(),
            Snapshot::Elevation(f) => (*f).clone(),
            Snapshot::Slope(u) => mean_free_inverse_lambda(u),
        }
    }

    /// `(f, f_t)`, with `f_t` from the model's right-hand side when the state
    /// does not carry it.
    pub fn wave_state(&self, params: &ModelParams) -> Result<WaveState> {
        match self {
            Snapshot::Wave(s) => Ok((*s).clone()),
            Snapshot::Elevation(f) => WaveState::new((*f).clone(), rhs_unidirectional_f(f, params)?),
            Snapshot::Slope(u) => {
                let ut = rhs_unidirectional_u(u, params)?;
                WaveState::new(mean_free_inverse_lambda(u), mean_free_inverse_lambda(&ut))
            }
        }
    }
}

fn mean_free_inverse_lambda(u: &SpectralField) -> SpectralField {
    u.apply_real_multiplier(|k| if k == 0.0 { 0.0 } else { 1.0 / k.abs() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub sup_u: f64,
    pub sup_ux: f64,
    pub sup_uxx: f64,
    /// `(s, ‖u‖_{H^s})`
    pub sobolev: Vec<(f64, f64)>,
    /// `(τ, ‖u‖_{A_τ})`
    pub wiener: Vec<(f64, f64)>,
    pub energy_teo2: f64,
    pub energy_teo4: f64,
    pub tricomi_residual: f64,
    pub cubic_residual: f64,
    /// Mean of the evolved field.
    pub mean: f64,
}

impl DiagnosticsRecord {
    pub fn compute(
        time: f64,
        snapshot: Snapshot<'_>,
        params: &ModelParams,
        spec: &DiagnosticsSpec,
    ) -> Result<Self> {
        let u = snapshot.profile();
        let f = snapshot.elevation();
        let wave = snapshot.wave_state(params)?;
        Ok(DiagnosticsRecord {
            time,
            sup_u: u.sup_norm(),
            sup_ux: sup_norm_deriv(&u, 1),
            sup_uxx: sup_norm_deriv(&u, 2),
            sobolev: spec.sobolev_orders.iter().map(|&s| (s, sobolev_norm(&u, s))).collect(),
            wiener: spec.wiener_weights.iter().map(|&t| (t, wiener_norm(&u, t))).collect(),
            energy_teo2: energy_teo2(&wave, params.beta),
            energy_teo4: energy_teo4(&f),
            tricomi_residual: tricomi_residual(&f),
            cubic_residual: cubic_residual(&u),
            mean: snapshot.evolved().mean(),
        })
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut cols = vec!["time".into(), "sup_u".into(), "sup_ux".into(), "sup_uxx".into()];
        cols.extend(self.sobolev.iter().map(|(s, _)| format!("sobolev_{s}")));
        cols.extend(self.wiener.iter().map(|(t, _)| format!("wiener_{t}")));
        cols.extend(
            ["energy_teo2", "energy_teo4", "tricomi_residual", "cubic_residual", "mean"]
                .map(String::from),
        );
        cols
    }

    pub fn csv_values(&self) -> Vec<f64> {
        let mut vals = vec![self.time, self.sup_u, self.sup_ux, self.sup_uxx];
        vals.extend(self.sobolev.iter().map(|p| p.1));
        vals.extend(self.wiener.iter().map(|p| p.1));
        vals.extend([
            self.energy_teo2,
            self.energy_teo4,
            self.tricomi_residual,
            self.cubic_residual,
            self.mean,
        ]);
        vals
    }

    pub fn is_finite(&self) -> bool {
        self.csv_values().iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;
    use crate::spectral::{FourierGrid, Mode};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn sobolev_examples() {
        let g = FourierGrid::standard(32).unwrap();
        close(sobolev_norm(&SpectralField::from_modes(&g, &[Mode::cosine(1, 1.0)]).unwrap(), 0.0), 1.0, 1e-14);
        assert_eq!(sobolev_norm(&SpectralField::zeros(&g), 1.0), 0.0);
        close(
            sobolev_norm(&SpectralField::from_modes(&g, &[Mode::cosine(2, 1.0)]).unwrap(), 1.0),
            2.5f64.sqrt(),
            1e-14,
        );
    }

    #[test]
    fn wiener_examples() {
        let g = FourierGrid::standard(32).unwrap();
        let c = SpectralField::from_modes(&g, &[Mode::cosine(1, 1.0)]).unwrap();
        close(wiener_norm(&c, 0.0), 1.0, 1e-14);
        close(wiener_norm(&c, 1.0), std::f64::consts::E, 1e-14);
        assert_eq!(wiener_norm(&SpectralField::zeros(&g), 2.0), 0.0);
    }

    #[test]
    fn energy_examples() {
        let g = FourierGrid::standard(32).unwrap();
        assert_eq!(energy_teo2(&WaveState::zeros(&g), 1.0), 0.0);
        let c = SpectralField::from_modes(&g, &[Mode::cosine(1, 1.0)]).unwrap();
        let s = WaveState::new(c.clone(), SpectralField::zeros(&g)).unwrap();
        close(energy_teo2(&s, 0.0), 1.0, 1e-14);
        assert_eq!(energy_teo4(&SpectralField::zeros(&g)), 0.0);
        close(energy_teo4(&c), 2.0, 1e-14);
        close(energy_teo4(&SpectralField::from_modes(&g, &[Mode::cosine(2, 1.0)]).unwrap()), 7.5, 1e-13);
    }

    #[test]
    fn sup_deriv_examples() {
        let g = FourierGrid::standard(64).unwrap();
        close(sup_norm_deriv(&SpectralField::from_modes(&g, &[Mode::sine(1, 1.0)]).unwrap(), 1), 1.0, 1e-13);
        let case2 = SpectralField::from_fn(&g, |x| -10.0 * (10.0 * x).sin());
        close(sup_norm_deriv(&case2, 1), 100.0, 1e-10);
        close(sup_norm_deriv(&case2, 2), 1000.0, 1e-9);
    }

    #[test]
    fn identities_on_single_modes() {
        let g = FourierGrid::standard(32).unwrap();
        for f in [SpectralField::from_modes(&g, &[Mode::sine(1, 1.0)]).unwrap(), SpectralField::from_modes(&g, &[Mode::cosine(1, 1.0)]).unwrap()] {
            assert!(tricomi_residual(&f) < 1e-14);
        }
        assert_eq!(cubic_residual(&SpectralField::zeros(&g)), 0.0);
        assert!(cubic_residual(&SpectralField::from_modes(&g, &[Mode::sine(1, 1.0)]).unwrap()) < 1e-13);
        let mixed = SpectralField::from_fn(&g, |x| x.sin() + 0.3 * (2.0 * x).cos());
        assert!(cubic_residual(&mixed) < 1e-12);
    }

    #[test]
    fn record_on_slope_state() {
        let g = FourierGrid::standard(64).unwrap();
        let u = SpectralField::from_fn(&g, |x| -x.sin());
        let p = ModelParams::new(ModelKind::UnidirectionalU, 1.0, 1.0, 1.0);
        let rec = DiagnosticsRecord::compute(0.0, Snapshot::Slope(&u), &p, &DiagnosticsSpec::default()).unwrap();
        close(rec.sup_u, 1.0, 1e-13);
        close(rec.sup_ux, 1.0, 1e-13);
        assert!(rec.is_finite());
        assert_eq!(rec.csv_header().len(), rec.csv_values().len());
    }
}
