use num_complex::Complex64;
use oddwave::ck_series::{admissible_r, ck_order0, existence_time};
use oddwave::diagnostics::{energy_teo4, sobolev_norm, tricomi_residual, wiener_norm};
use oddwave::models::dispersion_rates;
use oddwave::timestepper::integrate;
use oddwave::*;
use proptest::prelude::*;

const N: usize = 256;

fn field(seed: u64, n_modes: usize, max_k: u32, amplitude: f64) -> SpectralField {
    let g = FourierGrid::standard(N).unwrap();
    SpectralField::random_band_limited(&g, n_modes, max_k, amplitude, seed).unwrap()
}

fn mean_free(f: &SpectralField) -> SpectralField {
    let mut f = f.clone();
    f.coefficients_mut()[0] = Complex64::new(0.0, 0.0);
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hilbert_squares_to_minus_identity(seed in any::<u64>(), n in 1usize..8, k in 1u32..120) {
        let f = mean_free(&field(seed, n, k, 1.0));
        prop_assert!(f.hilbert().hilbert().sup_distance(&-&f).unwrap() < 1e-12);
    }

    #[test]
    fn lambda_is_hilbert_of_derivative(seed in any::<u64>(), n in 1usize..8, k in 1u32..120) {
        let f = field(seed, n, k, 1.0);
        let scale = 1.0 + f.deriv(1).sup_norm();
        prop_assert!(f.lambda().sup_distance(&f.deriv(1).hilbert()).unwrap() < 1e-12 * scale);
    }

    #[test]
    fn products_stay_real_and_symmetric(a in any::<u64>(), b in any::<u64>(), k in 1u32..42) {
        let f = field(a, 5, k, 1.0);
        let g = field(b, 5, k, 1.0);
        let fg = f.product(&g).unwrap();
        prop_assert!(fg.hermitian_defect() < 1e-14);
        prop_assert!(fg.sup_distance(&g.product(&f).unwrap()).unwrap() < 1e-13);
    }

    #[test]
    fn commutator_annihilates_constants(seed in any::<u64>(), c in -3.0f64..3.0) {
        let g = FourierGrid::standard(N).unwrap();
        let f = field(seed, 4, 40, 1.0);
        let constant = SpectralField::constant(&g, c);
        prop_assert!(constant.commutator_h(&f).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn tricomi_identity_on_band_limited_fields(seed in any::<u64>(), n in 1usize..8, k in 1u32..42, a in 0.1f64..10.0) {
        let f = field(seed, n, k, a);
        prop_assert!(tricomi_residual(&f) < 1e-10 * (1.0 + f.sup_norm().powi(2)));
    }

    #[test]
    fn sobolev_norms_increase_with_order(seed in any::<u64>(), s in 0.0f64..4.0, ds in 0.0f64..2.0) {
        let f = field(seed, 6, 30, 1.0);
        prop_assert!(sobolev_norm(&f, s) <= sobolev_norm(&f, s + ds) * (1.0 + 1e-14));
    }

    #[test]
    fn wiener_norms_increase_with_weight(seed in any::<u64>(), tau in 0.0f64..1.0) {
        let f = field(seed, 6, 30, 1.0);
        prop_assert!(wiener_norm(&f, 0.0) <= wiener_norm(&f, tau) * (1.0 + 1e-14));
    }

    #[test]
    fn energy_teo4_dominates_the_squared_norm(seed in any::<u64>()) {
        let f = field(seed, 6, 30, 1.0);
        let l2_sq: f64 = f.coefficients().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!(energy_teo4(&f) >= l2_sq);
    }

    #[test]
    fn dispersion_rates_satisfy_vieta(k in -50i64..50, alpha in 0.0f64..3.0, beta in 0.0f64..3.0) {
        prop_assume!(k != 0);
        let k = k as f64;
        let p = ModelParams::new(ModelKind::BidirectionalFull, 1.0, alpha, beta);
        let (rp, rm) = dispersion_rates(k, &p);
        let omega_sq = k.abs() + beta * k.abs().powi(3);
        prop_assert!((rp + rm - alpha * k * k.abs()).abs() < 1e-9 * (1.0 + rp.abs()));
        prop_assert!((rp * rm + omega_sq).abs() < 1e-9 * omega_sq);
    }

    #[test]
    fn order0_conserves_the_linear_mode_energy_without_odd_viscosity(
        k in 1i64..20, beta in 0.0f64..2.0, t in 0.0f64..10.0, re in -1.0f64..1.0, im in -1.0f64..1.0,
    ) {
        // with α = 0 the mode equation is a harmonic oscillator
        let p = ModelParams::new(ModelKind::BidirectionalFull, 1.0, 0.0, beta);
        let k = k as f64;
        let omega_sq = k + beta * k.powi(3);
        let f0 = Complex64::new(re, im);
        let f1 = Complex64::new(im, -re);
        let (f, ft) = ck_order0(f0, f1, k, t, &p);
        let e0 = omega_sq * f0.norm_sqr() + f1.norm_sqr();
        let e = omega_sq * f.norm_sqr() + ft.norm_sqr();
        prop_assert!((e - e0).abs() < 1e-10 * e0);
    }

    #[test]
    fn admissible_radius_is_admissible(d in 0.0f64..50.0) {
        let r = admissible_r(d);
        let rf = f64::from(r);
        prop_assert!(rf > d.max(1.0));
        prop_assert!(d * (rf + 1.0) / (1.0 + rf * rf) <= 1.0);
    }

    #[test]
    fn existence_time_shrinks_as_data_grows(seed in any::<u64>(), scale in 1.1f64..10.0) {
        let g = FourierGrid::standard(64).unwrap();
        let p = ModelParams::new(ModelKind::BidirectionalFull, 1.0, 1.0, 1.0);
        let f0 = SpectralField::random_band_limited(&g, 3, 4, 0.01, seed).unwrap();
        let f1 = SpectralField::zeros(&g);
        let t_small = existence_time(&f0, &f1, &p).unwrap();
        let t_large = existence_time(&f0.scaled(scale), &f1, &p).unwrap();
        prop_assert!(t_large < t_small);
    }

    #[test]
    fn integrator_tracks_exponential_decay(rate in 0.1f64..5.0, t1 in 0.1f64..3.0) {
        let y0 = [Complex64::new(1.0, 0.0)];
        let ctrl = StepControl::with_tolerances(1e-9, 1e-12);
        let run = integrate(
            |_, y, dy| {
                dy[0] = -y[0] * rate;
                Ok(())
            },
            &y0,
            (0.0, t1),
            &ctrl,
            |_, _| {},
        )
        .unwrap();
        let exact = (-rate * t1).exp();
        prop_assert!((run.t - t1).abs() < 1e-12);
        prop_assert!((run.state[0].re - exact).abs() < 1e-7);
    }
}
