use nalgebra::{Complex, DMatrix, DVector};
use proptest::prelude::*;

use qcrit::densops::{hermitian_eigen, CMatrix};
use qcrit::estimate::MeasurementModel;
use qcrit::sld::{block_coefficients, block_operator};
use qcrit::{
    block_state, bures_from_derivative, chernoff_distance, ed_oracle, lyapunov_residual,
    momentum_grid, pure_sld, pure_sld_eigenvalue, qfi_exact, qfi_from_sld, qfi_zero_t,
    sld_from_spectral, sld_momentum, sld_real_space, Beta, DerivativeFamily, FdScheme, Mode,
    Params, SpectralDensity,
};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

fn coupling() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.5f64..1.5, 0.2f64..2.0, 0.1f64..2.0)
}

fn beta() -> impl Strategy<Value = Beta<f64>> {
    prop_oneof![Just(Beta::Infinite), (0.2f64..20.0).prop_map(Beta::Finite)]
}

fn random_hermitian(entries: &[f64], n: usize) -> CMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |i, j| {
        Complex::new(
            entries[(i * n + j) % entries.len()],
            entries[(j * n + i + 7) % entries.len()],
        )
    });
    (&a + a.adjoint()) * Complex::new(0.5, 0.0)
}

fn block_family(p: Params, k: f64) -> DerivativeFamily<'static, f64> {
    DerivativeFamily::new(move |j| {
        let q = p.with_j(j);
        Ok(block_state(&q, &Mode::for_params(&q, k)).to_matrix())
    })
    .with_step(1e-3)
    .with_scheme(FdScheme::Richardson)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn block_sld_solves_lyapunov((j, g, h) in coupling(), b in beta(), n in 1usize..7) {
        let p = Params::new(j, g, h, 16, b).unwrap();
        let k = 2.0 * std::f64::consts::PI * n as f64 / 16.0;
        let fam = block_family(p, k);
        let rho = fam.density(j).unwrap();
        let drho = fam.derivative(j).unwrap();
        let (b0, by, bz) = block_coefficients(&Mode::for_params(&p, k), b);
        let r = lyapunov_residual(&rho, &drho, &block_operator(b0, by, bz));
        prop_assert!(r <= 1e-8, "residual {:e}", r);
    }

    #[test]
    fn spectral_sld_solves_lyapunov(entries in prop::collection::vec(-1.0f64..1.0, 36), b in 0.1f64..3.0) {
        let h = random_hermitian(&entries, 6);
        let rho = SpectralDensity::thermal(&h, b).unwrap();
        let mut drho = random_hermitian(&entries[3..], 6);
        let tr = drho.trace() / Complex::new(6.0, 0.0);
        for i in 0..6 {
            drho[(i, i)] -= tr;
        }
        let sld = sld_from_spectral(&rho, &drho);
        prop_assert!(lyapunov_residual(&rho.to_matrix(), &drho, &sld) <= 1e-8);
        let q = qfi_from_sld(&rho, &sld);
        let g = bures_from_derivative(&rho, &drho);
        prop_assert!((q - 4.0 * g).abs() <= 1e-10 * q.max(1.0));
    }

    #[test]
    fn qfi_is_four_times_bures_metric((j, g, h) in coupling(), b in 0.3f64..10.0) {
        let p = Params::thermal(j, g, h, 4, b).unwrap();
        let fam = DerivativeFamily::new(move |x| Ok(ed_oracle(&p.with_j(x))?.to_matrix()))
            .with_step(1e-3)
            .with_scheme(FdScheme::Richardson);
        let rho = SpectralDensity::from_matrix(&fam.density(j).unwrap()).unwrap();
        let g4 = 4.0 * bures_from_derivative(&rho, &fam.derivative(j).unwrap());
        let q = qfi_exact(&p).unwrap().value;
        prop_assert!((q - g4).abs() <= 1e-6 * q.max(1e-3), "{} vs {}", q, g4);
    }

    #[test]
    fn pure_sld_eigenvalue_identity(re in prop::collection::vec(-1.0f64..1.0, 16), im in prop::collection::vec(-1.0f64..1.0, 16)) {
        let n = 8;
        let psi = DVector::from_fn(n, |i, _| Complex::new(re[i], im[i]));
        let psi = &psi / Complex::new(psi.norm(), 0.0);
        let mut dpsi = DVector::from_fn(n, |i, _| Complex::new(re[i + n], im[i + n]));
        // A normalized family has Re<psi|dpsi> = 0.
        let ov = psi.dotc(&dpsi);
        dpsi -= &psi * Complex::new(ov.re, 0.0);
        let (ev, _) = hermitian_eigen(&pure_sld(&psi, &dpsi));
        let lam = pure_sld_eigenvalue(&psi, &dpsi);
        prop_assert!((ev[0] + lam).abs() <= 1e-10 * lam.max(1.0));
        prop_assert!((ev[n - 1] - lam).abs() <= 1e-10 * lam.max(1.0));
        prop_assert!(ev[1..n - 1].iter().all(|e| e.abs() <= 1e-10 * lam.max(1.0)));
    }

    #[test]
    fn block_norms_square_to_mode_qfi((j, g, h) in coupling(), l in (2usize..40).prop_map(|n| 2 * n)) {
        prop_assume!((h - j).abs() > 1e-3);
        let p = Params::ground(j, g, h, l).unwrap();
        let op = sld_momentum(&p).unwrap();
        let q = qfi_zero_t(&p).unwrap();
        for (b, (_, hk)) in op.block_norms().iter().zip(&q.per_mode) {
            prop_assert!((b * b - hk).abs() <= 1e-10 * hk.max(1e-300));
        }
    }

    #[test]
    fn chernoff_sandwich((j, g, h) in coupling(), b in prop_oneof![Just(f64::INFINITY), 0.3f64..10.0]) {
        let beta = if b.is_finite() { Beta::Finite(b) } else { Beta::Infinite };
        let p = Params::new(j, g, h, 4, beta).unwrap();
        let d = 1e-3;
        let ds2 = qfi_exact(&p).unwrap().value / 4.0 * d * d;
        prop_assume!(ds2 > 1e-14);
        let xi = chernoff_distance(&ed_oracle(&p).unwrap(), &ed_oracle(&p.with_j(j + d)).unwrap()).unwrap();
        prop_assert!(xi >= 0.5 * ds2 * 0.95 && xi <= ds2 * 1.05, "xi {} ds2 {}", xi, ds2);
    }

    #[test]
    fn block_states_are_densities((j, g, h) in coupling(), b in beta(), n in 1usize..7) {
        let p = Params::new(j, g, h, 16, b).unwrap();
        let k = 2.0 * std::f64::consts::PI * n as f64 / 16.0;
        let rho = block_state(&p, &Mode::for_params(&p, k));
        prop_assert!(rho.validate().is_ok());
        let m = rho.to_matrix();
        prop_assert!((m.trace().re - 1.0).abs() < 1e-12);
        let (ev, _) = hermitian_eigen(&m);
        prop_assert!(ev[0] >= -1e-14);
    }

    #[test]
    fn no_pairing_no_ground_state_information(j in 0.5f64..1.5, h in 0.1f64..2.0, l in (2usize..40).prop_map(|n| 2 * n)) {
        let p = Params::ground(j, 0.0, h, l).unwrap();
        prop_assume!(momentum_grid(&p).unwrap().modes.iter().all(|m| m.lam > 1e-9));
        let op = sld_real_space(sld_momentum(&p).unwrap()).unwrap();
        prop_assert!(op.by_d.iter().chain(&op.bz_d).all(|x| x.abs() < 1e-15));
        prop_assert_eq!(qfi_zero_t(&p).unwrap().value, 0.0);
    }

    #[test]
    fn no_field_no_ground_state_information(j in 0.5f64..1.5, g in 0.2f64..2.0, l in (2usize..40).prop_map(|n| 2 * n)) {
        let p = Params::ground(j, g, 0.0, l).unwrap();
        prop_assert_eq!(qfi_zero_t(&p).unwrap().value, 0.0);
        let op = sld_real_space(sld_momentum(&p).unwrap()).unwrap();
        prop_assert!(op.by_d.iter().chain(&op.bz_d).all(|x| x.abs() < 1e-15));
        let model = MeasurementModel::new(&p, j).unwrap();
        prop_assert!(model.tables(j).iter().all(|t| !t.informative));
        prop_assert_eq!(model.fisher(j), 0.0);
    }
}
