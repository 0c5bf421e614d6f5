//! Property tests for invariants that must hold for every admissible input.

use chic::config::{random_coeffs, InitialPreset, RawConfig, RunConfig};
use chic::dynamics::{integrate, SchemeConfig};
use chic::equilibrium::{hessian_modes, Landscape};
use chic::fit::{exponent_from_rho, rho_from_exponent, SeriesTag};
use chic::functionals::conserved;
use chic::model::{Parameters, Potential};
use chic::spectral::{Grid, Operator, ScalarCoeffs};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coeffs(grid: &Grid, seed: u64, mean: f64) -> ScalarCoeffs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_coeffs(grid, &mut rng, 1.0, mean, 1.0)
}

fn grid_strategy() -> impl Strategy<Value = Grid> {
    prop_oneof![Just((1, 32)), Just((2, 8)), Just((3, 4))].prop_map(|(d, n)| Grid::new(d, n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nodal_round_trip(grid in grid_strategy(), seed in any::<u64>(), mean in -2.0..2.0f64) {
        let u = coeffs(&grid, seed, mean);
        let back = grid.to_spectral(&grid.to_nodal(&u).unwrap()).unwrap();
        prop_assert!(back.sub(&u).max_abs() <= 1e-12 * (1.0 + u.max_abs()));
    }

    #[test]
    fn laplacian_is_symmetric_and_nonnegative(grid in grid_strategy(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let (u, v) = (coeffs(&grid, s1, 0.3), coeffs(&grid, s2, -0.1));
        let au = grid.apply(&u, Operator::Laplacian).unwrap();
        let av = grid.apply(&v, Operator::Laplacian).unwrap();
        let (l, r) = (grid.inner(&au, &v), grid.inner(&u, &av));
        prop_assert!((l - r).abs() <= 1e-10 * (1.0 + l.abs()));
        prop_assert!(grid.inner(&au, &u) >= -1e-12);
        // The kernel is exactly the constants.
        prop_assert_eq!(au.values[0], 0.0);
    }

    #[test]
    fn divergence_is_minus_adjoint_of_gradient(grid in grid_strategy(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let (u, v) = (coeffs(&grid, s1, 0.0), coeffs(&grid, s2, 0.0));
        let au = grid.apply(&u, Operator::Laplacian).unwrap();
        let (gu, gv) = (grid.gradient(&u), grid.gradient(&v));
        let lap = grid.divergence(&gu).scale(-1.0);
        prop_assert!(lap.sub(&au).max_abs() <= 1e-9 * (1.0 + au.max_abs()));
        // <div q, v> = -<q, grad v>, flux inner product by polarization.
        let flux_inner = (grid.flux_norm_sq(&gu.add(&gv)) - grid.flux_norm_sq(&gu.sub(&gv))) / 4.0;
        let lhs = grid.inner(&grid.divergence(&gu), &v);
        prop_assert!((lhs + flux_inner).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn shift_round_trip(a in 0.1..40.0f64, m in -3.0..3.0f64, r in -2.0..2.0f64) {
        let p = Potential::quartic(a);
        let back = p.shifted(m).shifted(-m);
        prop_assert!((back.phi(r) - p.phi(r)).abs() <= 1e-10 * (1.0 + p.phi(r).abs()));
        prop_assert!((p.shifted(m).phi(r) - p.phi(r + m)).abs() <= 1e-10 * (1.0 + p.phi(r + m).abs()));
        prop_assert!(p.shifted(m).big_phi(0.0).abs() <= 1e-14);
    }

    #[test]
    fn exponent_involution(rho in 1e-3..0.499f64) {
        for tag in [SeriesTag::DualNorm, SeriesTag::ThetaL2] {
            let e = exponent_from_rho(rho, tag);
            prop_assert!(e > 0.0);
            prop_assert!((rho_from_exponent(e, tag) - rho).abs() <= 1e-12);
        }
    }

    #[test]
    fn config_text_and_json_agree(n_pow in 3u32..7, alpha in 0.01..2.0f64, sigma in 0.0..1.0f64, a in 0.5..20.0f64, seed in 0u64..1000) {
        let n = 1usize << n_pow;
        let text = format!("[grid]\nn = {n}\n[params]\nalpha = {alpha:e}\nsigma = {sigma:e}\na = {a:e}\n[run]\nseed = {seed}\n");
        let json = format!(r#"{{"grid": {{"n": {n}}}, "params": {{"alpha": {alpha:e}, "sigma": {sigma:e}, "a": {a:e}}}, "run": {{"seed": {seed}}}}}"#);
        let ct = RunConfig::from_raw(&RawConfig::parse_text(&text).unwrap()).unwrap();
        let cj = RunConfig::from_raw(&RawConfig::parse_json(&json).unwrap()).unwrap();
        prop_assert_eq!(&ct, &cj);
        prop_assert_eq!(ct.params.alpha, alpha);
        prop_assert_eq!(ct.n, n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn imex_conserves_total_mass(
        seed in any::<u64>(),
        alpha in 0.05..2.0f64,
        sigma in prop_oneof![Just(0.0), 0.01..1.0f64],
        eps in 0.2..2.0f64,
        a in 0.5..20.0f64,
    ) {
        let grid = Grid::new(1, 16).unwrap();
        let params = Parameters::new(eps, alpha, sigma, Potential::quartic(a), true).unwrap();
        let init = InitialPreset::Random { seed, amplitude: 0.3, smoothness: 1.0, mean: 0.2, theta_mean: -0.1, chi1_mean: 0.15 }
            .build(&grid)
            .unwrap();
        let scheme = SchemeConfig::new(1e-2, 2.0, &params).with_stride(20);
        let traj = integrate(&grid, &init, &scheme, &params, &mut []).unwrap();
        let means = init.means(&params);
        for s in &traj.states {
            let c = conserved(s, &means);
            prop_assert!(c.total_mass_defect <= 1e-12, "{c:?}");
            prop_assert!(c.chi_t_mean_defect <= 1e-12, "{c:?}");
        }
    }

    #[test]
    fn hessian_modes_are_eigenpairs(a in 0.5..30.0f64, amp in 0.0..1.0f64, m in -0.5..0.5f64) {
        let grid = Grid::new(1, 16).unwrap();
        let pot = Potential::quartic(a);
        let mut v = grid.zeros();
        v.values[1] = amp;
        v.values[2] = -0.3 * amp;
        let land = Landscape::new(&grid, &pot, m);
        let modes = hessian_modes(&grid, &v, &pot, m, 3).unwrap();
        for w in modes.windows(2) {
            prop_assert!(w[0].0 <= w[1].0);
        }
        for (mu, z) in &modes {
            prop_assert_eq!(z.values[0], 0.0);
            let hz = land.hessian_apply(&v, z);
            let err = hz.sub(&z.scale(*mu)).max_abs();
            prop_assert!(err <= 1e-8 * (1.0 + mu.abs()) * z.max_abs(), "mu {mu}: {err}");
        }
    }
}
