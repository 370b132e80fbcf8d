use std::f64::consts::PI;

use hopf_delay::analysis::{classify_case, exit_times, predicted_exit, Winner};
use hopf_delay::asymptotics::{
    a_p_exact, c_transition, cerf, mu_h, mu_stbc, InitialData, StbcRegime,
};
use hopf_delay::config::{preset, preset_names, ExperimentConfig};
use hopf_delay::contour::{build_contour, quad_bp, ContourKind};
use hopf_delay::grid::{laplacian_neumann, mu_of_t, trapezoid_weights};
use hopf_delay::io::{read_trajectory_binary, write_trajectory_binary};
use hopf_delay::qss::{qss_base, QssExpansion, QssRegime};
use hopf_delay::solver::{run, Experiment, Snapshot, Trajectory};
use hopf_delay::sources::{kernel_g, kernel_g_numeric};
use hopf_delay::{ComplexField, Grid, PhysParams, SourceTerm};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn any_source() -> impl Strategy<Value = SourceTerm> {
    prop_oneof![
        (0.25..4.0f64, 0.2..2.0f64).prop_map(|(sigma, amplitude)| SourceTerm::Gaussian { sigma, amplitude }),
        (0.2..1.0f64, -0.2..0.2f64).prop_map(|(i_ave, i_e)| SourceTerm::SmoothStep { i_ave, i_e }),
        (0.1..1.0f64, 0.0..0.5f64).prop_map(|(p1, p2)| SourceTerm::Periodic { p1, p2 }),
        Just(SourceTerm::SignChanging),
        Just(SourceTerm::Algebraic),
        (0.1..2.0f64).prop_map(|c| SourceTerm::Constant { c }),
    ]
}

fn base_params(eps: f64, omega0: f64, d: Complex64) -> PhysParams {
    PhysParams::base(eps, omega0, 0.0, d, -1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_is_increasing_and_symmetric(l in 0.5..100.0f64, half in 2usize..400) {
        let g = Grid::new(l, 2 * half + 1).unwrap();
        let x = g.points();
        prop_assert!(x.windows(2).all(|w| w[1] > w[0]));
        for j in 0..x.len() {
            prop_assert!((x[j] + x[x.len() - 1 - j]).abs() <= 1e-12 * l);
        }
        prop_assert_eq!(x[half], 0.0);
    }

    #[test]
    fn laplacian_kills_constants(l in 1.0..50.0f64, n in 5usize..300, re in -5.0..5.0f64, im in -5.0..5.0f64) {
        let g = Grid::new(l, n).unwrap();
        let f = ComplexField::from_fn(g, |_| c(re, im)).unwrap();
        let lap = laplacian_neumann(&f).unwrap();
        for v in lap.values() {
            prop_assert!(v.norm() == 0.0);
        }
    }

    #[test]
    fn laplacian_preserves_symmetry_and_mass(
        l in 1.0..50.0f64,
        half in 3usize..200,
        coef in prop::collection::vec(-1.0..1.0f64, 4),
    ) {
        let g = Grid::new(l, 2 * half + 1).unwrap();
        let f = ComplexField::from_fn(g, |x| {
            let y = x / l;
            c(coef[0] * y * y + coef[1] * (3.0 * y).cos(), coef[2] * (-y * y).exp() + coef[3] * y.powi(4))
        })
        .unwrap();
        let lap = laplacian_neumann(&f).unwrap();
        let v = lap.values();
        let n = v.len();
        let scale = 1.0 / (g.dx() * g.dx());
        for j in 0..n {
            prop_assert!((v[j] - v[n - 1 - j]).norm() <= 1e-12 * scale);
        }
        // zero-flux ends: the trapezoid-weighted sum telescopes to zero
        let w = trapezoid_weights(&g);
        let mass: Complex64 = v.iter().zip(&w).map(|(a, w)| a * *w).sum();
        prop_assert!(mass.norm() <= 1e-12 * scale * l);
    }

    #[test]
    fn cerf_symmetries(re in -4.0..4.0f64, im in -3.0..3.0f64) {
        let z = c(re, im);
        let e = cerf(z).unwrap();
        let neg = cerf(-z).unwrap();
        let conj = cerf(z.conj()).unwrap();
        let tol = 1e-12 * (1.0 + e.norm());
        prop_assert!((neg + e).norm() <= tol);
        prop_assert!((conj - e.conj()).norm() <= tol);
    }

    #[test]
    fn kernel_matches_heat_convolution(
        s in any_source(),
        x in -5.0..5.0f64,
        tau in 1e-3..2.0f64,
        d_re in 0.2..3.0f64,
        d_im in -1.0..1.0f64,
    ) {
        let d = c(d_re, d_im);
        let closed = kernel_g(&s, x, c(tau, 0.0), d).unwrap();
        let numeric = kernel_g_numeric(&s, x, c(tau, 0.0), d).unwrap();
        prop_assert!(
            (closed - numeric).norm() <= 1e-7 * (1.0 + closed.norm()),
            "{:?}: {} vs {}", s, closed, numeric
        );
    }

    #[test]
    fn kernel_is_analytic_in_tau(
        s in any_source(),
        x in -4.0..4.0f64,
        tr in 0.1..2.0f64,
        ti in -1.0..1.0f64,
        d_re in 0.2..3.0f64,
    ) {
        let d = c(d_re, 0.0);
        let h = 1e-5;
        let g = |t: Complex64| kernel_g(&s, x, t, d).unwrap();
        let t = c(tr, ti);
        let d_re_dir = (g(t + h) - g(t - h)) / (2.0 * h);
        let d_im_dir = (g(t + c(0.0, h)) - g(t - c(0.0, h))) / (2.0 * h);
        let lhs = d_re_dir;
        let rhs = -Complex64::i() * d_im_dir;
        prop_assert!((lhs - rhs).norm() <= 1e-5 * (lhs.norm() + g(t).norm()));
    }

    #[test]
    fn kernel_solves_the_heat_equation(
        s in any_source(),
        x in -4.0..4.0f64,
        tr in 0.1..2.0f64,
        ti in -1.0..1.0f64,
        d_re in 0.2..3.0f64,
        d_im in -0.5..0.5f64,
    ) {
        let d = c(d_re, d_im);
        let t = c(tr, ti);
        let g = |x: f64, t: Complex64| kernel_g(&s, x, t, d).unwrap();
        let (ht, hx) = (1e-5, 1e-3);
        let g_t = (g(x, t + ht) - g(x, t - ht)) / (2.0 * ht);
        let g_xx = (g(x + hx, t) - 2.0 * g(x, t) + g(x - hx, t)) / (hx * hx);
        let rhs = d * g_xx;
        prop_assert!((g_t - rhs).norm() <= 1e-4 * (g_t.norm() + rhs.norm()) + 1e-9);
    }

    #[test]
    fn buffer_curve_solves_its_relation(
        sigma in 0.25..4.0f64,
        x in -10.0..10.0f64,
        eps in 0.0025..0.04f64,
        omega0 in 0.3..1.0f64,
        d_re in 0.5..3.0f64,
        d_im in -1.0..1.0f64,
    ) {
        let p = base_params(eps, omega0, c(d_re, d_im));
        let s = SourceTerm::gaussian(sigma);
        let mu = mu_stbc(&s, x, &p, StbcRegime::Base).unwrap();
        let g = kernel_g(&s, x, p.shifted(mu), p.slow_diffusivity()).unwrap();
        let r = mu * mu - omega0 * omega0 + eps * (2.0 * PI).ln() + 2.0 * eps * g.norm().ln();
        prop_assert!(r.abs() <= 1e-8, "{}", r);
    }

    #[test]
    fn buffer_curve_lower_bound(
        s in prop_oneof![
            (0.25..4.0f64, 0.05..1.0f64).prop_map(|(sigma, amplitude)| SourceTerm::Gaussian { sigma, amplitude }),
            (0.1..0.5f64, -0.4..0.4f64).prop_map(|(i_ave, i_e)| SourceTerm::SmoothStep { i_ave, i_e: i_e.clamp(-i_ave, 1.0 - i_ave) }),
        ],
        x in -15.0..15.0f64,
        eps in 0.0025..0.04f64,
        omega0 in 0.3..1.0f64,
        d_re in 0.5..3.0f64,
    ) {
        let p = base_params(eps, omega0, c(d_re, 0.0));
        let mu = mu_stbc(&s, x, &p, StbcRegime::Base).unwrap();
        prop_assert!(mu * mu >= omega0 * omega0 - eps * (2.0 * PI).ln() - 1e-12);
    }

    #[test]
    fn gaussian_buffer_curve_even_and_rising(
        sigma in 0.25..4.0f64,
        eps in 0.0025..0.04f64,
        omega0 in 0.3..1.0f64,
        d_re in 0.5..3.0f64,
    ) {
        let p = base_params(eps, omega0, c(d_re, 0.0));
        let s = SourceTerm::gaussian(sigma);
        let grid = Grid::new(20.0, 81).unwrap();
        let mu: Vec<f64> = grid
            .points()
            .iter()
            .map(|&x| mu_stbc(&s, x, &p, StbcRegime::Base).unwrap())
            .collect();
        let n = mu.len();
        for j in 0..n {
            prop_assert!((mu[j] - mu[n - 1 - j]).abs() <= 1e-12);
        }
        for j in n / 2..n - 1 {
            prop_assert!(mu[j + 1] >= mu[j] - 1e-12);
        }
    }

    #[test]
    fn nodal_sources_cross_unit_amplitude_near_the_curve(
        which in 0usize..2,
        x in -3.0..3.0f64,
        eps in 0.005..0.04f64,
    ) {
        let s = if which == 0 {
            SourceTerm::Periodic { p1: 1.0 / 3.0, p2: 0.25 }
        } else {
            SourceTerm::SignChanging
        };
        prop_assume!(which == 0 || x.cos().abs() > 0.1);
        let p = base_params(eps, 0.75, c(1.0, 0.0));
        let mu = mu_stbc(&s, x, &p, StbcRegime::Base).unwrap();
        prop_assume!(mu.is_finite());
        let la = a_p_exact(&s, x, mu, &p).unwrap().log_amplitude;
        prop_assert!(la.abs() <= 5.0 * eps * eps.ln().abs(), "{}", la);
    }

    #[test]
    fn transition_modulus_limit(eps in 0.001..0.05f64, omega0 in 0.2..1.0f64) {
        let p = base_params(eps, omega0, c(1.0, 0.0));
        prop_assert_eq!(c_transition(0.0, &p).unwrap().norm(), 0.0);
        let far = c_transition(1e4, &p).unwrap().norm();
        prop_assert!((far - (PI / 2.0).sqrt()).abs() < 1e-2);
    }

    #[test]
    fn qss_conjugates_under_frequency_flip(
        x in -3.0..3.0f64,
        mu in -1.0..-0.1f64,
        eps in 0.005..0.04f64,
        omega0 in 0.3..1.0f64,
        order in 1u8..=2,
    ) {
        let s = SourceTerm::gaussian(1.0);
        let p = base_params(eps, omega0, c(1.0, 0.0));
        let flipped = PhysParams { omega0: -omega0, ..p };
        let a = qss_base(&s, x, mu, &p, order).unwrap();
        let b = qss_base(&s, x, mu, &flipped, order).unwrap();
        prop_assert!((a.conj() - b).norm() <= 1e-13 * (1.0 + a.norm()));
    }

    #[test]
    fn contour_choice_does_not_change_periodic_integral(
        x in -3.0..3.0f64,
        mu in prop_oneof![-0.9..-0.55f64, -0.45..-0.05f64, 0.05..0.45f64, 0.55..0.9f64],
    ) {
        let p = PhysParams::base(0.04, 0.5, 0.0, c(1.0, 0.0), -1.0);
        let s = SourceTerm::Periodic { p1: 1.0 / 3.0, p2: 0.25 };
        let straight = build_contour(ContourKind::Straight, p.mu0, mu, &p).unwrap();
        let bent = build_contour(ContourKind::for_mu(mu, &p), p.mu0, mu, &p).unwrap();
        prop_assert!(bent.chain_gap() <= 1e-12);
        let a = quad_bp(&straight, &s, x, &p).unwrap();
        let b = quad_bp(&bent, &s, x, &p).unwrap();
        prop_assert!(
            (a.log_amplitude - b.log_amplitude).abs() <= 1e-6 * b.log_amplitude.abs().max(1.0),
            "{:?} vs {:?}", a, b
        );
    }

    #[test]
    fn prediction_is_the_pointwise_minimum(
        sigma in 0.25..4.0f64,
        mu0 in -2.0..-0.55f64,
        amp in 0.1..5.0f64,
        n in 1u32..12,
    ) {
        let p = PhysParams::base(0.01, 0.5, 0.0, c(1.0, 0.0), mu0);
        let s = SourceTerm::gaussian(sigma);
        let grid = Grid::new(30.0, 121).unwrap();
        let data = InitialData::cosine_mode(n, 30.0, amp);
        let pred = predicted_exit(&s, &data, &p, &grid).unwrap();
        for j in 0..pred.x.len() {
            prop_assert_eq!(pred.mu[j], pred.stbc[j].min(pred.hom[j]));
            let expect = if pred.hom[j] < pred.stbc[j] { Winner::Hom } else { Winner::Stbc };
            prop_assert_eq!(pred.winner[j], expect);
            let h = mu_h(&data, &s, pred.x[j], &p).unwrap();
            prop_assert_eq!(pred.hom[j], h);
        }
    }

    #[test]
    fn ramp_is_linear(t in 0.0..1e4f64, eps in 1e-3..0.1f64, mu0 in -3.0..-0.1f64) {
        let p = PhysParams::base(eps, 0.5, 0.0, c(1.0, 0.0), mu0);
        prop_assert!((mu_of_t(t, &p) - (mu0 + eps * t)).abs() <= 1e-12 * (1.0 + t * eps));
        prop_assert_eq!(mu_of_t(0.0, &p), mu0);
    }

    #[test]
    fn binary_trajectory_round_trip(
        n in 3usize..40,
        k in 1usize..6,
        seed in prop::collection::vec(-1e3..1e3f64, 2),
    ) {
        let grid = Grid::new(7.5, n).unwrap();
        let params = PhysParams::base(0.02, 0.7, 0.3, c(2.0, -0.5), -1.25).with_exponents(0.5, 1.0);
        let snapshots = (0..k)
            .map(|i| Snapshot {
                mu: -1.25 + 0.1 * i as f64,
                values: (0..n).map(|j| c(seed[0] / (1 + i + j) as f64, seed[1] * j as f64)).collect(),
            })
            .collect();
        let traj = Trajectory { grid, params, snapshots, dt: 0.1, config_hash: 7, warnings: vec![] };
        let mut buf = Vec::new();
        write_trajectory_binary(&traj, &mut buf).unwrap();
        let back = read_trajectory_binary(&buf[..]).unwrap();
        prop_assert_eq!(back.grid, traj.grid);
        prop_assert_eq!(back.params, traj.params);
        prop_assert_eq!(back.snapshots, traj.snapshots);
    }

    #[test]
    fn config_round_trip(
        which in 0usize..9,
        eps in 1e-3..0.1f64,
        thr in 0.01..0.5f64,
        mu_end in 0.1..3.0f64,
    ) {
        let name = preset_names()[which % preset_names().len()];
        let mut cfg = preset(name).unwrap();
        cfg.params.eps = eps;
        cfg.analysis.exit_threshold = thr;
        cfg.sim.mu_end = mu_end;
        let text = cfg.to_toml().unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml().unwrap(), text);
    }
}

fn small_run() -> Trajectory {
    let p = PhysParams::base(0.01, 0.5, 0.6, c(3.0, 1.0), -1.0);
    let mut e = Experiment::new(
        p,
        SourceTerm::gaussian(0.25),
        InitialData::cosine_mode(4, 10.0, 0.5),
        Grid::new(10.0, 101).unwrap(),
        1.2,
    );
    e.dt = Some(0.05);
    e.record_dmu = 0.005;
    run(&e).unwrap()
}

#[test]
fn snapshots_strictly_increase_in_mu() {
    let t = small_run();
    assert!(t.snapshots.windows(2).all(|w| w[1].mu > w[0].mu));
    for s in &t.snapshots {
        assert!(s.values.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn later_exit_for_larger_threshold() {
    let t = small_run();
    let q = QssExpansion::new(QssRegime::BaseCase, 1, SourceTerm::gaussian(0.25), t.params);
    let thresholds = [0.02, 0.05, 0.1, 0.2, 0.4];
    let profiles: Vec<_> = thresholds.iter().map(|&h| exit_times(&t, &q, h).unwrap()).collect();
    for w in profiles.windows(2) {
        for (a, b) in w[0].mu_exit.iter().zip(&w[1].mu_exit) {
            assert!(b >= a, "{a} then {b}");
        }
    }
    assert!(profiles[2].mu_exit.iter().all(|m| *m > 0.0));
}

#[test]
fn case_survives_grid_refinement() {
    for name in ["fig3", "fig4", "fig6", "fig10"] {
        let cfg = preset(name).unwrap();
        let grid = cfg.grid().unwrap();
        let fine = Grid::new(grid.half_length(), 2 * grid.n_points() - 1).unwrap();
        let data = cfg.initial_data().unwrap();
        let case = |g: &Grid| {
            let pred = predicted_exit(&cfg.source, &data, &cfg.params, g).unwrap();
            classify_case(&pred, &cfg.params).case_id
        };
        assert_eq!(case(&grid), case(&fine), "{name}");
    }
}
