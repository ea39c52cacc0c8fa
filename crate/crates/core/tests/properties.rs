use proptest::prelude::*;

use fhn_pas::experiments::{compute_alpha, window_average};
use fhn_pas::model::solve_equilibrium;
use fhn_pas::rectangles::{error_rectangle, find_rectangle, in_d_delta, smaller_root_bisection, ErrorRectangleInputs};
use fhn_pas::solver::{ConstTridiag, FieldState, Grid, Trajectory};
use fhn_pas::source::{eval_profiles, j0, sup_amplitude};
use fhn_pas::SourceParams;

fn admissible() -> impl Strategy<Value = (f64, f64)> {
    (7.0f64..30.0).prop_flat_map(|g| ((2.0 * g / 3.0)..(3.0 * g), Just(g)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn found_rectangles_lie_in_the_region((beta, gamma) in admissible(), delta in 0.0f64..0.2, bound in 0.01f64..1.0) {
        let eq = solve_equilibrium(beta, gamma, 1e-12).unwrap();
        if let Some(r) = find_rectangle(eq.v0, gamma, delta, bound) {
            prop_assert!(in_d_delta(&r, eq.v0, gamma, delta));
            prop_assert!(r.l <= bound && r.s <= bound);
        }
    }

    #[test]
    fn zero_delta_always_has_a_rectangle((beta, gamma) in admissible(), bound in 1e-3f64..1.0) {
        let eq = solve_equilibrium(beta, gamma, 1e-12).unwrap();
        prop_assert!(find_rectangle(eq.v0, gamma, 0.0, bound).is_some());
    }

    #[test]
    fn gauge_is_positively_homogeneous(l in 0.01f64..1.0, s in 0.01f64..1.0, u in -1.0f64..1.0, w in -1.0f64..1.0, k in 0.0f64..10.0) {
        let r = fhn_pas::Rectangle::new(l, s).unwrap();
        let a = r.gauge(k * u, k * w);
        prop_assert!((a - k * r.gauge(u, w)).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn j0_is_bounded_by_delta(a in -1.0f64..1.0, b in -1.0f64..1.0, d1 in 0.2f64..3.0, d2 in 0.2f64..3.0,
                              x0 in -3.0f64..3.0, x in -20.0f64..20.0, t in 0.0f64..50.0) {
        let s = SourceParams::new(a, b, d1, d2, x0, 37.0, 1.3).unwrap();
        let f = eval_profiles(&s, x);
        prop_assert!(j0(&s, &f, t).abs() <= sup_amplitude(&s) * (1.0 + 1e-12));
    }

    #[test]
    fn window_average_ignores_the_window_position(t in -10.0f64..10.0, c in -2.0f64..2.0, p in 0.0f64..6.3) {
        let w = 50.0;
        let f = |s: f64| c + (w * s + p).sin() + 0.5 * (2.0 * w * s).cos().powi(2);
        let avg = window_average(f, t, w, 64);
        prop_assert!((avg - (c + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn tridiagonal_solve_has_small_residual(n in 3usize..60, r in 0.0f64..50.0, seed in any::<u64>()) {
        let rhs: Vec<f64> = (0..n).map(|i| ((i as u64 ^ seed) % 97) as f64 / 97.0 - 0.5).collect();
        let (diag, off) = (1.0 + r, -0.5 * r);
        let mut x = rhs.clone();
        ConstTridiag::new(n, diag, off).solve(&mut x);
        for i in 0..n {
            let mut y = diag * x[i];
            if i > 0 { y += off * x[i - 1]; }
            if i + 1 < n { y += off * x[i + 1]; }
            prop_assert!((y - rhs[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn alpha_grows_with_source_size(m1 in 0.0f64..0.1, dm in 0.0f64..0.1, v in -0.1f64..0.1) {
        let eq = solve_equilibrium(6.0, 8.0, 1e-12).unwrap();
        let g = Grid::new(1.0, 3).unwrap();
        let mut tr = Trajectory::new(g);
        tr.push(FieldState::from_fn(0.0, &g, |_| v, |_| 0.0));
        prop_assert!(compute_alpha(&tr, m1 + dm, &eq, 8.0) >= compute_alpha(&tr, m1, &eq, 8.0));
    }

    #[test]
    fn error_rectangle_root_matches_bisection(c1 in 0.0f64..0.5, c2 in 0.0f64..1.0, c3 in 0.0f64..0.3, eps in 0.01f64..0.5) {
        let eq = solve_equilibrium(6.0, 8.0, 1e-12).unwrap();
        let inputs = ErrorRectangleInputs { c1, c2, c3, eps_margin: eps, v0: eq.v0, gamma: 8.0 };
        if let Some(e) = error_rectangle(&inputs) {
            let b = smaller_root_bisection(e.p, e.q, e.r);
            prop_assert!((e.l_hat - b).abs() <= 1e-12 * (1.0 + b), "{} vs {}", e.l_hat, b);
            let scale = e.p + e.q * e.l_hat + e.r * e.l_hat * e.l_hat;
            prop_assert!((e.p - e.q * e.l_hat + e.r * e.l_hat * e.l_hat).abs() <= 1e-12 * scale);
        }
    }
}
