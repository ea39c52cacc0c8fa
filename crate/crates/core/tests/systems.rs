use fhn_pas::model::solve_equilibrium;
use fhn_pas::solver::{
    heat_propagate, simulate, Component, DtPolicy, FhnSystem, FieldState, FnReaction, Grid, SystemKind, Trajectory,
};
use fhn_pas::source::{eval_profiles, j0};
use fhn_pas::{Equilibrium, ModelParams, SourceParams};

fn setup(a: f64, b: f64, omega1: f64) -> (ModelParams, Equilibrium, SourceParams, Grid) {
    let model = ModelParams::new(0.5, 8.0, 6.0, 0.0).unwrap();
    let eq = solve_equilibrium(6.0, 8.0, 1e-12).unwrap();
    let source = SourceParams::new(a, b, 1.0, 1.5, 0.5, omega1, 1.0).unwrap();
    (model, eq, source, Grid::new(20.0, 401).unwrap())
}

fn bump(grid: &Grid, amp: f64) -> FieldState {
    FieldState::from_fn(0.0, grid, |x| amp * (-x * x / 4.0).exp(), |x| 0.3 * amp * (-x * x / 4.0).exp())
}

fn run(kind: SystemKind, model: ModelParams, eq: Equilibrium, s: SourceParams, g: &Grid, init: FieldState, t: f64) -> Trajectory {
    let sys = FhnSystem::new(kind, model, eq, s, g);
    simulate(&sys, g, init, t, DtPolicy::default().dt(SystemKind::Full, &s), 1).unwrap()
}

#[test]
fn full_and_centered_differ_by_the_equilibrium() {
    let (model, eq, s, g) = setup(0.05, 0.03, 20.0);
    let init = bump(&g, 0.1);
    let shifted = FieldState {
        t: 0.0,
        u1: init.u1.iter().map(|v| v + eq.v0).collect(),
        u2: init.u2.iter().map(|w| w + eq.w0).collect(),
    };
    let c = run(SystemKind::Centered, model, eq, s, &g, init, 1.0);
    let f = run(SystemKind::Full, model, eq, s, &g, shifted, 1.0);
    let mut worst = 0.0f64;
    for (a, b) in c.states.iter().zip(&f.states) {
        for i in 0..g.n_points {
            worst = worst.max((b.u1[i] - eq.v0 - a.u1[i]).abs());
            worst = worst.max((b.u2[i] - eq.w0 - a.u2[i]).abs());
        }
    }
    assert!(worst <= 1e-10, "{worst:e}");
}

#[test]
fn silent_source_keeps_pas_and_linear_error_at_zero() {
    let (model, eq, _, g) = setup(0.0, 0.0, 20.0);
    let s = SourceParams::silent();
    let zero = FieldState::zeros(0.0, g.n_points);
    let pas = run(SystemKind::Pas, model, eq, s, &g, zero.clone(), 1.0);
    assert!(pas.states.iter().all(|st| st.u1.iter().chain(&st.u2).all(|&v| v == 0.0)));
    let lin = FhnSystem::new(SystemKind::LinearError, model, eq, s, &g).with_pas(&pas);
    let tr = simulate(&lin, &g, zero, 1.0, 0.01, 1).unwrap();
    assert!(tr.states.iter().all(|st| st.u1.iter().chain(&st.u2).all(|&v| v == 0.0)));
}

#[test]
fn approximation_error_two_ways() {
    let (model, eq, s, g) = setup(0.05, 0.05, 20.0);
    let t_end = 1.0;
    let init = bump(&g, 0.05);
    let dt = DtPolicy::default().dt(SystemKind::Full, &s);
    let pas_sys = FhnSystem::new(SystemKind::Pas, model, eq, s, &g);
    let pas = simulate(&pas_sys, &g, init.clone(), t_end, dt, 1).unwrap();
    let shifted = FieldState {
        t: 0.0,
        u1: init.u1.iter().map(|v| v + eq.v0).collect(),
        u2: init.u2.iter().map(|w| w + eq.w0).collect(),
    };
    let full = simulate(&FhnSystem::new(SystemKind::Full, model, eq, s, &g), &g, shifted, t_end, dt, 1).unwrap();
    let err_sys = FhnSystem::new(SystemKind::NonlinearError, model, eq, s, &g).with_pas(&pas);
    let err = simulate(&err_sys, &g, FieldState::zeros(0.0, g.n_points), t_end, dt, 1).unwrap();

    let xs = g.points();
    let fields: Vec<_> = xs.iter().map(|&x| eval_profiles(&s, x)).collect();
    let (mut gap, mut size) = (0.0f64, 0.0f64);
    for ((f, p), e) in full.states.iter().zip(&pas.states).zip(&err.states) {
        for i in 0..g.n_points {
            if xs[i].abs() > 10.0 {
                continue;
            }
            let direct = f.u1[i] - eq.v0 - p.u1[i] - j0(&s, &fields[i], f.t);
            gap = gap.max((direct - e.u1[i]).abs());
            size = size.max(e.u1[i].abs());
        }
    }
    assert!(size > 1e-4, "{size:e}");
    assert!(gap <= 0.02 * size, "gap {gap:e} vs |E| {size:e}");
}

#[test]
fn heat_kernel_matches_finite_differences() {
    let g = Grid::new(20.0, 801).unwrap();
    let init = FieldState::from_fn(0.0, &g, |x| (-x * x).exp() * (2.0 * x).cos(), |_| 0.0);
    let exact = heat_propagate(&init.u1, 1.0, 1.0, &g);
    let r = FnReaction::new(&g, (1.0, 0.0), |_, _, _, _| (0.0, 0.0));
    let fd = simulate(&r, &g, init, 1.0, 1e-3, 1000).unwrap();
    let last = fd.states.last().unwrap();
    let gap = exact.iter().zip(&last.u1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap <= 1e-3, "{gap:e}");
}

#[test]
fn trajectory_interpolation_reproduces_samples() {
    let (model, eq, s, g) = setup(0.05, 0.03, 20.0);
    let tr = run(SystemKind::Pas, model, eq, s, &g, bump(&g, 0.1), 0.5);
    let mut row = vec![0.0; g.n_points];
    let mid = &tr.states[tr.len() / 2];
    tr.component_at(mid.t, Component::First, &mut row);
    assert_eq!(row, mid.u1);
}
