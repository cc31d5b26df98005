use junction_core::homogenization::{convergence_report, solve_effective, solve_oscillatory, EpsilonSweep};
use junction_core::scenario::InitialDatum;
use junction_core::solver::{CauchyOptions, Grid1D};
use junction_core::{EffectiveModel, Hamiltonian, JunctionScenario, PhaseSchedule};

fn light(schedule: PhaseSchedule) -> JunctionScenario {
    JunctionScenario::single(0.0, Hamiltonian::abs(), Hamiltonian::abs(), schedule).unwrap()
}

#[test]
fn constant_limiter_origin_value_for_every_eps() {
    let sc = light(PhaseSchedule::constant(0.5));
    for eps in [1.0, 0.5, 0.1] {
        let grid = Grid1D::spanning(-2.0, 2.0, eps / 20.0).unwrap();
        let tr = solve_oscillatory(
            &sc,
            eps,
            &InitialDatum::Zero,
            1.0,
            &grid,
            20.0,
            &CauchyOptions::default(),
        )
        .unwrap();
        assert!((tr.last().at(0.0).unwrap() + 0.5).abs() < 1e-9);
        assert!(tr.barrier_holds(1e-12));
    }
}

#[test]
fn periodic_light_origin_value_is_close_to_average() {
    let sc = light(PhaseSchedule::two_phase(1.0, 0.0, 0.5).unwrap());
    for eps in [0.2, 0.05] {
        let grid = Grid1D::spanning(-2.0, 2.0, eps / 20.0).unwrap();
        let tr = solve_oscillatory(
            &sc,
            eps,
            &InitialDatum::Zero,
            1.0,
            &grid,
            20.0,
            &CauchyOptions::default(),
        )
        .unwrap();
        let u = tr.last().at(0.0).unwrap();
        assert!((u + 0.5).abs() <= eps, "eps = {eps}: {u}");
        assert!(tr.barrier_holds(1e-12));
    }
}

#[test]
fn effective_tent_translates_down() {
    let model = EffectiveModel::new(Hamiltonian::abs(), Hamiltonian::abs(), 0.5).unwrap();
    let grid = Grid1D::spanning(-2.0, 2.0, 0.02).unwrap();
    let u0 = InitialDatum::Abs {
        coef: -0.5,
        center: 0.0,
    };
    let tr = solve_effective(&model, &u0, 1.0, &grid, &CauchyOptions::default()).unwrap();
    for (j, &v) in tr.last().values.iter().enumerate() {
        assert!((v - (-0.5 * grid.x(j).abs() - 0.5)).abs() < 1e-12);
    }
}

#[test]
fn effective_limiter_at_a0_is_invisible() {
    let h = Hamiltonian::quadratic(1.0, 0.0, 0.0).unwrap();
    let model = EffectiveModel::new(h.clone(), h.clone(), 0.0).unwrap();
    let grid = Grid1D::spanning(-2.0, 2.0, 0.02).unwrap();
    let u0 = InitialDatum::Abs {
        coef: -0.5,
        center: 0.3,
    };
    let opts = CauchyOptions {
        output_times: vec![0.5],
        ..Default::default()
    };
    let with = solve_effective(&model, &u0, 0.5, &grid, &opts).unwrap();
    let without = junction_core::solve_cauchy(&JunctionScenario::homogeneous(h), &u0, 0.5, &grid, &opts).unwrap();
    assert_eq!(with.last().values, without.last().values);
}

#[test]
fn far_separated_lights_converge_to_largest_average() {
    let h = Hamiltonian::abs();
    let sc = JunctionScenario::new(
        vec![-16.0, 16.0],
        vec![h.clone(), h.clone(), h],
        vec![
            PhaseSchedule::two_phase(1.0, 0.0, 0.5).unwrap(),
            PhaseSchedule::two_phase(0.0, 1.0, 0.5).unwrap(),
        ],
    )
    .unwrap();
    let model = EffectiveModel::new(Hamiltonian::abs(), Hamiltonian::abs(), sc.max_mean_limiter()).unwrap();
    let sweep = EpsilonSweep {
        epsilons: vec![0.1, 0.05, 0.025],
        dx: 0.005,
        ..Default::default()
    };
    let r = convergence_report(&sweep, &sc, &model).unwrap();
    assert!(r.monotone && !r.not_converging, "{:?}", r.rows);
}

#[test]
fn report_records_window_and_rows() {
    let sc = light(PhaseSchedule::two_phase(1.0, 0.0, 0.5).unwrap());
    let model = EffectiveModel::new(Hamiltonian::abs(), Hamiltonian::abs(), 0.5).unwrap();
    let r = convergence_report(&EpsilonSweep::default(), &sc, &model).unwrap();
    assert_eq!(r.rows.len(), 3);
    assert!((r.time_window.0 - 0.1).abs() < 1e-12);
    assert!(r.x_window > 0.0 && r.x_window < 2.0);
    assert!(r.rows.windows(2).all(|w| w[1].dx < w[0].dx));
}
