//! Oscillatory problems `u^eps` and their comparison with the effective
//! single-junction solution.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecPolicy};
use crate::model::EffectiveModel;
use crate::scenario::{InitialDatum, JunctionScenario, PhaseSchedule};
use crate::solver::{self, CauchyOptions, Grid1D, Trajectory};

/// Fine cells per unit of `eps` required by [`solve_oscillatory`].
pub const DEFAULT_OVERSAMPLE: f64 = 20.0;

/// Solves the problem with junctions at `eps b_alpha` and limiters
/// `a_alpha(t / eps)`. Junction marks on `grid` are replaced.
pub fn solve_oscillatory(
    scenario: &JunctionScenario,
    eps: f64,
    u0: &InitialDatum,
    horizon: f64,
    grid: &Grid1D,
    oversample: f64,
    opts: &CauchyOptions,
) -> Result<Trajectory> {
    if !(eps > 0.0) {
        return Err(Error::scenario("epsilons", format!("must be positive, got {eps}")));
    }
    if grid.dx() > eps / oversample * (1.0 + 1e-9) {
        return Err(Error::UnderResolved {
            eps,
            dx: grid.dx(),
            oversample,
        });
    }
    let scaled = scenario.scaled(eps);
    let grid = grid.clone().with_junctions(scaled.positions())?;
    solver::solve_cauchy(&scaled, u0, horizon, &grid, opts)
}

/// Effective problem: one junction at the origin with the constant limiter
/// `A_bar`.
pub fn solve_effective(
    model: &EffectiveModel,
    u0: &InitialDatum,
    horizon: f64,
    grid: &Grid1D,
    opts: &CauchyOptions,
) -> Result<Trajectory> {
    let scenario = effective_scenario(model)?;
    let grid = grid.clone().with_junctions(&[0.0])?;
    solver::solve_cauchy(&scenario, u0, horizon, &grid, opts)
}

pub fn effective_scenario(model: &EffectiveModel) -> Result<JunctionScenario> {
    JunctionScenario::single(
        0.0,
        model.h_bar_l.clone(),
        model.h_bar_r.clone(),
        PhaseSchedule::constant(model.a_bar.max(model.a0)),
    )
}

/// Sweep over `eps` with errors measured on `[t_min, T] x [-X, X]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpsilonSweep {
    /// Strictly decreasing.
    pub epsilons: Vec<f64>,
    pub horizon: f64,
    /// Computational domain `[-half_width, half_width]`.
    pub half_width: f64,
    /// Grid of the effective problem; fine grids refine it.
    pub dx: f64,
    pub oversample: f64,
    /// `t_min = t_min_fraction * T`.
    pub t_min_fraction: f64,
    /// Snapshot count in the time window.
    pub time_samples: usize,
    pub u0: InitialDatum,
    pub cfl_safety: f64,
    pub policy: ExecPolicy,
}

impl Default for EpsilonSweep {
    fn default() -> Self {
        Self {
            epsilons: vec![0.2, 0.1, 0.05],
            horizon: 1.0,
            half_width: 2.0,
            dx: 0.01,
            oversample: DEFAULT_OVERSAMPLE,
            t_min_fraction: 0.1,
            time_samples: 10,
            u0: InitialDatum::Zero,
            cfl_safety: solver::DEFAULT_CFL_SAFETY,
            policy: ExecPolicy::Parallel,
        }
    }
}

impl EpsilonSweep {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() || self.epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::scenario("epsilons", "need at least one positive value"));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::scenario("epsilons", "must be strictly decreasing"));
        }
        for (field, v) in [
            ("horizon", self.horizon),
            ("half_width", self.half_width),
            ("dx", self.dx),
            ("oversample", self.oversample),
            ("cfl_safety", self.cfl_safety),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::scenario(field, format!("must be positive, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.t_min_fraction) {
            return Err(Error::scenario("t_min_fraction", "must lie in [0, 1)"));
        }
        self.u0.validate()
    }

    fn window_times(&self) -> Vec<f64> {
        let t_min = self.t_min_fraction * self.horizon;
        let n = self.time_samples.max(1);
        (0..=n)
            .map(|k| t_min + (self.horizon - t_min) * k as f64 / n as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub dx: f64,
    pub dt: f64,
    pub sup_error: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<SweepRow>,
    /// `[t_min, T]`
    pub time_window: (f64, f64),
    /// Errors are measured for `|x| <= x_window`.
    pub x_window: f64,
    /// Errors over the last three `eps` are non-increasing within 10%.
    pub monotone: bool,
    /// The final error exceeds the first.
    pub not_converging: bool,
    /// Largest barrier excess over all fine runs.
    pub max_barrier_excess: f64,
}

impl ConvergenceReport {
    pub fn final_error(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.sup_error)
    }
}

/// Sup errors between `u^eps` and the effective solution, sampling fine
/// solutions at the nodes of the effective grid.
pub fn convergence_report(
    sweep: &EpsilonSweep,
    scenario: &JunctionScenario,
    model: &EffectiveModel,
) -> Result<ConvergenceReport> {
    sweep.validate()?;
    let coarse = Grid1D::spanning(-sweep.half_width, sweep.half_width, sweep.dx)?;
    let times = sweep.window_times();
    let opts = CauchyOptions {
        cfl_safety: sweep.cfl_safety,
        output_times: times.clone(),
        policy: ExecPolicy::Sequential,
        ..Default::default()
    };
    let effective = solve_effective(model, &sweep.u0, sweep.horizon, &coarse, &opts)?;
    let speed = effective.max_speed;
    let x_window = sweep.half_width - speed * sweep.horizon;
    if x_window <= 0.0 {
        return Err(Error::HorizonTooShort(format!(
            "domain half-width {} is inside the domain of influence {}",
            sweep.half_width,
            speed * sweep.horizon
        )));
    }
    let runs = exec::map(sweep.policy, &sweep.epsilons, |&eps| -> Result<(SweepRow, f64)> {
        let start = Instant::now();
        let stride = (sweep.dx / (eps / sweep.oversample) - 1e-9).ceil().max(1.0) as usize;
        let fine = Grid1D::spanning(-sweep.half_width, sweep.half_width, sweep.dx / stride as f64)?;
        let traj = solve_oscillatory(scenario, eps, &sweep.u0, sweep.horizon, &fine, sweep.oversample, &opts)?;
        let mut err = 0.0_f64;
        for (fs, cs) in traj.snapshots.iter().zip(&effective.snapshots) {
            for j in 0..coarse.n_nodes() {
                if coarse.x(j).abs() <= x_window + 1e-12 {
                    err = err.max((fs.values[j * stride] - cs.values[j]).abs());
                }
            }
        }
        let row = SweepRow {
            eps,
            dx: fine.dx(),
            dt: traj.dt_max,
            sup_error: err,
            runtime_s: start.elapsed().as_secs_f64(),
        };
        Ok((row, traj.max_barrier_excess))
    });
    let mut rows = Vec::with_capacity(runs.len());
    let mut excess = f64::NEG_INFINITY;
    for r in runs {
        let (row, e) = r?;
        rows.push(row);
        excess = excess.max(e);
    }
    let tail = &rows[rows.len().saturating_sub(3)..];
    let monotone = tail.windows(2).all(|w| w[1].sup_error <= 1.1 * w[0].sup_error);
    let not_converging = rows.last().unwrap().sup_error > rows[0].sup_error;
    Ok(ConvergenceReport {
        rows,
        time_window: (times[0], sweep.horizon),
        x_window,
        monotone,
        not_converging,
        max_barrier_excess: excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Hamiltonian;

    fn constant_junction() -> JunctionScenario {
        JunctionScenario::single(
            0.0,
            Hamiltonian::abs(),
            Hamiltonian::abs(),
            PhaseSchedule::constant(0.5),
        )
        .unwrap()
    }

    #[test]
    fn unit_eps_matches_cauchy_bitwise() {
        let sc = JunctionScenario::single(
            0.0,
            Hamiltonian::abs(),
            Hamiltonian::abs(),
            PhaseSchedule::two_phase(1.0, 0.0, 0.5).unwrap(),
        )
        .unwrap();
        let grid = Grid1D::spanning(-1.0, 1.0, 0.05).unwrap();
        let opts = CauchyOptions {
            output_times: vec![0.3, 1.0],
            ..Default::default()
        };
        let a = solve_oscillatory(&sc, 1.0, &InitialDatum::Zero, 1.0, &grid, 20.0, &opts).unwrap();
        let b = solver::solve_cauchy(
            &sc,
            &InitialDatum::Zero,
            1.0,
            &grid.clone().with_junctions(&[0.0]).unwrap(),
            &opts,
        )
        .unwrap();
        assert_eq!(a.snapshots, b.snapshots);
    }

    #[test]
    fn under_resolved_grid_is_rejected() {
        let grid = Grid1D::spanning(-1.0, 1.0, 0.05).unwrap();
        let r = solve_oscillatory(
            &constant_junction(),
            0.1,
            &InitialDatum::Zero,
            1.0,
            &grid,
            20.0,
            &CauchyOptions::default(),
        );
        assert!(matches!(r, Err(Error::UnderResolved { .. })));
    }

    #[test]
    fn effective_steady_profile() {
        // -|x|/2 with slopes (-1/2, 1/2) under F_{1/2} translates down at rate 1/2.
        let model = EffectiveModel::new(Hamiltonian::abs(), Hamiltonian::abs(), 0.5).unwrap();
        let grid = Grid1D::spanning(-2.0, 2.0, 0.05).unwrap();
        let u0 = InitialDatum::Abs { coef: 0.5, center: 0.0 };
        let tr = solve_effective(&model, &u0, 1.0, &grid, &CauchyOptions::default()).unwrap();
        for (j, &v) in tr.last().values.iter().enumerate() {
            let x = grid.x(j);
            assert!((v - (0.5 * x.abs() - 0.5)).abs() < 1e-12, "x={x} v={v}");
        }
    }

    #[test]
    fn no_junction_sweep_is_exact() {
        let sc = JunctionScenario::homogeneous(Hamiltonian::abs());
        let model = EffectiveModel::new(Hamiltonian::abs(), Hamiltonian::abs(), 0.0).unwrap();
        let sweep = EpsilonSweep {
            epsilons: vec![0.2, 0.1],
            u0: InitialDatum::Linear {
                slope: 0.5,
                offset: 0.0,
            },
            ..Default::default()
        };
        // The effective model puts a junction at 0 with A = A0, which is
        // invisible to a linear datum.
        let r = convergence_report(&sweep, &sc, &model).unwrap();
        assert!(r.rows.iter().all(|row| row.sup_error < 1e-12));
    }

    #[test]
    fn sweep_validation() {
        let s = EpsilonSweep {
            epsilons: vec![0.1, 0.2],
            ..Default::default()
        };
        assert!(matches!(s.validate(), Err(Error::InvalidScenario { field, .. }) if field == "epsilons"));
    }
}
