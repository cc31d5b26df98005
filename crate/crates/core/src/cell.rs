//! Ergodic constants by the long-time method: effective Hamiltonians from
//! periodic cell problems, truncated correctors on `[-rho, rho]` and the
//! effective flux limiter as the limit of their constants.

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecPolicy};
use crate::model::EffectiveModel;
use crate::scenario::{InitialDatum, JunctionScenario};
use crate::solver::{
    self, BoundaryCondition, CauchyOptions, Dynamics, Grid1D, GridSolution, Probe, DEFAULT_CFL_SAFETY,
};
use crate::space_time::SpaceTimeHamiltonian;

/// Bracket `[lower, upper]` on the linear growth rate of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErgodicEstimate {
    pub lambda: f64,
    pub lower: f64,
    pub upper: f64,
    /// Averaging horizon `T`.
    pub horizon: f64,
    /// `2 L (1 + diameter) / T`.
    pub width_bound: f64,
}

impl ErgodicEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Whether the brackets intersect once each is widened by `slack`.
    pub fn overlaps(&self, other: &ErgodicEstimate, slack: f64) -> bool {
        self.lower - slack <= other.upper + slack && other.lower - slack <= self.upper + slack
    }

    /// Estimate for `-rate`.
    pub fn negated(&self) -> Self {
        Self {
            lambda: -self.lambda,
            lower: -self.upper,
            upper: -self.lower,
            ..*self
        }
    }
}

/// Growth rate of a trace sampled every `sample_dt` from `t = 0` and
/// covering at least `[0, 2 horizon]`.
///
/// `lambda^+` and `lambda^-` are the largest and smallest increments
/// `(u(tau + T) - u(tau)) / T` over the available sample times `tau`.
pub fn ergodic_constant(
    trace: &[f64],
    sample_dt: f64,
    lip: f64,
    diameter: f64,
    horizon: f64,
    tol: Option<f64>,
) -> Result<ErgodicEstimate> {
    if !(sample_dt > 0.0 && horizon > 0.0) {
        return Err(Error::HorizonTooShort(format!(
            "horizon {horizon} and sampling step {sample_dt} must be positive"
        )));
    }
    let m = (horizon / sample_dt).round();
    if (m * sample_dt - horizon).abs() > 1e-9 * horizon || m < 1.0 {
        return Err(Error::HorizonTooShort(format!(
            "horizon {horizon} is not a multiple of the sampling step {sample_dt}"
        )));
    }
    let m = m as usize;
    if trace.len() < 2 * m + 1 {
        return Err(Error::HorizonTooShort(format!(
            "trace covers {} samples, need {} for horizon {horizon}",
            trace.len(),
            2 * m + 1
        )));
    }
    let width_bound = 2.0 * lip.abs() * (1.0 + diameter) / horizon;
    if let Some(tol) = tol {
        if width_bound > tol {
            return Err(Error::HorizonTooShort(format!(
                "bracket bound {width_bound} exceeds tolerance {tol}"
            )));
        }
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..trace.len() - m {
        let r = (trace[k + m] - trace[k]) / horizon;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    // Increments of an exactly linear trace still pick up rounding.
    let scale = trace.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let pad = 8.0 * f64::EPSILON * scale / horizon;
    Ok(ErgodicEstimate {
        lambda: 0.5 * (lo + hi),
        lower: lo - pad,
        upper: hi + pad,
        horizon,
        width_bound,
    })
}

/// Numerics for periodic cell problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CellNumerics {
    pub n_cells: usize,
    pub horizon: f64,
    pub sample_dt: f64,
    pub cfl_safety: f64,
}

impl Default for CellNumerics {
    fn default() -> Self {
        Self {
            n_cells: 64,
            horizon: 20.0,
            sample_dt: 0.05,
            cfl_safety: DEFAULT_CFL_SAFETY,
        }
    }
}

/// `v_t + H(t, x, p + v_x) = 0` on the periodic unit cell.
pub struct CellDynamics<'a> {
    ham: &'a SpaceTimeHamiltonian,
    p: f64,
    grid: &'a Grid1D,
    speed: f64,
    level: f64,
}

impl<'a> CellDynamics<'a> {
    pub fn new(ham: &'a SpaceTimeHamiltonian, p: f64, grid: &'a Grid1D) -> Self {
        const NT: usize = 8;
        const NX: usize = 32;
        let samples = || (0..NT).flat_map(|i| (0..NX).map(move |j| (i as f64 / NT as f64, j as f64 / NX as f64)));
        let level = samples().fold(0.0_f64, |m, (t, x)| m.max(ham.eval(t, x, p).abs()));
        // Widen until both ends of [p - k, p + k] sit above the level everywhere.
        let (lo, hi) = ham.p_range();
        let mut k = 1.0;
        while k < 1e6 {
            let above = |q: f64| samples().all(|(t, x)| ham.eval(t, x, q) > level);
            let ql = (p - k).max(lo);
            let qr = (p + k).min(hi);
            if (above(ql) || ql <= lo) && (above(qr) || qr >= hi) {
                break;
            }
            k *= 2.0;
        }
        let k = 1.25 * k;
        let speed = ham.max_p_slope((p - k).max(lo), (p + k).min(hi)) * 1.05;
        Self {
            ham,
            p,
            grid,
            speed,
            level,
        }
    }

    /// `max |H(t, x, p)|` over sampled `(t, x)`.
    pub fn level(&self) -> f64 {
        self.level
    }
}

impl Dynamics for CellDynamics<'_> {
    #[inline]
    fn flux(&self, t: f64, j: usize, p_left: f64, p_right: f64) -> Result<f64> {
        self.ham.godunov(t, self.grid.x(j), self.p + p_left, self.p + p_right)
    }

    fn minimizer(&self, t: f64, j: usize) -> f64 {
        self.ham.minimizer(t, self.grid.x(j)) - self.p
    }

    fn max_speed(&self) -> f64 {
        self.speed
    }
}

/// `H_bar(p)` by the long-time method: solves the cell problem from `v = 0`
/// on `[0, 2T]` and negates the growth rate of `v(t, 0)`.
pub fn effective_hamiltonian(ham: &SpaceTimeHamiltonian, p: f64, numerics: &CellNumerics) -> Result<ErgodicEstimate> {
    let (lo, hi) = ham.p_range();
    if !(lo..=hi).contains(&p) {
        return Err(Error::OutOfRange {
            p,
            p_min: lo,
            p_max: hi,
        });
    }
    let grid = Grid1D::periodic_cell(numerics.n_cells)?;
    let dynamics = CellDynamics::new(ham, p, &grid);
    let dt_max = solver::stable_dt(grid.dx(), dynamics.max_speed(), numerics.cfl_safety);
    let n_sub = ((numerics.sample_dt / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let dt = numerics.sample_dt / n_sub as f64;
    let n_samples = (2.0 * numerics.horizon / numerics.sample_dt).round() as usize;
    let mut cur = vec![0.0; grid.n_nodes()];
    let mut next = cur.clone();
    let mut trace = Vec::with_capacity(n_samples + 1);
    trace.push(0.0);
    let mut observed = 0.0_f64;
    let bc = BoundaryCondition::Periodic;
    for k in 0..n_samples {
        let t0 = k as f64 * numerics.sample_dt;
        for i in 0..n_sub {
            let t = t0 + i as f64 * dt;
            let change = solver::step_into(
                &dynamics,
                &grid,
                t,
                &cur,
                &mut next,
                &bc,
                &bc,
                dt,
                numerics.cfl_safety,
                ExecPolicy::Sequential,
            )?;
            observed = observed.max(change / dt);
            std::mem::swap(&mut cur, &mut next);
        }
        trace.push(cur[0]);
    }
    let lip_space = GridSolution::new(grid.clone(), 0.0, cur)?.measured_lip_space();
    let lip = observed.max(lip_space).max(dynamics.level());
    Ok(ergodic_constant(&trace, numerics.sample_dt, lip, 1.0, numerics.horizon, None)?.negated())
}

/// [`effective_hamiltonian`] at each `p`, independent runs dispatched under
/// `policy`.
pub fn effective_hamiltonian_table(
    ham: &SpaceTimeHamiltonian,
    ps: &[f64],
    numerics: &CellNumerics,
    policy: ExecPolicy,
) -> Result<Vec<ErgodicEstimate>> {
    exec::map(policy, ps, |&p| effective_hamiltonian(ham, p, numerics))
        .into_iter()
        .collect()
}

/// Numerics for truncated correctors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrectorNumerics {
    pub dx: f64,
    /// Averaging horizon `T`; the solve runs on `[0, 2T]`.
    pub horizon: f64,
    pub sample_dt: f64,
    pub cfl_safety: f64,
    /// Snapshots taken over the final period.
    pub period_samples: usize,
    pub policy: ExecPolicy,
}

impl Default for CorrectorNumerics {
    fn default() -> Self {
        Self {
            dx: 0.02,
            horizon: 40.0,
            sample_dt: 0.05,
            cfl_safety: DEFAULT_CFL_SAFETY,
            period_samples: 10,
            policy: ExecPolicy::Parallel,
        }
    }
}

/// Output of [`truncated_corrector`].
#[derive(Debug, Clone, Serialize)]
pub struct TruncatedCorrector {
    pub rho: f64,
    /// Bracket on `lambda_rho`.
    pub lambda: ErgodicEstimate,
    /// `w^rho` at the final time `2T`.
    pub profile: GridSolution,
    /// Snapshots over the final period.
    pub final_period: Vec<GridSolution>,
    /// `max_x (max_t - min_t) (w + lambda t)` over the final period.
    pub oscillation: f64,
    pub probe_x: f64,
    pub max_barrier_excess: f64,
}

/// Node used for the trace: `x = 0` when it is a node, else the junction
/// node closest to the origin.
fn probe_node(grid: &Grid1D) -> usize {
    grid.node_at(0.0).unwrap_or_else(|_| {
        grid.junction_indices()
            .iter()
            .copied()
            .min_by(|&a, &b| grid.x(a).abs().total_cmp(&grid.x(b).abs()))
            .unwrap_or(grid.n_nodes() / 2)
    })
}

/// Solves the truncated corrector problem on `[-rho, rho]` from `w = 0`
/// with `H^-` and `H^+` envelope conditions at the two ends.
pub fn truncated_corrector(
    scenario: &JunctionScenario,
    rho: f64,
    numerics: &CorrectorNumerics,
) -> Result<TruncatedCorrector> {
    let rho0 = scenario.rho0();
    if rho <= rho0 {
        return Err(Error::RhoTooSmall { rho, rho0 });
    }
    let grid = Grid1D::spanning(-rho, rho, numerics.dx)?.with_junctions(scenario.positions())?;
    let probe = probe_node(&grid);
    let t_end = 2.0 * numerics.horizon;
    let period = scenario.period();
    let output_times: Vec<f64> = if t_end >= period && numerics.period_samples > 0 {
        (0..=numerics.period_samples)
            .map(|k| t_end - period + period * k as f64 / numerics.period_samples as f64)
            .collect()
    } else {
        vec![t_end]
    };
    let opts = CauchyOptions {
        cfl_safety: numerics.cfl_safety,
        output_times,
        left: Some(BoundaryCondition::EnvelopeMinus),
        right: Some(BoundaryCondition::EnvelopePlus),
        probe: Some(Probe {
            node: probe,
            sample_dt: numerics.sample_dt,
        }),
        lipschitz: Some(0.0),
        policy: numerics.policy,
    };
    let traj = solver::solve_cauchy(scenario, &InitialDatum::Zero, t_end, &grid, &opts)?;
    let lip = traj.barrier_constant.max(traj.slope_bound);
    let rate = ergodic_constant(&traj.trace, numerics.sample_dt, lip, 2.0 * rho, numerics.horizon, None)?;
    let lambda = rate.negated();
    let oscillation = period_oscillation(&traj.snapshots, lambda.lambda);
    debug!(
        "rho = {rho}: lambda in [{}, {}], oscillation {oscillation:.3e}",
        lambda.lower, lambda.upper
    );
    let profile = traj.last().clone();
    Ok(TruncatedCorrector {
        rho,
        lambda,
        profile,
        final_period: traj.snapshots,
        oscillation,
        probe_x: grid.x(probe),
        max_barrier_excess: traj.max_barrier_excess,
    })
}

fn period_oscillation(snapshots: &[GridSolution], lambda: f64) -> f64 {
    let Some(first) = snapshots.first() else {
        return 0.0;
    };
    (0..first.values.len())
        .map(|j| {
            let (lo, hi) = snapshots
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                    let v = s.values[j] + lambda * s.t;
                    (lo.min(v), hi.max(v))
                });
            hi - lo
        })
        .fold(0.0, f64::max)
}

/// `lambda_rho` bracket for one truncation radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub rho: f64,
    pub lambda: f64,
    pub lower: f64,
    pub upper: f64,
}

impl RhoEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Outcome of a sweep over truncation radii.
#[derive(Debug, Clone, Serialize)]
pub struct FluxLimiterEstimate {
    pub a_bar: f64,
    pub bracket: (f64, f64),
    pub a0: f64,
    pub provenance: Vec<RhoEstimate>,
    /// `lambda_{rho_i} <= lambda_{rho_{i+1}} + width_i + width_{i+1}` for all `i`.
    pub monotone: bool,
    /// `A_bar + width >= A0`.
    pub above_a0: bool,
    /// Distance between the last two brackets (0 when they overlap).
    pub drift: f64,
    #[serde(skip)]
    pub correctors: Vec<TruncatedCorrector>,
}

impl FluxLimiterEstimate {
    pub fn width(&self) -> f64 {
        self.bracket.1 - self.bracket.0
    }

    /// Corrector at the largest radius.
    pub fn widest(&self) -> &TruncatedCorrector {
        self.correctors.last().expect("at least two radii")
    }
}

/// `rho_0 + 2`, `2 (rho_0 + 2)`, `4 (rho_0 + 2)`, rounded up to whole cells.
pub fn default_rho_schedule(scenario: &JunctionScenario, dx: f64) -> Vec<f64> {
    let base = scenario.rho0() + 2.0;
    [1.0, 2.0, 4.0].iter().map(|k| snap_up(k * base, dx)).collect()
}

fn snap_up(x: f64, dx: f64) -> f64 {
    let n = (x / dx - 1e-9).ceil();
    n * dx
}

/// Truncated correctors at every radius (independent runs under the
/// numerics' policy), with monotonicity and lower-bound flags but no
/// convergence requirement.
pub fn rho_sweep(
    scenario: &JunctionScenario,
    rhos: &[f64],
    numerics: &CorrectorNumerics,
) -> Result<FluxLimiterEstimate> {
    let rhos: Vec<f64> = if rhos.is_empty() {
        default_rho_schedule(scenario, numerics.dx)
    } else {
        rhos.to_vec()
    };
    if rhos.len() < 2 {
        return Err(Error::scenario("rho_schedule", "needs at least two radii"));
    }
    if rhos.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::scenario("rho_schedule", "radii must be strictly increasing"));
    }
    let inner = CorrectorNumerics {
        policy: ExecPolicy::Sequential,
        ..*numerics
    };
    let correctors: Vec<TruncatedCorrector> = exec::map(numerics.policy, &rhos, |&rho| {
        truncated_corrector(scenario, rho, &inner)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let provenance: Vec<RhoEstimate> = correctors
        .iter()
        .map(|c| RhoEstimate {
            rho: c.rho,
            lambda: c.lambda.lambda,
            lower: c.lambda.lower,
            upper: c.lambda.upper,
        })
        .collect();
    let monotone = provenance
        .windows(2)
        .all(|w| w[0].lambda <= w[1].lambda + w[0].width() + w[1].width());
    let last = provenance[provenance.len() - 1];
    let prev = provenance[provenance.len() - 2];
    let drift = (last.lower - prev.upper).max(prev.lower - last.upper).max(0.0);
    let a0 = scenario.a0();
    let above_a0 = last.upper >= a0 - 1e-9;
    if !monotone {
        warn!("lambda_rho is not monotone in rho: {provenance:?}");
    }
    Ok(FluxLimiterEstimate {
        a_bar: last.lambda,
        bracket: (last.lower, last.upper),
        a0,
        provenance,
        monotone,
        above_a0,
        drift,
        correctors,
    })
}

/// Effective flux limiter `A_bar = lim lambda_rho`: the last radius of the
/// sweep, once the last two brackets agree within `tol`.
pub fn effective_flux_limiter(
    scenario: &JunctionScenario,
    rhos: &[f64],
    numerics: &CorrectorNumerics,
    tol: f64,
) -> Result<FluxLimiterEstimate> {
    let est = rho_sweep(scenario, rhos, numerics)?;
    if est.drift > tol {
        return Err(Error::NotConverged { gap: est.drift, tol });
    }
    Ok(est)
}

/// Cone check of the rescaled corrector at one `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeCheck {
    pub eps: f64,
    /// Largest amount by which `W_eps` exceeds the upper cone.
    pub upper_violation: f64,
    /// Largest amount by which `W_eps` falls below the lower cone.
    pub lower_violation: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeReport {
    pub window: f64,
    pub checks: Vec<ConeCheck>,
    /// Least-squares slopes of `w` on the outer halves of each side.
    pub slope_left: f64,
    pub slope_right: f64,
}

impl SlopeReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Checks `W_eps(x) = eps (w(x / eps) - w(0))` against the cone of the
/// effective slopes on `[-window, window]`, with slack
/// `(1 + oscillation) eps + dx / eps`.
pub fn corrector_slopes(
    corrector: &TruncatedCorrector,
    model: &EffectiveModel,
    epsilons: &[f64],
    window: f64,
) -> Result<SlopeReport> {
    let profile = &corrector.profile;
    let grid = &profile.grid;
    let rho = grid.x_last();
    let eps_min = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    if rho * eps_min < window {
        return Err(Error::ProfileTooNarrow {
            available: rho * eps_min,
            window,
        });
    }
    let j0 = grid.node_at(0.0)?;
    let w0 = profile.values[j0];
    let s = &model.slopes;
    let mut checks = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let reach = ((window / eps) / grid.dx()).floor() as usize;
        let (mut up, mut down) = (0.0_f64, 0.0_f64);
        for k in 0..=reach {
            for (j, sign) in [(j0 + k, 1.0), (j0.wrapping_sub(k), -1.0)] {
                if j >= grid.n_nodes() {
                    continue;
                }
                let x = eps * (grid.x(j) - grid.x(j0));
                let w = eps * (profile.values[j] - w0);
                let (hat, bar) = if sign > 0.0 {
                    (s.p_hat_r, s.p_bar_r)
                } else {
                    (s.p_hat_l, s.p_bar_l)
                };
                up = up.max(w - hat * x);
                down = down.max(bar * x - w);
            }
        }
        let slack = (1.0 + corrector.oscillation) * eps + grid.dx() / eps;
        checks.push(ConeCheck {
            eps,
            upper_violation: up,
            lower_violation: down,
            slack,
            pass: up <= slack && down <= slack,
        });
    }
    let fit = |from: f64, to: f64| -> f64 {
        let pts: Vec<(f64, f64)> = (0..grid.n_nodes())
            .map(|j| (grid.x(j), profile.values[j]))
            .filter(|(x, _)| *x >= from && *x <= to)
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    let inner = (0.5 * rho).max(scenario_extent(grid));
    Ok(SlopeReport {
        window,
        checks,
        slope_left: fit(-rho, -inner),
        slope_right: fit(inner, rho),
    })
}

fn scenario_extent(grid: &Grid1D) -> f64 {
    grid.junction_indices()
        .iter()
        .fold(0.0_f64, |m, &j| m.max(grid.x(j).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Hamiltonian;
    use crate::scenario::PhaseSchedule;

    #[test]
    fn linear_trace_is_exact() {
        let dt = 0.05;
        let trace: Vec<f64> = (0..=400).map(|k| -3.0 * k as f64 * dt).collect();
        let e = ergodic_constant(&trace, dt, 3.0, 1.0, 10.0, None).unwrap();
        assert!((e.lambda + 3.0).abs() < 1e-12);
        assert!(e.width() < 1e-12);
        assert!(e.contains(-3.0));
    }

    #[test]
    fn oscillating_trace_within_bound() {
        let dt = 0.01;
        let trace: Vec<f64> = (0..=2000)
            .map(|k| {
                let t = k as f64 * dt;
                -3.0 * t + 0.1 * (2.0 * std::f64::consts::PI * t).sin()
            })
            .collect();
        let lip = 3.0 + 0.2 * std::f64::consts::PI;
        let e = ergodic_constant(&trace, dt, lip, 0.0, 10.0, None).unwrap();
        assert!(e.contains(-3.0));
        assert!(e.width() <= e.width_bound);
    }

    #[test]
    fn short_trace_and_tolerance() {
        let trace = vec![0.0; 10];
        assert!(matches!(
            ergodic_constant(&trace, 0.1, 1.0, 1.0, 1.0, None),
            Err(Error::HorizonTooShort(_))
        ));
        let trace = vec![0.0; 101];
        assert!(matches!(
            ergodic_constant(&trace, 0.1, 1.0, 1.0, 5.0, Some(0.1)),
            Err(Error::HorizonTooShort(_))
        ));
    }

    #[test]
    fn cell_problem_of_p_only_hamiltonian() {
        let ham = SpaceTimeHamiltonian::from_branch(Hamiltonian::abs());
        let n = CellNumerics {
            n_cells: 16,
            horizon: 2.0,
            ..Default::default()
        };
        let e = effective_hamiltonian(&ham, 2.0, &n).unwrap();
        assert!((e.lambda - 2.0).abs() < 1e-12);
        let q = SpaceTimeHamiltonian::from_branch(Hamiltonian::quadratic(1.0, 0.5, -1.0).unwrap());
        let e = effective_hamiltonian(&q, -1.0, &n).unwrap();
        assert!((e.lambda - 1.25).abs() < 1e-12);
    }

    #[test]
    fn truncated_without_junction_is_zero() {
        let sc = JunctionScenario::homogeneous(Hamiltonian::abs());
        let num = CorrectorNumerics {
            dx: 0.1,
            horizon: 2.0,
            ..Default::default()
        };
        let c = truncated_corrector(&sc, 1.0, &num).unwrap();
        assert_eq!(c.lambda.lambda, 0.0);
        assert!(c.profile.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_limiter_corrector() {
        let sc = JunctionScenario::single(
            0.0,
            Hamiltonian::abs(),
            Hamiltonian::abs(),
            PhaseSchedule::constant(0.5),
        )
        .unwrap();
        let num = CorrectorNumerics {
            dx: 0.05,
            horizon: 5.0,
            ..Default::default()
        };
        let c = truncated_corrector(&sc, 2.0, &num).unwrap();
        assert!((c.lambda.lambda - 0.5).abs() < 1e-9, "{:?}", c.lambda);
        let w0 = c.profile.at(0.0).unwrap();
        for (j, &w) in c.profile.values.iter().enumerate() {
            let x = c.profile.grid.x(j);
            assert!((w - w0 - 0.5 * x.abs()).abs() < 1e-9);
        }
        assert!(matches!(
            truncated_corrector(&sc, 0.0, &num),
            Err(Error::RhoTooSmall { .. })
        ));
    }

    #[test]
    fn rho_schedule_validation() {
        let sc = JunctionScenario::homogeneous(Hamiltonian::abs());
        let num = CorrectorNumerics {
            dx: 0.1,
            horizon: 1.0,
            ..Default::default()
        };
        assert!(rho_sweep(&sc, &[1.0], &num).is_err());
        assert!(rho_sweep(&sc, &[2.0, 1.0], &num).is_err());
        assert_eq!(default_rho_schedule(&sc, 0.1), vec![2.0, 4.0, 8.0]);
    }
}
