//! Explicit monotone finite-difference scheme for `u_t + H = 0` on a 1D
//! grid, with flux-limited junction nodes.
//!
//! Interior nodes use the Godunov numerical Hamiltonian
//! `max(H^+(D^- u), H^-(D^+ u))` of their branch; a junction node between
//! branches `k` and `k+1` uses `max(A_k, H_k^+(D^- u), H_{k+1}^-(D^+ u))`.
//! Piecewise-constant limiters are handled as successive Cauchy problems:
//! [`solve_cauchy`] splits the time axis at every switch instant and freezes
//! the limiters on each piece.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, ExecPolicy};
use crate::hamiltonian::Hamiltonian;
use crate::scenario::{InitialDatum, JunctionScenario};

/// Default Courant safety factor.
pub const DEFAULT_CFL_SAFETY: f64 = 0.45;

const TIME_TOL: f64 = 1e-10;

/// Uniform node grid `x_j = x0 + j dx`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid1D {
    x0: f64,
    dx: f64,
    n_nodes: usize,
    junction_indices: Vec<usize>,
}

impl Grid1D {
    pub fn new(x0: f64, dx: f64, n_nodes: usize) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!("dx must be positive, got {dx}")));
        }
        if n_nodes < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n_nodes}")));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidGrid("x0 must be finite".into()));
        }
        Ok(Self {
            x0,
            dx,
            n_nodes,
            junction_indices: Vec::new(),
        })
    }

    /// Nodes from `x_left` to `x_right` inclusive; the width must be an
    /// integer multiple of `dx`.
    pub fn spanning(x_left: f64, x_right: f64, dx: f64) -> Result<Self> {
        let cells = (x_right - x_left) / dx;
        let n = cells.round();
        if !(n >= 2.0) || (cells - n).abs() > 1e-7 * n.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "[{x_left}, {x_right}] is not a whole number of cells of width {dx}"
            )));
        }
        Self::new(x_left, dx, n as usize + 1)
    }

    /// `n` nodes on the periodic cell `[0, 1)`.
    pub fn periodic_cell(n: usize) -> Result<Self> {
        Self::new(0.0, 1.0 / n as f64, n)
    }

    /// Marks the nodes at `positions` as junctions. Every position must sit
    /// exactly on an interior node.
    pub fn with_junctions(mut self, positions: &[f64]) -> Result<Self> {
        let mut idx = Vec::with_capacity(positions.len());
        for &b in positions {
            let j = self.node_at(b)?;
            if j == 0 || j + 1 == self.n_nodes {
                return Err(Error::InvalidGrid(format!("junction at x = {b} sits on the boundary")));
            }
            idx.push(j);
        }
        if idx.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "junctions must map to distinct increasing nodes".into(),
            ));
        }
        self.junction_indices = idx;
        Ok(self)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn junction_indices(&self) -> &[usize] {
        &self.junction_indices
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    pub fn x_last(&self) -> f64 {
        self.x(self.n_nodes - 1)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|j| self.x(j)).collect()
    }

    /// Index of the node at `x`, which must coincide with a node.
    pub fn node_at(&self, x: f64) -> Result<usize> {
        let k = ((x - self.x0) / self.dx).round();
        let off = (self.x0 + k * self.dx - x).abs();
        if k < 0.0 || k >= self.n_nodes as f64 || off > 1e-7 * self.dx {
            return Err(Error::OffGrid { x, dx: self.dx });
        }
        Ok(k as usize)
    }

    /// Same nodes, ignoring junction marks.
    pub fn same_nodes(&self, other: &Grid1D) -> bool {
        self.n_nodes == other.n_nodes
            && (self.x0 - other.x0).abs() <= 1e-12 * self.dx
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
    }
}

/// Node values at one time, with Lipschitz certificates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSolution {
    pub grid: Grid1D,
    pub t: f64,
    pub values: Vec<f64>,
    /// Certified bound on `|u_{j+1} - u_j| / dx`.
    pub lip_space: f64,
    /// Certified bound on `|u(t + dt) - u(t)| / dt`.
    pub lip_time: f64,
    /// Largest `|u(t + dt) - u(t)| / dt` observed so far.
    pub observed_lip_time: f64,
}

impl GridSolution {
    pub fn new(grid: Grid1D, t: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.n_nodes
            )));
        }
        let mut s = Self {
            grid,
            t,
            values,
            lip_space: 0.0,
            lip_time: f64::INFINITY,
            observed_lip_time: 0.0,
        };
        s.lip_space = s.measured_lip_space();
        Ok(s)
    }

    pub fn from_fn(grid: Grid1D, t: f64, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n_nodes).map(|j| f(grid.x(j))).collect();
        Self::new(grid, t, values).expect("length matches")
    }

    pub fn with_certificates(mut self, lip_space: f64, lip_time: f64) -> Self {
        self.lip_space = lip_space;
        self.lip_time = lip_time;
        self
    }

    pub fn measured_lip_space(&self) -> f64 {
        let dx = self.grid.dx;
        self.values
            .windows(2)
            .map(|w| ((w[1] - w[0]) / dx).abs())
            .fold(0.0, f64::max)
    }

    /// True when the observed slopes respect both certificates.
    pub fn lipschitz_ok(&self, rel_tol: f64) -> bool {
        let slack = |b: f64| b * (1.0 + rel_tol) + rel_tol;
        self.measured_lip_space() <= slack(self.lip_space) && self.observed_lip_time <= slack(self.lip_time)
    }

    /// Value at the node at `x`.
    pub fn at(&self, x: f64) -> Result<f64> {
        Ok(self.values[self.grid.node_at(x)?])
    }

    pub fn shifted(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.values.iter_mut().for_each(|v| *v += c);
        s
    }
}

/// Periodic-in-time Dirichlet trace `U0(t)`.
pub type Trace = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum BoundaryCondition {
    /// Prescribed value `U0(t)`.
    Dirichlet(Trace),
    /// Left end only: `u_t + H^-(u_x) = 0` with the inward slope.
    EnvelopeMinus,
    /// Right end only: `u_t + H^+(u_x) = 0` with the inward slope.
    EnvelopePlus,
    /// Ghost node extended linearly with the given slope.
    SlopeExtension(f64),
    /// Both ends: the last node's right neighbour is node 0.
    Periodic,
}

impl fmt::Debug for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::Dirichlet(_) => f.write_str("Dirichlet(..)"),
            BoundaryCondition::EnvelopeMinus => f.write_str("EnvelopeMinus"),
            BoundaryCondition::EnvelopePlus => f.write_str("EnvelopePlus"),
            BoundaryCondition::SlopeExtension(p) => write!(f, "SlopeExtension({p})"),
            BoundaryCondition::Periodic => f.write_str("Periodic"),
        }
    }
}

fn check_boundaries(left: &BoundaryCondition, right: &BoundaryCondition) -> Result<()> {
    use BoundaryCondition::*;
    match (left, right) {
        (Periodic, Periodic) => Ok(()),
        (Periodic, _) | (_, Periodic) => Err(Error::InvalidBoundary("periodic must be set on both ends".into())),
        (EnvelopePlus, _) => Err(Error::InvalidBoundary("H^+ condition belongs on the right end".into())),
        (_, EnvelopeMinus) => Err(Error::InvalidBoundary("H^- condition belongs on the left end".into())),
        _ => Ok(()),
    }
}

/// Godunov numerical Hamiltonian `max(H^+(p_left), H^-(p_right))`.
#[inline]
pub fn godunov_flux(h: &Hamiltonian, p_left: f64, p_right: f64) -> Result<f64> {
    Ok(h.envelope_plus(p_left)?.max(h.envelope_minus(p_right)?))
}

/// Node-wise numerical Hamiltonian driving [`step_with`].
pub trait Dynamics: Sync {
    /// Numerical Hamiltonian at node `j` for a step starting at `t`.
    fn flux(&self, t: f64, j: usize, p_left: f64, p_right: f64) -> Result<f64>;

    /// Minimizer of the Hamiltonian acting at node `j`.
    fn minimizer(&self, t: f64, j: usize) -> f64;

    /// Upper bound on `|dH/dp|` over the slopes the solution can reach.
    fn max_speed(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum NodeKind {
    Branch(usize),
    Junction(usize),
}

/// Assignment of branch Hamiltonians and junctions to grid nodes.
#[derive(Debug, Clone)]
pub struct BranchLayout {
    branches: Vec<Hamiltonian>,
    kinds: Vec<NodeKind>,
    max_speed: f64,
    slope_bound: f64,
}

impl BranchLayout {
    /// `level` bounds `H_beta(u_x)` along the evolution; it fixes the slope
    /// range used for the CFL speed and the space-Lipschitz certificate.
    pub fn new(scenario: &JunctionScenario, grid: &Grid1D, level: f64) -> Result<Self> {
        if grid.junction_indices.len() != scenario.n_junctions() {
            return Err(Error::GridMismatch(format!(
                "grid marks {} junctions, scenario has {}",
                grid.junction_indices.len(),
                scenario.n_junctions()
            )));
        }
        let mut kinds = Vec::with_capacity(grid.n_nodes);
        let mut branch = 0;
        for j in 0..grid.n_nodes {
            if branch < grid.junction_indices.len() && grid.junction_indices[branch] == j {
                kinds.push(NodeKind::Junction(branch));
                branch += 1;
            } else {
                kinds.push(NodeKind::Branch(branch));
            }
        }
        let mut max_speed: f64 = 0.0;
        let mut slope_bound: f64 = 0.0;
        for h in scenario.branches() {
            let lvl = level.max(h.min_value());
            let (lo, hi) = h.sublevel_interval(lvl)?;
            slope_bound = slope_bound.max(lo.abs()).max(hi.abs());
            let pad = 0.25 * (hi - lo) + 1e-3;
            max_speed = max_speed.max(h.max_slope(lo - pad, hi + pad));
        }
        Ok(Self {
            branches: scenario.branches().to_vec(),
            kinds,
            max_speed,
            slope_bound,
        })
    }

    pub fn max_speed(&self) -> f64 {
        self.max_speed
    }

    /// Largest `|p|` with `H_beta(p) <= level` over all branches.
    pub fn slope_bound(&self) -> f64 {
        self.slope_bound
    }

    pub fn frozen<'a>(&'a self, limiters: &'a [f64]) -> FrozenJunctions<'a> {
        FrozenJunctions { layout: self, limiters }
    }
}

/// A [`BranchLayout`] with limiters held constant over a step.
pub struct FrozenJunctions<'a> {
    layout: &'a BranchLayout,
    limiters: &'a [f64],
}

impl Dynamics for FrozenJunctions<'_> {
    #[inline]
    fn flux(&self, _t: f64, j: usize, p_left: f64, p_right: f64) -> Result<f64> {
        match self.layout.kinds[j] {
            NodeKind::Branch(b) => godunov_flux(&self.layout.branches[b], p_left, p_right),
            NodeKind::Junction(k) => {
                let left = self.layout.branches[k].envelope_plus(p_left)?;
                let right = self.layout.branches[k + 1].envelope_minus(p_right)?;
                Ok(self.limiters[k].max(left).max(right))
            }
        }
    }

    fn minimizer(&self, _t: f64, j: usize) -> f64 {
        match self.layout.kinds[j] {
            NodeKind::Branch(b) => self.layout.branches[b].p0(),
            NodeKind::Junction(k) => self.layout.branches[k].p0(),
        }
    }

    fn max_speed(&self) -> f64 {
        self.layout.max_speed
    }
}

/// Largest stable step for the given safety factor.
pub fn stable_dt(dx: f64, speed: f64, cfl_safety: f64) -> f64 {
    if speed > 0.0 {
        cfl_safety * dx / speed
    } else {
        f64::INFINITY
    }
}

/// One explicit Euler step of size `dt` from `u` at time `t` into `out`.
/// Returns `max_j |out_j - u_j|`.
#[allow(clippy::too_many_arguments)]
pub fn step_into<D: Dynamics>(
    dynamics: &D,
    grid: &Grid1D,
    t: f64,
    u: &[f64],
    out: &mut [f64],
    left: &BoundaryCondition,
    right: &BoundaryCondition,
    dt: f64,
    cfl_safety: f64,
    policy: ExecPolicy,
) -> Result<f64> {
    let bound = stable_dt(grid.dx, dynamics.max_speed(), cfl_safety);
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }
    let n = grid.n_nodes;
    let dx = grid.dx;
    let last = n - 1;
    let ghost_left = |j: usize| -> f64 {
        match left {
            BoundaryCondition::Periodic => (u[0] - u[last]) / dx,
            BoundaryCondition::SlopeExtension(p) => *p,
            _ => dynamics.minimizer(t, j),
        }
    };
    let ghost_right = |j: usize| -> f64 {
        match right {
            BoundaryCondition::Periodic => (u[0] - u[last]) / dx,
            BoundaryCondition::SlopeExtension(p) => *p,
            _ => dynamics.minimizer(t, j),
        }
    };
    exec::fill_indexed(policy, out, |j| {
        if j == 0 {
            if let BoundaryCondition::Dirichlet(f) = left {
                return Ok(f(t + dt));
            }
        }
        if j == last {
            if let BoundaryCondition::Dirichlet(f) = right {
                return Ok(f(t + dt));
            }
        }
        let p_left = if j == 0 { ghost_left(j) } else { (u[j] - u[j - 1]) / dx };
        let p_right = if j == last {
            ghost_right(j)
        } else {
            (u[j + 1] - u[j]) / dx
        };
        Ok(u[j] - dt * dynamics.flux(t, j, p_left, p_right)?)
    })?;
    Ok(u.iter().zip(out.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Advances `sol` by `dt` under arbitrary dynamics.
pub fn step_with<D: Dynamics>(
    sol: &GridSolution,
    dynamics: &D,
    left: &BoundaryCondition,
    right: &BoundaryCondition,
    dt: f64,
    cfl_safety: f64,
) -> Result<GridSolution> {
    check_boundaries(left, right)?;
    let mut out = vec![0.0; sol.values.len()];
    let change = step_into(
        dynamics,
        &sol.grid,
        sol.t,
        &sol.values,
        &mut out,
        left,
        right,
        dt,
        cfl_safety,
        ExecPolicy::Sequential,
    )?;
    let mut next = sol.clone();
    next.values = out;
    next.t = sol.t + dt;
    next.observed_lip_time = sol.observed_lip_time.max(change / dt);
    Ok(next)
}

/// Limiters for a single step.
#[derive(Debug, Clone, Copy)]
pub enum Limiters<'a> {
    /// Values held over the step.
    Frozen(&'a [f64]),
    /// Read from the scenario's schedules; the step must not straddle a
    /// switch instant.
    Scheduled(&'a JunctionScenario),
}

/// One step of the junction scheme on `sol`.
pub fn step(
    sol: &GridSolution,
    layout: &BranchLayout,
    limiters: Limiters<'_>,
    left: &BoundaryCondition,
    right: &BoundaryCondition,
    dt: f64,
    cfl_safety: f64,
) -> Result<GridSolution> {
    match limiters {
        Limiters::Frozen(values) => step_with(sol, &layout.frozen(values), left, right, dt, cfl_safety),
        Limiters::Scheduled(scenario) => {
            let t_end = sol.t + dt;
            for s in scenario.schedules() {
                if let Some(&switch) = s.switches_between(sol.t + TIME_TOL, t_end - TIME_TOL).first() {
                    return Err(Error::PhaseBoundaryCrossed {
                        t: sol.t,
                        t_end,
                        switch,
                    });
                }
            }
            let mid = sol.t + 0.5 * dt;
            let values: Vec<f64> = scenario.schedules().iter().map(|s| s.value_at(mid)).collect();
            step_with(sol, &layout.frozen(&values), left, right, dt, cfl_safety)
        }
    }
}

/// Node whose value is recorded every `sample_dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub node: usize,
    pub sample_dt: f64,
}

#[derive(Debug, Clone)]
pub struct CauchyOptions {
    pub cfl_safety: f64,
    /// Snapshot times in `[0, horizon]`.
    pub output_times: Vec<f64>,
    /// Defaults to slope extension with the far-field slopes of `u0`.
    pub left: Option<BoundaryCondition>,
    pub right: Option<BoundaryCondition>,
    pub probe: Option<Probe>,
    /// Lipschitz constant of `u0`; defaults to the descriptor's.
    pub lipschitz: Option<f64>,
    pub policy: ExecPolicy,
}

impl Default for CauchyOptions {
    fn default() -> Self {
        Self {
            cfl_safety: DEFAULT_CFL_SAFETY,
            output_times: Vec::new(),
            left: None,
            right: None,
            probe: None,
            lipschitz: None,
            policy: ExecPolicy::Sequential,
        }
    }
}

/// Output of [`solve_cauchy`].
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub snapshots: Vec<GridSolution>,
    /// Probe values at `k * trace_dt`, starting at `t = 0`.
    pub trace: Vec<f64>,
    pub trace_dt: f64,
    pub initial: Vec<f64>,
    /// Lipschitz constant of the initial datum used for the barrier.
    pub lipschitz: f64,
    /// Barrier constant `C`: `|u(t) - u0| <= C t`.
    pub barrier_constant: f64,
    /// Largest `max_j |u_j(t) - u0_j| - C t` seen over all steps.
    pub max_barrier_excess: f64,
    pub slope_bound: f64,
    pub max_speed: f64,
    pub dt_max: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &GridSolution {
        self.snapshots.last().expect("at least one snapshot")
    }

    pub fn barrier_holds(&self, tol: f64) -> bool {
        self.max_barrier_excess <= tol
    }
}

fn merge_times(mut ts: Vec<f64>) -> Vec<f64> {
    ts.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(ts.len());
    for t in ts {
        match out.last() {
            Some(&prev) if t - prev <= TIME_TOL * prev.abs().max(1.0) => {}
            _ => out.push(t),
        }
    }
    out
}

/// Solves the junction problem on `[0, horizon]` as successive Cauchy
/// problems between limiter switches.
pub fn solve_cauchy(
    scenario: &JunctionScenario,
    u0: &InitialDatum,
    horizon: f64,
    grid: &Grid1D,
    opts: &CauchyOptions,
) -> Result<Trajectory> {
    u0.validate()?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::scenario(
            "horizon",
            format!("must be non-negative, got {horizon}"),
        ));
    }
    let (far_l, far_r) = u0.far_slopes();
    let left = opts.left.clone().unwrap_or(BoundaryCondition::SlopeExtension(far_l));
    let right = opts.right.clone().unwrap_or(BoundaryCondition::SlopeExtension(far_r));
    check_boundaries(&left, &right)?;
    let mut lip = opts.lipschitz.unwrap_or_else(|| u0.lipschitz());
    for bc in [&left, &right] {
        if let BoundaryCondition::SlopeExtension(p) = bc {
            lip = lip.max(p.abs());
        }
    }
    let c = scenario.barrier_constant(lip);
    let layout = BranchLayout::new(scenario, grid, c)?;
    let slope_bound = layout.slope_bound().max(lip);
    let dt_max = stable_dt(grid.dx, layout.max_speed(), opts.cfl_safety);

    let initial: Vec<f64> = (0..grid.n_nodes).map(|j| u0.value(grid.x(j))).collect();
    let mut cur = initial.clone();
    let mut next = vec![0.0; cur.len()];

    let mut events: Vec<f64> = vec![horizon];
    for s in scenario.schedules() {
        events.extend(s.switches_between(0.0, horizon));
    }
    let outputs = merge_times(
        opts.output_times
            .iter()
            .copied()
            .filter(|&t| (0.0..=horizon).contains(&t))
            .collect(),
    );
    events.extend(outputs.iter().copied().filter(|&t| t > 0.0));
    let mut samples = Vec::new();
    if let Some(probe) = opts.probe {
        if probe.node >= grid.n_nodes {
            return Err(Error::GridMismatch(format!("probe node {} out of range", probe.node)));
        }
        let k_max = (horizon / probe.sample_dt + 1e-9).floor() as usize;
        samples = (1..=k_max).map(|k| k as f64 * probe.sample_dt).collect();
        events.extend(samples.iter().copied());
    }
    let events = merge_times(events.into_iter().filter(|&t| t > 0.0).collect());

    let mut trace = Vec::with_capacity(samples.len() + 1);
    if let Some(probe) = opts.probe {
        trace.push(cur[probe.node]);
    }
    let certify = |values: Vec<f64>, t: f64, observed: f64| {
        let mut s = GridSolution::new(grid.clone(), t, values).expect("length matches");
        s.lip_space = slope_bound;
        s.lip_time = c;
        s.observed_lip_time = observed;
        s
    };
    let mut snapshots = Vec::with_capacity(outputs.len());
    let mut next_out = 0;
    if next_out < outputs.len() && outputs[0] <= TIME_TOL {
        snapshots.push(certify(cur.clone(), 0.0, 0.0));
        next_out += 1;
    }
    let mut next_sample = 0;
    let mut observed = 0.0f64;
    let mut max_excess = f64::NEG_INFINITY;
    let mut steps = 0;
    let mut limiters = vec![0.0; scenario.n_junctions()];
    let mut t = 0.0;
    for &b in &events {
        let mid = 0.5 * (t + b);
        for (slot, s) in limiters.iter_mut().zip(scenario.schedules()) {
            *slot = s.value_at(mid);
        }
        let dynamics = layout.frozen(&limiters);
        let n_sub = (((b - t) / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let dt = (b - t) / n_sub as f64;
        for k in 0..n_sub {
            let tk = t + k as f64 * dt;
            let change = step_into(
                &dynamics,
                grid,
                tk,
                &cur,
                &mut next,
                &left,
                &right,
                dt,
                opts.cfl_safety,
                opts.policy,
            )?;
            std::mem::swap(&mut cur, &mut next);
            observed = observed.max(change / dt);
            let elapsed = tk + dt;
            let dev = cur.iter().zip(&initial).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            max_excess = max_excess.max(dev - c * elapsed);
            steps += 1;
        }
        t = b;
        if let Some(probe) = opts.probe {
            if next_sample < samples.len() && (samples[next_sample] - t).abs() <= 1e-9 * t.max(1.0) {
                trace.push(cur[probe.node]);
                next_sample += 1;
            }
        }
        if next_out < outputs.len() && (outputs[next_out] - t).abs() <= 1e-9 * t.max(1.0) {
            snapshots.push(certify(cur.clone(), t, observed));
            next_out += 1;
        }
    }
    if snapshots
        .last()
        .is_none_or(|s| (s.t - horizon).abs() > 1e-9 * horizon.max(1.0))
    {
        snapshots.push(certify(cur, horizon, observed));
    }
    Ok(Trajectory {
        snapshots,
        trace,
        trace_dt: opts.probe.map_or(0.0, |p| p.sample_dt),
        initial,
        lipschitz: lip,
        barrier_constant: c,
        max_barrier_excess: if steps == 0 { 0.0 } else { max_excess },
        slope_bound,
        max_speed: layout.max_speed(),
        dt_max,
        steps,
    })
}

/// True iff `sub <= sup` at every node of every paired snapshot.
pub fn comparison_check(sub: &[GridSolution], sup: &[GridSolution]) -> Result<bool> {
    if sub.len() != sup.len() {
        return Err(Error::GridMismatch(format!("{} snapshots vs {}", sub.len(), sup.len())));
    }
    for (a, b) in sub.iter().zip(sup) {
        if !a.grid.same_nodes(&b.grid) {
            return Err(Error::GridMismatch("snapshots live on different grids".into()));
        }
        if (a.t - b.t).abs() > 1e-9 * a.t.abs().max(1.0) {
            return Err(Error::GridMismatch(format!(
                "snapshot times {} and {} differ",
                a.t, b.t
            )));
        }
        if a.values.iter().zip(&b.values).any(|(x, y)| x > y) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::PhaseSchedule;

    fn abs_junction(a: f64) -> JunctionScenario {
        JunctionScenario::single(0.0, Hamiltonian::abs(), Hamiltonian::abs(), PhaseSchedule::constant(a)).unwrap()
    }

    #[test]
    fn godunov_examples() {
        let h = Hamiltonian::abs();
        assert_eq!(godunov_flux(&h, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(godunov_flux(&h, -1.0, 1.0).unwrap(), 0.0);
        assert_eq!(godunov_flux(&h, 1.0, -1.0).unwrap(), 1.0);
    }

    #[test]
    fn grid_snapping() {
        let g = Grid1D::spanning(-1.0, 1.0, 0.1).unwrap();
        assert_eq!(g.n_nodes(), 21);
        assert_eq!(g.node_at(0.0).unwrap(), 10);
        assert!(matches!(g.node_at(0.05), Err(Error::OffGrid { .. })));
        assert!(g.clone().with_junctions(&[0.03]).is_err());
        assert!(g.clone().with_junctions(&[-1.0]).is_err());
        assert!(Grid1D::spanning(0.0, 1.0, 0.3).is_err());
        assert!(Grid1D::new(0.0, 0.1, 2).is_err());
    }

    #[test]
    fn stationary_and_limiter_steps() {
        let sc = abs_junction(0.5);
        let grid = Grid1D::spanning(-1.0, 1.0, 0.1)
            .unwrap()
            .with_junctions(&[0.0])
            .unwrap();
        let layout = BranchLayout::new(&sc, &grid, 1.0).unwrap();
        let u = GridSolution::from_fn(grid.clone(), 0.0, |_| 0.0);
        let bc = BoundaryCondition::SlopeExtension(0.0);
        let dt = 0.04;
        let zero = step(&u, &layout, Limiters::Frozen(&[0.0]), &bc, &bc, dt, DEFAULT_CFL_SAFETY).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
        let one = step(&u, &layout, Limiters::Frozen(&[0.5]), &bc, &bc, dt, DEFAULT_CFL_SAFETY).unwrap();
        for (j, &v) in one.values.iter().enumerate() {
            let expect = if j == 10 { -0.5 * dt } else { 0.0 };
            assert_eq!(v, expect);
        }
    }

    #[test]
    fn cfl_and_phase_errors() {
        let sc = JunctionScenario::single(
            0.0,
            Hamiltonian::abs(),
            Hamiltonian::abs(),
            PhaseSchedule::two_phase(1.0, 0.0, 0.5).unwrap(),
        )
        .unwrap();
        let grid = Grid1D::spanning(-1.0, 1.0, 0.1)
            .unwrap()
            .with_junctions(&[0.0])
            .unwrap();
        let layout = BranchLayout::new(&sc, &grid, 1.0).unwrap();
        let bc = BoundaryCondition::SlopeExtension(0.0);
        let u = GridSolution::from_fn(grid.clone(), 0.48, |_| 0.0);
        assert!(matches!(
            step(
                &u,
                &layout,
                Limiters::Scheduled(&sc),
                &bc,
                &bc,
                0.04,
                DEFAULT_CFL_SAFETY
            ),
            Err(Error::PhaseBoundaryCrossed { .. })
        ));
        assert!(step(
            &u,
            &layout,
            Limiters::Scheduled(&sc),
            &bc,
            &bc,
            0.02,
            DEFAULT_CFL_SAFETY
        )
        .is_ok());
        assert!(matches!(
            step(
                &u,
                &layout,
                Limiters::Frozen(&[0.0]),
                &bc,
                &bc,
                0.05,
                DEFAULT_CFL_SAFETY
            ),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn boundary_placement_is_checked() {
        let sc = JunctionScenario::homogeneous(Hamiltonian::abs());
        let grid = Grid1D::spanning(-1.0, 1.0, 0.1).unwrap();
        let layout = BranchLayout::new(&sc, &grid, 1.0).unwrap();
        let u = GridSolution::from_fn(grid, 0.0, |_| 0.0);
        let r = step(
            &u,
            &layout,
            Limiters::Frozen(&[]),
            &BoundaryCondition::EnvelopePlus,
            &BoundaryCondition::EnvelopePlus,
            0.01,
            0.45,
        );
        assert!(matches!(r, Err(Error::InvalidBoundary(_))));
        let r = step(
            &u,
            &layout,
            Limiters::Frozen(&[]),
            &BoundaryCondition::Periodic,
            &BoundaryCondition::EnvelopePlus,
            0.01,
            0.45,
        );
        assert!(matches!(r, Err(Error::InvalidBoundary(_))));
    }

    #[test]
    fn dirichlet_boundary_follows_trace() {
        let sc = JunctionScenario::homogeneous(Hamiltonian::abs());
        let grid = Grid1D::spanning(0.0, 1.0, 0.1).unwrap();
        let layout = BranchLayout::new(&sc, &grid, 1.0).unwrap();
        let u = GridSolution::from_fn(grid, 0.0, |_| 0.0);
        let bc = BoundaryCondition::Dirichlet(Arc::new(|t: f64| -t));
        let next = step(
            &u,
            &layout,
            Limiters::Frozen(&[]),
            &bc,
            &BoundaryCondition::EnvelopePlus,
            0.04,
            0.45,
        )
        .unwrap();
        assert_eq!(next.values[0], -0.04);
        assert_eq!(next.values[5], 0.0);
    }

    #[test]
    fn tent_evolves_exactly() {
        // u0 = -|x| under u_t + |u_x| = 0 is u = -|x| - t.
        let sc = JunctionScenario::homogeneous(Hamiltonian::abs());
        let grid = Grid1D::spanning(-2.0, 2.0, 0.05).unwrap();
        let u0 = InitialDatum::Abs {
            coef: -1.0,
            center: 0.0,
        };
        let opts = CauchyOptions {
            output_times: vec![0.5],
            ..Default::default()
        };
        let tr = solve_cauchy(&sc, &u0, 0.5, &grid, &opts).unwrap();
        let last = tr.last();
        assert_eq!(last.t, 0.5);
        for j in 0..grid.n_nodes() {
            let x = grid.x(j);
            assert!((last.values[j] - (-x.abs() - 0.5)).abs() < 1e-12, "x={x}");
        }
        assert!(tr.barrier_holds(1e-12));
    }

    #[test]
    fn zero_data_without_junction_stays_zero() {
        let sc = JunctionScenario::homogeneous(Hamiltonian::abs());
        let grid = Grid1D::spanning(-1.0, 1.0, 0.02).unwrap();
        let tr = solve_cauchy(&sc, &InitialDatum::Zero, 1.0, &grid, &CauchyOptions::default()).unwrap();
        assert!(tr.last().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn comparison_check_basics() {
        let grid = Grid1D::spanning(-1.0, 1.0, 0.1).unwrap();
        let a = GridSolution::from_fn(grid.clone(), 0.0, |x| x);
        assert!(comparison_check(std::slice::from_ref(&a), std::slice::from_ref(&a)).unwrap());
        assert!(comparison_check(&[a.shifted(-1.0)], std::slice::from_ref(&a)).unwrap());
        assert!(!comparison_check(&[a.shifted(1.0)], std::slice::from_ref(&a)).unwrap());
        let other = GridSolution::from_fn(Grid1D::spanning(-1.0, 1.0, 0.05).unwrap(), 0.0, |x| x);
        assert!(matches!(comparison_check(&[a], &[other]), Err(Error::GridMismatch(_))));
    }
}
