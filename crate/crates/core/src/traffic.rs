//! Traffic-light scenarios: checks of the qualitative properties of the
//! effective flux limiter and the critical-distance estimate.

use rand::Rng;
use serde::Serialize;

use crate::cell::{self, CorrectorNumerics, FluxLimiterEstimate};
use crate::error::{Error, Result};
use crate::hamiltonian::{Branch, Hamiltonian};
use crate::scenario::{JunctionScenario, PhaseSchedule};

/// One gating check: `computed` against `expected` with the bracket of the
/// computed value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub expected: f64,
    pub computed: f64,
    pub lower: f64,
    pub upper: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckReport {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn into_result(self) -> Result<Self> {
        if self.pass {
            Ok(self)
        } else {
            Err(Error::ToleranceExceeded {
                check: self.name,
                expected: self.expected,
                computed: self.computed,
                tol: self.tol,
            })
        }
    }
}

fn report(name: &str, expected: f64, est: &FluxLimiterEstimate, tol: f64, pass: bool) -> CheckReport {
    CheckReport {
        name: name.to_string(),
        expected,
        computed: est.a_bar,
        lower: est.bracket.0,
        upper: est.bracket.1,
        tol,
        pass,
    }
}

/// `A_bar = <a_1>` for a single light.
pub fn check_n1_identity(
    scenario: &JunctionScenario,
    numerics: &CorrectorNumerics,
    rhos: &[f64],
    tol: f64,
) -> Result<CheckReport> {
    if scenario.n_junctions() != 1 {
        return Err(Error::scenario(
            "positions",
            format!(
                "the identity needs exactly one junction, got {}",
                scenario.n_junctions()
            ),
        ));
    }
    let est = cell::rho_sweep(scenario, rhos, numerics)?;
    let expected = scenario.schedules()[0].mean();
    let pass = (est.a_bar - expected).abs() <= tol + est.width();
    Ok(report("n1_identity", expected, &est, tol, pass))
}

/// `A_bar >= max(A0, max_alpha <a_alpha>)` up to the bracket.
pub fn check_lower_bound(
    scenario: &JunctionScenario,
    numerics: &CorrectorNumerics,
    rhos: &[f64],
    tol: f64,
) -> Result<CheckReport> {
    let est = cell::rho_sweep(scenario, rhos, numerics)?;
    let expected = scenario.a0().max(scenario.max_mean_limiter());
    let pass = est.bracket.1 >= expected - tol;
    Ok(report("lower_bound", expected, &est, tol, pass))
}

/// `A_bar` at one spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacingRow {
    pub ell: f64,
    pub a_bar: f64,
    pub lower: f64,
    pub upper: f64,
}

impl SpacingRow {
    fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingReport {
    pub name: String,
    pub rows: Vec<SpacingRow>,
    /// Reference value (`<max a>` for the merging limit).
    pub expected: Option<f64>,
    pub pass: bool,
}

fn snap(x: f64, dx: f64) -> f64 {
    (x / dx).round() * dx
}

/// Junction positions with `spacings`, centered on the origin and snapped
/// to multiples of `dx`.
pub fn positions_from_spacings(spacings: &[f64], dx: f64) -> Vec<f64> {
    let mut raw = vec![0.0];
    for &l in spacings {
        raw.push(raw.last().unwrap() + l);
    }
    let shift = snap(0.5 * raw.last().unwrap(), dx);
    raw.into_iter().map(|b| snap(b - shift, dx)).collect()
}

fn sweep_spacings<F>(
    scenario: &JunctionScenario,
    ells: &[f64],
    numerics: &CorrectorNumerics,
    rhos: &[f64],
    layout: F,
) -> Result<Vec<SpacingRow>>
where
    F: Fn(f64) -> Vec<f64>,
{
    ells.iter()
        .map(|&ell| {
            let sc = scenario.with_positions(positions_from_spacings(&layout(ell), numerics.dx))?;
            let est = cell::rho_sweep(&sc, rhos, numerics)?;
            Ok(SpacingRow {
                ell,
                a_bar: est.a_bar,
                lower: est.bracket.0,
                upper: est.bracket.1,
            })
        })
        .collect()
}

/// `A_bar` is non-increasing in `ell_alpha`: sweeps the spacing after
/// junction `alpha` (0-based) over increasing `ells`, keeping the others.
pub fn check_monotonicity_in_spacing(
    scenario: &JunctionScenario,
    alpha: usize,
    ells: &[f64],
    numerics: &CorrectorNumerics,
    rhos: &[f64],
    tol: f64,
) -> Result<SpacingReport> {
    let base = scenario.spacings();
    if alpha >= base.len() {
        return Err(Error::scenario(
            "positions",
            format!("no spacing after junction {alpha}"),
        ));
    }
    if ells.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::scenario("spacings", "must be strictly increasing"));
    }
    let rows = sweep_spacings(scenario, ells, numerics, rhos, |ell| {
        let mut s = base.clone();
        s[alpha] = ell;
        s
    })?;
    let pass = rows
        .windows(2)
        .all(|w| w[1].a_bar <= w[0].a_bar + w[0].width() + w[1].width() + tol);
    Ok(SpacingReport {
        name: "monotone_in_spacing".into(),
        rows,
        expected: None,
        pass,
    })
}

/// `|A_bar(ell) - <max_alpha a_alpha>|` shrinks as all spacings decrease
/// together through `ells` (strictly decreasing).
pub fn check_merging_limit(
    scenario: &JunctionScenario,
    ells: &[f64],
    numerics: &CorrectorNumerics,
    rhos: &[f64],
    tol: f64,
) -> Result<SpacingReport> {
    if scenario.n_junctions() < 2 {
        return Err(Error::scenario("positions", "merging needs at least two junctions"));
    }
    if ells.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::scenario("spacings", "must be strictly decreasing"));
    }
    let n_gaps = scenario.n_junctions() - 1;
    let rows = sweep_spacings(scenario, ells, numerics, rhos, |ell| vec![ell; n_gaps])?;
    let target = scenario.mean_of_max_limiter();
    let pass = rows
        .windows(2)
        .all(|w| (w[1].a_bar - target).abs() <= (w[0].a_bar - target).abs() + w[0].width() + w[1].width() + tol);
    Ok(SpacingReport {
        name: "merging_limit".into(),
        rows,
        expected: Some(target),
        pass,
    })
}

/// Sufficient spacing for `A_bar = max_alpha <a_alpha>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalDistance {
    pub d0: f64,
    /// `max_alpha <a_alpha>`.
    pub level: f64,
    pub constant: f64,
    /// No junction has `level > A0^alpha`; the estimate is vacuous.
    pub degenerate: bool,
}

/// `d_0 = max 8 C / gap` over junctions with `max <a> > A0^alpha`, the gaps
/// being the distances from the branch minimizers to the level set of
/// `max <a>` on the side of each spacing. The bound is sufficient, not
/// sharp.
pub fn critical_distance_estimate(scenario: &JunctionScenario) -> Result<CriticalDistance> {
    let n = scenario.n_junctions();
    if n == 0 {
        return Ok(CriticalDistance {
            d0: 0.0,
            level: scenario.a0(),
            constant: 0.0,
            degenerate: true,
        });
    }
    let branches = scenario.branches();
    let means = scenario.mean_limiters();
    let level = scenario.max_mean_limiter();
    // Shifted limiters a + (level - <a>) all have mean `level`.
    let a_hat = scenario
        .schedules()
        .iter()
        .zip(&means)
        .fold(0.0_f64, |m, (s, mean)| m.max(s.sup_norm() + (level - mean)));
    let h0 = branches.iter().fold(0.0_f64, |m, h| m.max(h.value(0.0).abs()));
    let c = a_hat.max(h0);
    let tol = 1e-12 * level.abs().max(1.0);
    let mut d0 = 0.0_f64;
    let mut any = false;
    for k in 0..n {
        let (hl, hr) = (&branches[k], &branches[k + 1]);
        let a0k = hl.min_value().max(hr.min_value());
        if level <= a0k + tol {
            continue;
        }
        any = true;
        if k + 1 < n {
            let (p_bar_r, _) = hr.level_set_endpoints(level, Branch::Increasing)?;
            d0 = d0.max(8.0 * c / (p_bar_r - hr.p0_max()));
        }
        if k > 0 {
            let (_, p_bar_l) = hl.level_set_endpoints(level, Branch::Decreasing)?;
            d0 = d0.max(8.0 * c / (hl.p0() - p_bar_l));
        }
    }
    Ok(CriticalDistance {
        d0,
        level,
        constant: c,
        degenerate: !any,
    })
}

/// Random quasi-convex branch: vee, quadratic or trapezoid with a minimum
/// in `[-0.5, 0.5]`.
pub fn random_branch<R: Rng + ?Sized>(rng: &mut R) -> Hamiltonian {
    let min = rng.random_range(-0.5..=0.5);
    let center = rng.random_range(-0.5..=0.5);
    match rng.random_range(0..3) {
        0 => Hamiltonian::vee(rng.random_range(0.5..=2.0), center, min),
        1 => Hamiltonian::quadratic(rng.random_range(0.5..=2.0), center, min),
        _ => {
            let width = rng.random_range(0.0..=0.5);
            Hamiltonian::trapezoid(
                center - 0.5 * width,
                center + 0.5 * width,
                rng.random_range(0.5..=2.0),
                rng.random_range(0.5..=2.0),
                min,
            )
        }
    }
    .expect("parameters are in range")
}

/// Random schedule with at most `max_switches` interior switch times on a
/// 1/100 lattice and values in `[floor, floor + 1]`.
pub fn random_schedule<R: Rng + ?Sized>(rng: &mut R, floor: f64, max_switches: usize) -> PhaseSchedule {
    let k = rng.random_range(0..=max_switches);
    let mut ticks: Vec<u32> = Vec::new();
    while ticks.len() < k {
        let t = rng.random_range(1..100);
        if !ticks.contains(&t) {
            ticks.push(t);
        }
    }
    ticks.sort_unstable();
    let mut times = vec![0.0];
    times.extend(ticks.iter().map(|&t| t as f64 / 100.0));
    let values = (0..times.len()).map(|_| floor + rng.random_range(0.0..=1.0)).collect();
    PhaseSchedule::new(times, values).expect("sorted lattice times")
}

/// Random scenario with `1..=max_junctions` lights, spacings in
/// `[0.25, 4]` snapped to `dx`, and up to three switches per light.
pub fn random_scenario<R: Rng + ?Sized>(rng: &mut R, max_junctions: usize, dx: f64) -> JunctionScenario {
    let n = rng.random_range(1..=max_junctions.max(1));
    let branches: Vec<Hamiltonian> = (0..=n).map(|_| random_branch(rng)).collect();
    let schedules = (0..n)
        .map(|k| {
            let floor = branches[k].min_value().max(branches[k + 1].min_value());
            random_schedule(rng, floor, 3)
        })
        .collect();
    let spacings: Vec<f64> = (1..n).map(|_| snap(rng.random_range(0.25..=4.0), dx).max(dx)).collect();
    JunctionScenario::new(positions_from_spacings(&spacings, dx), branches, schedules).expect("valid by construction")
}
