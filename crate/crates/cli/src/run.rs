//! One runner per experiment kind. Each writes its result files into the
//! run directory and reports checks and summary values.

use std::path::PathBuf;

use junction_core::cell::{self, CellNumerics, CorrectorNumerics};
use junction_core::hamiltonian::validate_samples;
use junction_core::homogenization::{convergence_report, EpsilonSweep, DEFAULT_OVERSAMPLE};
use junction_core::solver::{solve_cauchy, CauchyOptions, Grid1D, DEFAULT_CFL_SAFETY};
use junction_core::traffic::{self, CheckReport, SpacingReport};
use junction_core::{EffectiveModel, ExecPolicy, JunctionScenario};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{CheckKind, Experiment, Kind, Numerics};
use crate::error::{CliError, CliResult};
use crate::output::{CheckOutcome, RunOutput};
use crate::plot::{self, ConvergenceRow, HBarRow, ProfileRow, SpacingRow, XuRow};

pub struct RunContext {
    pub dir: PathBuf,
    pub seed: u64,
    pub policy: ExecPolicy,
}

pub fn run(exp: &Experiment, ctx: &RunContext) -> CliResult<RunOutput> {
    log::info!("running {} into {}", exp.kind, ctx.dir.display());
    let mut out = match exp.kind {
        Kind::Cauchy => cauchy(exp, ctx)?,
        Kind::EffectiveHamiltonian => effective_hamiltonian(exp, ctx)?,
        Kind::FluxLimiter => flux_limiter(exp, ctx)?,
        Kind::EpsilonSweep => epsilon_sweep(exp, ctx)?,
        Kind::TrafficChecks => traffic_checks(exp, ctx)?,
    };
    let plots = plot::emit_plot_data(&ctx.dir, exp.kind)?;
    out.artifacts.extend(plots);
    out.write_summary(&ctx.dir)?;
    Ok(out)
}

fn scenario(exp: &Experiment) -> &JunctionScenario {
    exp.scenario.as_ref().expect("validated at load")
}

fn cfl(n: &Numerics) -> f64 {
    n.cfl_safety.unwrap_or(DEFAULT_CFL_SAFETY)
}

fn corrector_numerics(n: &Numerics, dx: f64, horizon: f64, policy: ExecPolicy) -> CorrectorNumerics {
    let d = CorrectorNumerics::default();
    CorrectorNumerics {
        dx,
        horizon,
        sample_dt: n.sample_dt.unwrap_or(d.sample_dt),
        cfl_safety: cfl(n),
        policy,
        ..d
    }
}

fn barrier_check(excess: f64, tol: f64) -> CheckOutcome {
    CheckOutcome::gating("barrier", excess <= tol, format!("max excess {excess:e} (tol {tol:e})"))
}

fn cauchy(exp: &Experiment, ctx: &RunContext) -> CliResult<RunOutput> {
    let sc = scenario(exp);
    let n = &exp.config.numerics;
    let (dx, half_width, horizon) = (
        n.dx.unwrap_or(0.01),
        n.half_width.unwrap_or(2.0),
        n.horizon.unwrap_or(1.0),
    );
    let grid = Grid1D::spanning(-half_width, half_width, dx)
        .and_then(|g| g.with_junctions(sc.positions()))
        .map_err(|e| CliError::config("numerics.dx", e.to_string()))?;
    let opts = CauchyOptions {
        cfl_safety: cfl(n),
        output_times: n.output_times.clone().unwrap_or_else(|| vec![horizon]),
        policy: ctx.policy,
        ..Default::default()
    };
    let tr = solve_cauchy(sc, &exp.config.initial, horizon, &grid, &opts)
        .map_err(CliError::from_core("numerics", "cauchy solve"))?;

    let mut out = RunOutput::default();
    let rows = tr.snapshots.iter().flat_map(|s| {
        s.values.iter().enumerate().map(|(j, &u)| ProfileRow {
            t: s.t,
            x: grid.x(j),
            u,
        })
    });
    out.csv(&ctx.dir, "profile.csv", rows)?;
    out.result("barrier_constant", &tr.barrier_constant)?;
    out.result("max_barrier_excess", &tr.max_barrier_excess)?;
    out.result("steps", &tr.steps)?;
    out.result("dt_max", &tr.dt_max)?;
    out.checks
        .push(barrier_check(tr.max_barrier_excess, exp.config.tolerances.barrier));
    Ok(out)
}

fn effective_hamiltonian(exp: &Experiment, ctx: &RunContext) -> CliResult<RunOutput> {
    let ham = exp.hamiltonian.as_ref().expect("validated at load");
    let n = &exp.config.numerics;
    let d = CellNumerics::default();
    let numerics = CellNumerics {
        n_cells: n.n_cells.unwrap_or(d.n_cells),
        horizon: n.horizon.unwrap_or(d.horizon),
        sample_dt: n.sample_dt.unwrap_or(d.sample_dt),
        cfl_safety: cfl(n),
    };
    let ps = n.p_values.clone().unwrap_or_else(|| vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    let table = cell::effective_hamiltonian_table(ham, &ps, &numerics, ctx.policy)
        .map_err(CliError::from_core("numerics", "effective hamiltonian"))?;

    let mut out = RunOutput::default();
    let rows: Vec<HBarRow> = ps
        .iter()
        .zip(&table)
        .map(|(&p, e)| HBarRow {
            p,
            h_bar: e.lambda,
            lower: e.lower,
            upper: e.upper,
        })
        .collect();
    out.csv(&ctx.dir, "h_bar.csv", &rows)?;
    let values: Vec<f64> = table.iter().map(|e| e.lambda).collect();
    let shape = validate_samples(&values, 0.0);
    out.checks.push(CheckOutcome::gating(
        "quasi_convex_coercive",
        shape.is_ok(),
        shape.map_or_else(
            |e| e.to_string(),
            |s| format!("minimum {} at p = {}", s.min, ps[s.argmin]),
        ),
    ));
    let widest = table.iter().map(|e| e.width()).fold(0.0, f64::max);
    out.result("max_bracket_width", &widest)?;
    Ok(out)
}

fn flux_limiter(exp: &Experiment, ctx: &RunContext) -> CliResult<RunOutput> {
    let sc = scenario(exp);
    let n = &exp.config.numerics;
    let numerics = corrector_numerics(n, n.dx.unwrap_or(0.02), n.horizon.unwrap_or(40.0), ctx.policy);
    let est = cell::effective_flux_limiter(sc, &n.rho_schedule, &numerics, exp.config.tolerances.flux_limiter)
        .map_err(CliError::from_core("numerics", "flux limiter sweep"))?;

    let mut out = RunOutput::default();
    out.csv(&ctx.dir, "rho_sweep.csv", &est.provenance)?;
    let profile = &est.widest().profile;
    let grid = &profile.grid;
    out.csv(
        &ctx.dir,
        "corrector.csv",
        profile
            .values
            .iter()
            .enumerate()
            .map(|(j, &u)| XuRow { x: grid.x(j), u }),
    )?;
    let model = EffectiveModel::from_sweep(sc, &est).map_err(CliError::from_core("scenario", "effective model"))?;
    out.json(&ctx.dir, "model.json", &model.record(101))?;

    out.result("A_bar", &est.a_bar)?;
    out.result("bracket", &est.bracket)?;
    out.result("A0", &est.a0)?;
    out.result("drift", &est.drift)?;
    out.checks.push(CheckOutcome::info(
        "A_bar",
        format!("{} in [{}, {}]", est.a_bar, est.bracket.0, est.bracket.1),
    ));
    out.checks.push(CheckOutcome::gating(
        "monotone_lambda_rho",
        est.monotone,
        format!("{} radii", est.provenance.len()),
    ));
    out.checks.push(CheckOutcome::gating(
        "above_A0",
        est.above_a0,
        format!("A0 = {}", est.a0),
    ));
    Ok(out)
}

fn epsilon_sweep(exp: &Experiment, ctx: &RunContext) -> CliResult<RunOutput> {
    let sc = scenario(exp);
    let n = &exp.config.numerics;
    let tol = &exp.config.tolerances;
    let d = EpsilonSweep::default();
    let sweep = EpsilonSweep {
        epsilons: n.epsilons.clone().unwrap_or(d.epsilons),
        horizon: n.horizon.unwrap_or(d.horizon),
        half_width: n.half_width.unwrap_or(d.half_width),
        dx: n.dx.unwrap_or(d.dx),
        oversample: n.oversample.unwrap_or(DEFAULT_OVERSAMPLE),
        t_min_fraction: n.t_min_fraction.unwrap_or(d.t_min_fraction),
        time_samples: n.time_samples.unwrap_or(d.time_samples),
        u0: exp.config.initial.clone(),
        cfl_safety: cfl(n),
        policy: ctx.policy,
    };
    sweep
        .validate()
        .map_err(CliError::from_core("numerics", "epsilon sweep"))?;

    let mut out = RunOutput::default();
    let model = match n.a_bar {
        Some(a) => EffectiveModel::new(sc.left().clone(), sc.right().clone(), a),
        None => {
            let numerics = corrector_numerics(
                n,
                n.corrector_dx.unwrap_or(0.02),
                n.corrector_horizon.unwrap_or(40.0),
                ctx.policy,
            );
            let est = cell::effective_flux_limiter(sc, &n.rho_schedule, &numerics, tol.flux_limiter)
                .map_err(CliError::from_core("numerics", "flux limiter sweep"))?;
            out.result("A_bar_bracket", &est.bracket)?;
            EffectiveModel::from_sweep(sc, &est)
        }
    }
    .map_err(CliError::from_core("scenario", "effective model"))?;
    let report = convergence_report(&sweep, sc, &model).map_err(CliError::from_core("numerics", "epsilon sweep"))?;

    // Runtimes go to the manifest so the CSV stays reproducible.
    let rows = report.rows.iter().map(|r| ConvergenceRow {
        eps: r.eps,
        dx: r.dx,
        dt: r.dt,
        sup_error: r.sup_error,
    });
    out.csv(&ctx.dir, "convergence.csv", rows)?;
    let runtimes: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.eps, r.runtime_s)).collect();
    out.result("runtime_s", &runtimes)?;
    out.result("A_bar", &model.a_bar)?;
    out.result("time_window", &report.time_window)?;
    out.result("x_window", &report.x_window)?;

    let errors: Vec<f64> = report.rows.iter().map(|r| r.sup_error).collect();
    out.checks.push(CheckOutcome::gating(
        "errors_non_increasing",
        report.monotone && !report.not_converging,
        format!("{errors:?}"),
    ));
    let last = report.final_error();
    out.checks.push(CheckOutcome::gating(
        "final_error",
        last <= tol.convergence,
        format!("{last} (tol {})", tol.convergence),
    ));
    out.checks.push(barrier_check(report.max_barrier_excess, tol.barrier));
    Ok(out)
}

fn record(out: &mut RunOutput, reports: &mut Vec<CheckReport>, r: CheckReport) {
    out.checks.push(outcome(&r));
    reports.push(r);
}

fn outcome(r: &CheckReport) -> CheckOutcome {
    CheckOutcome::gating(
        &r.name,
        r.pass,
        format!(
            "expected {} computed {} bracket [{}, {}] tol {}",
            r.expected, r.computed, r.lower, r.upper, r.tol
        ),
    )
}

fn spacing_outcome(out: &mut RunOutput, ctx: &RunContext, r: &SpacingReport) -> CliResult<()> {
    let rows = r.rows.iter().map(|s| SpacingRow {
        ell: s.ell,
        a_bar: s.a_bar,
        lower: s.lower,
        upper: s.upper,
    });
    out.csv(&ctx.dir, &format!("spacing_{}.csv", r.name), rows)?;
    let values: Vec<String> = r.rows.iter().map(|s| format!("{}:{}", s.ell, s.a_bar)).collect();
    let target = r.expected.map_or(String::new(), |e| format!(" target {e}"));
    out.checks.push(CheckOutcome::gating(
        &r.name,
        r.pass,
        format!("ell:A_bar {}{target}", values.join(" ")),
    ));
    Ok(())
}

fn traffic_checks(exp: &Experiment, ctx: &RunContext) -> CliResult<RunOutput> {
    let sc = scenario(exp);
    let cfg = &exp.config;
    let n = &cfg.numerics;
    let tol = &cfg.tolerances;
    let numerics = corrector_numerics(n, n.dx.unwrap_or(0.02), n.horizon.unwrap_or(40.0), ctx.policy);
    let rhos = &n.rho_schedule;
    let core = |what: &'static str| CliError::from_core("scenario", what);

    let mut out = RunOutput::default();
    let mut reports = Vec::new();
    for check in cfg.checks_to_run(sc) {
        match check {
            CheckKind::N1Identity => {
                let r =
                    traffic::check_n1_identity(sc, &numerics, rhos, tol.n1_identity).map_err(core("n1_identity"))?;
                record(&mut out, &mut reports, r);
            }
            CheckKind::LowerBound => {
                let r =
                    traffic::check_lower_bound(sc, &numerics, rhos, tol.lower_bound).map_err(core("lower_bound"))?;
                record(&mut out, &mut reports, r);
            }
            CheckKind::Monotonicity => {
                let r = traffic::check_monotonicity_in_spacing(
                    sc,
                    cfg.checks.alpha,
                    &cfg.checks.monotonicity_ells,
                    &numerics,
                    rhos,
                    tol.monotonicity,
                )
                .map_err(core("monotonicity"))?;
                spacing_outcome(&mut out, ctx, &r)?;
            }
            CheckKind::Merging => {
                let r = traffic::check_merging_limit(sc, &cfg.checks.merging_ells, &numerics, rhos, tol.merging)
                    .map_err(core("merging"))?;
                spacing_outcome(&mut out, ctx, &r)?;
            }
            CheckKind::CriticalDistance => {
                let d = traffic::critical_distance_estimate(sc).map_err(core("critical_distance"))?;
                out.result("critical_distance", &d)?;
                if d.degenerate {
                    out.checks.push(CheckOutcome::info(
                        "critical_distance",
                        "no junction has max <a> above its A0; d0 is vacuous".into(),
                    ));
                    continue;
                }
                let step = 2.0 * numerics.dx;
                let ell = (d.d0 / step).ceil().max(1.0) * step;
                let positions = traffic::positions_from_spacings(&vec![ell; sc.n_junctions() - 1], numerics.dx);
                let far = sc.with_positions(positions).map_err(core("critical_distance"))?;
                let mut r = traffic::check_lower_bound(&far, &numerics, rhos, tol.lower_bound)
                    .map_err(core("critical_distance"))?;
                r.name = "critical_distance".into();
                r.expected = d.level;
                r.tol = tol.critical_distance;
                r.pass = (r.computed - d.level).abs() <= tol.critical_distance + r.width();
                out.result("critical_spacing", &ell)?;
                record(&mut out, &mut reports, r);
            }
            CheckKind::RandomN1 => {
                let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
                for k in 0..cfg.checks.random_cases {
                    let (l, r) = (traffic::random_branch(&mut rng), traffic::random_branch(&mut rng));
                    let floor = l.min_value().max(r.min_value());
                    let schedule = traffic::random_schedule(&mut rng, floor, 3);
                    let single = JunctionScenario::single(0.0, l, r, schedule).map_err(core("random_n1"))?;
                    let mut rep = traffic::check_n1_identity(&single, &numerics, &[], tol.n1_identity)
                        .map_err(core("random_n1"))?;
                    rep.name = format!("random_n1[{k}]");
                    record(&mut out, &mut reports, rep);
                }
            }
        }
    }
    if !reports.is_empty() {
        out.csv(&ctx.dir, "checks.csv", &reports)?;
    }
    Ok(out)
}
