//! Experiment configuration: one TOML (or JSON) file per run.

use std::fmt;
use std::path::{Path, PathBuf};

use junction_core::hamiltonian::HamiltonianSpec;
use junction_core::scenario::InitialDatum;
use junction_core::{Hamiltonian, JunctionScenario, ScenarioSpec, SpaceTimeHamiltonian, SpaceTimeSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Cauchy,
    EffectiveHamiltonian,
    FluxLimiter,
    EpsilonSweep,
    TrafficChecks,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Cauchy => "cauchy",
            Kind::EffectiveHamiltonian => "effective_hamiltonian",
            Kind::FluxLimiter => "flux_limiter",
            Kind::EpsilonSweep => "epsilon_sweep",
            Kind::TrafficChecks => "traffic_checks",
        };
        f.write_str(s)
    }
}

/// Numerical parameters; unset values fall back to per-kind defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    pub dx: Option<f64>,
    pub cfl_safety: Option<f64>,
    /// Final time (cauchy, epsilon_sweep) or averaging horizon `T`.
    #[serde(alias = "T")]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub rho_schedule: Vec<f64>,
    pub epsilons: Option<Vec<f64>>,
    pub sample_dt: Option<f64>,
    pub n_cells: Option<usize>,
    pub half_width: Option<f64>,
    pub oversample: Option<f64>,
    pub output_times: Option<Vec<f64>>,
    pub p_values: Option<Vec<f64>>,
    pub t_min_fraction: Option<f64>,
    pub time_samples: Option<usize>,
    /// Effective limiter for epsilon_sweep; computed by a radius sweep when
    /// unset.
    pub a_bar: Option<f64>,
    pub corrector_dx: Option<f64>,
    pub corrector_horizon: Option<f64>,
}

/// Gating tolerances. Every entry must be positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Allowed gap between the last two radius brackets.
    pub flux_limiter: f64,
    pub n1_identity: f64,
    pub lower_bound: f64,
    pub monotonicity: f64,
    pub merging: f64,
    pub critical_distance: f64,
    /// Final sup error of an epsilon sweep.
    pub convergence: f64,
    pub barrier: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            flux_limiter: 0.03,
            n1_identity: 0.03,
            lower_bound: 1e-9,
            monotonicity: 1e-9,
            merging: 1e-9,
            critical_distance: 0.03,
            convergence: 0.05,
            barrier: 1e-12,
        }
    }
}

impl Tolerances {
    /// Applies `name=value` overrides from the command line.
    pub fn apply_overrides(&mut self, overrides: &[(String, f64)]) -> CliResult<()> {
        let mut value = serde_json::to_value(&*self)?;
        let map = value.as_object_mut().expect("struct serializes to a map");
        for (name, v) in overrides {
            if !map.contains_key(name) {
                return Err(CliError::config(format!("tolerances.{name}"), "unknown tolerance"));
            }
            map.insert(name.clone(), serde_json::json!(v));
        }
        *self = serde_json::from_value(value)?;
        Ok(())
    }

    fn validate(&self) -> CliResult<()> {
        let value = serde_json::to_value(self)?;
        for (name, v) in value.as_object().expect("struct serializes to a map") {
            let v = v.as_f64().unwrap_or(f64::NAN);
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::config(
                    format!("tolerances.{name}"),
                    format!("must be positive, got {v}"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    N1Identity,
    LowerBound,
    Monotonicity,
    Merging,
    CriticalDistance,
    RandomN1,
}

/// Settings for traffic_checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Checks {
    /// Checks to run; empty selects `n1_identity` for one junction and
    /// `lower_bound` otherwise.
    pub run: Vec<CheckKind>,
    /// Junction (0-based) whose following spacing is varied.
    pub alpha: usize,
    pub monotonicity_ells: Vec<f64>,
    pub merging_ells: Vec<f64>,
    pub random_cases: usize,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            run: Vec::new(),
            alpha: 0,
            monotonicity_ells: vec![0.25, 1.0, 4.0],
            merging_ells: vec![1.0, 0.25, 0.0625],
            random_cases: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    pub scenario: Option<ScenarioSpec>,
    pub hamiltonian: Option<SpaceTimeSpec>,
    #[serde(default)]
    pub initial: InitialDatum,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub checks: Checks,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// A validated configuration with its scenario or Hamiltonian built.
pub struct Experiment {
    pub kind: Kind,
    pub config: ExperimentConfig,
    pub scenario: Option<JunctionScenario>,
    pub hamiltonian: Option<SpaceTimeHamiltonian>,
}

impl fmt::Debug for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Experiment")
            .field("kind", &self.kind)
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

/// Parses a config file; `.json` files are JSON, everything else TOML.
pub fn parse(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::config("config", e.to_string()))
    } else {
        toml::from_str(&text).map_err(|e| CliError::config("config", e.to_string().trim_end().to_string()))
    }
}

impl ExperimentConfig {
    /// Resolves the kind against the subcommand and validates everything
    /// the chosen kind needs. Relative table paths resolve against `base`.
    pub fn build(mut self, requested: Option<Kind>, base: &Path) -> CliResult<Experiment> {
        let kind = match (requested, self.kind) {
            (Some(r), Some(c)) if r != c => {
                return Err(CliError::config(
                    "kind",
                    format!("config declares {c}, subcommand runs {r}"),
                ));
            }
            (Some(k), _) | (None, Some(k)) => k,
            (None, None) => return Err(CliError::config("kind", "missing")),
        };
        self.kind = Some(kind);
        self.tolerances.validate()?;
        self.validate_numerics()?;
        self.initial
            .validate()
            .map_err(|e| CliError::config("initial", e.to_string()))?;

        let scenario = match (&self.scenario, kind) {
            (Some(spec), _) => Some(build_scenario(spec, base)?),
            (None, Kind::EffectiveHamiltonian) => None,
            (None, _) => return Err(CliError::config("scenario", format!("required for {kind}"))),
        };
        let hamiltonian = match (&self.hamiltonian, kind) {
            (Some(spec), Kind::EffectiveHamiltonian) => {
                let mut spec = spec.clone();
                resolve_table(&mut spec.base, base, "hamiltonian.base")?;
                Some(
                    SpaceTimeHamiltonian::from_spec(&spec)
                        .map_err(|e| CliError::config("hamiltonian", e.to_string()))?,
                )
            }
            (None, Kind::EffectiveHamiltonian) => {
                return Err(CliError::config("hamiltonian", "required for effective_hamiltonian"));
            }
            _ => None,
        };
        if kind == Kind::TrafficChecks {
            self.validate_checks(scenario.as_ref().expect("checked above"))?;
        }
        Ok(Experiment {
            kind,
            config: self,
            scenario,
            hamiltonian,
        })
    }

    fn validate_numerics(&self) -> CliResult<()> {
        let n = &self.numerics;
        for (field, v) in [
            ("dx", n.dx),
            ("cfl_safety", n.cfl_safety),
            ("horizon", n.horizon),
            ("sample_dt", n.sample_dt),
            ("half_width", n.half_width),
            ("oversample", n.oversample),
            ("corrector_dx", n.corrector_dx),
            ("corrector_horizon", n.corrector_horizon),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::config(
                        format!("numerics.{field}"),
                        format!("must be positive, got {v}"),
                    ));
                }
            }
        }
        if n.cfl_safety.is_some_and(|c| c > 1.0) {
            return Err(CliError::config("numerics.cfl_safety", "must not exceed 1"));
        }
        if n.n_cells.is_some_and(|c| c < 4) {
            return Err(CliError::config("numerics.n_cells", "need at least 4 cells"));
        }
        let rhos = &n.rho_schedule;
        if rhos.len() == 1 || rhos.iter().any(|&r| !(r > 0.0)) || rhos.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::config(
                "numerics.rho_schedule",
                "must be empty or hold at least two positive, strictly increasing radii",
            ));
        }
        if let Some(ts) = &n.output_times {
            if ts.iter().any(|&t| !(t > 0.0)) || ts.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::config(
                    "numerics.output_times",
                    "must be positive and strictly increasing",
                ));
            }
            if let (Some(&last), Some(h)) = (ts.last(), n.horizon) {
                if last > h {
                    return Err(CliError::config(
                        "numerics.output_times",
                        format!("{last} is past the horizon {h}"),
                    ));
                }
            }
        }
        if let Some(ps) = &n.p_values {
            if ps.len() < 3 || ps.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::config(
                    "numerics.p_values",
                    "need at least 3 strictly increasing values",
                ));
            }
        }
        Ok(())
    }

    fn validate_checks(&self, scenario: &JunctionScenario) -> CliResult<()> {
        let n = scenario.n_junctions();
        let c = &self.checks;
        for check in &c.run {
            match check {
                CheckKind::N1Identity if n != 1 => {
                    return Err(CliError::config(
                        "scenario.positions",
                        format!("n1_identity needs one junction, got {n}"),
                    ));
                }
                CheckKind::Monotonicity => {
                    if n < 2 || c.alpha + 1 >= n {
                        return Err(CliError::config(
                            "checks.alpha",
                            format!("no spacing after junction {} of {n}", c.alpha),
                        ));
                    }
                    if c.monotonicity_ells.is_empty() || c.monotonicity_ells.windows(2).any(|w| w[1] <= w[0]) {
                        return Err(CliError::config(
                            "checks.monotonicity_ells",
                            "must be strictly increasing",
                        ));
                    }
                }
                CheckKind::Merging => {
                    if n < 2 {
                        return Err(CliError::config(
                            "scenario.positions",
                            "merging needs at least two junctions",
                        ));
                    }
                    if c.merging_ells.is_empty() || c.merging_ells.windows(2).any(|w| w[1] >= w[0]) {
                        return Err(CliError::config("checks.merging_ells", "must be strictly decreasing"));
                    }
                }
                CheckKind::CriticalDistance if n < 2 => {
                    return Err(CliError::config(
                        "scenario.positions",
                        "critical_distance needs at least two junctions",
                    ));
                }
                CheckKind::RandomN1 if c.random_cases == 0 => {
                    return Err(CliError::config("checks.random_cases", "must be positive"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn checks_to_run(&self, scenario: &JunctionScenario) -> Vec<CheckKind> {
        if !self.checks.run.is_empty() {
            self.checks.run.clone()
        } else if scenario.n_junctions() == 1 {
            vec![CheckKind::N1Identity]
        } else {
            vec![CheckKind::LowerBound]
        }
    }
}

fn build_scenario(spec: &ScenarioSpec, base: &Path) -> CliResult<JunctionScenario> {
    let mut branches = Vec::with_capacity(spec.branches.len());
    for (k, b) in spec.branches.iter().enumerate() {
        let field = format!("scenario.branches[{k}]");
        let mut b = b.clone();
        resolve_table(&mut b, base, &field)?;
        branches.push(Hamiltonian::from_spec(b).map_err(|e| CliError::config(field, e.to_string()))?);
    }
    JunctionScenario::new(spec.positions.clone(), branches, spec.schedules.clone())
        .map_err(CliError::from_core("scenario", "scenario"))
}

#[derive(Deserialize)]
struct Knot {
    p: f64,
    h: f64,
}

/// Loads `p,h` knots for a table Hamiltonian given by `path`.
fn resolve_table(spec: &mut HamiltonianSpec, base: &Path, field: &str) -> CliResult<()> {
    if let HamiltonianSpec::Table { p, h, path: Some(rel) } = spec {
        if !p.is_empty() || !h.is_empty() {
            return Err(CliError::config(field, "give either path or inline p/h, not both"));
        }
        let file = base.join(rel.as_str());
        let mut reader =
            csv::Reader::from_path(&file).map_err(|e| CliError::config(format!("{field}.path"), e.to_string()))?;
        for row in reader.deserialize::<Knot>() {
            let knot =
                row.map_err(|e| CliError::config(format!("{field}.path"), format!("{}: {e}", file.display())))?;
            p.push(knot.p);
            h.push(knot.h);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const N1: &str = r#"
kind = "traffic_checks"

[scenario]
positions = [0.0]
branches = [{ kind = "vee" }, { kind = "vee" }]
schedules = [{ switch_times = [0.0, 0.5], values = [1.0, 0.0] }]
"#;

    fn load(text: &str) -> CliResult<Experiment> {
        let cfg: ExperimentConfig = toml::from_str(text).unwrap();
        cfg.build(None, Path::new("."))
    }

    fn field_of(e: CliError) -> String {
        match e {
            CliError::ConfigInvalid { field, .. } => field,
            other => panic!("expected ConfigInvalid, got {other}"),
        }
    }

    #[test]
    fn single_light_config_builds() {
        let exp = load(N1).unwrap();
        assert_eq!(exp.kind, Kind::TrafficChecks);
        let sc = exp.scenario.as_ref().unwrap();
        assert_eq!(exp.config.checks_to_run(sc), vec![CheckKind::N1Identity]);
        assert_eq!(exp.config.tolerances, Tolerances::default());
    }

    #[test]
    fn unsorted_positions_are_named() {
        let text = N1
            .replace("positions = [0.0]", "positions = [1.0, 0.0]")
            .replace(
                "schedules = [",
                "schedules = [{ switch_times = [0.0], values = [0.5] }, ",
            )
            .replace("branches = [", "branches = [{ kind = \"vee\" }, ");
        assert_eq!(field_of(load(&text).unwrap_err()), "scenario.positions");
    }

    #[test]
    fn kind_mismatch_and_absence() {
        let cfg: ExperimentConfig = toml::from_str(N1).unwrap();
        assert_eq!(
            field_of(cfg.clone().build(Some(Kind::Cauchy), Path::new(".")).unwrap_err()),
            "kind"
        );
        let mut cfg = cfg;
        cfg.kind = None;
        assert_eq!(field_of(cfg.build(None, Path::new(".")).unwrap_err()), "kind");
    }

    #[test]
    fn bad_numerics_and_tolerances() {
        let text = format!("{N1}\n[numerics]\ndx = -1.0\n");
        assert_eq!(field_of(load(&text).unwrap_err()), "numerics.dx");
        let text = format!("{N1}\n[tolerances]\nn1_identity = 0.0\n");
        assert_eq!(field_of(load(&text).unwrap_err()), "tolerances.n1_identity");
        let text = format!("{N1}\n[numerics]\nrho_schedule = [4.0, 2.0]\n");
        assert_eq!(field_of(load(&text).unwrap_err()), "numerics.rho_schedule");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = format!("{N1}\n[numerics]\ndxx = 0.1\n");
        let cfg: Result<ExperimentConfig, _> = toml::from_str(&text);
        assert!(cfg.unwrap_err().to_string().contains("dxx"));
    }

    #[test]
    fn check_requirements() {
        let text = format!("{N1}\n[checks]\nrun = [\"merging\"]\n");
        assert_eq!(field_of(load(&text).unwrap_err()), "scenario.positions");
    }

    #[test]
    fn overrides() {
        let mut t = Tolerances::default();
        t.apply_overrides(&[("merging".into(), 0.5)]).unwrap();
        assert_eq!(t.merging, 0.5);
        let err = t.apply_overrides(&[("nope".into(), 0.5)]).unwrap_err();
        assert_eq!(field_of(err), "tolerances.nope");
    }

    #[test]
    fn table_path_is_resolved() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("h.csv"), "p,h\n-1,1\n0,0\n1,1\n").unwrap();
        let text = r#"
kind = "cauchy"
[scenario]
branches = [{ kind = "table", path = "h.csv" }]
"#;
        let cfg: ExperimentConfig = toml::from_str(text).unwrap();
        let exp = cfg.build(None, dir.path()).unwrap();
        let sc = exp.scenario.unwrap();
        assert_eq!(sc.branches()[0].value(0.5), 0.5);
    }

    #[test]
    fn effective_hamiltonian_needs_hamiltonian() {
        let cfg: ExperimentConfig = toml::from_str("kind = \"effective_hamiltonian\"").unwrap();
        assert_eq!(field_of(cfg.build(None, Path::new(".")).unwrap_err()), "hamiltonian");
    }
}
