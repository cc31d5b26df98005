//! Tidy plotting tables derived from the result files of a run.

use std::path::Path;

use junction_core::cell::RhoEstimate;
use serde::{Deserialize, Serialize};

use crate::config::Kind;
use crate::error::{CliError, CliResult};
use crate::output::{read_csv, write_csv, Manifest};

pub const PLOT_DIR: &str = "plot";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub t: f64,
    pub x: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XuRow {
    pub x: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HBarRow {
    pub p: f64,
    pub h_bar: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub dx: f64,
    pub dt: f64,
    pub sup_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsErrorRow {
    pub eps: f64,
    pub sup_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingRow {
    pub ell: f64,
    #[serde(rename = "A_bar")]
    pub a_bar: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Kind recorded in the manifest of a finished run.
pub fn kind_of_run(dir: &Path) -> CliResult<Kind> {
    let path = dir.join(Manifest::FILE);
    if !path.is_file() {
        return Err(CliError::MissingResult(path));
    }
    let text = std::fs::read_to_string(&path).map_err(CliError::io(&path))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    serde_json::from_value(value["kind"].clone()).map_err(|_| CliError::MissingResult(path))
}

/// Writes the tidy tables of a `kind` run in `dir` to `dir/plot` and
/// returns their paths relative to `dir`.
pub fn emit_plot_data(dir: &Path, kind: Kind) -> CliResult<Vec<String>> {
    let out = dir.join(PLOT_DIR);
    std::fs::create_dir_all(&out).map_err(CliError::io(&out))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, f: &dyn Fn(&Path) -> CliResult<()>| -> CliResult<()> {
        f(&out.join(name))?;
        written.push(format!("{PLOT_DIR}/{name}"));
        Ok(())
    };
    match kind {
        Kind::Cauchy => {
            let rows: Vec<ProfileRow> = read_csv(&dir.join("profile.csv"))?;
            let t_last = rows.last().map_or(0.0, |r| r.t);
            emit("x_u.csv", &|p| {
                write_csv(
                    p,
                    rows.iter().filter(|r| r.t == t_last).map(|r| XuRow { x: r.x, u: r.u }),
                )
            })?;
        }
        Kind::EffectiveHamiltonian => {
            let rows: Vec<HBarRow> = read_csv(&dir.join("h_bar.csv"))?;
            emit("p_h_bar.csv", &|p| write_csv(p, &rows))?;
        }
        Kind::FluxLimiter => {
            let rows: Vec<RhoEstimate> = read_csv(&dir.join("rho_sweep.csv"))?;
            emit("rho_lambda.csv", &|p| write_csv(p, &rows))?;
            let profile: Vec<XuRow> = read_csv(&dir.join("corrector.csv"))?;
            emit("corrector_x_u.csv", &|p| write_csv(p, &profile))?;
        }
        Kind::EpsilonSweep => {
            let rows: Vec<ConvergenceRow> = read_csv(&dir.join("convergence.csv"))?;
            emit("eps_error.csv", &|p| {
                write_csv(
                    p,
                    rows.iter().map(|r| EpsErrorRow {
                        eps: r.eps,
                        sup_error: r.sup_error,
                    }),
                )
            })?;
        }
        Kind::TrafficChecks => {
            let checks = dir.join("checks.csv");
            let mut any = checks.is_file();
            for name in ["monotone_in_spacing", "merging_limit"] {
                let src = dir.join(format!("spacing_{name}.csv"));
                if src.is_file() {
                    any = true;
                    let rows: Vec<SpacingRow> = read_csv(&src)?;
                    emit(&format!("ell_A_bar_{name}.csv"), &|p| write_csv(p, &rows))?;
                }
            }
            if !any {
                return Err(CliError::MissingResult(checks));
            }
        }
    }
    Ok(written)
}
