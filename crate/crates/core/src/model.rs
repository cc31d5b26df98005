//! Effective single-junction model: outer Hamiltonians, flux limiter and
//! the slopes of the global corrector.

use serde::Serialize;

use crate::cell::{FluxLimiterEstimate, RhoEstimate};
use crate::error::Result;
use crate::hamiltonian::{Branch, Hamiltonian, TableData};
use crate::scenario::JunctionScenario;

/// Endpoints of `E_L = {H_L^- = H_L = A}` and `E_R = {H_R^+ = H_R = A}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeQuadruple {
    /// `max E_L`
    pub p_bar_l: f64,
    /// `min E_L`
    pub p_hat_l: f64,
    /// `min E_R`
    pub p_bar_r: f64,
    /// `max E_R`
    pub p_hat_r: f64,
}

impl SlopeQuadruple {
    pub fn at_level(h_left: &Hamiltonian, h_right: &Hamiltonian, level: f64) -> Result<Self> {
        let (p_hat_l, p_bar_l) = h_left.level_set_endpoints(level, Branch::Decreasing)?;
        let (p_bar_r, p_hat_r) = h_right.level_set_endpoints(level, Branch::Increasing)?;
        Ok(Self {
            p_bar_l,
            p_hat_l,
            p_bar_r,
            p_hat_r,
        })
    }
}

/// `u_t + F_A(u_x(t, 0-), u_x(t, 0+)) = 0` with `H_L`, `H_R` on the two
/// half-lines.
#[derive(Debug, Clone)]
pub struct EffectiveModel {
    pub h_bar_l: Hamiltonian,
    pub h_bar_r: Hamiltonian,
    pub a_bar: f64,
    pub bracket: (f64, f64),
    pub a0: f64,
    pub slopes: SlopeQuadruple,
    pub provenance: Vec<RhoEstimate>,
}

impl EffectiveModel {
    /// Model with a known limiter (clamped to `A0`).
    pub fn new(h_bar_l: Hamiltonian, h_bar_r: Hamiltonian, a_bar: f64) -> Result<Self> {
        let a0 = h_bar_l.min_value().max(h_bar_r.min_value());
        let a = a_bar.max(a0);
        let slopes = SlopeQuadruple::at_level(&h_bar_l, &h_bar_r, a)?;
        Ok(Self {
            h_bar_l,
            h_bar_r,
            a_bar: a,
            bracket: (a, a),
            a0,
            slopes,
            provenance: Vec::new(),
        })
    }

    /// Model of a scenario whose outer branches are already the effective
    /// Hamiltonians, with the limiter from a radius sweep.
    pub fn from_sweep(scenario: &JunctionScenario, est: &FluxLimiterEstimate) -> Result<Self> {
        let mut m = Self::new(scenario.left().clone(), scenario.right().clone(), est.a_bar)?;
        m.bracket = est.bracket;
        m.provenance = est.provenance.clone();
        Ok(m)
    }

    /// Output record with both Hamiltonians tabulated on `n` points around
    /// their slope quadruple.
    pub fn record(&self, n: usize) -> ModelRecord {
        let s = &self.slopes;
        let tab = |h: &Hamiltonian, a: f64, b: f64| {
            let pad = 1.0 + 0.5 * (b - a);
            h.tabulate((a - pad).max(h.p_min()), (b + pad).min(h.p_max()), n)
        };
        ModelRecord {
            h_bar_l: tab(&self.h_bar_l, s.p_hat_l, self.h_bar_l.p0_max()),
            h_bar_r: tab(&self.h_bar_r, self.h_bar_r.p0(), s.p_hat_r),
            a_bar: self.a_bar,
            bracket: [self.bracket.0, self.bracket.1],
            a0: self.a0,
            slopes: self.slopes,
            provenance: self.provenance.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelRecord {
    #[serde(rename = "H_bar_L")]
    pub h_bar_l: TableData,
    #[serde(rename = "H_bar_R")]
    pub h_bar_r: TableData,
    #[serde(rename = "A_bar")]
    pub a_bar: f64,
    pub bracket: [f64; 2],
    #[serde(rename = "A0")]
    pub a0: f64,
    pub slopes: SlopeQuadruple,
    pub provenance: Vec<RhoEstimate>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slopes_of_abs() {
        let h = Hamiltonian::abs();
        let s = SlopeQuadruple::at_level(&h, &h, 0.5).unwrap();
        for (got, want) in [(s.p_hat_l, -0.5), (s.p_bar_l, -0.5), (s.p_bar_r, 0.5), (s.p_hat_r, 0.5)] {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn slopes_with_plateau() {
        let t = Hamiltonian::trapezoid(-1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        let s = SlopeQuadruple::at_level(&t, &t, 0.0).unwrap();
        assert_eq!((s.p_hat_l, s.p_bar_l), (-1.0, 1.0));
        assert_eq!((s.p_bar_r, s.p_hat_r), (-1.0, 1.0));
    }

    #[test]
    fn limiter_is_clamped_to_a0() {
        let m = EffectiveModel::new(Hamiltonian::abs(), Hamiltonian::vee(1.0, 0.0, 0.2).unwrap(), 0.1).unwrap();
        assert_eq!(m.a0, 0.2);
        assert_eq!(m.a_bar, 0.2);
        let json = serde_json::to_value(m.record(5)).unwrap();
        assert!(json.get("H_bar_L").is_some() && json.get("A_bar").is_some());
    }
}
