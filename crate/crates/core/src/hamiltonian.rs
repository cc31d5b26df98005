//! Quasi-convex Hamiltonians of a single gradient variable.
//!
//! A [`Hamiltonian`] is either one of a few closed forms or a piecewise-linear
//! table. Every instance is validated at construction: it must decrease up to
//! its (smallest) minimizer, increase after it, and exceed its minimum at
//! both ends of the sample range. The monotone envelopes are
//!
//! ```text
//! H^-(p) = H(min(p, p0))     (non-increasing part)
//! H^+(p) = H(max(p, p0))     (non-decreasing part)
//! ```
//!
//! so that `max(H^-, H^+) = H`. For tables they are computed by running
//! minima over the knots, which is the same thing for quasi-convex data and
//! absorbs floating-point wobble.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-width of the default sample range of closed-form Hamiltonians.
pub const DEFAULT_HALF_RANGE: f64 = 1.0e3;

/// Monotonicity violations up to this fraction of `max H - min H` are
/// accepted by the validator.
pub const QUASI_CONVEX_RTOL: f64 = 1e-12;

/// Default coercivity margin: both ends of the range must exceed the minimum
/// by strictly more than this.
pub const DEFAULT_COERCIVITY_MARGIN: f64 = 1e-9;

const BISECTION_STEPS: usize = 200;

fn one() -> f64 {
    1.0
}

/// Declarative description of a Hamiltonian, as found in scenario configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianSpec {
    /// `slope * |p - center| + min`
    Vee {
        #[serde(default = "one")]
        slope: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        min: f64,
    },
    /// `curvature * (p - center)^2 + min`
    Quadratic {
        #[serde(default = "one")]
        curvature: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        min: f64,
    },
    /// Flat bottom `min` on `[left, right]`, linear walls outside.
    Trapezoid {
        left: f64,
        right: f64,
        #[serde(default = "one")]
        slope_left: f64,
        #[serde(default = "one")]
        slope_right: f64,
        #[serde(default)]
        min: f64,
    },
    /// Piecewise-linear interpolation of `(p, h)` knots. `path` names a CSV
    /// file with `p,h` columns; runners resolve it into `p`/`h` before
    /// construction.
    Table {
        #[serde(default)]
        p: Vec<f64>,
        #[serde(default)]
        h: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
    },
}

/// Which monotone branch a level set is taken on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `p >= p0`, where `H = H^+`.
    Increasing,
    /// `p <= p0`, where `H = H^-`.
    Decreasing,
}

#[derive(Debug, Clone)]
struct Tabulation {
    p: Vec<f64>,
    h: Vec<f64>,
    minus: Vec<f64>,
    plus: Vec<f64>,
}

impl Tabulation {
    fn interp(&self, values: &[f64], p: f64) -> f64 {
        let n = self.p.len();
        if p <= self.p[0] {
            return values[0];
        }
        if p >= self.p[n - 1] {
            return values[n - 1];
        }
        let k = self.p.partition_point(|&q| q <= p);
        let (p0, p1) = (self.p[k - 1], self.p[k]);
        let s = (p - p0) / (p1 - p0);
        values[k - 1] + s * (values[k] - values[k - 1])
    }
}

/// Validated quasi-convex, coercive Hamiltonian `H(p)`.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    spec: HamiltonianSpec,
    p_min: f64,
    p_max: f64,
    p0: f64,
    p0_max: f64,
    min_value: f64,
    table: Option<Tabulation>,
}

/// `(p, h)` samples, e.g. for JSON output of an effective Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableData {
    pub p: Vec<f64>,
    pub h: Vec<f64>,
}

impl Hamiltonian {
    pub fn vee(slope: f64, center: f64, min: f64) -> Result<Self> {
        Self::from_spec(HamiltonianSpec::Vee { slope, center, min })
    }

    /// `|p|`
    pub fn abs() -> Self {
        Self::vee(1.0, 0.0, 0.0).expect("unit vee is valid")
    }

    pub fn quadratic(curvature: f64, center: f64, min: f64) -> Result<Self> {
        Self::from_spec(HamiltonianSpec::Quadratic { curvature, center, min })
    }

    pub fn trapezoid(left: f64, right: f64, slope_left: f64, slope_right: f64, min: f64) -> Result<Self> {
        Self::from_spec(HamiltonianSpec::Trapezoid {
            left,
            right,
            slope_left,
            slope_right,
            min,
        })
    }

    pub fn table(p: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        Self::from_spec(HamiltonianSpec::Table { p, h, path: None })
    }

    pub fn from_spec(spec: HamiltonianSpec) -> Result<Self> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::NotQuasiConvex(format!("{name} must be finite, got {v}")))
            }
        };
        let positive = |name: &str, v: f64| {
            finite(name, v)?;
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::NotQuasiConvex(format!("{name} must be positive, got {v}")))
            }
        };
        match &spec {
            HamiltonianSpec::Vee { slope, center, min } => {
                positive("slope", *slope)?;
                finite("center", *center)?;
                finite("min", *min)?;
                Ok(Self {
                    p_min: center - DEFAULT_HALF_RANGE,
                    p_max: center + DEFAULT_HALF_RANGE,
                    p0: *center,
                    p0_max: *center,
                    min_value: *min,
                    table: None,
                    spec,
                })
            }
            HamiltonianSpec::Quadratic { curvature, center, min } => {
                positive("curvature", *curvature)?;
                finite("center", *center)?;
                finite("min", *min)?;
                Ok(Self {
                    p_min: center - DEFAULT_HALF_RANGE,
                    p_max: center + DEFAULT_HALF_RANGE,
                    p0: *center,
                    p0_max: *center,
                    min_value: *min,
                    table: None,
                    spec,
                })
            }
            HamiltonianSpec::Trapezoid {
                left,
                right,
                slope_left,
                slope_right,
                min,
            } => {
                finite("left", *left)?;
                finite("right", *right)?;
                finite("min", *min)?;
                positive("slope_left", *slope_left)?;
                positive("slope_right", *slope_right)?;
                if left > right {
                    return Err(Error::NotQuasiConvex(format!(
                        "trapezoid bottom [{left}, {right}] is reversed"
                    )));
                }
                Ok(Self {
                    p_min: left - DEFAULT_HALF_RANGE,
                    p_max: right + DEFAULT_HALF_RANGE,
                    p0: *left,
                    p0_max: *right,
                    min_value: *min,
                    table: None,
                    spec,
                })
            }
            HamiltonianSpec::Table { p, h, path } => {
                if p.is_empty() && path.is_some() {
                    return Err(Error::NotQuasiConvex(format!(
                        "table path {:?} has not been loaded",
                        path.as_deref().unwrap_or_default()
                    )));
                }
                if p.len() != h.len() {
                    return Err(Error::NotQuasiConvex(format!(
                        "table has {} p values but {} h values",
                        p.len(),
                        h.len()
                    )));
                }
                if p.len() < 3 {
                    return Err(Error::NotQuasiConvex("table needs at least 3 knots".into()));
                }
                if p.iter().chain(h.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::NotQuasiConvex("table contains non-finite values".into()));
                }
                if p.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::NotQuasiConvex(
                        "table p values must be strictly increasing".into(),
                    ));
                }
                let shape = validate_samples(h, DEFAULT_COERCIVITY_MARGIN)?;
                let mut minus = h.clone();
                for i in 1..minus.len() {
                    minus[i] = minus[i].min(minus[i - 1]);
                }
                let mut plus = h.clone();
                for i in (0..plus.len() - 1).rev() {
                    plus[i] = plus[i].min(plus[i + 1]);
                }
                let n = p.len();
                Ok(Self {
                    p_min: p[0],
                    p_max: p[n - 1],
                    p0: p[shape.argmin],
                    p0_max: p[shape.argmin_last],
                    min_value: shape.min,
                    table: Some(Tabulation {
                        p: p.clone(),
                        h: h.clone(),
                        minus,
                        plus,
                    }),
                    spec,
                })
            }
        }
    }

    /// Replaces the sample range of a closed form. Tables cannot be widened.
    pub fn with_range(mut self, p_min: f64, p_max: f64) -> Result<Self> {
        if !(p_min < self.p0 && self.p0_max < p_max) {
            return Err(Error::NotCoercive(format!(
                "range [{p_min}, {p_max}] must strictly contain the argmin [{}, {}]",
                self.p0, self.p0_max
            )));
        }
        if let Some(t) = &self.table {
            if p_min < t.p[0] || p_max > t.p[t.p.len() - 1] {
                return Err(Error::OutOfRange {
                    p: if p_min < t.p[0] { p_min } else { p_max },
                    p_min: t.p[0],
                    p_max: t.p[t.p.len() - 1],
                });
            }
        } else if (p_min < self.p_min || p_max > self.p_max) && log::log_enabled!(log::Level::Debug) {
            log::debug!(
                "extending sample range from [{}, {}] to [{p_min}, {p_max}]",
                self.p_min,
                self.p_max
            );
        }
        self.p_min = p_min;
        self.p_max = p_max;
        Ok(self)
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// Smallest minimizer.
    pub fn p0(&self) -> f64 {
        self.p0
    }

    /// Largest minimizer; differs from [`p0`](Self::p0) for flat bottoms.
    pub fn p0_max(&self) -> f64 {
        self.p0_max
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    /// `H(p)` without a range check. Tables are extended by constants.
    #[inline]
    pub fn value(&self, p: f64) -> f64 {
        match &self.spec {
            HamiltonianSpec::Vee { slope, center, min } => slope * (p - center).abs() + min,
            HamiltonianSpec::Quadratic { curvature, center, min } => {
                let d = p - center;
                curvature * d * d + min
            }
            HamiltonianSpec::Trapezoid {
                left,
                right,
                slope_left,
                slope_right,
                min,
            } => {
                if p < *left {
                    min + slope_left * (left - p)
                } else if p > *right {
                    min + slope_right * (p - right)
                } else {
                    *min
                }
            }
            HamiltonianSpec::Table { .. } => {
                let t = self.table.as_ref().expect("table kind carries a tabulation");
                t.interp(&t.h, p)
            }
        }
    }

    #[inline]
    fn check(&self, p: f64) -> Result<()> {
        if p >= self.p_min && p <= self.p_max {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                p,
                p_min: self.p_min,
                p_max: self.p_max,
            })
        }
    }

    pub fn eval(&self, p: f64) -> Result<f64> {
        self.check(p)?;
        Ok(self.value(p))
    }

    /// Non-increasing envelope `H^-`.
    #[inline]
    pub fn envelope_minus(&self, p: f64) -> Result<f64> {
        self.check(p)?;
        Ok(match &self.table {
            Some(t) => t.interp(&t.minus, p),
            None => self.value(p.min(self.p0)),
        })
    }

    /// Non-decreasing envelope `H^+`.
    #[inline]
    pub fn envelope_plus(&self, p: f64) -> Result<f64> {
        self.check(p)?;
        Ok(match &self.table {
            Some(t) => t.interp(&t.plus, p),
            None => self.value(p.max(self.p0)),
        })
    }

    fn level_tol(&self) -> f64 {
        let span = (self.value(self.p_min).max(self.value(self.p_max)) - self.min_value).abs();
        1e-12 * self.min_value.abs().max(1.0).max(span * 1e-3)
    }

    /// Endpoints `(min, max)` of `{p : H(p) = level}` on one monotone branch.
    ///
    /// At the minimum level this is the whole argmin interval on either
    /// branch.
    pub fn level_set_endpoints(&self, level: f64, branch: Branch) -> Result<(f64, f64)> {
        let tol = self.level_tol();
        if level < self.min_value - tol {
            return Err(Error::BelowMinimum {
                level,
                min: self.min_value,
            });
        }
        if level <= self.min_value + tol {
            return Ok((self.p0, self.p0_max));
        }
        match branch {
            Branch::Increasing => {
                if self.value(self.p_max) < level {
                    return Err(Error::OutOfRange {
                        p: self.p_max,
                        p_min: self.p_min,
                        p_max: self.p_max,
                    });
                }
                let lo = bisect(self.p0_max, self.p_max, |p| self.value(p) >= level);
                let hi = if self.value(self.p_max) > level {
                    bisect(self.p0_max, self.p_max, |p| self.value(p) > level)
                } else {
                    self.p_max
                };
                Ok((lo, hi))
            }
            Branch::Decreasing => {
                if self.value(self.p_min) < level {
                    return Err(Error::OutOfRange {
                        p: self.p_min,
                        p_min: self.p_min,
                        p_max: self.p_max,
                    });
                }
                let hi = bisect(self.p_min, self.p0, |p| self.value(p) < level);
                let lo = if self.value(self.p_min) > level {
                    bisect(self.p_min, self.p0, |p| self.value(p) <= level)
                } else {
                    self.p_min
                };
                Ok((lo, hi))
            }
        }
    }

    /// Interval `{p : H(p) <= level}`, clipped to the sample range.
    pub fn sublevel_interval(&self, level: f64) -> Result<(f64, f64)> {
        if level < self.min_value - self.level_tol() {
            return Err(Error::BelowMinimum {
                level,
                min: self.min_value,
            });
        }
        let lo = if self.value(self.p_min) <= level {
            self.p_min
        } else {
            bisect(self.p_min, self.p0, |p| self.value(p) <= level)
        };
        let hi = if self.value(self.p_max) <= level {
            self.p_max
        } else {
            bisect(self.p0_max, self.p_max, |p| self.value(p) > level)
        };
        Ok((lo, hi))
    }

    /// Lipschitz constant of `H` on `[a, b]`.
    pub fn max_slope(&self, a: f64, b: f64) -> f64 {
        let (a, b) = (a.min(b), a.max(b));
        match &self.spec {
            HamiltonianSpec::Vee { slope, .. } => *slope,
            HamiltonianSpec::Quadratic { curvature, center, .. } => {
                2.0 * curvature * (a - center).abs().max((b - center).abs())
            }
            HamiltonianSpec::Trapezoid {
                left,
                right,
                slope_left,
                slope_right,
                ..
            } => {
                let mut s: f64 = 0.0;
                if a < *left {
                    s = s.max(*slope_left);
                }
                if b > *right {
                    s = s.max(*slope_right);
                }
                s
            }
            HamiltonianSpec::Table { .. } => {
                let t = self.table.as_ref().expect("table kind carries a tabulation");
                t.p.windows(2)
                    .zip(t.h.windows(2))
                    .filter(|(pw, _)| pw[1] >= a && pw[0] <= b)
                    .map(|(pw, hw)| ((hw[1] - hw[0]) / (pw[1] - pw[0])).abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Uniform samples of `H` on `[lo, hi]`.
    pub fn tabulate(&self, lo: f64, hi: f64, n: usize) -> TableData {
        let n = n.max(2);
        let p: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        let h = p.iter().map(|&q| self.value(q)).collect();
        TableData { p, h }
    }
}

/// Smallest minimizer of `h`.
pub fn minimizer(h: &Hamiltonian) -> f64 {
    h.p0()
}

pub fn envelope_minus(h: &Hamiltonian, p: f64) -> Result<f64> {
    h.envelope_minus(p)
}

pub fn envelope_plus(h: &Hamiltonian, p: f64) -> Result<f64> {
    h.envelope_plus(p)
}

/// Effective junction function `max(A, H_L^+(p_L), H_R^-(p_R))`.
pub fn junction_function(
    a: f64,
    h_left: &Hamiltonian,
    h_right: &Hamiltonian,
    p_left: f64,
    p_right: f64,
) -> Result<f64> {
    Ok(a.max(h_left.envelope_plus(p_left)?)
        .max(h_right.envelope_minus(p_right)?))
}

/// Result of [`validate_samples`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleShape {
    pub argmin: usize,
    pub argmin_last: usize,
    pub min: f64,
    pub max: f64,
}

/// Checks that samples on an increasing grid decrease, then increase, and
/// that both ends exceed the minimum by more than `coercivity_margin`.
pub fn validate_samples(h: &[f64], coercivity_margin: f64) -> Result<SampleShape> {
    if h.len() < 3 {
        return Err(Error::NotQuasiConvex("need at least 3 samples".into()));
    }
    let min = h.iter().copied().fold(f64::INFINITY, f64::min);
    let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = QUASI_CONVEX_RTOL * (max - min);
    let argmin = h.iter().position(|&v| v == min).expect("non-empty");
    for i in 0..h.len() - 1 {
        if i < argmin && h[i + 1] > h[i] + tol {
            return Err(Error::NotQuasiConvex(format!(
                "sample {} rises before the minimizer (index {argmin})",
                i + 1
            )));
        }
        if i >= argmin && h[i + 1] < h[i] - tol {
            return Err(Error::NotQuasiConvex(format!(
                "sample {} falls after the minimizer (index {argmin})",
                i + 1
            )));
        }
    }
    let argmin_last = h.iter().rposition(|&v| v <= min + tol).expect("non-empty");
    let n = h.len();
    if !(h[0] > min + coercivity_margin && h[n - 1] > min + coercivity_margin) {
        return Err(Error::NotCoercive(format!(
            "end values {} and {} do not exceed the minimum {min} by {coercivity_margin}",
            h[0],
            h[n - 1]
        )));
    }
    Ok(SampleShape {
        argmin,
        argmin_last,
        min,
        max,
    })
}

/// Boundary of a monotone predicate on `[lo, hi]`: returns the smallest
/// point (to bisection accuracy) where `pred` holds, assuming it fails at
/// `lo` and holds at `hi`.
fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    if pred(lo) {
        return lo;
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_bottom() -> Hamiltonian {
        // max(|p| - 1, 0) on [-3, 3]
        Hamiltonian::trapezoid(-1.0, 1.0, 1.0, 1.0, 0.0)
            .unwrap()
            .with_range(-3.0, 3.0)
            .unwrap()
    }

    #[test]
    fn minimizers() {
        assert_eq!(minimizer(&Hamiltonian::abs()), 0.0);
        assert_eq!(minimizer(&Hamiltonian::quadratic(1.0, 1.0, 0.0).unwrap()), 1.0);
        assert_eq!(minimizer(&flat_bottom()), -1.0);
    }

    #[test]
    fn table_minimizer_takes_smallest() {
        let h = Hamiltonian::table(
            vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0],
            vec![2.0, 1.0, 0.0, 0.0, 0.0, 1.0, 2.0],
        )
        .unwrap();
        assert_eq!(h.p0(), -1.0);
        assert_eq!(h.p0_max(), 1.0);
    }

    #[test]
    fn envelopes_of_abs_and_quadratic() {
        let v = Hamiltonian::abs();
        assert_eq!(envelope_minus(&v, -2.0).unwrap(), 2.0);
        assert_eq!(envelope_minus(&v, 3.0).unwrap(), 0.0);
        assert_eq!(envelope_plus(&v, 2.0).unwrap(), 2.0);
        assert_eq!(envelope_plus(&v, -3.0).unwrap(), 0.0);
        let q = Hamiltonian::quadratic(1.0, 1.0, 0.0).unwrap();
        assert_eq!(envelope_minus(&q, 0.0).unwrap(), 1.0);
        assert_eq!(envelope_plus(&q, 3.0).unwrap(), 4.0);
    }

    #[test]
    fn envelope_out_of_range() {
        let h = flat_bottom();
        assert!(matches!(h.envelope_minus(3.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(h.envelope_plus(-3.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn junction_function_examples() {
        let v = Hamiltonian::abs();
        assert_eq!(junction_function(0.0, &v, &v, 1.0, -1.0).unwrap(), 1.0);
        assert_eq!(junction_function(0.5, &v, &v, 0.0, 0.0).unwrap(), 0.5);
        assert_eq!(junction_function(0.0, &v, &v, -2.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn level_sets_of_abs() {
        let v = Hamiltonian::abs();
        let (lo, hi) = v.level_set_endpoints(0.5, Branch::Increasing).unwrap();
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
        assert_eq!(v.level_set_endpoints(0.0, Branch::Increasing).unwrap(), (0.0, 0.0));
        let (lo, hi) = v.level_set_endpoints(0.5, Branch::Decreasing).unwrap();
        assert!((lo + 0.5).abs() < 1e-12 && (hi + 0.5).abs() < 1e-12);
    }

    #[test]
    fn level_set_of_flat_bottom_matches_scan() {
        // Independent oracle: scan a fine grid for points on the increasing
        // branch where H^+ = H = 0.
        let h = flat_bottom();
        let n = 60_001;
        let pts: Vec<f64> = (0..n)
            .map(|i| -3.0 + 6.0 * i as f64 / (n - 1) as f64)
            .filter(|&p| {
                let v = h.value(p);
                v.abs() < 1e-14 && (h.envelope_plus(p).unwrap() - v).abs() < 1e-14
            })
            .collect();
        let scan = (pts[0], *pts.last().unwrap());
        assert!((scan.0 + 1.0).abs() < 1e-3 && (scan.1 - 1.0).abs() < 1e-3);
        let got = h.level_set_endpoints(0.0, Branch::Increasing).unwrap();
        assert!((got.0 - scan.0).abs() < 2e-4 && (got.1 - scan.1).abs() < 2e-4);
    }

    #[test]
    fn level_below_minimum() {
        let q = Hamiltonian::quadratic(1.0, 0.0, 2.0).unwrap();
        assert!(matches!(
            q.level_set_endpoints(1.0, Branch::Increasing),
            Err(Error::BelowMinimum { .. })
        ));
    }

    #[test]
    fn level_sets_on_plateau() {
        // Increasing branch with a plateau at level 1 on [1, 2].
        let h = Hamiltonian::table(vec![-2.0, 0.0, 1.0, 2.0, 3.0], vec![2.0, 0.0, 1.0, 1.0, 3.0]).unwrap();
        let (lo, hi) = h.level_set_endpoints(1.0, Branch::Increasing).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_quasi_convex_table() {
        let r = Hamiltonian::table(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![2.0, 0.0, 1.0, 0.5, 3.0]);
        assert!(matches!(r, Err(Error::NotQuasiConvex(_))));
        let r = Hamiltonian::vee(-1.0, 0.0, 0.0);
        assert!(matches!(r, Err(Error::NotQuasiConvex(_))));
    }

    #[test]
    fn rejects_non_coercive_table() {
        let r = Hamiltonian::table(vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 0.0]);
        assert!(matches!(r, Err(Error::NotCoercive(_))));
    }

    #[test]
    fn validator_tolerates_rounding_noise() {
        let h = [2.0, 1.0, 0.0, 1.0, 1.0 - 1e-14, 2.0];
        assert!(validate_samples(&h, 0.0).is_ok());
    }

    #[test]
    fn sublevel_and_slopes() {
        let q = Hamiltonian::quadratic(2.0, 1.0, 0.0).unwrap();
        let (lo, hi) = q.sublevel_interval(8.0).unwrap();
        assert!((lo + 1.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
        assert!((q.max_slope(lo, hi) - 8.0).abs() < 1e-9);
        assert_eq!(flat_bottom().max_slope(-0.5, 0.5), 0.0);
    }

    #[test]
    fn table_envelopes_agree_with_formula() {
        let v = Hamiltonian::abs();
        let data = v.tabulate(-4.0, 4.0, 81);
        let t = Hamiltonian::table(data.p, data.h).unwrap();
        for i in 0..=80 {
            let p = -4.0 + 0.1 * i as f64;
            assert!((t.envelope_minus(p).unwrap() - v.envelope_minus(p).unwrap()).abs() < 1e-12);
            assert!((t.envelope_plus(p).unwrap() - v.envelope_plus(p).unwrap()).abs() < 1e-12);
        }
    }
}
