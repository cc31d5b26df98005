//! Traffic-light junction scenarios: branch Hamiltonians separated by
//! junction points, each junction carrying a periodic piecewise-constant
//! flux limiter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, HamiltonianSpec};

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawSchedule {
    switch_times: Vec<f64>,
    values: Vec<f64>,
    #[serde(default = "one")]
    period: f64,
}

/// Periodic piecewise-constant limiter `a(t)`: `values[i]` on
/// `[switch_times[i], switch_times[i+1])`, repeated with `period`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule", into = "RawSchedule")]
pub struct PhaseSchedule {
    switch_times: Vec<f64>,
    values: Vec<f64>,
    period: f64,
}

impl TryFrom<RawSchedule> for PhaseSchedule {
    type Error = Error;

    fn try_from(raw: RawSchedule) -> Result<Self> {
        PhaseSchedule::with_period(raw.switch_times, raw.values, raw.period)
    }
}

impl From<PhaseSchedule> for RawSchedule {
    fn from(s: PhaseSchedule) -> Self {
        RawSchedule {
            switch_times: s.switch_times,
            values: s.values,
            period: s.period,
        }
    }
}

impl PhaseSchedule {
    /// 1-periodic schedule.
    pub fn new(switch_times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::with_period(switch_times, values, 1.0)
    }

    pub fn with_period(switch_times: Vec<f64>, values: Vec<f64>, period: f64) -> Result<Self> {
        let bad = |reason: String| Err(Error::scenario("schedules", reason));
        if !(period.is_finite() && period > 0.0) {
            return bad(format!("period must be positive, got {period}"));
        }
        if switch_times.is_empty() || switch_times.len() != values.len() {
            return bad(format!(
                "need one value per switch time, got {} times and {} values",
                switch_times.len(),
                values.len()
            ));
        }
        if switch_times[0] != 0.0 {
            return bad(format!("first switch time must be 0, got {}", switch_times[0]));
        }
        if switch_times.windows(2).any(|w| w[1] <= w[0]) {
            return bad("switch times must be strictly increasing".into());
        }
        if *switch_times.last().unwrap() >= period {
            return bad("switch times must lie in [0, period)".into());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return bad("values must be finite".into());
        }
        Ok(Self {
            switch_times,
            values,
            period,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self::new(vec![0.0], vec![value]).expect("constant schedule is valid")
    }

    /// `first` on `[0, split)`, `second` on `[split, 1)`.
    pub fn two_phase(first: f64, second: f64, split: f64) -> Result<Self> {
        Self::new(vec![0.0, split], vec![first, second])
    }

    pub fn switch_times(&self) -> &[f64] {
        &self.switch_times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    fn phase_index(&self, t: f64) -> usize {
        let s = t.rem_euclid(self.period);
        self.switch_times.partition_point(|&tau| tau <= s).max(1) - 1
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.values[self.phase_index(t)]
    }

    /// Time average over one period.
    pub fn mean(&self) -> f64 {
        let n = self.values.len();
        let mut acc = 0.0;
        for i in 0..n {
            let end = if i + 1 < n {
                self.switch_times[i + 1]
            } else {
                self.period
            };
            acc += (end - self.switch_times[i]) * self.values[i];
        }
        acc / self.period
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// All switch instants `k * period + tau_i` in `(t0, t1)`.
    pub fn switches_between(&self, t0: f64, t1: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut k = (t0 / self.period).floor() as i64;
        loop {
            let base = k as f64 * self.period;
            if base >= t1 {
                break;
            }
            for &tau in &self.switch_times {
                let s = base + tau;
                if s > t0 && s < t1 {
                    out.push(s);
                }
            }
            k += 1;
        }
        out
    }

    /// `a(t / eps)`.
    pub fn time_scaled(&self, eps: f64) -> Self {
        Self {
            switch_times: self.switch_times.iter().map(|t| t * eps).collect(),
            values: self.values.clone(),
            period: self.period * eps,
        }
    }

    /// Adds `shift` to every value.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            switch_times: self.switch_times.clone(),
            values: self.values.iter().map(|v| v + shift).collect(),
            period: self.period,
        }
    }
}

/// Time average of `max_alpha a_alpha(t)`. All schedules must share a period.
pub fn mean_of_max(schedules: &[PhaseSchedule]) -> f64 {
    if schedules.is_empty() {
        return f64::NEG_INFINITY;
    }
    let period = schedules[0].period;
    let mut cuts: Vec<f64> = schedules.iter().flat_map(|s| s.switch_times.iter().copied()).collect();
    cuts.push(period);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let top = schedules
                .iter()
                .map(|s| s.value_at(mid))
                .fold(f64::NEG_INFINITY, f64::max);
            (w[1] - w[0]) * top
        })
        .sum::<f64>()
        / period
}

/// Serializable form of a [`JunctionScenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub branches: Vec<HamiltonianSpec>,
    #[serde(default)]
    pub positions: Vec<f64>,
    #[serde(default)]
    pub schedules: Vec<PhaseSchedule>,
}

/// Junctions `b_1 < ... < b_N`, branch Hamiltonians `H_0 ... H_N` (branch
/// `alpha` lives on `(b_alpha, b_{alpha+1})`), one schedule per junction.
#[derive(Debug, Clone)]
pub struct JunctionScenario {
    positions: Vec<f64>,
    branches: Vec<Hamiltonian>,
    schedules: Vec<PhaseSchedule>,
}

impl JunctionScenario {
    pub fn new(positions: Vec<f64>, branches: Vec<Hamiltonian>, schedules: Vec<PhaseSchedule>) -> Result<Self> {
        if branches.len() != positions.len() + 1 {
            return Err(Error::scenario(
                "branches",
                format!(
                    "{} junction positions need {} branch hamiltonians, got {}",
                    positions.len(),
                    positions.len() + 1,
                    branches.len()
                ),
            ));
        }
        if schedules.len() != positions.len() {
            return Err(Error::scenario(
                "schedules",
                format!(
                    "need one schedule per junction, got {} for {}",
                    schedules.len(),
                    positions.len()
                ),
            ));
        }
        if positions.iter().any(|b| !b.is_finite()) {
            return Err(Error::scenario("positions", "positions must be finite"));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::scenario("positions", "positions must be strictly increasing"));
        }
        if let Some(first) = schedules.first() {
            if schedules.iter().any(|s| s.period != first.period) {
                return Err(Error::scenario("schedules", "all schedules must share one period"));
            }
        }
        for (k, s) in schedules.iter().enumerate() {
            let floor = branches[k].min_value().max(branches[k + 1].min_value());
            if s.min_value() < floor - 1e-12 * floor.abs().max(1.0) {
                return Err(Error::scenario(
                    "schedules",
                    format!(
                        "junction {} takes value {} below max(min H_{}, min H_{}) = {floor}",
                        k + 1,
                        s.min_value(),
                        k,
                        k + 1
                    ),
                ));
            }
        }
        Ok(Self {
            positions,
            branches,
            schedules,
        })
    }

    pub fn from_spec(spec: &ScenarioSpec) -> Result<Self> {
        let branches = spec
            .branches
            .iter()
            .map(|b| Hamiltonian::from_spec(b.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(spec.positions.clone(), branches, spec.schedules.clone())
    }

    /// Plain equation with a single Hamiltonian and no junction.
    pub fn homogeneous(h: Hamiltonian) -> Self {
        Self::new(vec![], vec![h], vec![]).expect("single branch is valid")
    }

    /// One junction between two branches.
    pub fn single(position: f64, left: Hamiltonian, right: Hamiltonian, schedule: PhaseSchedule) -> Result<Self> {
        Self::new(vec![position], vec![left, right], vec![schedule])
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn branches(&self) -> &[Hamiltonian] {
        &self.branches
    }

    pub fn schedules(&self) -> &[PhaseSchedule] {
        &self.schedules
    }

    pub fn n_junctions(&self) -> usize {
        self.positions.len()
    }

    pub fn left(&self) -> &Hamiltonian {
        &self.branches[0]
    }

    pub fn right(&self) -> &Hamiltonian {
        self.branches.last().expect("at least one branch")
    }

    /// `max |b_alpha|`, zero without junctions.
    pub fn rho0(&self) -> f64 {
        self.positions.iter().fold(0.0, |m, b| m.max(b.abs()))
    }

    /// `A0 = max(min H_L, min H_R)`.
    pub fn a0(&self) -> f64 {
        self.left().min_value().max(self.right().min_value())
    }

    /// Distances `b_{alpha+1} - b_alpha` between consecutive junctions.
    pub fn spacings(&self) -> Vec<f64> {
        self.positions.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn mean_limiters(&self) -> Vec<f64> {
        self.schedules.iter().map(PhaseSchedule::mean).collect()
    }

    /// `max_alpha <a_alpha>`; `-inf` without junctions.
    pub fn max_mean_limiter(&self) -> f64 {
        self.mean_limiters().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `<max_alpha a_alpha>`.
    pub fn mean_of_max_limiter(&self) -> f64 {
        mean_of_max(&self.schedules)
    }

    /// Time period of the limiters (1 without junctions).
    pub fn period(&self) -> f64 {
        self.schedules.first().map_or(1.0, PhaseSchedule::period)
    }

    /// Constant bounding `|u_t|` for initial data with Lipschitz constant
    /// `lip`: the largest of `max |a_alpha|` and `max_{|p| <= lip} |H_beta(p)|`.
    pub fn barrier_constant(&self, lip: f64) -> f64 {
        let lip = lip.abs();
        let a = self.schedules.iter().fold(0.0_f64, |m, s| m.max(s.sup_norm()));
        let h = self.branches.iter().fold(0.0, |m: f64, b| {
            let inner = b.value(b.p0().clamp(-lip, lip));
            m.max(b.value(-lip).abs()).max(b.value(lip).abs()).max(inner.abs())
        });
        a.max(h)
    }

    /// Junctions at `eps * b_alpha`, limiters `a_alpha(t / eps)`.
    pub fn scaled(&self, eps: f64) -> Self {
        Self {
            positions: self.positions.iter().map(|b| b * eps).collect(),
            branches: self.branches.clone(),
            schedules: self.schedules.iter().map(|s| s.time_scaled(eps)).collect(),
        }
    }

    pub fn with_positions(&self, positions: Vec<f64>) -> Result<Self> {
        Self::new(positions, self.branches.clone(), self.schedules.clone())
    }

    pub fn with_schedules(&self, schedules: Vec<PhaseSchedule>) -> Result<Self> {
        Self::new(self.positions.clone(), self.branches.clone(), schedules)
    }
}

/// Closed-form Lipschitz initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDatum {
    #[default]
    Zero,
    /// `slope * x + offset`
    Linear {
        slope: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `coef * |x - center|`
    Abs {
        coef: f64,
        #[serde(default)]
        center: f64,
    },
    /// Linear interpolation of `(x, u)`, constant outside.
    PiecewiseLinear { x: Vec<f64>, u: Vec<f64> },
}

impl InitialDatum {
    pub fn validate(&self) -> Result<()> {
        if let InitialDatum::PiecewiseLinear { x, u } = self {
            if x.len() != u.len() || x.len() < 2 {
                return Err(Error::scenario(
                    "initial",
                    "piecewise_linear needs matching x/u of length >= 2",
                ));
            }
            if x.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::scenario(
                    "initial",
                    "piecewise_linear x must be strictly increasing",
                ));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            InitialDatum::Zero => 0.0,
            InitialDatum::Linear { slope, offset } => slope * x + offset,
            InitialDatum::Abs { coef, center } => coef * (x - center).abs(),
            InitialDatum::PiecewiseLinear { x: xs, u } => {
                let n = xs.len();
                if x <= xs[0] {
                    return u[0];
                }
                if x >= xs[n - 1] {
                    return u[n - 1];
                }
                let k = xs.partition_point(|&q| q <= x);
                let s = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                u[k - 1] + s * (u[k] - u[k - 1])
            }
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            InitialDatum::Zero => 0.0,
            InitialDatum::Linear { slope, .. } => slope.abs(),
            InitialDatum::Abs { coef, .. } => coef.abs(),
            InitialDatum::PiecewiseLinear { x, u } => x
                .windows(2)
                .zip(u.windows(2))
                .map(|(xw, uw)| ((uw[1] - uw[0]) / (xw[1] - xw[0])).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Slopes as `x -> -inf` and `x -> +inf`.
    pub fn far_slopes(&self) -> (f64, f64) {
        match self {
            InitialDatum::Zero | InitialDatum::PiecewiseLinear { .. } => (0.0, 0.0),
            InitialDatum::Linear { slope, .. } => (*slope, *slope),
            InitialDatum::Abs { coef, .. } => (-coef, *coef),
        }
    }
}
