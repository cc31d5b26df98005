//! Hamiltonians depending on `(t, x, p)`, 1-periodic in time.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, HamiltonianSpec};

type EvalFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;
type MinimizerFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Periodic potential `f(t, x) = ax (1 + cos 2πx)/2 + at (1 + cos 2πt)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct CosinePotential {
    #[serde(default)]
    pub x_amplitude: f64,
    #[serde(default)]
    pub t_amplitude: f64,
}

impl CosinePotential {
    #[inline]
    pub fn value(&self, t: f64, x: f64) -> f64 {
        let tp = t.rem_euclid(1.0);
        let xp = x.rem_euclid(1.0);
        0.5 * self.x_amplitude * (1.0 + (2.0 * PI * xp).cos()) + 0.5 * self.t_amplitude * (1.0 + (2.0 * PI * tp).cos())
    }
}

/// Descriptor for `H(t, x, p) = base(p) - f(t, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeSpec {
    pub base: HamiltonianSpec,
    #[serde(default)]
    pub potential: CosinePotential,
}

/// `H(t, x, p)`, 1-periodic in `t`, quasi-convex in `p` with minimizer
/// `p0(t, x)`.
#[derive(Clone)]
pub struct SpaceTimeHamiltonian {
    eval: Arc<EvalFn>,
    minimizer: Arc<MinimizerFn>,
    /// Limits as `x -> -inf` / `x -> +inf`, when the Hamiltonian has them.
    pub left_limit: Option<Hamiltonian>,
    pub right_limit: Option<Hamiltonian>,
    /// Radius outside which quasi-convexity in `p` is guaranteed.
    pub rho0: f64,
    p_range: (f64, f64),
}

impl fmt::Debug for SpaceTimeHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceTimeHamiltonian")
            .field("left_limit", &self.left_limit)
            .field("right_limit", &self.right_limit)
            .field("rho0", &self.rho0)
            .field("p_range", &self.p_range)
            .finish_non_exhaustive()
    }
}

impl SpaceTimeHamiltonian {
    pub fn new<F, M>(eval: F, minimizer: M, p_range: (f64, f64)) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        M: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            minimizer: Arc::new(minimizer),
            left_limit: None,
            right_limit: None,
            rho0: 0.0,
            p_range,
        }
    }

    /// `(t, x)`-independent Hamiltonian.
    pub fn from_branch(h: Hamiltonian) -> Self {
        Self::with_potential(h, CosinePotential::default())
    }

    /// `base(p) - f(t, x)`; the minimizer of `base` is the minimizer at
    /// every `(t, x)`.
    pub fn with_potential(base: Hamiltonian, potential: CosinePotential) -> Self {
        let p0 = base.p0();
        let range = (base.p_min(), base.p_max());
        let b = base.clone();
        Self::new(move |t, x, p| b.value(p) - potential.value(t, x), move |_, _| p0, range)
    }

    pub fn from_spec(spec: &SpaceTimeSpec) -> Result<Self> {
        let base = Hamiltonian::from_spec(spec.base.clone())?;
        Ok(Self::with_potential(base, spec.potential))
    }

    pub fn with_limits(mut self, left: Hamiltonian, right: Hamiltonian, rho0: f64) -> Self {
        self.left_limit = Some(left);
        self.right_limit = Some(right);
        self.rho0 = rho0;
        self
    }

    #[inline]
    pub fn eval(&self, t: f64, x: f64, p: f64) -> f64 {
        (self.eval)(t, x, p)
    }

    #[inline]
    pub fn minimizer(&self, t: f64, x: f64) -> f64 {
        (self.minimizer)(t, x)
    }

    pub fn p_range(&self) -> (f64, f64) {
        self.p_range
    }

    /// Godunov numerical Hamiltonian `max(H^+(p_left), H^-(p_right))` at `(t, x)`.
    #[inline]
    pub fn godunov(&self, t: f64, x: f64, p_left: f64, p_right: f64) -> Result<f64> {
        let (lo, hi) = self.p_range;
        for p in [p_left, p_right] {
            if !(lo..=hi).contains(&p) {
                return Err(Error::OutOfRange {
                    p,
                    p_min: lo,
                    p_max: hi,
                });
            }
        }
        let p0 = self.minimizer(t, x);
        Ok(self.eval(t, x, p_left.max(p0)).max(self.eval(t, x, p_right.min(p0))))
    }

    /// Largest `|dH/dp|` over sampled `(t, x)` in the unit cell and
    /// `p` in `[a, b]`, by divided differences.
    pub fn max_p_slope(&self, a: f64, b: f64) -> f64 {
        const NT: usize = 8;
        const NX: usize = 32;
        const NP: usize = 400;
        let mut best: f64 = 0.0;
        for it in 0..NT {
            let t = it as f64 / NT as f64;
            for ix in 0..NX {
                let x = ix as f64 / NX as f64;
                let mut prev = self.eval(t, x, a);
                for ip in 1..=NP {
                    let p = a + (b - a) * ip as f64 / NP as f64;
                    let cur = self.eval(t, x, p);
                    best = best.max((cur - prev).abs() * NP as f64 / (b - a));
                    prev = cur;
                }
            }
        }
        best
    }

    /// Checks time periodicity at probe points and, when limits are
    /// declared, decay towards them beyond `rho0`.
    pub fn validate(&self, probes_p: &[f64], decay_tol: f64) -> Result<()> {
        for &p in probes_p {
            for k in 0..8 {
                let t = k as f64 / 8.0 + 0.013;
                for j in -4..=4 {
                    let x = j as f64 * 0.37;
                    let a = self.eval(t, x, p);
                    let b = self.eval(t + 1.0, x, p);
                    if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                        return Err(Error::scenario(
                            "hamiltonian",
                            format!("not 1-periodic in t at (t={t}, x={x}, p={p}): {a} vs {b}"),
                        ));
                    }
                }
                let limits = [(-1.0, &self.left_limit), (1.0, &self.right_limit)];
                for (side, limit) in limits {
                    if let Some(h) = limit {
                        let x = side * (self.rho0 + 50.0);
                        let d = (self.eval(t, x, p) - h.value(p)).abs();
                        if d > decay_tol {
                            return Err(Error::scenario(
                                "hamiltonian",
                                format!("no decay to the limit at x={x}, p={p}: gap {d}"),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
