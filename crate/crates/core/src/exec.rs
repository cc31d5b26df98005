//! Execution policy for independent solver runs and per-node updates.
//!
//! With the `parallel` feature (on by default) the [`ExecPolicy::Parallel`]
//! policy dispatches through rayon. Without it every policy runs
//! sequentially, so results are bit-identical either way.

use serde::{Deserialize, Serialize};

/// Grids smaller than this are stepped sequentially even under the parallel
/// policy; per-step fork/join costs more than it saves on small grids.
pub const PAR_NODE_THRESHOLD: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExecPolicy {
    Sequential,
    #[default]
    Parallel,
}

impl ExecPolicy {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecPolicy::Parallel
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(policy: ExecPolicy, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if policy.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = policy;
    items.iter().map(f).collect()
}

/// Fills `out[j] = f(j)` for every index, returning the first error.
pub fn fill_indexed<E, F>(policy: ExecPolicy, out: &mut [f64], f: F) -> Result<(), E>
where
    E: Send,
    F: Fn(usize) -> Result<f64, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if policy.is_parallel() && out.len() >= PAR_NODE_THRESHOLD {
            use rayon::prelude::*;
            return out.par_iter_mut().enumerate().try_for_each(|(j, slot)| {
                *slot = f(j)?;
                Ok(())
            });
        }
    }
    let _ = policy;
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = f(j)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_under_both_policies() {
        let xs: Vec<u64> = (0..1000).collect();
        let seq = map(ExecPolicy::Sequential, &xs, |x| x * x);
        let par = map(ExecPolicy::Parallel, &xs, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 999 * 999);
    }

    #[test]
    fn fill_reports_error() {
        let mut out = vec![0.0; 20_000];
        let r: Result<(), usize> = fill_indexed(ExecPolicy::Parallel, &mut out, |j| {
            if j == 12_345 {
                Err(j)
            } else {
                Ok(j as f64)
            }
        });
        assert_eq!(r, Err(12_345));
    }
}
