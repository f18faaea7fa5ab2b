//! Execution strategy for embarrassingly parallel batches.
//!
//! With the `parallel` feature the batch helpers fan out over rayon's global
//! pool; without it (or with [`Execution::Sequential`]) they run in order on
//! the calling thread. Output order always follows input order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this build can actually run batches concurrently.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map_ordered<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec == Execution::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = exec;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_strategies_agree_on_order() {
        let items: Vec<u64> = (0..500).collect();
        let seq = map_ordered(Execution::Sequential, &items, |x| x * x + 1);
        let par = map_ordered(Execution::Parallel, &items, |x| x * x + 1);
        assert_eq!(seq, par);
    }
}
