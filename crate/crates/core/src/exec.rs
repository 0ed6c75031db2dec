//! Data-parallel helpers with a sequential path.
//!
//! Without the `parallel` feature both modes run sequentially. Results never
//! depend on the mode as long as `reduce` is associative and commutative.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionMode {
    #[default]
    Parallel,
    Sequential,
}

impl ExecutionMode {
    /// Folds every index in `0..n` into an accumulator.
    pub fn fold_range<A, I, F, R>(self, n: u64, identity: I, fold: F, reduce: R) -> A
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(A, u64) -> A + Sync + Send,
        R: Fn(A, A) -> A + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            ExecutionMode::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().fold(&identity, &fold).reduce(&identity, &reduce)
            }
            _ => {
                let _ = &reduce;
                (0..n).fold(identity(), fold)
            }
        }
    }

    /// `f` over `0..n`, results in index order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            ExecutionMode::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }
}

impl std::str::FromStr for ExecutionMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "parallel" => Ok(ExecutionMode::Parallel),
            "sequential" => Ok(ExecutionMode::Sequential),
            other => Err(crate::error::invalid(format!("unknown execution mode {other:?}"))),
        }
    }
}
