//! Serial/parallel switch for the data-parallel loops.
//!
//! With the `parallel` feature disabled, [`Execution::Parallel`] runs serially.
//! Both modes produce identical results: per-item work draws from its own
//! random substream and reductions are order independent.

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Maps `f` over `items`, preserving order.
pub(crate) fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Whether parallel execution is compiled in.
pub fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}
