//! Transition oracles between output distributions.
//!
//! A [`TransitionOracle`] is a sparse row/column-queryable matrix `C` with
//! column sums 1 relating two output distributions via
//! `P(s) = sum_r C_{sr} Q(r)`. Rows are indexed by outcomes of the target
//! distribution, columns by outcomes of the source. Entries may be negative.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

pub type TransitionRow<R> = Vec<(R, f64)>;

type RowFn<S, R> = Arc<dyn Fn(&S) -> Vec<(R, f64)> + Send + Sync>;
type ColFn<S, R> = Arc<dyn Fn(&R) -> Vec<(S, f64)> + Send + Sync>;

/// Row/column-queryable transition matrix with generic outcome labels.
pub struct TransitionOracle<S, R> {
    row_fn: RowFn<S, R>,
    col_fn: ColFn<S, R>,
    counter: Arc<AtomicU64>,
}

impl<S, R> Clone for TransitionOracle<S, R> {
    fn clone(&self) -> Self {
        Self {
            row_fn: self.row_fn.clone(),
            col_fn: self.col_fn.clone(),
            counter: self.counter.clone(),
        }
    }
}

impl<S, R> TransitionOracle<S, R> {
    pub fn new(row_fn: RowFn<S, R>, col_fn: ColFn<S, R>) -> Self {
        Self {
            row_fn,
            col_fn,
            counter: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Non-zero coefficients `C_{s,*}` of the row for target outcome `s`.
    pub fn row(&self, s: &S) -> Vec<(R, f64)> {
        self.counter.fetch_add(1, Ordering::Relaxed);
        (self.row_fn)(s)
    }

    /// Non-zero coefficients `C_{*,r}` of the column for source outcome `r`.
    pub fn col(&self, r: &R) -> Vec<(S, f64)> {
        self.counter.fetch_add(1, Ordering::Relaxed);
        (self.col_fn)(r)
    }

    pub fn column_sum(&self, r: &R) -> f64 {
        self.col(r).iter().map(|&(_, x)| x).sum()
    }

    pub fn min_column_entry(&self, r: &R) -> f64 {
        self.col(r)
            .iter()
            .map(|&(_, x)| x)
            .fold(f64::INFINITY, f64::min)
    }

    /// Queries issued since the last reset (row and column together).
    pub fn queries(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }

    pub fn reset_and_read_counter(&self) -> u64 {
        self.counter.swap(0, Ordering::Relaxed)
    }
}

impl<S: Ord + Clone, R> TransitionOracle<S, R> {
    /// Pushes a source distribution through `C`:
    /// `P(s) = sum_r C_{sr} Q(r)` accumulated by column queries over the
    /// support of `Q`.
    pub fn map_distribution(&self, source: impl IntoIterator<Item = (R, f64)>) -> BTreeMap<S, f64> {
        let mut acc: BTreeMap<S, f64> = BTreeMap::new();
        for (r, q) in source {
            for (s, coeff) in self.col(&r) {
                *acc.entry(s).or_insert(0.0) += coeff * q;
            }
        }
        acc
    }
}

impl<S> TransitionOracle<S, S>
where
    S: Clone + Send + Sync + 'static,
{
    /// Identity transition: passthrough in both directions.
    pub fn identity() -> Self {
        Self::new(
            Arc::new(|s: &S| vec![(s.clone(), 1.0)]),
            Arc::new(|r: &S| vec![(r.clone(), 1.0)]),
        )
    }
}

impl TransitionOracle<usize, usize> {
    /// Dense-backed transition oracle over integer outcomes, for tests.
    pub fn from_dense(m: nalgebra::DMatrix<f64>) -> Self {
        let m = Arc::new(m);
        let rows = m.clone();
        let row_fn: RowFn<usize, usize> = Arc::new(move |&s| {
            (0..rows.ncols())
                .filter(|&r| rows[(s, r)] != 0.0)
                .map(|r| (r, rows[(s, r)]))
                .collect()
        });
        let cols = m;
        let col_fn: ColFn<usize, usize> = Arc::new(move |&r| {
            (0..cols.nrows())
                .filter(|&s| cols[(s, r)] != 0.0)
                .map(|s| (s, cols[(s, r)]))
                .collect()
        });
        Self::new(row_fn, col_fn)
    }
}
