//! Black-box sparse matrix oracles.
//!
//! An [`Oracle`] exposes row and column queries against a sparse real matrix
//! without revealing the matrix itself. Each query returns the positions and
//! values of the non-zero entries of one row (or column), sorted by index,
//! and increments a query counter. Oracles compose: sums, products, 2x2
//! blocks and entrywise maps are all themselves oracles whose queries are
//! implemented in terms of queries to their inputs.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Entries with magnitude below this are dropped after composition, so that
/// cancellation does not inflate degree bounds.
pub const ZERO_DROP: f64 = 1e-14;

/// Default cap for dense materialization.
pub const DENSE_CAP: usize = 4096;

pub type RowEntries = Vec<(usize, f64)>;

type QueryFn = Arc<dyn Fn(usize) -> RowEntries + Send + Sync>;

/// Row/column-queryable sparse matrix with a degree bound per side and a
/// monotone query counter. Square symmetric oracles have identical row and
/// column queries; the rectangular case (the incidence-like factor `B`) has
/// independent ones.
#[derive(Clone)]
pub struct Oracle {
    rows: usize,
    cols: usize,
    row_degree: usize,
    col_degree: usize,
    row_fn: QueryFn,
    col_fn: QueryFn,
    counter: Arc<AtomicU64>,
}

impl Oracle {
    pub fn new(
        rows: usize,
        cols: usize,
        row_degree: usize,
        col_degree: usize,
        row_fn: QueryFn,
        col_fn: QueryFn,
    ) -> Self {
        Self {
            rows,
            cols,
            row_degree: row_degree.min(cols),
            col_degree: col_degree.min(rows),
            row_fn,
            col_fn,
            counter: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Symmetric oracle: rows and columns are the same query.
    pub fn new_symmetric(dim: usize, degree: usize, row_fn: QueryFn) -> Self {
        Self::new(dim, dim, degree, degree, row_fn.clone(), row_fn)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Dimension of a square oracle.
    pub fn dim(&self) -> usize {
        assert_eq!(self.rows, self.cols, "dim() on a rectangular oracle");
        self.rows
    }

    pub fn row_degree(&self) -> usize {
        self.row_degree
    }

    pub fn col_degree(&self) -> usize {
        self.col_degree
    }

    /// Non-zero entries of row `v`, sorted by column index.
    pub fn query_row(&self, v: usize) -> Result<RowEntries> {
        if v >= self.rows {
            return Err(Error::IndexOutOfRange {
                index: v,
                dim: self.rows,
            });
        }
        self.counter.fetch_add(1, Ordering::Relaxed);
        let row = (self.row_fn)(v);
        debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0), "row not sorted");
        assert!(
            row.len() <= self.row_degree,
            "row {} has {} entries, exceeding degree bound {}",
            v,
            row.len(),
            self.row_degree
        );
        Ok(row)
    }

    /// Non-zero entries of column `w`, sorted by row index.
    pub fn query_col(&self, w: usize) -> Result<RowEntries> {
        if w >= self.cols {
            return Err(Error::IndexOutOfRange {
                index: w,
                dim: self.cols,
            });
        }
        self.counter.fetch_add(1, Ordering::Relaxed);
        let col = (self.col_fn)(w);
        assert!(
            col.len() <= self.col_degree,
            "col {} has {} entries, exceeding degree bound {}",
            w,
            col.len(),
            self.col_degree
        );
        Ok(col)
    }

    // Internal unchecked variants for use inside combinator closures, where
    // index validity is guaranteed by construction.
    fn row(&self, v: usize) -> RowEntries {
        self.query_row(v).expect("in-range row query")
    }

    fn col(&self, w: usize) -> RowEntries {
        self.query_col(w).expect("in-range col query")
    }

    /// Queries issued to this oracle since the last reset.
    pub fn queries(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }

    /// Returns the query count since the last reset and resets it to 0.
    pub fn reset_and_read_counter(&self) -> u64 {
        self.counter.swap(0, Ordering::Relaxed)
    }

    /// All-zero oracle.
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, 0, 0, Arc::new(|_| Vec::new()), Arc::new(|_| Vec::new()))
    }

    /// `weight` times the identity.
    pub fn scaled_identity(dim: usize, weight: f64) -> Self {
        let f: QueryFn = Arc::new(move |v| {
            if weight.abs() < ZERO_DROP {
                Vec::new()
            } else {
                vec![(v, weight)]
            }
        });
        Self::new_symmetric(dim, 1, f)
    }

    /// Oracle over explicit adjacency lists. Rows are sorted and deduplicated
    /// at construction; the degree bound is the largest row.
    pub fn from_rows(rows: Vec<RowEntries>, cols: usize) -> Self {
        let n = rows.len();
        let mut sorted_rows: Vec<RowEntries> = Vec::with_capacity(n);
        for row in rows {
            let mut m = BTreeMap::new();
            for (j, x) in row {
                assert!(j < cols, "column index out of range");
                *m.entry(j).or_insert(0.0) += x;
            }
            sorted_rows.push(m.into_iter().filter(|(_, x)| x.abs() >= ZERO_DROP).collect());
        }
        let row_degree = sorted_rows.iter().map(Vec::len).max().unwrap_or(0);
        // Column lists derived once up front.
        let mut col_lists: Vec<RowEntries> = vec![Vec::new(); cols];
        for (i, row) in sorted_rows.iter().enumerate() {
            for &(j, x) in row {
                col_lists[j].push((i, x));
            }
        }
        let col_degree = col_lists.iter().map(Vec::len).max().unwrap_or(0);
        let rows_arc = Arc::new(sorted_rows);
        let cols_arc = Arc::new(col_lists);
        let rf: QueryFn = Arc::new(move |v| rows_arc[v].clone());
        let cf: QueryFn = Arc::new(move |w| cols_arc[w].clone());
        Self::new(n, cols, row_degree, col_degree, rf, cf)
    }

    /// Symmetric oracle from an edge list `(v, w, weight)` with `v <= w`.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<RowEntries> = vec![Vec::new(); n];
        for &(v, w, x) in edges {
            assert!(v <= w && w < n, "edge ({v},{w}) out of range or not canonical");
            rows[v].push((w, x));
            if v != w {
                rows[w].push((v, x));
            }
        }
        Self::from_rows(rows, n)
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter(|&j| m[(i, j)].abs() >= ZERO_DROP)
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        Self::from_rows(rows, m.ncols())
    }

    /// Entrywise sum. Coinciding indices are summed; exact zeros after
    /// cancellation are dropped. One query costs one query to each input.
    pub fn sum(&self, other: &Oracle) -> Result<Oracle> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                left: self.rows,
                right: other.rows,
            });
        }
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                left: self.cols,
                right: other.cols,
            });
        }
        let (a, b) = (self.clone(), other.clone());
        let rf: QueryFn = Arc::new(move |v| merge_sum(&a.row(v), &b.row(v)));
        let (a, b) = (self.clone(), other.clone());
        let cf: QueryFn = Arc::new(move |w| merge_sum(&a.col(w), &b.col(w)));
        Ok(Oracle::new(
            self.rows,
            self.cols,
            self.row_degree + other.row_degree,
            self.col_degree + other.col_degree,
            rf,
            cf,
        ))
    }

    /// Matrix product `self * other`. One output row costs one row query to
    /// `self` plus at most `self.row_degree` row queries to `other`.
    pub fn product(&self, other: &Oracle) -> Result<Oracle> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                left: self.cols,
                right: other.rows,
            });
        }
        let (a, b) = (self.clone(), other.clone());
        let rf: QueryFn = Arc::new(move |v| {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (u, x) in a.row(v) {
                for (w, y) in b.row(u) {
                    *acc.entry(w).or_insert(0.0) += x * y;
                }
            }
            collect_dropping_zeros(acc)
        });
        let (a, b) = (self.clone(), other.clone());
        let cf: QueryFn = Arc::new(move |w| {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (u, y) in b.col(w) {
                for (v, x) in a.col(u) {
                    *acc.entry(v).or_insert(0.0) += x * y;
                }
            }
            collect_dropping_zeros(acc)
        });
        Ok(Oracle::new(
            self.rows,
            other.cols,
            self.row_degree * other.row_degree,
            self.col_degree * other.col_degree,
            rf,
            cf,
        ))
    }

    /// 2x2 block matrix `[[tl, tr], [bl, br]]`. `None` blocks are zero.
    /// Row queries are routed to the blocks in that row with index offsets.
    pub fn block2(
        tl: Option<&Oracle>,
        tr: Option<&Oracle>,
        bl: Option<&Oracle>,
        br: Option<&Oracle>,
    ) -> Result<Oracle> {
        let top_rows = dim_of(tl.map(Oracle::rows), tr.map(Oracle::rows))?;
        let bot_rows = dim_of(bl.map(Oracle::rows), br.map(Oracle::rows))?;
        let left_cols = dim_of(tl.map(Oracle::cols), bl.map(Oracle::cols))?;
        let right_cols = dim_of(tr.map(Oracle::cols), br.map(Oracle::cols))?;

        let row_degree = tl.map_or(0, |o| o.row_degree).max(bl.map_or(0, |o| o.row_degree))
            + tr.map_or(0, |o| o.row_degree).max(br.map_or(0, |o| o.row_degree));
        let col_degree = tl.map_or(0, |o| o.col_degree).max(tr.map_or(0, |o| o.col_degree))
            + bl.map_or(0, |o| o.col_degree).max(br.map_or(0, |o| o.col_degree));

        let blocks: [[Option<Oracle>; 2]; 2] = [
            [tl.cloned(), tr.cloned()],
            [bl.cloned(), br.cloned()],
        ];
        let b = blocks.clone();
        let rf: QueryFn = Arc::new(move |v| {
            let (bi, local) = if v < top_rows { (0, v) } else { (1, v - top_rows) };
            let mut out = Vec::new();
            if let Some(o) = &b[bi][0] {
                out.extend(o.row(local));
            }
            if let Some(o) = &b[bi][1] {
                out.extend(o.row(local).into_iter().map(|(j, x)| (j + left_cols, x)));
            }
            out
        });
        let b = blocks;
        let cf: QueryFn = Arc::new(move |w| {
            let (bj, local) = if w < left_cols { (0, w) } else { (1, w - left_cols) };
            let mut out = Vec::new();
            if let Some(o) = &b[0][bj] {
                out.extend(o.col(local));
            }
            if let Some(o) = &b[1][bj] {
                out.extend(o.col(local).into_iter().map(|(i, x)| (i + top_rows, x)));
            }
            out
        });
        Ok(Oracle::new(
            top_rows + bot_rows,
            left_cols + right_cols,
            row_degree,
            col_degree,
            rf,
            cf,
        ))
    }

    /// Entrywise map `x -> f(x)`. Requires `f(0) = 0` so that sparsity is
    /// preserved; entries mapped to zero are dropped.
    pub fn entrywise<F>(&self, f: F) -> Result<Oracle>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let at_zero = f(0.0);
        if at_zero.abs() >= ZERO_DROP {
            return Err(Error::NonVanishingAtZero { value: at_zero });
        }
        let f = Arc::new(f);
        let a = self.clone();
        let g = f.clone();
        let rf: QueryFn = Arc::new(move |v| {
            a.row(v)
                .into_iter()
                .map(|(j, x)| (j, g(x)))
                .filter(|(_, x)| x.abs() >= ZERO_DROP)
                .collect()
        });
        let a = self.clone();
        let cf: QueryFn = Arc::new(move |w| {
            a.col(w)
                .into_iter()
                .map(|(i, x)| (i, f(x)))
                .filter(|(_, x)| x.abs() >= ZERO_DROP)
                .collect()
        });
        Ok(Oracle::new(
            self.rows,
            self.cols,
            self.row_degree,
            self.col_degree,
            rf,
            cf,
        ))
    }

    pub fn scale(&self, factor: f64) -> Oracle {
        self.entrywise(move |x| factor * x)
            .expect("scaling fixes zero")
    }

    pub fn transpose(&self) -> Oracle {
        Oracle {
            rows: self.cols,
            cols: self.rows,
            row_degree: self.col_degree,
            col_degree: self.row_degree,
            row_fn: self.col_fn.clone(),
            col_fn: self.row_fn.clone(),
            counter: self.counter.clone(),
        }
    }

    /// Full matrix by querying every row. Used in tests and exact evolvers.
    pub fn dense(&self) -> Result<DMatrix<f64>> {
        self.dense_capped(DENSE_CAP)
    }

    pub fn dense_capped(&self, cap: usize) -> Result<DMatrix<f64>> {
        let dim = self.rows.max(self.cols);
        if dim > cap {
            return Err(Error::DenseCapExceeded { dim, cap });
        }
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for v in 0..self.rows {
            for (w, x) in self.query_row(v)? {
                m[(v, w)] = x;
            }
        }
        Ok(m)
    }

    /// Exhaustive symmetry check: every `(w, x)` in row `v` must appear as
    /// `(v, x)` in row `w`, and column queries must agree with row queries.
    pub fn check_symmetry(&self) -> Result<()> {
        assert_eq!(self.rows, self.cols);
        let mut max_asym: f64 = 0.0;
        for v in 0..self.rows {
            let row = self.query_row(v)?;
            let col = self.query_col(v)?;
            if row != col {
                for (&(a, x), &(b, y)) in row.iter().zip(col.iter()) {
                    if a != b {
                        return Err(Error::NotSymmetric { max_asymmetry: f64::MAX });
                    }
                    max_asym = max_asym.max((x - y).abs());
                }
                if row.len() != col.len() {
                    return Err(Error::NotSymmetric { max_asymmetry: f64::MAX });
                }
            }
            for &(w, x) in &row {
                let back = self.query_row(w)?;
                match back.iter().find(|&&(u, _)| u == v) {
                    Some(&(_, y)) => max_asym = max_asym.max((x - y).abs()),
                    None => max_asym = max_asym.max(x.abs()),
                }
            }
        }
        if max_asym > 1e-10 {
            return Err(Error::NotSymmetric { max_asymmetry: max_asym });
        }
        Ok(())
    }

    /// Caching wrapper. Queries that hit the cache do not touch the
    /// underlying oracle, so use this only where query counting on the
    /// wrapped oracle is not under test.
    pub fn memoize(&self) -> Oracle {
        let row_cache: Arc<Mutex<std::collections::HashMap<usize, RowEntries>>> =
            Arc::new(Mutex::new(std::collections::HashMap::new()));
        let col_cache: Arc<Mutex<std::collections::HashMap<usize, RowEntries>>> =
            Arc::new(Mutex::new(std::collections::HashMap::new()));
        let a = self.clone();
        let rc = row_cache;
        let rf: QueryFn = Arc::new(move |v| {
            if let Some(hit) = rc.lock().unwrap().get(&v) {
                return hit.clone();
            }
            let row = a.row(v);
            rc.lock().unwrap().insert(v, row.clone());
            row
        });
        let a = self.clone();
        let cc = col_cache;
        let cf: QueryFn = Arc::new(move |w| {
            if let Some(hit) = cc.lock().unwrap().get(&w) {
                return hit.clone();
            }
            let col = a.col(w);
            cc.lock().unwrap().insert(w, col.clone());
            col
        });
        Oracle::new(
            self.rows,
            self.cols,
            self.row_degree,
            self.col_degree,
            rf,
            cf,
        )
    }

    /// Largest |entry| over all rows. Exhaustive; intended for desk-scale
    /// instances and for computing integrator norm bounds.
    pub fn max_abs_entry(&self) -> Result<f64> {
        let mut m: f64 = 0.0;
        for v in 0..self.rows {
            for (_, x) in self.query_row(v)? {
                m = m.max(x.abs());
            }
        }
        Ok(m)
    }
}

impl std::fmt::Debug for Oracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Oracle")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("row_degree", &self.row_degree)
            .field("col_degree", &self.col_degree)
            .finish()
    }
}

fn dim_of(a: Option<usize>, b: Option<usize>) -> Result<usize> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(Error::DimensionMismatch { left: x, right: y }),
        (Some(x), _) => Ok(x),
        (_, Some(y)) => Ok(y),
        (None, None) => Ok(0),
    }
}

fn merge_sum(a: &[(usize, f64)], b: &[(usize, f64)]) -> RowEntries {
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for &(j, x) in a.iter().chain(b.iter()) {
        *acc.entry(j).or_insert(0.0) += x;
    }
    collect_dropping_zeros(acc)
}

fn collect_dropping_zeros(acc: BTreeMap<usize, f64>) -> RowEntries {
    acc.into_iter().filter(|(_, x)| x.abs() >= ZERO_DROP).collect()
}

/// Label for an edge of a spring graph in the per-vertex slot scheme: the
/// canonical endpoints `lo <= hi` plus the slot position in `lo`'s list of
/// incident edges `(lo, u)` with `u >= lo`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeLabel {
    pub lo: usize,
    pub hi: usize,
    pub slot: usize,
}
