//! Reduction from the harmonic oscillator network to a quantum walk.
//!
//! Factor the spring matrix as `A = B^T B` with an incidence-like rectangular
//! `B` (one row per spring), sign-split `B`, and assemble a four-block
//! symmetric walk operator over the doubled disjoint union of edge and vertex
//! labels. Oscillator states map to walk amplitudes carrying the energy of
//! each spring and mass; folding the two copies of the walk distribution
//! recovers the energy distribution.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonic_oscillator::{EnergyDistribution, Outcome, SpringSystem};
use crate::oracle::{Oracle, DENSE_CAP, ZERO_DROP};
use crate::quantum_walk::{QuantumWalkProblem, VertexDistribution};
use crate::sign_split::split_pos_neg;
use crate::transition::TransitionOracle;

/// Edge labels for a spring oracle in the per-vertex slot scheme: springs are
/// listed per lower endpoint, and edge `(lo, hi)` gets id
/// `lo * slots + position of hi` among `lo`'s incident springs with the
/// higher index. Absent slots are padding with empty rows.
#[derive(Debug, Clone)]
pub struct EdgeIndex {
    kappa: Oracle,
    n: usize,
    slots: usize,
}

impl EdgeIndex {
    pub fn new(kappa: &Oracle) -> Self {
        Self {
            kappa: kappa.clone(),
            n: kappa.dim(),
            slots: kappa.row_degree(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Number of edge ids, padding included.
    pub fn edge_count(&self) -> usize {
        self.n * self.slots
    }

    /// Endpoints and spring constant of an edge id, `None` for padding.
    pub fn label(&self, e: usize) -> Result<Option<(usize, usize, f64)>> {
        if self.slots == 0 || e >= self.edge_count() {
            return Err(Error::IndexOutOfRange {
                index: e,
                dim: self.edge_count(),
            });
        }
        let lo = e / self.slots;
        let slot = e % self.slots;
        let row = self.kappa.query_row(lo)?;
        Ok(row
            .into_iter()
            .filter(|&(u, _)| u >= lo)
            .nth(slot)
            .map(|(hi, x)| (lo, hi, x)))
    }

    /// Edge id of the spring between `v` and `w`, if present.
    pub fn id(&self, v: usize, w: usize) -> Result<Option<usize>> {
        let (lo, hi) = (v.min(w), v.max(w));
        let row = self.kappa.query_row(lo)?;
        let slot = row
            .into_iter()
            .filter(|&(u, _)| u >= lo)
            .position(|(u, _)| u == hi);
        Ok(slot.map(|s| lo * self.slots + s))
    }
}

/// The rectangular factor `B` with `B^T B = A`: one row per spring, carrying
/// `+sqrt(kappa)` at the lower endpoint and `-sqrt(kappa)` at the higher one
/// (wall springs get the single positive entry). An edge row costs one kappa
/// query; a vertex column costs O(d).
pub fn build_b(kappa: &Oracle) -> Result<Oracle> {
    let n = kappa.dim();
    if n <= DENSE_CAP {
        for v in 0..n {
            for (w, x) in kappa.query_row(v)? {
                if x < 0.0 {
                    return Err(Error::NegativeEntry { row: v, value: x });
                }
                let _ = w;
            }
        }
    }
    let idx = EdgeIndex::new(kappa);
    let rows = idx.edge_count();
    let slots = idx.slots;

    let row_idx = idx.clone();
    let row_fn = Arc::new(move |e: usize| match row_idx.label(e).expect("in-range") {
        None => Vec::new(),
        Some((lo, hi, x)) => {
            let root = x.sqrt();
            if lo == hi {
                vec![(lo, root)]
            } else {
                vec![(lo, root), (hi, -root)]
            }
        }
    });

    let col_kappa = kappa.clone();
    let col_fn = Arc::new(move |v: usize| {
        let row = col_kappa.query_row(v).expect("in-range");
        let mut out: Vec<(usize, f64)> = Vec::new();
        let mut own_slot = 0;
        for &(u, x) in &row {
            let root = x.sqrt();
            if u >= v {
                out.push((v * slots + own_slot, root));
                own_slot += 1;
            } else {
                // v is the higher endpoint; find the slot in u's list.
                let peer = col_kappa.query_row(u).expect("in-range");
                if let Some(s) = peer
                    .into_iter()
                    .filter(|&(w, _)| w >= u)
                    .position(|(w, _)| w == v)
                {
                    out.push((u * slots + s, -root));
                }
            }
        }
        out.sort_unstable_by_key(|&(e, _)| e);
        out
    });

    Ok(Oracle::new(rows, n, 2, slots, row_fn, col_fn))
}

/// Dense verification report for the factorization `B^T B = A`.
#[derive(Debug, Clone)]
pub struct FactorizationReport {
    pub max_error: f64,
    pub worst_entry: (usize, usize),
    pub pass: bool,
}

pub fn verify_btb_equals_a(b: &Oracle, a: &Oracle) -> Result<FactorizationReport> {
    let bd = b.dense()?;
    let ad = a.dense()?;
    let btb = bd.transpose() * &bd;
    let mut max_error = 0.0;
    let mut worst_entry = (0, 0);
    for i in 0..ad.nrows() {
        for j in 0..ad.ncols() {
            let err = (btb[(i, j)] - ad[(i, j)]).abs();
            if err > max_error {
                max_error = err;
                worst_entry = (i, j);
            }
        }
    }
    Ok(FactorizationReport {
        max_error,
        worst_entry,
        pass: max_error < 1e-12,
    })
}

/// The four-block doubled walk operator built from the sign-split of `B`:
/// edges and vertices each get two copies, the off-diagonal blocks carry the
/// positive and negative parts of `B`, and every entry is non-negative.
pub fn build_walk_t(b: &Oracle) -> Result<Oracle> {
    let (bp, bn) = split_pos_neg(b);
    let m = Oracle::block2(Some(&bp), Some(&bn), Some(&bn), Some(&bp))?;
    let mt = m.transpose();
    let e2 = 2 * b.rows();
    let n2 = 2 * b.cols();
    let t = Oracle::block2(
        Some(&Oracle::zero(e2, e2)),
        Some(&m),
        Some(&mt),
        Some(&Oracle::zero(n2, n2)),
    )?;
    t.entrywise(|x| {
        assert!(x >= 0.0, "walk operator produced a negative entry {x}");
        x
    })
}

/// Index of outcome `s` in copy 1 or 2 of the doubled walk label set
/// (edges first, then vertices). `None` for springs absent from the graph.
pub fn outcome_to_walk_index(idx: &EdgeIndex, s: Outcome, copy: u8) -> Result<Option<usize>> {
    let e_total = idx.edge_count();
    let offset = match copy {
        1 => 0,
        2 => 1,
        _ => panic!("copy must be 1 or 2"),
    };
    Ok(match s {
        Outcome::Mass(v) => Some(2 * e_total + offset * idx.n + v),
        Outcome::Spring(v, w) => idx.id(v, w)?.map(|e| offset * e_total + e),
    })
}

/// Outcome of a doubled walk index, `None` for padding edges.
pub fn walk_index_to_outcome(idx: &EdgeIndex, r: usize) -> Result<Option<Outcome>> {
    let e_total = idx.edge_count();
    if r < 2 * e_total {
        let e = r % e_total;
        Ok(idx.label(e)?.map(|(lo, hi, _)| Outcome::Spring(lo, hi)))
    } else {
        let v = (r - 2 * e_total) % idx.n;
        Ok(Some(Outcome::Mass(v)))
    }
}

/// Maps an oscillator state into doubled walk amplitudes
/// `(-iBq; p) / sqrt(4H)` on copy 1 and its negation on copy 2. Momentum-only
/// states produce purely real amplitudes. Returns the amplitudes and the
/// total energy.
pub fn map_initial_state(
    system: &SpringSystem,
    b: &Oracle,
    idx: &EdgeIndex,
) -> Result<(Vec<(usize, Complex64)>, f64)> {
    let mut q: BTreeMap<usize, f64> = BTreeMap::new();
    for &(v, x) in &system.q0 {
        *q.entry(v).or_insert(0.0) += x;
    }
    let mut p: BTreeMap<usize, f64> = BTreeMap::new();
    for &(v, x) in &system.p0 {
        *p.entry(v).or_insert(0.0) += x;
    }

    let h = sparse_energy(&system.kappa, &q, &p)?;
    if h <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let scale = 1.0 / (4.0 * h).sqrt();

    let mut bq: BTreeMap<usize, f64> = BTreeMap::new();
    for (&v, &qv) in &q {
        for (e, bev) in b.query_col(v)? {
            *bq.entry(e).or_insert(0.0) += bev * qv;
        }
    }
    bq.retain(|_, x| x.abs() >= ZERO_DROP);

    let e_total = idx.edge_count();
    let n = idx.n;
    let mut amps: Vec<(usize, Complex64)> = Vec::with_capacity(2 * (bq.len() + p.len()));
    for (&e, &x) in &bq {
        amps.push((e, Complex64::new(0.0, -x * scale)));
    }
    for (&e, &x) in &bq {
        amps.push((e_total + e, Complex64::new(0.0, x * scale)));
    }
    for (&v, &x) in &p {
        if x.abs() >= ZERO_DROP {
            amps.push((2 * e_total + v, Complex64::new(x * scale, 0.0)));
        }
    }
    for (&v, &x) in &p {
        if x.abs() >= ZERO_DROP {
            amps.push((2 * e_total + n + v, Complex64::new(-x * scale, 0.0)));
        }
    }
    Ok((amps, h))
}

fn sparse_energy(
    kappa: &Oracle,
    q: &BTreeMap<usize, f64>,
    p: &BTreeMap<usize, f64>,
) -> Result<f64> {
    let mut h: f64 = p.values().map(|x| 0.5 * x * x).sum();
    for (&v, &qv) in q {
        for (w, k) in kappa.query_row(v)? {
            if w == v {
                h += 0.5 * k * qv * qv;
            } else {
                let qw = q.get(&w).copied().unwrap_or(0.0);
                // Count each displaced spring once.
                if q.contains_key(&w) && w < v {
                    continue;
                }
                let d = qv - qw;
                h += 0.5 * k * d * d;
            }
        }
    }
    Ok(h)
}

/// Subspace check for walk states originating from oscillator states:
/// vertex amplitudes are real, edge amplitudes are imaginary with their
/// imaginary part inside the column span of `B`.
#[derive(Debug, Clone)]
pub struct SubspaceReport {
    /// Largest stray component: |Re| on edges, |Im| on vertices.
    pub max_component_violation: f64,
    /// Largest least-squares residual of the edge amplitudes against the
    /// range of `B`, over the two copies.
    pub range_residual: f64,
    pub pass: bool,
}

pub fn check_subspace_constraint(
    amplitudes: &DVector<Complex64>,
    b_dense: &DMatrix<f64>,
) -> SubspaceReport {
    let e_total = b_dense.nrows();
    let n = b_dense.ncols();
    assert_eq!(amplitudes.len(), 2 * e_total + 2 * n);

    let mut max_component_violation: f64 = 0.0;
    for e in 0..2 * e_total {
        max_component_violation = max_component_violation.max(amplitudes[e].re.abs());
    }
    for v in 2 * e_total..2 * e_total + 2 * n {
        max_component_violation = max_component_violation.max(amplitudes[v].im.abs());
    }

    let svd = b_dense.clone().svd(true, true);
    let mut range_residual: f64 = 0.0;
    for copy in 0..2 {
        let y = DVector::from_iterator(
            e_total,
            (0..e_total).map(|e| amplitudes[copy * e_total + e].im),
        );
        let residual = match svd.solve(&y, 1e-12) {
            Ok(x) => (b_dense * x - &y).amax(),
            Err(_) => y.amax(),
        };
        range_residual = range_residual.max(residual);
    }
    SubspaceReport {
        max_component_violation,
        range_residual,
        pass: max_component_violation < 1e-8 && range_residual < 1e-8,
    }
}

/// The fold map recombining the two copies of the walk distribution into the
/// oscillator energy distribution: `P_HO(s) = P_QW(s1) + P_QW(s2)` for the
/// two copies of `s`, each copy holding half the probability. Non-negative
/// and column-stochastic, so sampling maps through it directly.
pub fn fold_map(idx: &EdgeIndex) -> TransitionOracle<Outcome, usize> {
    let row_idx = idx.clone();
    let row_fn = Arc::new(move |&s: &Outcome| {
        let i1 = outcome_to_walk_index(&row_idx, s, 1).expect("in-range");
        let i2 = outcome_to_walk_index(&row_idx, s, 2).expect("in-range");
        match (i1, i2) {
            (Some(a), Some(b)) => vec![(a, 1.0), (b, 1.0)],
            _ => Vec::new(),
        }
    });
    let col_idx = idx.clone();
    let col_fn = Arc::new(move |&r: &usize| {
        match walk_index_to_outcome(&col_idx, r).expect("in-range") {
            Some(s) => vec![(s, 1.0)],
            None => Vec::new(),
        }
    });
    TransitionOracle::new(row_fn, col_fn)
}

/// Folds a doubled walk distribution back into an energy distribution with
/// the given total energy attached.
pub fn reconstruct_pho(
    p_qw: &VertexDistribution,
    fold: &TransitionOracle<Outcome, usize>,
    total_energy: f64,
) -> EnergyDistribution {
    let acc = fold.map_distribution(p_qw.iter().map(|(r, p)| (r, p)));
    EnergyDistribution::from_parts(acc, total_energy)
}

/// All artifacts of the reduction for one spring system.
pub struct HoToQwReduction {
    pub problem: QuantumWalkProblem,
    pub fold: TransitionOracle<Outcome, usize>,
    pub b: Oracle,
    pub edge_index: EdgeIndex,
    /// Total energy of the source system, fixed at t = 0.
    pub h: f64,
}

impl HoToQwReduction {
    /// Oscillator distribution recovered through the walk at time `t`.
    pub fn reconstructed_distribution_at(&self, t: f64) -> Result<EnergyDistribution> {
        let p_qw = self.problem.output_distribution_at(t)?;
        Ok(reconstruct_pho(&p_qw, &self.fold, self.h))
    }
}

/// Packages the full reduction: factor the springs, assemble the doubled
/// walk, map the initial state, and return the fold map.
pub fn full_reduction(system: &SpringSystem) -> Result<HoToQwReduction> {
    let b = build_b(&system.kappa)?;
    let idx = EdgeIndex::new(&system.kappa);
    let t = build_walk_t(&b)?;
    let (initial, h) = map_initial_state(system, &b, &idx)?;
    let problem = QuantumWalkProblem::new(t, initial, system.t_final);
    Ok(HoToQwReduction {
        problem,
        fold: fold_map(&idx),
        b,
        edge_index: idx,
        h,
    })
}
