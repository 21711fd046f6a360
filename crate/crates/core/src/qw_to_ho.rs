//! Reduction from the quantum walk to the harmonic oscillator network.
//!
//! Shift the adjacency by `gamma` on the diagonal, square it, and sign-split
//! the square into a doubled spring matrix: the oscillator dynamics of the
//! doubled system then reproduce the walk amplitudes in its momenta. The walk
//! distribution is recovered from the oscillator energy distribution through
//! a transition matrix `C` that may have negative entries.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::harmonic_oscillator::{a_to_kappa, Outcome, EnergyDistribution, SpringSystem};
use crate::oracle::{Oracle, RowEntries, DENSE_CAP, ZERO_DROP};
use crate::quantum_walk::{global_phase_rotate, QuantumWalkProblem, VertexDistribution};
use crate::sign_split::{sigma1, sigma2, pi};
use crate::transition::TransitionOracle;

/// Wall springs below this are treated as vanishing (gamma too small).
pub const WALL_TOL: f64 = 1e-9;

/// Reconstructed probabilities are clipped at this floor; anything more
/// negative is an error.
pub const NEGATIVE_PROBABILITY_TOL: f64 = 1e-9;

/// `T + gamma * identity`. The default shift is `3 d`.
pub fn shift_adjacency(t: &Oracle, gamma: f64) -> Result<Oracle> {
    if gamma <= 0.0 {
        return Err(Error::NonPositiveGamma(gamma));
    }
    t.sum(&Oracle::scaled_identity(t.dim(), gamma))
}

/// Default diagonal shift for a degree bound `d`.
pub fn default_gamma(t: &Oracle) -> f64 {
    3.0 * t.row_degree().max(1) as f64
}

fn doubled_row(a_tilde_row: &[(usize, f64)], bar_v: usize, n: usize) -> RowEntries {
    let v = pi(bar_v, n);
    let same = bar_v;
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(a_tilde_row.len());
    for &(w, x) in a_tilde_row {
        if w == v {
            out.push((same, x));
        } else {
            let other = if bar_v < n { sigma2(w, n) } else { sigma1(w, n) };
            out.push((other, -x));
        }
    }
    out.sort_unstable_by_key(|&(j, _)| j);
    out
}

fn doubled_a_oracle(shifted: &Oracle) -> Oracle {
    let n = shifted.dim();
    let a_tilde = shifted.product(shifted).expect("square dims");
    let degree = a_tilde.row_degree();
    let row_fn = Arc::new(move |bar_v: usize| {
        let row = a_tilde.query_row(pi(bar_v, n)).expect("in-range");
        doubled_row(&row, bar_v, n)
    });
    Oracle::new_symmetric(2 * n, degree, row_fn)
}

/// Doubled spring matrix of the shifted walk: with `A~ = T~^2` split into its
/// diagonal and off-diagonal parts, the doubled operator keeps the diagonal
/// in each copy and couples the copies by the negated off-diagonals. Returns
/// the doubled `A` and the corresponding spring oracle. Errors if any wall
/// spring falls below tolerance, which signals that `gamma` is too small.
pub fn build_doubled_a(shifted: &Oracle) -> Result<(Oracle, Oracle)> {
    let a = doubled_a_oracle(shifted);
    let n2 = a.dim();
    if n2 <= DENSE_CAP {
        for bar_v in 0..n2 {
            let wall: f64 = a.query_row(bar_v)?.iter().map(|&(_, x)| x).sum();
            if wall < WALL_TOL {
                return Err(Error::VanishingWallSpring {
                    index: bar_v,
                    value: wall,
                });
            }
        }
    }
    let kappa = a_to_kappa(&a)?;
    Ok((a, kappa))
}

/// Doubled matrix without the wall-spring guard, for shifts (including
/// `gamma = 0`, passed as an already-shifted oracle) that violate the
/// stability conditions. Used for stability classification only.
pub fn build_doubled_a_unchecked(shifted: &Oracle) -> Oracle {
    doubled_a_oracle(shifted)
}

/// Variant for adjacency weights of either sign in `[-1, 1]`: only positive
/// off-diagonals of `A~` move to the copy-coupling blocks; negative ones stay
/// inside each copy, so all off-diagonals of the result are non-positive.
pub fn build_doubled_a_signed(shifted: &Oracle) -> Oracle {
    let n = shifted.dim();
    let a_tilde = shifted.product(shifted).expect("square dims");
    let degree = a_tilde.row_degree();
    let row_fn = Arc::new(move |bar_v: usize| {
        let v = pi(bar_v, n);
        let row = a_tilde.query_row(v).expect("in-range");
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (w, x) in row {
            if w == v {
                out.push((bar_v, x));
            } else if x > 0.0 {
                let other = if bar_v < n { sigma2(w, n) } else { sigma1(w, n) };
                out.push((other, -x));
            } else {
                let same = if bar_v < n { sigma1(w, n) } else { sigma2(w, n) };
                out.push((same, x));
            }
        }
        out.sort_unstable_by_key(|&(j, _)| j);
        out
    });
    Oracle::new_symmetric(2 * n, degree, row_fn)
}

/// Maps a real normalized initial amplitude vector to the doubled phase
/// space: zero displacements, momenta `(c, -c)`. The resulting total energy
/// is exactly 1.
pub fn map_initial_state(
    c0: &[(usize, f64)],
    n: usize,
) -> Result<(Vec<(usize, f64)>, Vec<(usize, f64)>)> {
    let norm: f64 = c0.iter().map(|&(_, x)| x * x).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInstance(format!(
            "initial state norm^2 = {norm}, expected 1"
        )));
    }
    let mut p0 = Vec::with_capacity(2 * c0.len());
    for &(v, x) in c0 {
        if v >= n {
            return Err(Error::IndexOutOfRange { index: v, dim: n });
        }
        p0.push((sigma1(v, n), x));
    }
    for &(v, x) in c0 {
        p0.push((sigma2(v, n), -x));
    }
    Ok((Vec::new(), p0))
}

// Row cache over the shifted oracle so each distinct row is fetched once per
// transition-matrix query; this is what keeps a C row within O(d^2) queries.
struct RowCache<'a> {
    oracle: &'a Oracle,
    rows: RefCell<HashMap<usize, Arc<RowEntries>>>,
}

impl<'a> RowCache<'a> {
    fn new(oracle: &'a Oracle) -> Self {
        Self {
            oracle,
            rows: RefCell::new(HashMap::new()),
        }
    }

    fn row(&self, v: usize) -> Arc<RowEntries> {
        if let Some(hit) = self.rows.borrow().get(&v) {
            return hit.clone();
        }
        let row = Arc::new(self.oracle.query_row(v).expect("in-range"));
        self.rows.borrow_mut().insert(v, row.clone());
        row
    }

    fn entry(&self, v: usize, w: usize) -> f64 {
        self.row(v)
            .iter()
            .find(|&&(u, _)| u == w)
            .map_or(0.0, |&(_, x)| x)
    }

    fn row_sum(&self, v: usize) -> f64 {
        self.row(v).iter().map(|&(_, x)| x).sum()
    }

    /// Row of the square, `(T~^2)_{w,*}`.
    fn square_row(&self, w: usize) -> BTreeMap<usize, f64> {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for &(x, txw) in self.row(w).iter() {
            for &(u, txu) in self.row(x).iter() {
                *acc.entry(u).or_insert(0.0) += txw * txu;
            }
        }
        acc.retain(|_, x| x.abs() >= ZERO_DROP);
        acc
    }

    fn wall(&self, square_row: &BTreeMap<usize, f64>, w: usize) -> f64 {
        let diag = square_row.get(&w).copied().unwrap_or(0.0);
        let total: f64 = square_row.values().sum();
        2.0 * diag - total
    }
}

/// The transition matrix `C` relating the oscillator energy distribution of
/// the doubled system back to the walk distribution:
/// `P_QW(v) = sum_s C_{vs} P_HO(s)`. Rows are indexed by original vertices,
/// columns by outcomes of the doubled system. Entries can be negative.
pub fn build_transition_c(shifted: &Oracle, n: usize) -> TransitionOracle<usize, Outcome> {
    assert_eq!(shifted.dim(), n);
    let t_row = shifted.clone();
    let row_fn = Arc::new(move |&v: &usize| {
        let cache = RowCache::new(&t_row);
        let row_v = cache.row(v);
        let row_v_sum: f64 = row_v.iter().map(|&(_, x)| x).sum();
        let mut out: Vec<(Outcome, f64)> = Vec::new();
        out.push((Outcome::Mass(sigma1(v, n)), 1.0));
        out.push((Outcome::Mass(sigma2(v, n)), 1.0));
        for &(w, t_vw) in row_v.iter() {
            let square_w = cache.square_row(w);
            let wall = cache.wall(&square_w, w);
            assert!(wall > WALL_TOL, "vanishing wall spring at {w}");
            let coeff = t_vw * (t_vw - (row_v_sum - t_vw)) / wall;
            if coeff.abs() >= ZERO_DROP {
                out.push((Outcome::Spring(sigma1(w, n), sigma1(w, n)), coeff));
                out.push((Outcome::Spring(sigma2(w, n), sigma2(w, n)), coeff));
            }
            for &(u, t_vu) in row_v.iter() {
                if u == w {
                    continue;
                }
                let cross = square_w.get(&u).copied().unwrap_or(0.0);
                assert!(
                    cross > 0.0,
                    "missing cross spring ({w},{u}) under non-negative weights"
                );
                let coeff = t_vw * t_vu / cross;
                if coeff.abs() >= ZERO_DROP {
                    out.push((Outcome::spring(sigma1(w, n), sigma2(u, n)), coeff));
                }
            }
        }
        out.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        out
    });

    let t_col = shifted.clone();
    let col_fn = Arc::new(move |&s: &Outcome| {
        let cache = RowCache::new(&t_col);
        let mut out: Vec<(usize, f64)> = Vec::new();
        match s {
            Outcome::Mass(bar_w) => {
                out.push((pi(bar_w, n), 1.0));
            }
            Outcome::Spring(a, b) if a == b => {
                let w = pi(a, n);
                let square_w = cache.square_row(w);
                let wall = cache.wall(&square_w, w);
                for &(v, t_vw) in cache.row(w).clone().iter() {
                    let coeff = t_vw * (2.0 * t_vw - cache.row_sum(v)) / wall;
                    if coeff.abs() >= ZERO_DROP {
                        out.push((v, coeff));
                    }
                }
            }
            Outcome::Spring(a, b) => {
                // Cross springs couple distinct vertices in opposite copies;
                // any other spring label has an empty column.
                if a < n && b >= n && pi(a, n) != pi(b, n) {
                    let (w, u) = (a, b - n);
                    let cross = cache.square_row(w).get(&u).copied().unwrap_or(0.0);
                    if cross > 0.0 {
                        for &(v, t_vw) in cache.row(w).clone().iter() {
                            let t_vu = cache.entry(v, u);
                            let coeff = t_vw * t_vu / cross;
                            if coeff.abs() >= ZERO_DROP {
                                out.push((v, coeff));
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable_by_key(|&(v, _)| v);
        out
    });

    TransitionOracle::new(row_fn, col_fn)
}

/// Pushes an oscillator energy distribution through `C` to recover the walk
/// distribution. Small negative round-off is clipped; anything below the
/// tolerance is an error.
pub fn reconstruct_pqw(
    p_ho: &EnergyDistribution,
    c: &TransitionOracle<usize, Outcome>,
) -> Result<VertexDistribution> {
    let acc = c.map_distribution(p_ho.iter());
    for (&v, &p) in &acc {
        if p < -NEGATIVE_PROBABILITY_TOL {
            return Err(Error::NegativeProbability {
                outcome: format!("vertex {v}"),
                value: p,
            });
        }
    }
    Ok(VertexDistribution::from_values(
        acc.into_iter().map(|(v, p)| (v, p.max(0.0))),
    ))
}

/// All artifacts of the reduction for one walk problem.
pub struct QwToHoReduction {
    pub gamma: f64,
    pub n: usize,
    /// Shifted (and, if needed, weight-rescaled) adjacency.
    pub shifted: Oracle,
    pub doubled_a: Oracle,
    pub kappa_bar: Oracle,
    pub c: TransitionOracle<usize, Outcome>,
    /// The mapped oscillator system (its `t_final` is already rescaled).
    pub system: SpringSystem,
    /// Factor by which oscillator times relate to walk times. Unity unless
    /// the input weights exceeded 1 and were normalized.
    pub time_scale: f64,
}

impl QwToHoReduction {
    /// Walk distribution recovered through the oscillator at walk time `t`.
    pub fn reconstructed_distribution_at(&self, t: f64) -> Result<VertexDistribution> {
        let p_ho = self.system.output_distribution_at(t * self.time_scale)?;
        reconstruct_pqw(&p_ho, &self.c)
    }
}

/// Packages the full reduction: shift with `gamma` (default `3 d`), double,
/// derive springs and `C`, and map the initial state. The initial amplitudes
/// must be collinear in phase.
pub fn full_reduction(problem: &QuantumWalkProblem, gamma: Option<f64>) -> Result<QwToHoReduction> {
    let n = problem.dimension();
    let real0 = global_phase_rotate(&problem.initial)?;

    let max_weight = problem.adjacency.max_abs_entry()?;
    let (t_used, time_scale) = if max_weight > 1.0 {
        (problem.adjacency.scale(1.0 / max_weight), max_weight)
    } else {
        (problem.adjacency.clone(), 1.0)
    };

    let gamma = gamma.unwrap_or_else(|| default_gamma(&t_used));
    let shifted = shift_adjacency(&t_used, gamma)?;
    let (doubled_a, kappa_bar) = build_doubled_a(&shifted)?;
    let c = build_transition_c(&shifted, n);
    let (q0, p0) = map_initial_state(&real0, n)?;
    let system = SpringSystem::new(kappa_bar.clone(), q0, p0, problem.t_final * time_scale);
    Ok(QwToHoReduction {
        gamma,
        n,
        shifted,
        doubled_a,
        kappa_bar,
        c,
        system,
        time_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::harmonic_oscillator::{all_outcomes, total_energy};
    use crate::oracle::Oracle;
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shift_star_gives_t3() {
        let t3 = shift_adjacency(&fixtures::t2_star(), 6.0).unwrap();
        assert_eq!(t3.dense().unwrap(), fixtures::t3_dense());
    }

    #[test]
    fn shift_zero_matrix_gives_identity() {
        let s = shift_adjacency(&Oracle::zero(3, 3), 1.0).unwrap();
        assert_eq!(s.dense().unwrap(), DMatrix::identity(3, 3));
    }

    #[test]
    fn shift_path_with_default_gamma() {
        let t1 = fixtures::t1_path();
        assert_eq!(default_gamma(&t1), 6.0);
        let s = shift_adjacency(&t1, default_gamma(&t1)).unwrap();
        let expect = fixtures::t1_dense() + DMatrix::identity(3, 3) * 6.0;
        assert_eq!(s.dense().unwrap(), expect);
    }

    #[test]
    fn nonpositive_gamma_rejected() {
        assert!(matches!(
            shift_adjacency(&fixtures::t1_path(), 0.0),
            Err(Error::NonPositiveGamma(_))
        ));
    }

    #[test]
    fn doubled_two_vertex_springs() {
        let (a, kappa) = build_doubled_a(&fixtures::two_vertex_shifted()).unwrap();
        let expect_a = DMatrix::from_row_slice(
            4,
            4,
            &[
                5.0, 0.0, 0.0, -4.0, //
                0.0, 5.0, -4.0, 0.0, //
                0.0, -4.0, 5.0, 0.0, //
                -4.0, 0.0, 0.0, 5.0,
            ],
        );
        assert_eq!(a.dense().unwrap(), expect_a);
        for v in 0..4 {
            let row = kappa.query_row(v).unwrap();
            let wall = row.iter().find(|&&(w, _)| w == v).map(|&(_, x)| x);
            assert_eq!(wall, Some(1.0));
        }
        assert_eq!(
            kappa.query_row(0).unwrap(),
            vec![(0, 1.0), (3, 4.0)]
        );
        assert_eq!(
            kappa.query_row(1).unwrap(),
            vec![(1, 1.0), (2, 4.0)]
        );
    }

    #[test]
    fn doubled_identity() {
        let (a, kappa) = build_doubled_a(&Oracle::scaled_identity(3, 1.0)).unwrap();
        assert_eq!(a.dense().unwrap(), DMatrix::identity(6, 6));
        for v in 0..6 {
            assert_eq!(kappa.query_row(v).unwrap(), vec![(v, 1.0)]);
        }
    }

    #[test]
    fn doubled_path_square_unchecked() {
        // gamma = 0 illustration: walls vanish, so only the unchecked path
        // can assemble the matrix.
        let a = build_doubled_a_unchecked(&fixtures::t1_path());
        let a1 = fixtures::a1_tilde_dense();
        let mut expect = DMatrix::zeros(6, 6);
        for v in 0..3 {
            for w in 0..3 {
                if v == w {
                    expect[(v, w)] = a1[(v, w)];
                    expect[(v + 3, w + 3)] = a1[(v, w)];
                } else {
                    expect[(v, w + 3)] = -a1[(v, w)];
                    expect[(v + 3, w)] = -a1[(v, w)];
                }
            }
        }
        assert_eq!(a.dense().unwrap(), expect);
        assert!(matches!(
            build_doubled_a(&fixtures::t1_path()),
            Err(Error::VanishingWallSpring { .. })
        ));
    }

    #[test]
    fn initial_state_mapping() {
        let (q0, p0) = map_initial_state(&[(1, 1.0)], 3).unwrap();
        assert!(q0.is_empty());
        assert_eq!(p0, vec![(1, 1.0), (4, -1.0)]);

        let (_, p0) = map_initial_state(&[(0, 0.6), (1, 0.8)], 2).unwrap();
        assert_eq!(p0, vec![(0, 0.6), (1, 0.8), (2, -0.6), (3, -0.8)]);
    }

    #[test]
    fn initial_state_count_doubles_and_normalizes_energy() {
        let amp = (1.0f64 / 5.0).sqrt();
        let c0: Vec<(usize, f64)> = (0..5).map(|v| (v, amp)).collect();
        let (_, p0) = map_initial_state(&c0, 8).unwrap();
        assert_eq!(p0.len(), 10);

        let shifted = shift_adjacency(&fixtures::t2_star(), 12.0).unwrap();
        let (_, kappa) = build_doubled_a(&shifted).unwrap();
        let c0 = [(0, 0.6), (3, 0.8)];
        let (q0b, p0b) = map_initial_state(&c0, 4).unwrap();
        let system = SpringSystem::new(kappa.clone(), q0b, p0b, 0.0);
        let h = total_energy(&kappa, &system.initial_dense()).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_initial_rejected() {
        assert!(map_initial_state(&[(0, 0.5)], 2).is_err());
    }

    #[test]
    fn two_vertex_c_entries() {
        let shifted = fixtures::two_vertex_shifted();
        let c = build_transition_c(&shifted, 2);
        let row0: BTreeMap<Outcome, f64> = c.row(&0).into_iter().collect();
        assert_eq!(row0[&Outcome::Mass(0)], 1.0);
        assert_eq!(row0[&Outcome::Mass(2)], 1.0);
        assert_eq!(row0[&Outcome::Spring(0, 0)], 2.0);
        assert_eq!(row0[&Outcome::Spring(2, 2)], 2.0);
        assert_eq!(row0[&Outcome::Spring(1, 1)], -1.0);
        assert_eq!(row0[&Outcome::Spring(3, 3)], -1.0);
        assert_eq!(row0[&Outcome::Spring(0, 3)], 0.5);
        assert_eq!(row0[&Outcome::Spring(1, 2)], 0.5);

        let row1: BTreeMap<Outcome, f64> = c.row(&1).into_iter().collect();
        assert_eq!(row1[&Outcome::Spring(1, 1)], 2.0);
        assert_eq!(row1[&Outcome::Spring(0, 0)], -1.0);
        assert_eq!(row1[&Outcome::Spring(0, 3)], 0.5);
        assert_eq!(row1[&Outcome::Spring(1, 2)], 0.5);
        assert_eq!(row1[&Outcome::Mass(1)], 1.0);
        assert_eq!(row1[&Outcome::Mass(3)], 1.0);
    }

    #[test]
    fn columns_agree_with_rows_and_sum_to_one() {
        let shifted = shift_adjacency(&fixtures::t2_star(), 12.0).unwrap();
        let (_, kappa) = build_doubled_a(&shifted).unwrap();
        let c = build_transition_c(&shifted, 4);
        let mut from_rows: BTreeMap<Outcome, BTreeMap<usize, f64>> = BTreeMap::new();
        for v in 0..4 {
            for (s, x) in c.row(&v) {
                *from_rows.entry(s).or_default().entry(v).or_insert(0.0) += x;
            }
        }
        for s in all_outcomes(&kappa).unwrap() {
            let col: BTreeMap<usize, f64> = c.col(&s).into_iter().collect();
            let expect = from_rows.get(&s).cloned().unwrap_or_default();
            let keys: Vec<usize> = col.keys().chain(expect.keys()).copied().collect();
            for v in keys {
                let a = col.get(&v).copied().unwrap_or(0.0);
                let b = expect.get(&v).copied().unwrap_or(0.0);
                assert!((a - b).abs() < 1e-12, "outcome {s} vertex {v}");
            }
            let sum: f64 = col.values().sum();
            assert!((sum - 1.0).abs() < 1e-10, "column {s} sums to {sum}");
        }
    }

    #[test]
    fn worked_state_reconstructs_walk_distribution() {
        let shifted = fixtures::two_vertex_shifted();
        let (_, kappa) = build_doubled_a(&shifted).unwrap();
        let c = build_transition_c(&shifted, 2);
        let x = (1.0f64 / 5.0).sqrt();
        let state = crate::dynamics::PhaseState::new(
            nalgebra::DVector::from_vec(vec![x, 0.0, -x, 0.0]),
            nalgebra::DVector::zeros(4),
            0.0,
        );
        let p_ho = crate::harmonic_oscillator::energy_distribution(&kappa, &state).unwrap();
        let p_qw = reconstruct_pqw(&p_ho, &c).unwrap();
        assert!((p_qw.probability(0) - 0.8).abs() < 1e-12);
        assert!((p_qw.probability(1) - 0.2).abs() < 1e-12);
        assert!((p_qw.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_distribution_rejected() {
        let shifted = fixtures::two_vertex_shifted();
        let c = build_transition_c(&shifted, 2);
        let bogus = EnergyDistribution::from_parts([(Outcome::Spring(1, 1), 1.0)], 1.0);
        assert!(matches!(
            reconstruct_pqw(&bogus, &c),
            Err(Error::NegativeProbability { .. })
        ));
    }

    #[test]
    fn zero_time_roundtrip_is_exact() {
        let problem = QuantumWalkProblem::single_vertex(fixtures::t1_path(), 1, 0.0);
        let red = full_reduction(&problem, None).unwrap();
        let direct = problem.output_distribution().unwrap();
        let via = red.reconstructed_distribution_at(0.0).unwrap();
        assert!(direct.max_abs_difference(&via) < 1e-12);
    }

    #[test]
    fn dual_path_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..4 {
            let n = 3 + trial;
            let mut edges = Vec::new();
            for v in 0..n - 1 {
                edges.push((v, v + 1, rng.gen_range(0.1..1.0)));
            }
            if n > 3 {
                edges.push((0, n - 1, rng.gen_range(0.1..1.0)));
            }
            let t = Oracle::from_edges(n, &edges);
            let mut amps: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm: f64 = amps.iter().map(|x| x * x).sum::<f64>().sqrt();
            for a in &mut amps {
                *a /= norm;
            }
            let initial: Vec<(usize, Complex64)> = amps
                .iter()
                .enumerate()
                .map(|(v, &x)| (v, Complex64::new(x, 0.0)))
                .collect();
            for &t_final in &[0.7, 2.0] {
                let problem = QuantumWalkProblem::new(t.clone(), initial.clone(), t_final);
                let red = full_reduction(&problem, None).unwrap();
                let direct = problem.output_distribution().unwrap();
                let via = red.reconstructed_distribution_at(t_final).unwrap();
                let err = direct.max_abs_difference(&via);
                assert!(err < 1e-9, "trial {trial} t={t_final} err={err:e}");
            }
        }
    }

    #[test]
    fn heavy_weights_are_rescaled() {
        let t = Oracle::from_edges(2, &[(0, 1, 5.0)]);
        let problem = QuantumWalkProblem::single_vertex(t, 0, 0.4);
        let red = full_reduction(&problem, None).unwrap();
        assert_eq!(red.time_scale, 5.0);
        assert!((red.system.t_final - 2.0).abs() < 1e-12);
        let direct = problem.output_distribution().unwrap();
        let via = red.reconstructed_distribution_at(0.4).unwrap();
        assert!(direct.max_abs_difference(&via) < 1e-9);
    }

    #[test]
    fn c_row_query_budget() {
        for (t, n) in [(fixtures::t1_path(), 3), (fixtures::t2_star(), 4)] {
            let gamma = default_gamma(&t);
            let shifted = shift_adjacency(&t, gamma).unwrap();
            let c = build_transition_c(&shifted, n);
            let d = shifted.row_degree() as u64;
            for v in 0..n {
                t.reset_and_read_counter();
                c.row(&v);
                let used = t.reset_and_read_counter();
                assert!(used <= 4 * d * d, "row {v}: {used} queries for d={d}");
            }
        }
    }

    #[test]
    fn signed_variant_preserves_dynamics_and_signs() {
        let t = Oracle::from_dense(&DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 0.5, -0.8, 0.5, 0.0, 0.3, -0.8, 0.3, 0.0],
        ));
        let shifted = shift_adjacency(&t, 6.0).unwrap();
        let a_tilde = shifted.product(&shifted).unwrap().dense().unwrap();
        let doubled = build_doubled_a_signed(&shifted).dense().unwrap();
        // Off-diagonals non-positive, and the action on antisymmetric
        // vectors matches the square.
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert!(doubled[(i, j)] <= 0.0);
                }
            }
        }
        let x = nalgebra::DVector::from_vec(vec![0.4, -0.2, 0.9]);
        let mut z = nalgebra::DVector::zeros(6);
        for i in 0..3 {
            z[i] = x[i];
            z[i + 3] = -x[i];
        }
        let az = &doubled * &z;
        let ax = &a_tilde * &x;
        for i in 0..3 {
            assert!((az[i] - ax[i]).abs() < 1e-12);
            assert!((az[i + 3] + ax[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn wall_bounds_hold_for_default_gamma() {
        for (t, n) in [(fixtures::t1_path(), 3), (fixtures::t2_star(), 4)] {
            let d = t.row_degree() as f64;
            let gamma = 3.0 * d;
            let shifted = shift_adjacency(&t, gamma).unwrap();
            let (_, kappa) = build_doubled_a(&shifted).unwrap();
            for bar_v in 0..2 * n {
                let wall = kappa
                    .query_row(bar_v)
                    .unwrap()
                    .into_iter()
                    .find(|&(w, _)| w == bar_v)
                    .map_or(0.0, |(_, x)| x);
                assert!(wall >= 2.0 * d * d - 1e-9, "wall {wall} at {bar_v}");
                assert!(wall <= gamma * gamma + d * d + 1e-9, "wall {wall} at {bar_v}");
            }
        }
    }
}
