//! The Harmonic Oscillator Problem: unit masses coupled by springs given as
//! a non-negative symmetric oracle (self-loops are wall springs), evolved by
//! the Hamilton equations, with an output distribution of energy fractions
//! over masses and springs.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{evolve_hamiltonian_exact, PhaseState, STABILITY_TOL};
use crate::error::{Error, Result};
use crate::oracle::{Oracle, DENSE_CAP, ZERO_DROP};

/// Outcome label of the oscillator read-out: a mass (kinetic energy) or a
/// spring (potential energy), with canonical `lo <= hi` endpoints; `lo == hi`
/// is a wall spring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Mass(usize),
    Spring(usize, usize),
}

impl Outcome {
    pub fn spring(v: usize, w: usize) -> Self {
        Outcome::Spring(v.min(w), v.max(w))
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Mass(v) => write!(f, "mass:{v}"),
            Outcome::Spring(v, w) => write!(f, "spring:{v}-{w}"),
        }
    }
}

/// Energy-fraction distribution over masses and springs.
#[derive(Debug, Clone)]
pub struct EnergyDistribution {
    probabilities: BTreeMap<Outcome, f64>,
    pub total_energy: f64,
}

impl EnergyDistribution {
    /// Assembles a distribution from precomputed probabilities, clipping
    /// tiny negatives, with the total energy carried alongside.
    pub fn from_parts(values: impl IntoIterator<Item = (Outcome, f64)>, total_energy: f64) -> Self {
        let probabilities = values
            .into_iter()
            .map(|(s, p)| {
                debug_assert!(p >= -1e-9, "probability {p} too negative at {s}");
                (s, p.max(0.0))
            })
            .filter(|&(_, p)| p > 0.0)
            .collect();
        Self {
            probabilities,
            total_energy,
        }
    }

    pub fn probability(&self, s: Outcome) -> f64 {
        self.probabilities.get(&s).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, f64)> + '_ {
        self.probabilities.iter().map(|(&s, &p)| (s, p))
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }

    pub fn max_abs_difference(&self, other: &EnergyDistribution) -> f64 {
        let mut keys: Vec<Outcome> = self.probabilities.keys().copied().collect();
        keys.extend(other.probabilities.keys());
        keys.sort_unstable();
        keys.dedup();
        keys.iter()
            .map(|&s| (self.probability(s) - other.probability(s)).abs())
            .fold(0.0, f64::max)
    }
}

/// A spring system: spring-constant oracle, sparse initial phase-space
/// state, final time. All masses are 1.
#[derive(Debug, Clone)]
pub struct SpringSystem {
    pub kappa: Oracle,
    pub q0: Vec<(usize, f64)>,
    pub p0: Vec<(usize, f64)>,
    pub t_final: f64,
}

impl SpringSystem {
    pub fn new(kappa: Oracle, q0: Vec<(usize, f64)>, p0: Vec<(usize, f64)>, t_final: f64) -> Self {
        Self {
            kappa,
            q0,
            p0,
            t_final,
        }
    }

    pub fn dimension(&self) -> usize {
        self.kappa.dim()
    }

    pub fn initial_dense(&self) -> PhaseState {
        let n = self.dimension();
        let mut q = DVector::zeros(n);
        let mut p = DVector::zeros(n);
        for &(v, x) in &self.q0 {
            q[v] += x;
        }
        for &(v, x) in &self.p0 {
            p[v] += x;
        }
        PhaseState::new(q, p, 0.0)
    }

    /// Output distribution at `t_final` (dense exact evolution).
    pub fn output_distribution(&self) -> Result<EnergyDistribution> {
        self.output_distribution_at(self.t_final)
    }

    pub fn output_distribution_at(&self, t: f64) -> Result<EnergyDistribution> {
        let a = kappa_to_a(&self.kappa).dense()?;
        let state = evolve_hamiltonian_exact(&a, &self.initial_dense(), t)?;
        energy_distribution(&self.kappa, &state)
    }
}

/// The matrix `A` of a spring oracle: `A_vw = -kappa_vw` off the diagonal,
/// `A_vv = sum_w kappa_vw`. One `A` row query costs one `kappa` row query.
pub fn kappa_to_a(kappa: &Oracle) -> Oracle {
    let n = kappa.dim();
    let k = kappa.clone();
    let row_fn = std::sync::Arc::new(move |v: usize| {
        let row = k.query_row(v).expect("in-range");
        let diag: f64 = row.iter().map(|&(_, x)| x).sum();
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len() + 1);
        let mut pushed_diag = false;
        for (w, x) in row {
            if w == v {
                // Self-loop contributes only to the diagonal sum.
                continue;
            }
            if w > v && !pushed_diag {
                if diag.abs() >= ZERO_DROP {
                    out.push((v, diag));
                }
                pushed_diag = true;
            }
            out.push((w, -x));
        }
        if !pushed_diag && diag.abs() >= ZERO_DROP {
            out.push((v, diag));
            out.sort_unstable_by_key(|&(w, _)| w);
        }
        out
    });
    Oracle::new_symmetric(n, kappa.row_degree() + 1, row_fn)
}

/// Inverse of [`kappa_to_a`]: recovers the spring oracle from `A`, enforcing
/// the physical-spring conditions (symmetric, non-positive off-diagonals,
/// non-negative row sums). Rows are validated exhaustively up to the dense
/// cap; the offending row is reported on violation.
pub fn a_to_kappa(a: &Oracle) -> Result<Oracle> {
    let n = a.dim();
    if n <= DENSE_CAP {
        for v in 0..n {
            let row = a.query_row(v)?;
            let mut row_sum = 0.0;
            for &(w, x) in &row {
                row_sum += x;
                if w != v && x > 0.0 {
                    return Err(Error::InvalidSpringMatrix {
                        row: v,
                        detail: format!("positive off-diagonal entry {x} at column {w}"),
                    });
                }
            }
            if row_sum < -STABILITY_TOL {
                return Err(Error::InvalidSpringMatrix {
                    row: v,
                    detail: format!("negative row sum {row_sum}"),
                });
            }
        }
    }
    let a_clone = a.clone();
    let row_fn = std::sync::Arc::new(move |v: usize| {
        let row = a_clone.query_row(v).expect("in-range");
        let row_sum: f64 = row.iter().map(|&(_, x)| x).sum();
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len() + 1);
        let mut pushed_diag = false;
        for (w, x) in row {
            if w == v {
                continue;
            }
            assert!(x <= 0.0, "positive off-diagonal {x} in A row {v}");
            if w > v && !pushed_diag {
                if row_sum.abs() >= ZERO_DROP {
                    out.push((v, row_sum));
                }
                pushed_diag = true;
            }
            out.push((w, -x));
        }
        if !pushed_diag && row_sum.abs() >= ZERO_DROP {
            out.push((v, row_sum));
            out.sort_unstable_by_key(|&(w, _)| w);
        }
        out
    });
    Ok(Oracle::new_symmetric(n, a.row_degree() + 1, row_fn))
}

/// Total energy in the spring form: `H = sum p^2 / 2 + sum_edges kappa
/// (q_v - q_w)^2 / 2 + sum walls kappa q_v^2 / 2`.
pub fn total_energy(kappa: &Oracle, state: &PhaseState) -> Result<f64> {
    let n = kappa.dim();
    assert_eq!(state.q.len(), n);
    let mut h: f64 = 0.5 * state.p.dot(&state.p);
    for v in 0..n {
        for (w, k) in kappa.query_row(v)? {
            if w == v {
                h += 0.5 * k * state.q[v] * state.q[v];
            } else if w > v {
                let d = state.q[v] - state.q[w];
                h += 0.5 * k * d * d;
            }
        }
    }
    Ok(h)
}

/// Energy-fraction distribution of a phase-space state: `P(v) = p_v^2 / 2H`,
/// `P((v,w)) = kappa (q_v - q_w)^2 / 2H`, `P((v,v)) = kappa q_v^2 / 2H`.
pub fn energy_distribution(kappa: &Oracle, state: &PhaseState) -> Result<EnergyDistribution> {
    let h = total_energy(kappa, state)?;
    if h <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let n = kappa.dim();
    let mut probabilities = BTreeMap::new();
    for v in 0..n {
        let kinetic = 0.5 * state.p[v] * state.p[v] / h;
        if kinetic > 0.0 {
            probabilities.insert(Outcome::Mass(v), kinetic);
        }
        for (w, k) in kappa.query_row(v)? {
            if w < v {
                continue;
            }
            let stored = if w == v {
                0.5 * k * state.q[v] * state.q[v]
            } else {
                let d = state.q[v] - state.q[w];
                0.5 * k * d * d
            };
            let p = stored / h;
            if p >= 1e-12 {
                probabilities.insert(Outcome::Spring(v, w), p);
            }
        }
    }
    Ok(EnergyDistribution {
        probabilities,
        total_energy: h,
    })
}

/// All outcomes of a spring system: one per mass plus one per spring
/// (canonical endpoints), by exhaustive row scan.
pub fn all_outcomes(kappa: &Oracle) -> Result<Vec<Outcome>> {
    let n = kappa.dim();
    let mut out = Vec::new();
    for v in 0..n {
        out.push(Outcome::Mass(v));
    }
    for v in 0..n {
        for (w, _) in kappa.query_row(v)? {
            if w >= v {
                out.push(Outcome::Spring(v, w));
            }
        }
    }
    Ok(out)
}

/// Stability classification of a sign-split system, following the three-way
/// split on wall-spring signs and positive semi-definiteness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityCase {
    /// All wall springs non-negative and the split matrix is PSD.
    Case1,
    /// Some wall spring negative, split matrix still PSD.
    Case2,
    /// Split matrix not PSD.
    Case3,
}

impl fmt::Display for StabilityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilityCase::Case1 => write!(f, "1"),
            StabilityCase::Case2 => write!(f, "2"),
            StabilityCase::Case3 => write!(f, "3"),
        }
    }
}

/// Classifies a split system. `split` is the doubled matrix produced by the
/// sign-split embedding; its wall springs are its row sums.
pub fn classify_stability(split: &DMatrix<f64>) -> StabilityCase {
    let (eigenvalues, _) = crate::dynamics::robust_symmetric_eigen(split);
    let min_eig = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -STABILITY_TOL {
        return StabilityCase::Case3;
    }
    let has_negative_wall = (0..split.nrows())
        .any(|v| split.row(v).iter().sum::<f64>() < -STABILITY_TOL);
    if has_negative_wall {
        StabilityCase::Case2
    } else {
        StabilityCase::Case1
    }
}

/// Wall springs (row sums) of a split matrix.
pub fn wall_springs(split: &DMatrix<f64>) -> Vec<f64> {
    (0..split.nrows())
        .map(|v| split.row(v).iter().sum::<f64>())
        .collect()
}
