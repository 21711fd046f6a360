//! The Quantum Walk Problem: a non-negative symmetric adjacency oracle, a
//! normalized initial amplitude vector, a final time, and the output
//! distribution `P(v) = |c_v|^2` over vertices.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::dynamics::{evolve_schrodinger_exact, ComplexState};
use crate::error::{Error, Result};
use crate::oracle::Oracle;

/// Probabilities below this are omitted from sparse reports.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

const NORMALIZATION_TOL: f64 = 1e-10;
const COLLINEARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct QuantumWalkProblem {
    pub adjacency: Oracle,
    /// Sparse initial amplitudes `(vertex, amplitude)`.
    pub initial: Vec<(usize, Complex64)>,
    pub t_final: f64,
}

/// Probability distribution over vertex labels.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexDistribution {
    probabilities: BTreeMap<usize, f64>,
}

impl VertexDistribution {
    /// Builds from raw `|c_v|^2` values, clipping tiny negatives and
    /// dropping entries below the support threshold.
    pub fn from_values(values: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let probabilities = values
            .into_iter()
            .map(|(v, p)| {
                debug_assert!(p >= -1e-12, "probability {p} too negative at vertex {v}");
                (v, p.max(0.0))
            })
            .filter(|&(_, p)| p >= SUPPORT_THRESHOLD)
            .collect();
        Self { probabilities }
    }

    pub fn probability(&self, v: usize) -> f64 {
        self.probabilities.get(&v).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probabilities.iter().map(|(&v, &p)| (v, p))
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }

    pub fn max_abs_difference(&self, other: &VertexDistribution) -> f64 {
        let mut keys: Vec<usize> = self.probabilities.keys().copied().collect();
        keys.extend(other.probabilities.keys());
        keys.sort_unstable();
        keys.dedup();
        keys.iter()
            .map(|&v| (self.probability(v) - other.probability(v)).abs())
            .fold(0.0, f64::max)
    }
}

impl QuantumWalkProblem {
    pub fn new(adjacency: Oracle, initial: Vec<(usize, Complex64)>, t_final: f64) -> Self {
        Self {
            adjacency,
            initial,
            t_final,
        }
    }

    /// Initial state with a real amplitude at a single vertex.
    pub fn single_vertex(adjacency: Oracle, v: usize, t_final: f64) -> Self {
        Self::new(adjacency, vec![(v, Complex64::new(1.0, 0.0))], t_final)
    }

    pub fn dimension(&self) -> usize {
        self.adjacency.dim()
    }

    pub fn initial_dense(&self) -> ComplexState {
        let mut c = DVector::from_element(self.dimension(), Complex64::new(0.0, 0.0));
        for &(v, amp) in &self.initial {
            c[v] += amp;
        }
        ComplexState::new(c, 0.0)
    }

    /// Output distribution at `t_final` (dense exact evolution).
    pub fn output_distribution(&self) -> Result<VertexDistribution> {
        self.output_distribution_at(self.t_final)
    }

    /// Output distribution at an arbitrary probe time.
    pub fn output_distribution_at(&self, t: f64) -> Result<VertexDistribution> {
        let t_dense = self.adjacency.dense()?;
        let c = evolve_schrodinger_exact(&t_dense, &self.initial_dense(), t)?;
        Ok(VertexDistribution::from_values(
            c.amplitudes.iter().enumerate().map(|(v, a)| (v, a.norm_sqr())),
        ))
    }
}

/// Rotates collinear amplitudes by a global phase so they become purely real
/// (positive multiple of the common direction). Fails if the amplitudes do
/// not share one complex direction: such states have no real representative
/// and are incompatible with the oscillator reduction.
pub fn global_phase_rotate(initial: &[(usize, Complex64)]) -> Result<Vec<(usize, f64)>> {
    let pivot = initial
        .iter()
        .map(|&(_, a)| a)
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    if pivot.norm() == 0.0 {
        return Ok(initial.iter().map(|&(v, _)| (v, 0.0)).collect());
    }
    let phase = pivot / pivot.norm();
    let mut out = Vec::with_capacity(initial.len());
    for &(v, a) in initial {
        let rotated = a * phase.conj();
        if rotated.im.abs() > COLLINEARITY_TOL {
            return Err(Error::NonCollinearPhase);
        }
        out.push((v, rotated.re));
    }
    Ok(out)
}

/// Well-formedness report for a quantum walk problem.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks non-negativity of the adjacency weights, the degree bound, and the
/// initial normalization. Exhaustive for `N <= 64`, sampled (1000 rows)
/// otherwise.
pub fn validate_qw_problem(problem: &QuantumWalkProblem) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = problem.dimension();
    let rows: Vec<usize> = if n <= 64 {
        (0..n).collect()
    } else {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        (0..1000).map(|_| rng.gen_range(0..n)).collect()
    };
    for v in rows {
        match problem.adjacency.query_row(v) {
            Ok(row) => {
                for (w, x) in row {
                    if x < 0.0 {
                        report
                            .violations
                            .push(format!("negative weight {x} at ({v}, {w})"));
                    }
                }
            }
            Err(e) => report.violations.push(format!("row {v}: {e}")),
        }
    }
    let norm: f64 = problem.initial.iter().map(|(_, a)| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        report
            .violations
            .push(format!("initial state norm^2 = {norm}, expected 1"));
    }
    for &(v, _) in &problem.initial {
        if v >= n {
            report.violations.push(format!("initial vertex {v} out of range"));
        }
    }
    report
}
