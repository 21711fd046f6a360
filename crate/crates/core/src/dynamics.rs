//! Time evolution engines.
//!
//! Exact spectral evolvers for desk-scale dense instances, plus a fixed-step
//! RK4 integrator driven purely by oracle queries for anything larger. All
//! evolvers are pure; norms and energies are conserved up to the documented
//! tolerances.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracle::Oracle;

/// Eigenvalues in `[-STABILITY_TOL, 0]` are treated as exactly zero (free
/// modes); anything below is a genuine instability and a hard error.
pub const STABILITY_TOL: f64 = 1e-10;

const MAX_ASYMMETRY: f64 = 1e-10;
const RK4_STEP_BUDGET: usize = 50_000_000;

/// Amplitude vector of a quantum walk at a given time.
#[derive(Debug, Clone)]
pub struct ComplexState {
    pub amplitudes: DVector<Complex64>,
    pub time: f64,
}

impl ComplexState {
    pub fn new(amplitudes: DVector<Complex64>, time: f64) -> Self {
        Self { amplitudes, time }
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Displacements and momenta of an oscillator network (unit masses).
#[derive(Debug, Clone)]
pub struct PhaseState {
    pub q: DVector<f64>,
    pub p: DVector<f64>,
    pub time: f64,
}

impl PhaseState {
    pub fn new(q: DVector<f64>, p: DVector<f64>, time: f64) -> Self {
        assert_eq!(q.len(), p.len());
        Self { q, p, time }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(DVector::zeros(n), DVector::zeros(n), 0.0)
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let mut max_asym: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            max_asym = max_asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if max_asym > MAX_ASYMMETRY {
        return Err(Error::NotSymmetric {
            max_asymmetry: max_asym,
        });
    }
    Ok(())
}

/// Symmetric eigendecomposition built for reliability over speed: zero
/// rows are deflated first (they decouple exactly with eigenvalue 0), then
/// cyclic Jacobi rotations handle the rest. Degenerate spectra, which the
/// doubled operators produce in bulk, stay accurate to machine precision.
pub fn robust_symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let support: Vec<usize> = (0..n)
        .filter(|&i| m.row(i).iter().any(|&x| x != 0.0))
        .collect();
    if support.len() == n {
        return jacobi_eigen(m);
    }
    let k = support.len();
    let mut small = DMatrix::zeros(k, k);
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            small[(a, b)] = m[(i, j)];
        }
    }
    let (small_values, small_vectors) = jacobi_eigen(&small);
    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for col in 0..k {
        values[col] = small_values[col];
        for (row, &i) in support.iter().enumerate() {
            vectors[(i, col)] = small_vectors[(row, col)];
        }
    }
    let mut col = k;
    let in_support: Vec<bool> = {
        let mut flags = vec![false; n];
        for &i in &support {
            flags[i] = true;
        }
        flags
    };
    for (i, &flag) in in_support.iter().enumerate() {
        if !flag {
            vectors[(i, col)] = 1.0;
            col += 1;
        }
    }
    (values, vectors)
}

fn jacobi_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::identity(n, n);
    let scale = m.amax().max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].abs());
            }
        }
        if off < 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-18 * scale {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    (DVector::from_iterator(n, (0..n).map(|i| a[(i, i)])), v)
}

/// Solves `c_dot = -i T c` exactly via the spectral decomposition of the
/// symmetric matrix `T`.
pub fn evolve_schrodinger_exact(
    t_matrix: &DMatrix<f64>,
    c0: &ComplexState,
    t: f64,
) -> Result<ComplexState> {
    check_symmetric(t_matrix)?;
    let (eigenvalues, eigenvectors) = robust_symmetric_eigen(t_matrix);
    let n = t_matrix.nrows();
    // y = U^T c0, componentwise phase, back out.
    let mut y = DVector::from_element(n, Complex64::new(0.0, 0.0));
    for k in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for v in 0..n {
            acc += eigenvectors[(v, k)] * c0.amplitudes[v];
        }
        y[k] = acc * Complex64::new(0.0, -eigenvalues[k] * t).exp();
    }
    let mut out = DVector::from_element(n, Complex64::new(0.0, 0.0));
    for v in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            acc += eigenvectors[(v, k)] * y[k];
        }
        out[v] = acc;
    }
    Ok(ComplexState::new(out, c0.time + t))
}

/// Solves the Hamilton equations for `H = p^T p / 2 + q^T A q / 2` exactly in
/// the normal-mode coordinates of the symmetric PSD matrix `A`. Zero modes
/// drift freely; a negative eigenvalue below the stability tolerance is an
/// error.
pub fn evolve_hamiltonian_exact(
    a_matrix: &DMatrix<f64>,
    s0: &PhaseState,
    t: f64,
) -> Result<PhaseState> {
    check_symmetric(a_matrix)?;
    let (eigenvalues, eigenvectors) = robust_symmetric_eigen(a_matrix);
    let u = &eigenvectors;
    let q_modes = u.transpose() * &s0.q;
    let p_modes = u.transpose() * &s0.p;
    let n = a_matrix.nrows();
    let mut q_out = DVector::zeros(n);
    let mut p_out = DVector::zeros(n);
    for k in 0..n {
        let lambda = eigenvalues[k];
        if lambda < -STABILITY_TOL {
            return Err(Error::UnstableSystem { value: lambda });
        }
        if lambda <= STABILITY_TOL {
            // Free mode: q drifts with constant momentum.
            q_out[k] = q_modes[k] + p_modes[k] * t;
            p_out[k] = p_modes[k];
        } else {
            let omega = lambda.sqrt();
            let (s, c) = (omega * t).sin_cos();
            q_out[k] = q_modes[k] * c + p_modes[k] / omega * s;
            p_out[k] = -q_modes[k] * omega * s + p_modes[k] * c;
        }
    }
    Ok(PhaseState::new(u * q_out, u * p_out, s0.time + t))
}

/// Total energy `H = p^T p / 2 + q^T A q / 2`.
pub fn total_energy_dense(a_matrix: &DMatrix<f64>, s: &PhaseState) -> f64 {
    0.5 * s.p.dot(&s.p) + 0.5 * s.q.dot(&(a_matrix * &s.q))
}

/// Fixed-step RK4 for `x_dot = L x`, where the action of `L` is given as a
/// black-box closure (typically built from oracle queries). The initial step
/// satisfies `h * norm_bound <= 0.1` and is halved until two successive runs
/// agree within `tol` in the max norm.
pub fn evolve_oracle_rk4<F>(
    l_action: F,
    x0: &[f64],
    t: f64,
    tol: f64,
    norm_bound: f64,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    assert!(t >= 0.0 && tol > 0.0);
    if t == 0.0 {
        return Ok(x0.to_vec());
    }
    let mut steps = ((t * norm_bound / 0.1).ceil() as usize).max(1);
    let mut coarse = rk4_run(&l_action, x0, t, steps);
    let mut total = steps;
    loop {
        steps *= 2;
        total += steps;
        if total > RK4_STEP_BUDGET {
            return Err(Error::StepBudgetExceeded {
                budget: RK4_STEP_BUDGET,
            });
        }
        let fine = rk4_run(&l_action, x0, t, steps);
        let diff = coarse
            .iter()
            .zip(fine.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if diff < tol {
            return Ok(fine);
        }
        coarse = fine;
    }
}

fn rk4_run<F>(l_action: &F, x0: &[f64], t: f64, steps: usize) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let h = t / steps as f64;
    let mut x = x0.to_vec();
    let mut scratch = vec![0.0; x.len()];
    for _ in 0..steps {
        let k1 = l_action(&x);
        axpy(&mut scratch, &x, &k1, h / 2.0);
        let k2 = l_action(&scratch);
        axpy(&mut scratch, &x, &k2, h / 2.0);
        let k3 = l_action(&scratch);
        axpy(&mut scratch, &x, &k3, h);
        let k4 = l_action(&scratch);
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

fn axpy(out: &mut [f64], x: &[f64], k: &[f64], h: f64) {
    for i in 0..out.len() {
        out[i] = x[i] + h * k[i];
    }
}

/// Block generator `((0, T), (-T, 0))` of the real form of the Schrodinger
/// equation: evolving `(a, b)` with it reproduces the real and imaginary
/// parts of the complex evolution with `c = a + i b`.
pub fn real_form_generator(t_oracle: &Oracle) -> Oracle {
    let neg = t_oracle.scale(-1.0);
    Oracle::block2(None, Some(t_oracle), Some(&neg), None).expect("matching block dims")
}

/// Matrix-vector action driven by row queries, for use with the RK4 evolver.
pub fn oracle_action(l: &Oracle) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
    move |x: &[f64]| {
        let mut y = vec![0.0; l.rows()];
        for (v, out) in y.iter_mut().enumerate() {
            for (w, weight) in l.query_row(v).expect("in-range") {
                *out += weight * x[w];
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn basis_state(n: usize, v: usize) -> ComplexState {
        let mut c = DVector::from_element(n, Complex64::new(0.0, 0.0));
        c[v] = Complex64::new(1.0, 0.0);
        ComplexState::new(c, 0.0)
    }

    #[test]
    fn robust_eigen_handles_degenerate_padded_operators() {
        // A star walk operator: mostly zero rows, hundreds of repeated
        // eigenvalues. The stock QR-based solver loses precision (or
        // diverges to NaN) on exactly this shape.
        let kappa = crate::oracle::Oracle::from_edges(
            17,
            &(1..17).map(|v| (0, v, 1.0)).collect::<Vec<_>>(),
        );
        let b = crate::ho_to_qw::build_b(&kappa).unwrap();
        let t = crate::ho_to_qw::build_walk_t(&b).unwrap().dense().unwrap();
        let (values, vectors) = robust_symmetric_eigen(&t);
        assert!(values.iter().all(|x| x.is_finite()));
        let n = t.nrows();
        let recon = &vectors * DMatrix::from_diagonal(&values) * vectors.transpose();
        assert!((recon - &t).amax() < 1e-12);
        let ortho = vectors.transpose() * &vectors - DMatrix::identity(n, n);
        assert!(ortho.amax() < 1e-12);
    }

    #[test]
    fn zero_generator_is_constant() {
        let t = DMatrix::zeros(3, 3);
        let c0 = basis_state(3, 1);
        let c = evolve_schrodinger_exact(&t, &c0, 2.5).unwrap();
        for v in 0..3 {
            assert_abs_diff_eq!((c.amplitudes[v] - c0.amplitudes[v]).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_generator_is_global_phase() {
        let t = DMatrix::identity(3, 3);
        let c0 = basis_state(3, 0);
        let c = evolve_schrodinger_exact(&t, &c0, 1.3).unwrap();
        let phase = Complex64::new(0.0, -1.3).exp();
        assert_abs_diff_eq!((c.amplitudes[0] - phase).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.norm_squared(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_vertex_hop_quarter_period() {
        // Closed form: exp(-i t X) = cos t - i sin t X. At t = pi/2 the
        // walker has fully transferred with amplitude -i.
        let t = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let c = evolve_schrodinger_exact(&t, &basis_state(2, 0), PI / 2.0).unwrap();
        assert_abs_diff_eq!(c.amplitudes[0].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((c.amplitudes[1] - Complex64::new(0.0, -1.0)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn non_symmetric_rejected() {
        let t = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(evolve_schrodinger_exact(&t, &basis_state(2, 0), 1.0).is_err());
    }

    #[test]
    fn unit_oscillator_half_period() {
        let a = DMatrix::identity(1, 1);
        let s0 = PhaseState::new(DVector::from_vec(vec![1.0]), DVector::zeros(1), 0.0);
        let s = evolve_hamiltonian_exact(&a, &s0, PI).unwrap();
        assert_abs_diff_eq!(s.q[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.p[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn free_mode_drifts() {
        let a = DMatrix::zeros(1, 1);
        let s0 = PhaseState::new(DVector::from_vec(vec![0.5]), DVector::from_vec(vec![1.0]), 0.0);
        let s = evolve_hamiltonian_exact(&a, &s0, 2.0).unwrap();
        assert_abs_diff_eq!(s.q[0], 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.p[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unstable_system_rejected() {
        let a = DMatrix::from_row_slice(1, 1, &[-1.0]);
        let s0 = PhaseState::new(DVector::from_vec(vec![1.0]), DVector::zeros(1), 0.0);
        assert!(matches!(
            evolve_hamiltonian_exact(&a, &s0, 1.0),
            Err(Error::UnstableSystem { .. })
        ));
    }

    #[test]
    fn energy_conserved_exactly() {
        let a = fixtures::a1_tilde_dense();
        let s0 = PhaseState::new(
            DVector::from_vec(vec![0.3, -0.2, 0.5]),
            DVector::from_vec(vec![0.1, 0.7, -0.4]),
            0.0,
        );
        let h0 = total_energy_dense(&a, &s0);
        for &t in &[0.5, 1.0, 3.0, 10.0] {
            let s = evolve_hamiltonian_exact(&a, &s0, t).unwrap();
            let h = total_energy_dense(&a, &s);
            assert!((h - h0).abs() / h0 < 1e-10, "energy drift at t={t}");
        }
    }

    #[test]
    fn second_order_consistency() {
        // Finite difference of q(t) against -A q(t).
        let a = fixtures::a1_tilde_dense();
        let s0 = PhaseState::new(
            DVector::from_vec(vec![0.4, 0.1, -0.3]),
            DVector::from_vec(vec![0.0, 0.2, 0.0]),
            0.0,
        );
        let h = 1e-3;
        let t = 0.7;
        let sm = evolve_hamiltonian_exact(&a, &s0, t - h).unwrap();
        let s = evolve_hamiltonian_exact(&a, &s0, t).unwrap();
        let sp = evolve_hamiltonian_exact(&a, &s0, t + h).unwrap();
        let accel = (&sp.q - 2.0 * &s.q + &sm.q) / (h * h);
        let expect = -(&a * &s.q);
        for i in 0..3 {
            let denom = expect[i].abs().max(1e-6);
            assert!((accel[i] - expect[i]).abs() / denom < 1e-4);
        }
    }

    #[test]
    fn rk4_zero_generator() {
        let x = evolve_oracle_rk4(|x| vec![0.0; x.len()], &[1.0, 2.0], 5.0, 1e-10, 1.0).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
    }

    #[test]
    fn rk4_matches_exact_schrodinger() {
        let t1 = fixtures::t1_path();
        let gen = real_form_generator(&t1);
        let x0 = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let x = evolve_oracle_rk4(oracle_action(&gen), &x0, 1.0, 1e-10, 2.0).unwrap();
        let c = evolve_schrodinger_exact(&fixtures::t1_dense(), &basis_state(3, 1), 1.0).unwrap();
        for v in 0..3 {
            assert!((x[v] - c.amplitudes[v].re).abs() < 1e-8);
            assert!((x[v + 3] - c.amplitudes[v].im).abs() < 1e-8);
        }
    }

    #[test]
    fn rk4_hamiltonian_energy_drift_small() {
        let a = fixtures::a1_tilde_dense();
        let a_oracle = Oracle::from_dense(&a);
        let action = |x: &[f64]| {
            // (q, p) -> (p, -A q)
            let n = 3;
            let mut y = vec![0.0; 2 * n];
            y[..n].copy_from_slice(&x[n..]);
            for v in 0..n {
                for (w, weight) in a_oracle.query_row(v).unwrap() {
                    y[n + v] -= weight * x[w];
                }
            }
            y
        };
        let x0 = [0.3, -0.2, 0.5, 0.1, 0.7, -0.4];
        let s0 = PhaseState::new(
            DVector::from_vec(x0[..3].to_vec()),
            DVector::from_vec(x0[3..].to_vec()),
            0.0,
        );
        let h0 = total_energy_dense(&a, &s0);
        let x = evolve_oracle_rk4(action, &x0, 1.0, 1e-10, 6.0).unwrap();
        let s = PhaseState::new(
            DVector::from_vec(x[..3].to_vec()),
            DVector::from_vec(x[3..].to_vec()),
            1.0,
        );
        let h = total_energy_dense(&a, &s);
        assert!((h - h0).abs() / h0 < 1e-8);
    }

    #[test]
    fn real_form_tracks_complex_evolution() {
        let t1 = fixtures::t1_path();
        let gen = real_form_generator(&t1).dense().unwrap();
        let t_dense = fixtures::t1_dense();
        for &t in &[0.5, 1.0, 2.0] {
            let c = evolve_schrodinger_exact(&t_dense, &basis_state(3, 1), t).unwrap();
            // Antisymmetric generator: evolve the real form with the exact
            // Hamiltonian-free path by reusing the complex evolver on the
            // equivalent complex system is circular, so integrate by RK4.
            let x0 = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
            let gen_oracle = Oracle::from_dense(&gen);
            let x = evolve_oracle_rk4(oracle_action(&gen_oracle), &x0, t, 1e-11, 2.0).unwrap();
            for v in 0..3 {
                assert!((x[v] - c.amplitudes[v].re).abs() < 1e-9);
                assert!((x[v + 3] - c.amplitudes[v].im).abs() < 1e-9);
            }
            let norm: f64 = x.iter().map(|a| a * a).sum();
            assert!((norm - 1.0).abs() < 1e-10);
        }
    }
}
