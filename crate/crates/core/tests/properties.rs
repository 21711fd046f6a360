//! Property tests: structural invariants that must hold on arbitrary
//! instances, driven by seeded generators.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oscwalk::cli::generate_graph;
use oscwalk::harmonic_oscillator::{a_to_kappa, all_outcomes, kappa_to_a, SpringSystem};
use oscwalk::oracle::Oracle;
use oscwalk::quantum_walk::QuantumWalkProblem;
use oscwalk::sign_split::{embed_operator, embed_vector, project_back, split_pos_neg};
use oscwalk::{ho_to_qw, qw_to_ho};

fn random_graph(n: usize, seed: u64) -> Oracle {
    generate_graph("random-sparse", n, seed)
        .unwrap()
        .to_oracle()
        .unwrap()
}

fn random_signed(n: usize, seed: u64) -> Oracle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 0..n {
        for w in v..n {
            if rng.gen::<f64>() < 0.4 {
                edges.push((v, w, rng.gen::<f64>() * 2.0 - 1.0));
            }
        }
    }
    Oracle::from_edges(n, &edges)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oracle_algebra_matches_dense(n in 2usize..10, seed in 0u64..1000) {
        let a = random_signed(n, seed);
        let b = random_signed(n, seed.wrapping_add(1));
        let (ad, bd) = (a.dense().unwrap(), b.dense().unwrap());
        prop_assert!((a.sum(&b).unwrap().dense().unwrap() - (&ad + &bd)).amax() < 1e-12);
        prop_assert!((a.product(&b).unwrap().dense().unwrap() - (&ad * &bd)).amax() < 1e-12);
        prop_assert!((a.transpose().dense().unwrap() - ad.transpose()).amax() < 1e-12);
        prop_assert!((a.scale(-2.5).dense().unwrap() - &ad * -2.5).amax() < 1e-12);
    }

    #[test]
    fn sign_split_embeds_nonnegatively_and_acts_like_m(n in 2usize..10, seed in 0u64..1000) {
        let m = random_signed(n, seed);
        let (pos, neg) = split_pos_neg(&m);
        let doubled = embed_operator(&pos, &neg).unwrap();
        let d = doubled.dense().unwrap();
        prop_assert!(d.iter().all(|&x| x >= 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let z = embed_vector(&x);
        let zv = nalgebra::DVector::from_vec(z);
        let out = &d * zv;
        let back = project_back(out.as_slice(), 1e-9).unwrap();
        let direct = m.dense().unwrap() * nalgebra::DVector::from_vec(x);
        for v in 0..n {
            prop_assert!((back[v] - direct[v]).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_shift_leaves_walk_distribution_invariant(
        n in 2usize..9, seed in 0u64..1000, gamma in 0.1f64..10.0, t in 0.0f64..3.0
    ) {
        let adjacency = random_graph(n, seed);
        let shifted = qw_to_ho::shift_adjacency(&adjacency, gamma).unwrap();
        let p1 = QuantumWalkProblem::single_vertex(adjacency, 0, t)
            .output_distribution().unwrap();
        let p2 = QuantumWalkProblem::single_vertex(shifted, 0, t)
            .output_distribution().unwrap();
        prop_assert!(p1.max_abs_difference(&p2) < 1e-10);
    }

    #[test]
    fn spring_matrix_structure_and_roundtrip(n in 2usize..10, seed in 0u64..1000) {
        let mut kappa_file = generate_graph("random-sparse", n, seed).unwrap();
        if seed % 2 == 0 {
            kappa_file.edges.push((0, 0, 0.75));
            kappa_file.edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        }
        let kappa = kappa_file.to_oracle().unwrap();
        let a = kappa_to_a(&kappa);
        let ad = a.dense().unwrap();
        for v in 0..n {
            let mut row_sum = 0.0;
            for w in 0..n {
                if v != w {
                    prop_assert!(ad[(v, w)] <= 0.0);
                }
                row_sum += ad[(v, w)];
            }
            prop_assert!(row_sum >= -1e-12);
        }
        let back = a_to_kappa(&a).unwrap();
        prop_assert!((back.dense().unwrap() - kappa.dense().unwrap()).amax() < 1e-12);
    }

    #[test]
    fn walk_distribution_is_normalized(n in 2usize..9, seed in 0u64..1000, t in 0.0f64..5.0) {
        let adjacency = random_graph(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x77);
        let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let initial: Vec<(usize, Complex64)> = raw
            .iter()
            .enumerate()
            .map(|(v, x)| (v, Complex64::new(x / norm, 0.0)))
            .collect();
        let dist = QuantumWalkProblem::new(adjacency, initial, t)
            .output_distribution().unwrap();
        prop_assert!((dist.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn energy_distribution_is_normalized(n in 2usize..9, seed in 0u64..1000, t in 0.0f64..5.0) {
        let kappa = random_graph(n, seed);
        let system = SpringSystem::new(kappa, vec![(0, 0.3)], vec![(n - 1, 1.0)], t);
        let dist = system.output_distribution().unwrap();
        prop_assert!((dist.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn incidence_factor_reproduces_a(n in 2usize..10, seed in 0u64..1000) {
        let kappa = random_graph(n, seed);
        let b = ho_to_qw::build_b(&kappa).unwrap();
        let report = ho_to_qw::verify_btb_equals_a(&b, &kappa_to_a(&kappa)).unwrap();
        prop_assert!(report.pass, "max error {:e}", report.max_error);
    }

    #[test]
    fn walk_operator_from_b_is_nonnegative(n in 2usize..9, seed in 0u64..1000) {
        let kappa = random_graph(n, seed);
        let b = ho_to_qw::build_b(&kappa).unwrap();
        let t = ho_to_qw::build_walk_t(&b).unwrap();
        prop_assert!(t.dense().unwrap().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn transition_columns_are_stochastic(n in 2usize..7, seed in 0u64..500) {
        let adjacency = random_graph(n, seed);
        let gamma = qw_to_ho::default_gamma(&adjacency);
        let shifted = qw_to_ho::shift_adjacency(&adjacency, gamma).unwrap();
        let (_, kappa_bar) = qw_to_ho::build_doubled_a(&shifted).unwrap();
        let c = qw_to_ho::build_transition_c(&shifted, n);
        for s in all_outcomes(&kappa_bar).unwrap() {
            prop_assert!((c.column_sum(&s) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fold_columns_are_point_masses(n in 2usize..8, seed in 0u64..500) {
        let kappa = random_graph(n, seed);
        let idx = ho_to_qw::EdgeIndex::new(&kappa);
        let fold = ho_to_qw::fold_map(&idx);
        let dim = 2 * idx.edge_count() + 2 * idx.vertex_count();
        for r in 0..dim {
            let col = fold.col(&r);
            let sum: f64 = col.iter().map(|&(_, x)| x).sum();
            prop_assert!(col.len() <= 1);
            prop_assert!(col.is_empty() || (sum - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_evolution_is_reversible(n in 2usize..9, seed in 0u64..1000, t in 0.0f64..4.0) {
        let adjacency = random_graph(n, seed).dense().unwrap();
        let problem = QuantumWalkProblem::single_vertex(random_graph(n, seed), 0, t);
        let forward = oscwalk::dynamics::evolve_schrodinger_exact(
            &adjacency, &problem.initial_dense(), t).unwrap();
        let back = oscwalk::dynamics::evolve_schrodinger_exact(&adjacency, &forward, -t).unwrap();
        let start = problem.initial_dense();
        for v in 0..n {
            prop_assert!((back.amplitudes[v] - start.amplitudes[v]).norm() < 1e-10);
        }
    }

    #[test]
    fn robust_eigen_reconstructs(n in 2usize..12, seed in 0u64..1000) {
        let m = random_signed(n, seed).dense().unwrap();
        let (values, vectors) = oscwalk::dynamics::robust_symmetric_eigen(&m);
        let recon = &vectors * DMatrix::from_diagonal(&values) * vectors.transpose();
        prop_assert!((recon - &m).amax() < 1e-12);
    }
}
