//! Continuous-time quantum walk on a small graph: evolve, read out the
//! vertex distribution, and watch norm conservation.

use oscwalk::dynamics::evolve_schrodinger_exact;
use oscwalk::oracle::Oracle;
use oscwalk::quantum_walk::QuantumWalkProblem;

fn main() {
    // walker starts on one end of a 5-path
    let t = Oracle::from_edges(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]);
    let problem = QuantumWalkProblem::single_vertex(t, 0, 2.5);

    let dist = problem.output_distribution().unwrap();
    println!("P_QW at t = {}:", problem.t_final);
    for (v, p) in dist.iter() {
        println!("  vertex {v}: {p:.6}");
    }
    println!("total = {:.12}", dist.total());

    let t_dense = problem.adjacency.dense().unwrap();
    for &t in &[1.0, 5.0, 10.0] {
        let state = evolve_schrodinger_exact(&t_dense, &problem.initial_dense(), t).unwrap();
        println!("t = {t:>4}: norm^2 drift = {:e}", (state.norm_squared() - 1.0).abs());
    }
}
