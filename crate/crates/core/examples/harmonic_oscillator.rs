//! Coupled unit masses on springs: energy distribution over masses and
//! springs, energy conservation, and stability classification.

use oscwalk::dynamics::{evolve_hamiltonian_exact, total_energy_dense};
use oscwalk::harmonic_oscillator::{classify_stability, kappa_to_a, SpringSystem};
use oscwalk::oracle::Oracle;
use oscwalk::qw_to_ho;

fn main() {
    // three masses in a line, ends anchored to walls by self-loop springs
    let kappa = Oracle::from_edges(
        3,
        &[(0, 0, 1.0), (0, 1, 2.0), (1, 2, 2.0), (2, 2, 1.0)],
    );
    let system = SpringSystem::new(kappa, vec![(0, 1.0)], vec![(2, -0.5)], 4.0);

    let dist = system.output_distribution().unwrap();
    println!("energy fractions at t = {}:", system.t_final);
    for (s, p) in dist.iter() {
        println!("  {s}: {p:.6}");
    }
    println!("total = {:.12}, H = {:.6}", dist.total(), dist.total_energy);

    let a = kappa_to_a(&system.kappa).dense().unwrap();
    let h0 = total_energy_dense(&a, &system.initial_dense());
    let state = evolve_hamiltonian_exact(&a, &system.initial_dense(), 50.0).unwrap();
    println!(
        "relative energy drift at t = 50: {:e}",
        ((total_energy_dense(&a, &state) - h0) / h0).abs()
    );

    // star graphs square to an indefinite matrix: the bounded-energy check
    // fails without a diagonal shift
    let star = Oracle::from_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]);
    let split = qw_to_ho::build_doubled_a_unchecked(&star).dense().unwrap();
    println!("star case: {}", classify_stability(&split));
    let shifted = qw_to_ho::shift_adjacency(&star, 6.0).unwrap();
    let split = qw_to_ho::build_doubled_a_unchecked(&shifted).dense().unwrap();
    println!("shifted star case: {}", classify_stability(&split));
}
