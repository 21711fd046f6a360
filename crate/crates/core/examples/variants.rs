//! Converting between the three output formats of a distribution-valued
//! problem: sampling, subset-probability estimation, and threshold decision.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use oscwalk::fixtures;
use oscwalk::harmonic_oscillator::Outcome;
use oscwalk::qw_to_ho::build_transition_c;
use oscwalk::variants::{
    estimate_from_decider, estimate_from_samples, hoeffding_samples, map_sample_via_c,
    sample_from_estimator, Decider, Estimator, Sampler,
};

fn main() {
    let dist = vec![(0usize, 0.8), (1usize, 0.2)];
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // sampling -> estimation via Hoeffding counts
    let sampler = Sampler::from_distribution(dist.clone());
    let (eps, delta) = (0.02, 1e-6);
    let est = estimate_from_samples(&sampler, |&v| v == 0, eps, delta, &mut rng);
    println!(
        "P(0) ~ {est:.4} from {} samples (eps = {eps}, delta = {delta:e})",
        hoeffding_samples(eps, delta)
    );

    // estimation -> sampling, bit by bit
    let estimator = Estimator::exact(dist.clone());
    let mut counts = [0u32; 2];
    for _ in 0..1000 {
        counts[sample_from_estimator(&estimator, 1, 1e-9, &mut rng).unwrap()] += 1;
    }
    println!("1000 draws through the estimator: {counts:?}");

    // decision -> estimation by threshold bisection
    let decider = Decider::exact(dist);
    let via = estimate_from_decider(&decider, |&v| v == 0, 1.0 / 64.0).unwrap();
    println!("P(0) ~ {via:.4} from {} decider calls", decider.reset_and_read_calls());

    // a transition matrix with negative entries cannot carry samples,
    // only estimates
    let c = build_transition_c(&fixtures::two_vertex_shifted(), 2);
    let wall = Sampler::from_distribution(vec![(Outcome::Spring(1, 1), 1.0)]);
    match map_sample_via_c(&wall, &c, &mut rng) {
        Err(e) => println!("sample mapping refused: {e}"),
        Ok(_) => unreachable!(),
    }
}
