//! Output-format conversions for distribution-valued problems: sampling,
//! subset-probability estimation, and threshold decision, plus mapping any of
//! them across a transition oracle. All randomness flows through explicit
//! seeded generators so runs are reproducible.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::transition::TransitionOracle;

/// Draws outcomes from a distribution.
pub struct Sampler<R> {
    draw_fn: Arc<dyn Fn(&mut ChaCha8Rng) -> R + Send + Sync>,
}

impl<R> Clone for Sampler<R> {
    fn clone(&self) -> Self {
        Self {
            draw_fn: self.draw_fn.clone(),
        }
    }
}

impl<R: Clone + Send + Sync + 'static> Sampler<R> {
    pub fn new(draw_fn: Arc<dyn Fn(&mut ChaCha8Rng) -> R + Send + Sync>) -> Self {
        Self { draw_fn }
    }

    /// Inverse-CDF sampler over an explicit distribution. Weights must be
    /// non-negative; they are normalized by their sum.
    pub fn from_distribution(outcomes: Vec<(R, f64)>) -> Self {
        assert!(!outcomes.is_empty());
        let total: f64 = outcomes.iter().map(|&(_, p)| p).sum();
        assert!(total > 0.0);
        for &(_, p) in &outcomes {
            assert!(p >= 0.0, "negative weight {p}");
        }
        let outcomes = Arc::new(outcomes);
        Self {
            draw_fn: Arc::new(move |rng| {
                let mut u = rng.gen::<f64>() * total;
                for (r, p) in outcomes.iter() {
                    u -= p;
                    if u <= 0.0 {
                        return r.clone();
                    }
                }
                outcomes.last().expect("non-empty").0.clone()
            }),
        }
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> R {
        (self.draw_fn)(rng)
    }
}

/// Estimates subset probabilities `P(S0)` to a requested precision.
pub struct Estimator<R> {
    eval: Arc<dyn Fn(&dyn Fn(&R) -> bool, f64) -> f64 + Send + Sync>,
    /// Declared achievable precision; requests below it are unreliable.
    pub precision: f64,
}

impl<R> Clone for Estimator<R> {
    fn clone(&self) -> Self {
        Self {
            eval: self.eval.clone(),
            precision: self.precision,
        }
    }
}

impl<R: 'static> Estimator<R> {
    /// Exact estimator backed by a dense ground-truth distribution.
    pub fn exact(outcomes: Vec<(R, f64)>) -> Self
    where
        R: Send + Sync,
    {
        Self::with_precision(outcomes, 0.0)
    }

    /// Exact backend that nevertheless declares a coarser precision, for
    /// exercising the precision bookkeeping.
    pub fn with_precision(outcomes: Vec<(R, f64)>, precision: f64) -> Self
    where
        R: Send + Sync,
    {
        let outcomes = Arc::new(outcomes);
        Self {
            eval: Arc::new(move |pred, _| {
                outcomes.iter().filter(|(r, _)| pred(r)).map(|&(_, p)| p).sum()
            }),
            precision,
        }
    }

    pub fn estimate(&self, pred: impl Fn(&R) -> bool, target_precision: f64) -> f64 {
        (self.eval)(&pred, target_precision)
    }
}

/// Answers threshold queries: yes if `P(S0) >= a`, no if `P(S0) <= b`, with
/// `a > b`; between the thresholds either answer is allowed.
pub struct Decider<R> {
    decide_fn: Arc<dyn Fn(&dyn Fn(&R) -> bool, f64, f64) -> bool + Send + Sync>,
    /// Width of the indifference band the backend needs between `a` and `b`.
    pub gap: f64,
    calls: Arc<AtomicU64>,
}

impl<R> Clone for Decider<R> {
    fn clone(&self) -> Self {
        Self {
            decide_fn: self.decide_fn.clone(),
            gap: self.gap,
            calls: self.calls.clone(),
        }
    }
}

impl<R: Send + Sync + 'static> Decider<R> {
    /// Exact decider backed by a ground-truth distribution.
    pub fn exact(outcomes: Vec<(R, f64)>) -> Self {
        let outcomes = Arc::new(outcomes);
        Self {
            decide_fn: Arc::new(move |pred, a, b| {
                let p: f64 = outcomes.iter().filter(|(r, _)| pred(r)).map(|&(_, p)| p).sum();
                p >= 0.5 * (a + b)
            }),
            gap: 0.0,
            calls: Arc::new(AtomicU64::new(0)),
        }
    }

    pub fn decide(&self, pred: impl Fn(&R) -> bool, a: f64, b: f64) -> bool {
        assert!(a > b);
        self.calls.fetch_add(1, Ordering::Relaxed);
        (self.decide_fn)(&pred, a, b)
    }

    pub fn reset_and_read_calls(&self) -> u64 {
        self.calls.swap(0, Ordering::Relaxed)
    }
}

/// Sample count for a Hoeffding bound: within `epsilon` with probability at
/// least `1 - delta`.
pub fn hoeffding_samples(epsilon: f64, delta: f64) -> u64 {
    assert!(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0);
    ((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as u64
}

/// Estimates `P(S0)` as the empirical frequency over Hoeffding-many draws.
pub fn estimate_from_samples<R>(
    sampler: &Sampler<R>,
    pred: impl Fn(&R) -> bool,
    epsilon: f64,
    delta: f64,
    rng: &mut ChaCha8Rng,
) -> f64
where
    R: Clone + Send + Sync + 'static,
{
    let draws = hoeffding_samples(epsilon, delta);
    let mut hits = 0u64;
    for _ in 0..draws {
        if pred(&sampler.draw(rng)) {
            hits += 1;
        }
    }
    hits as f64 / draws as f64
}

/// Draws an `m`-bit outcome from an estimator by conditioning bit by bit,
/// most significant bit first. The estimator precision must support the
/// requested total-variation fidelity across the `m` calls.
pub fn sample_from_estimator(
    estimator: &Estimator<usize>,
    bit_width: u32,
    fidelity: f64,
    rng: &mut ChaCha8Rng,
) -> Result<usize> {
    if estimator.precision * bit_width as f64 > fidelity {
        return Err(Error::InsufficientPrecision {
            precision: estimator.precision,
        });
    }
    let per_call = if bit_width == 0 {
        fidelity
    } else {
        fidelity / bit_width as f64
    };
    let mut decided: usize = 0;
    let mut p_prefix = 1.0f64;
    for k in 0..bit_width {
        let shift = bit_width - k - 1;
        let candidate = (decided << 1) | 1;
        let p_one = estimator.estimate(|&x| (x >> shift) == candidate, per_call);
        let conditional = if p_prefix > 0.0 {
            (p_one / p_prefix).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let bit = rng.gen::<f64>() < conditional;
        decided = (decided << 1) | bit as usize;
        p_prefix = if bit {
            p_one
        } else {
            (p_prefix - p_one).max(0.0)
        };
    }
    Ok(decided)
}

/// Decision from an estimate at half the gap: yes iff the estimate clears
/// the midpoint.
pub fn decide_from_estimate<R: 'static>(
    estimator: &Estimator<R>,
    pred: impl Fn(&R) -> bool,
    a: f64,
    b: f64,
) -> Result<bool> {
    assert!(a > b);
    let gap = a - b;
    if gap < 2.0 * estimator.precision {
        return Err(Error::GapTooSmall {
            gap,
            precision: estimator.precision,
        });
    }
    let estimate = estimator.estimate(pred, 0.5 * gap);
    Ok(estimate >= 0.5 * (a + b))
}

/// Recovers a probability from a decider by bisecting the threshold, using
/// at most `ceil(log2(1/precision))` decider calls.
pub fn estimate_from_decider<R>(
    decider: &Decider<R>,
    pred: impl Fn(&R) -> bool + Copy,
    precision: f64,
) -> Result<f64>
where
    R: Send + Sync + 'static,
{
    assert!(precision > 0.0 && precision < 1.0);
    let calls = (1.0 / precision).log2().ceil() as usize;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..calls {
        let mid = 0.5 * (lo + hi);
        let a = (mid + 0.5 * decider.gap).min(1.0);
        let b = (mid - 0.5 * decider.gap).max(0.0);
        let (a, b) = if a > b { (a, b) } else { (mid + 1e-12, mid - 1e-12) };
        if decider.decide(pred, a, b) {
            lo = b.max(lo);
        } else {
            hi = a.min(hi);
        }
        if lo > hi {
            return Err(Error::InvalidInstance(
                "inconsistent decider answers during bisection".into(),
            ));
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Maps one sample through a non-negative column-stochastic transition
/// oracle: draw `r`, then output `s` with probability `C_{sr}`. Refused as
/// soon as a negative entry shows up; those directions must go through
/// estimation instead.
pub fn map_sample_via_c<S, R>(
    sampler: &Sampler<R>,
    c: &TransitionOracle<S, R>,
    rng: &mut ChaCha8Rng,
) -> Result<S>
where
    R: Clone + Send + Sync + 'static,
    S: Clone,
{
    let r = sampler.draw(rng);
    let column = c.col(&r);
    if column.iter().any(|&(_, x)| x < 0.0) {
        return Err(Error::NegativeTransitionEntries);
    }
    let total: f64 = column.iter().map(|&(_, x)| x).sum();
    assert!(
        (total - 1.0).abs() < 1e-9,
        "column not stochastic: sums to {total}"
    );
    let mut u = rng.gen::<f64>() * total;
    for (s, x) in &column {
        u -= x;
        if u <= 0.0 {
            return Ok(s.clone());
        }
    }
    Ok(column.last().expect("non-empty column").0.clone())
}

/// Estimates `P(S0) = sum_{s in S0} sum_r C_{sr} Q(r)` by averaging the
/// column mass inside `S0` over draws from `Q`. Works with negative entries;
/// `bound` must dominate `|sum_{s in S0} C_{sr}|` over all `r`.
pub fn estimate_subset_via_samples_and_c<S, R>(
    sampler: &Sampler<R>,
    c: &TransitionOracle<S, R>,
    pred: impl Fn(&S) -> bool,
    epsilon: f64,
    delta: f64,
    bound: f64,
    rng: &mut ChaCha8Rng,
) -> f64
where
    R: Clone + Send + Sync + 'static,
{
    assert!(bound > 0.0);
    let draws = (2.0 * bound * bound * (2.0 / delta).ln() / (epsilon * epsilon)).ceil() as u64;
    let mut acc = 0.0;
    for _ in 0..draws {
        let r = sampler.draw(rng);
        let x: f64 = c
            .col(&r)
            .into_iter()
            .filter(|(s, _)| pred(s))
            .map(|(_, x)| x)
            .sum();
        debug_assert!(x.abs() <= bound + 1e-9, "column mass {x} exceeds bound");
        acc += x;
    }
    acc / draws as f64
}

/// Estimates a single target outcome through a row of `C`:
/// `P(s) = sum_r C_{sr} Q(r)`, with each `Q(r)` requested at a precision
/// commensurate with the row weight.
pub fn map_estimates_via_c<S, R>(
    estimator: &Estimator<R>,
    c: &TransitionOracle<S, R>,
    s: &S,
    precision: f64,
) -> f64
where
    R: PartialEq + 'static,
{
    let row = c.row(s);
    let weight: f64 = row.iter().map(|&(_, x)| x.abs()).sum();
    let per_call = if weight > 0.0 {
        precision / weight
    } else {
        precision
    };
    row.into_iter()
        .map(|(r, x)| x * estimator.estimate(|rr| *rr == r, per_call))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::harmonic_oscillator::Outcome;
    use crate::qw_to_ho::build_transition_c;
    use rand::SeedableRng;

    fn walk_distribution() -> Vec<(usize, f64)> {
        vec![(0, 0.8), (1, 0.2)]
    }

    // Oscillator distribution of the worked two-vertex example; reconstructs
    // to the walk distribution (0.8, 0.2) through `C`.
    fn oscillator_distribution() -> Vec<(Outcome, f64)> {
        let shifted = fixtures::two_vertex_shifted();
        let (_, kappa) = crate::qw_to_ho::build_doubled_a(&shifted).unwrap();
        let x = (1.0f64 / 5.0).sqrt();
        let state = crate::dynamics::PhaseState::new(
            nalgebra::DVector::from_vec(vec![x, 0.0, -x, 0.0]),
            nalgebra::DVector::zeros(4),
            0.0,
        );
        crate::harmonic_oscillator::energy_distribution(&kappa, &state)
            .unwrap()
            .iter()
            .collect()
    }

    #[test]
    fn point_mass_estimates_to_one() {
        let s = Sampler::from_distribution(vec![(7usize, 1.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let est = estimate_from_samples(&s, |&x| x == 7, 0.1, 1e-3, &mut rng);
        assert_eq!(est, 1.0);
    }

    #[test]
    fn fair_coin_estimate_lands_near_half() {
        let s = Sampler::from_distribution(vec![(0usize, 0.5), (1usize, 0.5)]);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let est = estimate_from_samples(&s, |&x| x == 0, 0.02, 1e-6, &mut rng);
        assert!((0.48..=0.52).contains(&est), "estimate {est}");
    }

    #[test]
    fn walk_distribution_estimate() {
        let s = Sampler::from_distribution(walk_distribution());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let est = estimate_from_samples(&s, |&x| x == 0, 0.02, 1e-6, &mut rng);
        assert!((0.78..=0.82).contains(&est), "estimate {est}");
    }

    #[test]
    fn bitwise_sampling_point_mass() {
        let e = Estimator::exact(vec![(5usize, 1.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(sample_from_estimator(&e, 3, 1e-9, &mut rng).unwrap(), 5);
        }
    }

    #[test]
    fn bitwise_sampling_uniform_tv_distance() {
        let e = Estimator::exact((0..4usize).map(|x| (x, 0.25)).collect());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = [0u32; 4];
        let draws = 10_000;
        for _ in 0..draws {
            counts[sample_from_estimator(&e, 2, 1e-9, &mut rng).unwrap()] += 1;
        }
        let tv: f64 = counts
            .iter()
            .map(|&c| (c as f64 / draws as f64 - 0.25).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.03, "TV distance {tv}");
    }

    #[test]
    fn bitwise_sampling_walk_frequencies() {
        let e = Estimator::exact(walk_distribution());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 10_000;
        let mut zeros = 0u32;
        for _ in 0..draws {
            if sample_from_estimator(&e, 1, 1e-9, &mut rng).unwrap() == 0 {
                zeros += 1;
            }
        }
        let freq = zeros as f64 / draws as f64;
        assert!((freq - 0.8).abs() < 0.015, "frequency {freq}");
    }

    #[test]
    fn insufficient_precision_rejected() {
        let e = Estimator::with_precision(vec![(0usize, 1.0)], 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            sample_from_estimator(&e, 4, 0.01, &mut rng),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn decisions_from_estimates() {
        let e = Estimator::exact(walk_distribution());
        assert!(decide_from_estimate(&e, |&x| x == 0, 0.6, 0.4).unwrap());
        let empty = Estimator::exact(vec![(1usize, 1.0)]);
        assert!(!decide_from_estimate(&empty, |&x| x == 0, 0.6, 0.4).unwrap());

        let coarse = Estimator::with_precision(walk_distribution(), 0.02);
        assert!(matches!(
            decide_from_estimate(&coarse, |&x| x == 0, 0.505, 0.495),
            Err(Error::GapTooSmall { .. })
        ));
    }

    #[test]
    fn decider_bisection_recovers_probability() {
        let d = Decider::exact(walk_distribution());
        d.reset_and_read_calls();
        let est = estimate_from_decider(&d, |&x| x == 0, 1.0 / 64.0).unwrap();
        assert!((est - 0.8).abs() <= 1.0 / 64.0, "estimate {est}");
        assert!(d.reset_and_read_calls() <= 6);

        let zero = Decider::exact(vec![(1usize, 1.0)]);
        let est = estimate_from_decider(&zero, |&x| x == 0, 1.0 / 64.0).unwrap();
        assert!(est <= 1.0 / 64.0);
    }

    #[test]
    fn identity_sample_mapping_is_passthrough() {
        let s = Sampler::from_distribution(walk_distribution());
        let c: TransitionOracle<usize, usize> = TransitionOracle::identity();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 10_000;
        let mut zeros = 0;
        for _ in 0..draws {
            if map_sample_via_c(&s, &c, &mut rng).unwrap() == 0 {
                zeros += 1;
            }
        }
        let freq = zeros as f64 / draws as f64;
        assert!((freq - 0.8).abs() < 0.015, "frequency {freq}");
    }

    #[test]
    fn negative_column_sampling_refused() {
        let c = build_transition_c(&fixtures::two_vertex_shifted(), 2);
        let s = Sampler::from_distribution(vec![(Outcome::Spring(1, 1), 1.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!(matches!(
            map_sample_via_c(&s, &c, &mut rng),
            Err(Error::NegativeTransitionEntries)
        ));
    }

    #[test]
    fn negative_c_estimation_succeeds() {
        let c = build_transition_c(&fixtures::two_vertex_shifted(), 2);
        let s = Sampler::from_distribution(oscillator_distribution());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let est =
            estimate_subset_via_samples_and_c(&s, &c, |&v| v == 0, 0.05, 1e-4, 3.0, &mut rng);
        assert!((est - 0.8).abs() < 0.05, "estimate {est}");
    }

    #[test]
    fn row_estimates_recover_walk_distribution() {
        let c = build_transition_c(&fixtures::two_vertex_shifted(), 2);
        let e = Estimator::exact(oscillator_distribution());
        let p0 = map_estimates_via_c(&e, &c, &0, 1e-9);
        let p1 = map_estimates_via_c(&e, &c, &1, 1e-9);
        assert!((p0 - 0.8).abs() < 1e-12);
        assert!((p1 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn identity_estimate_mapping_is_passthrough() {
        let e = Estimator::exact(walk_distribution());
        let c: TransitionOracle<usize, usize> = TransitionOracle::identity();
        assert!((map_estimates_via_c(&e, &c, &0, 1e-9) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn hoeffding_count_matches_formula() {
        assert_eq!(
            hoeffding_samples(0.02, 1e-6),
            ((2.0f64 / 1e-6).ln() / (2.0 * 0.02 * 0.02)).ceil() as u64
        );
    }
}
