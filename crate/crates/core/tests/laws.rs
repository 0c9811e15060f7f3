use std::collections::BTreeMap;

use minfact::sampling::{critical_equivalent, FactorizationSampler, WeightSequence};
use minfact::stats::{exact_boltzmann_law, exact_sampler_law, run_trials, tv_distance, tv_laws};

#[test]
fn fixed_length_cycles_sampled_exactly() {
    // with a single allowed cycle length both laws are uniform on M_n^(k)
    for (r, n) in [(3usize, 5usize), (4, 7)] {
        let w = WeightSequence::Delta { r };
        let law = exact_boltzmann_law(&w, n as u32).unwrap();
        assert!(tv_laws(&law, &exact_sampler_law(&w, n)) < 1e-12);
        let ce = critical_equivalent(&w).unwrap();
        let keys = run_trials(r as u64, 40_000, || FactorizationSampler::from_critical(ce.clone()), |s, rng| {
            s.sample(n, rng).unwrap().to_string()
        });
        let mut counts = BTreeMap::new();
        for k in keys {
            *counts.entry(k).or_insert(0usize) += 1;
        }
        assert!(tv_distance(&counts, &law) < 0.03, "r = {r}");
    }
}

#[test]
fn pipeline_law_weights_by_inverse_factorial() {
    // the reorder pipeline gives f probability proportional to W_w(f) / k(f)!
    let w = WeightSequence::Uniform;
    for n in 3..=5usize {
        let law = exact_sampler_law(&w, n);
        let ratio: Vec<f64> = law
            .iter()
            .map(|(k, p)| {
                let cycles = k.matches('(').count();
                p * (1..=cycles).map(|i| i as f64).product::<f64>()
            })
            .collect();
        let r0 = ratio[0];
        assert!(ratio.iter().all(|r| (r - r0).abs() < 1e-12 * r0.max(1.0)), "n = {n}");
    }
}

#[test]
fn trials_independent_of_thread_count() {
    let ce = critical_equivalent(&WeightSequence::Uniform).unwrap();
    let run = || {
        run_trials(4, 64, || FactorizationSampler::from_critical(ce.clone()), |s, rng| s.sample(100, rng).unwrap().to_string())
    };
    let a = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
    let b = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(run);
    assert_eq!(a, b);
}
