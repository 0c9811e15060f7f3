use minfact::bijection::psi;
use minfact::lamination::{hausdorff_colored, validate_properties};
use minfact::processes::{black_process, couple, label_face_distance, process_s, white_process};
use minfact::sampling::{rng_from_seed, FactorizationSampler, WeightSequence};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn label_face_distance_shrinks() {
    let mut s = FactorizationSampler::new(&WeightSequence::Uniform).unwrap();
    let meds: Vec<f64> = [200usize, 500, 1000]
        .iter()
        .map(|&n| {
            let mut rng = rng_from_seed(n as u64, 0);
            median((0..50).map(|_| label_face_distance(&s.sample(n, &mut rng).unwrap()).unwrap()).collect())
        })
        .collect();
    assert!(meds.windows(2).all(|w| w[1] <= w[0]), "{meds:?}");
}

#[test]
fn factorization_and_tree_laminations_agree() {
    let mut rng = rng_from_seed(3, 0);
    let mut s = FactorizationSampler::new(&WeightSequence::Delta { r: 3 }).unwrap();
    let f = s.sample(401, &mut rng).unwrap();
    let full = process_s(&f, f64::INFINITY);
    validate_properties(&full, f.n).unwrap();
    let t = psi(&f).unwrap();
    let d = hausdorff_colored(&full, &black_process(&t, f64::INFINITY), 0.02);
    assert!(d < 0.2, "{d}");
}

#[test]
fn white_and_black_processes_close() {
    let mut rng = rng_from_seed(8, 0);
    let mut s = FactorizationSampler::new(&WeightSequence::Uniform).unwrap();
    let t = s.sample_btsg(2000, &mut rng).unwrap();
    let cp = couple(&t, &mut rng);
    assert!(cp.max_distance(&t, 20) < 0.5);
    let w = white_process(&cp.reduced, &cp.white_order, 60.0);
    let b = black_process(&cp.relabelled(&t), 60.0);
    assert!(hausdorff_colored(&w, &b, 0.02).is_finite());
}
