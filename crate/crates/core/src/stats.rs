//! Estimators, exact formulas and small-n exact laws.

use std::collections::BTreeMap;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::bijection::psi_inverse;
use crate::perm::{enumerate_minimal_factorizations, ordered_classes, Factorization, PermError};
use crate::sampling::{
    critical_equivalent, ln_factorial, rng_from_seed, CriticalEquivalent, FactorizationSampler, SamplingError,
    WeightSequence,
};
use crate::trees::{bitype_shapes, enumerate_labelled_bitype, next_permutation, LabelledBiTypeTree};

pub const SCHEMA_REPORT: &str = "minfact/report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    /// No reference value; the report is descriptive.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub name: String,
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    pub se: f64,
    pub reference: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl TrialReport {
    pub fn new(name: &str, n: usize, trials: usize, mean: f64, se: f64, reference: Option<f64>, tolerance: f64) -> Self {
        let verdict = match reference {
            None => Verdict::Info,
            Some(_) if !mean.is_finite() => Verdict::Inconclusive,
            Some(r) => {
                if (mean - r).abs() <= tolerance.max(3.0 * se) {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
        };
        TrialReport { name: name.into(), n, trials, mean, se, reference, tolerance, verdict, extra: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.extra.insert(key.into(), v);
        self
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).unwrap();
        v.as_object_mut().unwrap().insert("schema".into(), SCHEMA_REPORT.into());
        v
    }
}

/// Running mean and variance, mergeable across workers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, o: &Welford) -> Welford {
        if self.count == 0 {
            return *o;
        }
        if o.count == 0 {
            return *self;
        }
        let count = self.count + o.count;
        let d = o.mean - self.mean;
        let mean = self.mean + d * o.count as f64 / count as f64;
        let m2 = self.m2 + o.m2 + d * d * (self.count as f64 * o.count as f64) / count as f64;
        Welford { count, mean, m2 }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn se(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Welford {
    fn from_iter<I: IntoIterator<Item = f64>>(it: I) -> Self {
        let mut w = Welford::default();
        for x in it {
            w.push(x);
        }
        w
    }
}

/// Run `trials` independent trials, trial `i` on stream `i` of `seed`.
/// Results come back in trial order whatever the thread count.
pub fn run_trials<T, S, I, F>(seed: u64, trials: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut dyn RngCore) -> T + Sync + Send,
{
    (0..trials)
        .into_par_iter()
        .map_init(&init, |state, i| {
            let mut rng = rng_from_seed(seed, i as u64);
            f(state, &mut rng)
        })
        .collect()
}

fn merge_all(xs: &[f64]) -> Welford {
    xs.par_chunks(64).map(|c| c.iter().copied().collect::<Welford>()).collect::<Vec<_>>().iter().fold(Welford::default(), |a, b| a.merge(b))
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        xs[m / 2]
    } else {
        0.5 * (xs[m / 2 - 1] + xs[m / 2])
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Value of `p_nu` and whether the variance of `nu` is infinite (then 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PNu {
    pub value: f64,
    pub infinite_variance: bool,
}

pub fn exact_p_nu(ce: &CriticalEquivalent) -> PNu {
    match ce.sigma2 {
        Some(s2) => PNu { value: s2 / (s2 + 1.0), infinite_variance: false },
        None => PNu { value: 1.0, infinite_variance: true },
    }
}

/// `p_nu` from the composition sum over the reduced offspring law, truncated
/// at total degree `cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchingSum {
    pub value: f64,
    /// Mass of the reduced offspring law beyond `cutoff`.
    pub tail: f64,
}

pub fn exact_p_nu_by_branching_formula(ce: &CriticalEquivalent, cutoff: usize) -> Result<BranchingSum, SamplingError> {
    if ce.sigma2.is_none() {
        return Err(SamplingError::BadWeights("branching formula needs finite variance".into()));
    }
    // a[k]: mass of total degree k; b[k]: the same weighted by sum a_i (a_i - 1).
    // Splitting off one marked block gives b = (i (i - 1) nu_i) * a.
    let nu: Vec<f64> = (0..=cutoff).map(|i| ce.nu(i)).collect();
    let mut a = vec![(ce.nu0 - 1.0).exp()];
    for k in 1..=cutoff {
        let s: f64 = (1..=k).map(|j| j as f64 * nu[j] * a[k - j]).sum();
        a.push(s / k as f64);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 2..=cutoff {
        let b: f64 = (2..=k).map(|i| (i * (i - 1)) as f64 * nu[i] * a[k - i]).sum();
        num += b;
        den += (k * (k - 1)) as f64 * a[k];
    }
    let tail = (1.0 - a.iter().sum::<f64>()).max(0.0);
    Ok(BranchingSum { value: if den > 0.0 { num / den } else { 0.0 }, tail })
}

/// A random finitely supported weight sequence that has a critical equivalent.
pub fn random_weights(rng: &mut dyn RngCore) -> WeightSequence {
    let len = rng.random_range(2..=8);
    let mut weights: Vec<f64> = (0..len).map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random::<f64>() * 3.0 }).collect();
    if weights[1..].iter().all(|&x| x == 0.0) {
        weights[len - 1] = 1.0;
    }
    WeightSequence::Explicit { weights }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingConstants {
    pub b_n: f64,
    pub b_tilde_n: f64,
}

/// `B` solving `n L / B^alpha = alpha (alpha - 1) / Gamma(3 - alpha)`.
pub fn stable_scale(l: f64, alpha: f64, n: usize) -> f64 {
    (n as f64 * l * gamma(3.0 - alpha) / (alpha * (alpha - 1.0))).powf(1.0 / alpha)
}

/// Finite variance: `sigma sqrt(n/2)` and `sqrt((sigma^2 + 1) n / 2)`.
/// Power law with `alpha < 2` at `s = 1`: truncated second moment
/// `c x^{2 - alpha} / (2 - alpha)`, and both sequences coincide.
pub fn scaling_constants(ce: &CriticalEquivalent, n: usize) -> ScalingConstants {
    let nf = n as f64;
    if let Some(s2) = ce.sigma2 {
        return ScalingConstants { b_n: (s2 * nf / 2.0).sqrt(), b_tilde_n: ((s2 + 1.0) * nf / 2.0).sqrt() };
    }
    let c = ce.nu(1);
    let l = c / (2.0 - ce.alpha);
    let b = stable_scale(l, ce.alpha, n);
    ScalingConstants { b_n: b, b_tilde_n: b }
}

/// Mean of `N(f)/n` against `1 - nu_0`.
pub fn estimate_cycle_count(w: &WeightSequence, n: usize, trials: usize, seed: u64) -> Result<TrialReport, SamplingError> {
    let ce = critical_equivalent(w)?;
    let reference = 1.0 - ce.nu0;
    let xs = sample_values(&ce, n, trials, seed, |f| f.k() as f64 / n as f64)?;
    let m = merge_all(&xs);
    Ok(TrialReport::new("cycle_count", n, trials, m.mean, m.se(), Some(reference), 0.02))
}

fn sample_values(
    ce: &CriticalEquivalent,
    n: usize,
    trials: usize,
    seed: u64,
    stat: impl Fn(&Factorization) -> f64 + Sync + Send,
) -> Result<Vec<f64>, SamplingError> {
    run_trials(seed, trials, || FactorizationSampler::from_critical(ce.clone()), |s, rng| s.sample(n, rng).map(|f| stat(&f)))
        .into_iter()
        .collect()
}

/// `l_max / B_n`: mean in `mean`, median and deciles in `extra`.
pub fn estimate_largest_cycle(w: &WeightSequence, n: usize, trials: usize, seed: u64) -> Result<TrialReport, SamplingError> {
    let ce = critical_equivalent(w)?;
    let bn = scaling_constants(&ce, n).b_n;
    let mut xs = sample_values(&ce, n, trials, seed, |f| f.largest_cycle() as f64)?;
    let m = merge_all(&xs);
    let med = median(&mut xs);
    let (q1, q9) = (quantile(&xs, 0.1), quantile(&xs, 0.9));
    let scale = if bn > 0.0 { bn } else { 1.0 };
    Ok(TrialReport::new("largest_cycle", n, trials, m.mean / scale, m.se() / scale, None, 0.0)
        .with("b_n", bn)
        .with("median", med / scale)
        .with("q10", q1 / scale)
        .with("q90", q9 / scale))
}

/// Large faces of the tree `T`, read off the white reduced tree: for each
/// white `a`-node, the two grandchildren with largest subtrees decide the
/// color, black when they hang from the same black vertex.
pub fn classify_large_faces(t: &LabelledBiTypeTree, a: usize) -> (usize, usize) {
    let (reduced, whites) = t.tree.white_reduced();
    let mut black = 0;
    let mut total = 0;
    for u in 0..reduced.len() {
        if !reduced.is_a_node(u, a) {
            continue;
        }
        let mut ch: Vec<usize> = reduced.children(u).to_vec();
        if ch.len() < 2 {
            continue;
        }
        // stable: ties keep plane order
        ch.sort_by_key(|&c| std::cmp::Reverse(reduced.subtree_size(c)));
        total += 1;
        if t.tree.parent(whites[ch[0]]) == t.tree.parent(whites[ch[1]]) {
            black += 1;
        }
    }
    (black, total)
}

pub const MIN_LARGE_FACES: usize = 300;

/// Ratio of black large faces to all large faces, `a = ceil(eps n)`, with a
/// standard error that treats each tree as one cluster.
pub fn estimate_black_fraction(
    w: &WeightSequence,
    n: usize,
    trials: usize,
    eps: f64,
    seed: u64,
) -> Result<TrialReport, SamplingError> {
    let ce = critical_equivalent(w)?;
    let reference = exact_p_nu(&ce).value;
    let a = (eps * n as f64).ceil() as usize;
    // the color of a face does not depend on the labels, so the reordering
    // and the bijection are skipped
    let counts: Vec<(usize, usize)> = run_trials(
        seed,
        trials,
        || FactorizationSampler::from_critical(ce.clone()),
        |s, rng| s.sample_btsg(n, rng).map(|t| classify_large_faces(&t, a)),
    )
    .into_iter()
    .collect::<Result<_, _>>()?;
    let (b, tot): (usize, usize) = counts.iter().fold((0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    if tot == 0 {
        let mut r = TrialReport::new("black_fraction", n, trials, f64::NAN, f64::NAN, Some(reference), 0.0);
        r.verdict = Verdict::Inconclusive;
        return Ok(r.with("faces", 0.0));
    }
    let r = b as f64 / tot as f64;
    let m = trials as f64;
    let tbar = tot as f64 / m;
    let ss: f64 = counts.iter().map(|&(bi, ti)| (bi as f64 - r * ti as f64).powi(2)).sum();
    let se = if trials > 1 { (ss / (m * (m - 1.0))).sqrt() / tbar } else { f64::NAN };
    let mut rep = TrialReport::new("black_fraction", n, trials, r, se, Some(reference), 0.0)
        .with("faces", tot as f64)
        .with("a", a as f64);
    if tot < MIN_LARGE_FACES && rep.verdict != Verdict::Fail {
        rep.verdict = Verdict::Inconclusive;
    }
    Ok(rep)
}

pub fn weight_of(w: &WeightSequence, f: &Factorization) -> f64 {
    f.cycles.iter().map(|c| w.w(c.len() - 1)).product()
}

/// `W_w(f) / Y`, keyed by the factorization's cycle notation.
pub fn exact_boltzmann_law(w: &WeightSequence, n: u32) -> Result<BTreeMap<String, f64>, PermError> {
    let all = enumerate_minimal_factorizations(n, None, crate::perm::ENUMERATION_BOUND)?;
    let mut law: BTreeMap<String, f64> = all.iter().map(|f| (f.to_string(), weight_of(w, f))).collect();
    normalize(&mut law);
    Ok(law)
}

fn normalize(law: &mut BTreeMap<String, f64>) {
    let z: f64 = law.values().sum();
    if z > 0.0 {
        law.values_mut().for_each(|p| *p /= z);
    }
    law.retain(|_, p| *p > 0.0);
}

/// Key of a labelled two-type tree: degrees in preorder, then labels.
pub fn tree_key(t: &LabelledBiTypeTree) -> String {
    format!("{:?}|{:?}", t.tree.degrees(), t.labels)
}

/// Law of the size-`n` two-type tree with white weights `1/k!`, black weights
/// `w_k`, and uniformly labelled black vertices.
pub fn exact_btsg_law(w: &WeightSequence, n: usize) -> Vec<(LabelledBiTypeTree, f64)> {
    let mut out = Vec::new();
    for t in bitype_shapes(n) {
        let mut weight = 1.0;
        for v in 0..t.len() {
            let k = t.degree(v);
            weight *= if t.depth(v) % 2 == 0 { (-ln_factorial(k)).exp() } else { w.w(k) };
        }
        if weight == 0.0 {
            continue;
        }
        let blacks: Vec<usize> = (0..t.len()).filter(|&v| t.depth(v) % 2 == 1).collect();
        let nb = blacks.len();
        let per = weight * (-ln_factorial(nb)).exp();
        let mut perm: Vec<u32> = (1..=nb as u32).collect();
        loop {
            let mut labels = vec![0; t.len()];
            for (i, &b) in blacks.iter().enumerate() {
                labels[b] = perm[i];
            }
            out.push((LabelledBiTypeTree { tree: t.clone(), labels }, per));
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }
    let z: f64 = out.iter().map(|x| x.1).sum();
    for x in &mut out {
        x.1 /= z;
    }
    out
}

/// Exact law of the sampler output: the two-type tree law pushed through the
/// canonical reordering and the inverse bijection.
pub fn exact_sampler_law(w: &WeightSequence, n: usize) -> BTreeMap<String, f64> {
    let mut law = BTreeMap::new();
    for (t, p) in exact_btsg_law(w, n) {
        let f = psi_inverse(&t.canonical_reorder()).expect("reordered tree is valid");
        *law.entry(f.to_string()).or_insert(0.0) += p;
    }
    law
}

/// Total variation between an empirical count table and a law.
pub fn tv_distance(counts: &BTreeMap<String, usize>, law: &BTreeMap<String, f64>) -> f64 {
    let total: usize = counts.values().sum();
    let mut keys: Vec<&String> = counts.keys().chain(law.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| {
            let e = counts.get(k).copied().unwrap_or(0) as f64 / total as f64;
            (e - law.get(k).copied().unwrap_or(0.0)).abs()
        })
        .sum::<f64>()
}

pub fn tv_laws(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys.into_iter().map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountRow {
    pub n: u32,
    pub class: Vec<usize>,
    pub count: u64,
    pub expected: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingReport {
    pub rows: Vec<CountRow>,
    /// `(n, |M_n|, |U_n|)` per size.
    pub totals: Vec<(u32, u64, u64)>,
    pub pass: bool,
}

/// Upper size for the brute-force count of valid labelled trees.
const UN_COUNT_BOUND: u32 = 6;

/// Transposition count `n^{n-2}`, per-class counts `n^{k-1}` and `|U_n| = |M_n|`.
pub fn counting_suite(n_max: u32) -> Result<CountingReport, PermError> {
    let mut rows = Vec::new();
    let mut totals = Vec::new();
    let mut pass = true;
    for n in 2..=n_max {
        let all = enumerate_minimal_factorizations(n, None, crate::perm::ENUMERATION_BOUND)?;
        let mut by_class: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        for f in &all {
            *by_class.entry(f.class()).or_insert(0) += 1;
        }
        for class in ordered_classes(n) {
            let count = by_class.get(&class).copied().unwrap_or(0);
            let expected = (n as u64).pow(class.len() as u32 - 1);
            pass &= count == expected;
            rows.push(CountRow { n, class, count, expected });
        }
        let un = if n <= UN_COUNT_BOUND { enumerate_labelled_bitype(n as usize).len() as u64 } else { 0 };
        if n <= UN_COUNT_BOUND {
            pass &= un == all.len() as u64;
        }
        pass &= all.len() as u64 == (n as u64 + 1).pow(n - 2);
        totals.push((n, all.len() as u64, un));
    }
    Ok(CountingReport { rows, totals, pass })
}

/// Rows `name,n,trials,mean,se,median` for a grid of reports.
pub fn reports_csv(reports: &[TrialReport]) -> String {
    let mut out = String::from("name,n,trials,mean,se,median,reference,verdict\n");
    for r in reports {
        let med = r.extra.get("median").map(|m| m.to_string()).unwrap_or_default();
        let rf = r.reference.map(|m| m.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{},{},{},{},{:?}\n", r.name, r.n, r.trials, r.mean, r.se, med, rf, r.verdict));
    }
    out
}
