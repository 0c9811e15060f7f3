//! Weight sequences, critical equivalents, reduced offspring laws, conditioned
//! Galton-Watson trees and Boltzmann sampling of minimal factorizations.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Poisson, Zeta};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bijection::{psi_inverse, BijectionError};
use crate::perm::Factorization;
use crate::trees::{LabelledBiTypeTree, PlaneTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("no critical equivalent: sum of i w_i s^i stays below 1 on the disk of convergence ({0})")]
    NoCriticalEquivalent(String),
    #[error("invalid weight sequence: {0}")]
    BadWeights(String),
    #[error("no tree of size {n}: offspring support has period {period}")]
    Periodicity { n: usize, period: usize },
    #[error("rejection sampler gave up after {0} attempts")]
    Exhausted(usize),
    #[error(transparent)]
    Bijection(#[from] BijectionError),
}

/// Nonnegative weights `(w_i)_{i >= 1}`; a cycle of length `l` weighs `w_{l-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSequence {
    /// `weights[i-1] = w_i`, finitely supported.
    Explicit { weights: Vec<f64> },
    /// `w_i = c i^{-1-alpha}`; `c` defaults to `1 / zeta(alpha)`, which makes
    /// the sequence critical as it stands.
    Powerlaw {
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
    /// All cycles of length `r`: `w_{r-1} = 1`.
    Delta { r: usize },
    /// `w_i = 1` for every `i`.
    Uniform,
}

impl WeightSequence {
    /// Parse `uniform`, `delta:r`, `powerlaw:alpha`.
    pub fn preset(s: &str) -> Result<Self, SamplingError> {
        let bad = || SamplingError::BadWeights(format!("unknown preset {s:?}"));
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let w = match (name, arg) {
            ("uniform", None) => WeightSequence::Uniform,
            ("delta", Some(r)) => WeightSequence::Delta { r: r.parse().map_err(|_| bad())? },
            ("powerlaw", Some(a)) => WeightSequence::Powerlaw { alpha: a.parse().map_err(|_| bad())?, c: None },
            _ => return Err(bad()),
        };
        w.check()?;
        Ok(w)
    }

    pub fn check(&self) -> Result<(), SamplingError> {
        match self {
            WeightSequence::Explicit { weights } => {
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || weights.iter().all(|&w| w == 0.0) {
                    return Err(SamplingError::BadWeights("explicit weights must be finite, >= 0, not all 0".into()));
                }
            }
            WeightSequence::Powerlaw { alpha, c } => {
                if !(*alpha > 1.0 && *alpha <= 2.0) {
                    return Err(SamplingError::BadWeights(format!("power-law alpha must be in (1, 2], got {alpha}")));
                }
                if c.is_some_and(|c| !(c > 0.0 && c.is_finite())) {
                    return Err(SamplingError::BadWeights("power-law scale must be positive".into()));
                }
            }
            WeightSequence::Delta { r } => {
                if *r < 2 {
                    return Err(SamplingError::BadWeights(format!("delta index must be >= 2, got {r}")));
                }
            }
            WeightSequence::Uniform => {}
        }
        Ok(())
    }

    fn powerlaw_scale(alpha: f64, c: Option<f64>) -> f64 {
        c.unwrap_or_else(|| 1.0 / zeta(alpha))
    }

    pub fn w(&self, i: usize) -> f64 {
        if i == 0 {
            return 0.0;
        }
        match self {
            WeightSequence::Explicit { weights } => weights.get(i - 1).copied().unwrap_or(0.0),
            WeightSequence::Powerlaw { alpha, c } => Self::powerlaw_scale(*alpha, *c) * (i as f64).powf(-1.0 - alpha),
            WeightSequence::Delta { r } => {
                if i + 1 == *r {
                    1.0
                } else {
                    0.0
                }
            }
            WeightSequence::Uniform => 1.0,
        }
    }

    /// Radius of convergence of `F_w`.
    pub fn radius(&self) -> f64 {
        match self {
            WeightSequence::Explicit { .. } | WeightSequence::Delta { .. } => f64::INFINITY,
            WeightSequence::Powerlaw { .. } | WeightSequence::Uniform => 1.0,
        }
    }

    /// `sum_{i >= 1} i^p w_i s^i` (possibly infinite).
    pub fn series(&self, s: f64, p: i32) -> f64 {
        match self {
            WeightSequence::Explicit { weights } => {
                weights.iter().enumerate().map(|(i, &w)| w * ((i + 1) as f64).powi(p) * s.powi(i as i32 + 1)).sum()
            }
            WeightSequence::Delta { r } => {
                let j = (*r - 1) as f64;
                j.powi(p) * s.powf(j)
            }
            WeightSequence::Uniform => {
                if s >= 1.0 {
                    return f64::INFINITY;
                }
                let q = 1.0 - s;
                match p {
                    0 => s / q,
                    1 => s / (q * q),
                    2 => s * (1.0 + s) / (q * q * q),
                    _ => polylog(-(p as f64), s),
                }
            }
            WeightSequence::Powerlaw { alpha, c } => {
                Self::powerlaw_scale(*alpha, *c) * polylog(1.0 + alpha - p as f64, s)
            }
        }
    }

    /// Multiply `w_i` by `q^i`; the critical equivalent is unchanged.
    pub fn tilted(&self, q: f64) -> WeightSequence {
        let m = match self {
            WeightSequence::Explicit { weights } => weights.len(),
            WeightSequence::Delta { r } => r - 1,
            _ => 400,
        };
        WeightSequence::Explicit { weights: (1..=m).map(|i| self.w(i) * q.powi(i as i32)).collect() }
    }

    /// gcd of the support of `(w_i)`.
    pub fn period(&self) -> usize {
        match self {
            WeightSequence::Explicit { weights } => weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .fold(0, |g, (i, _)| gcd(g, i + 1)),
            WeightSequence::Delta { r } => r - 1,
            _ => 1,
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Riemann zeta for `q > 1` by Euler-Maclaurin summation.
pub fn zeta(q: f64) -> f64 {
    assert!(q > 1.0);
    let n = 64.0f64;
    let head: f64 = (1..64).map(|k| (k as f64).powf(-q)).sum();
    let t = n.powf(-q);
    head + n.powf(1.0 - q) / (q - 1.0) + t / 2.0 + q * t / (12.0 * n)
        - q * (q + 1.0) * (q + 2.0) * t / (720.0 * n.powi(3))
        + q * (q + 1.0) * (q + 2.0) * (q + 3.0) * (q + 4.0) * t / (30240.0 * n.powi(5))
}

/// `Li_q(s) = sum_{i >= 1} s^i / i^q` for `0 <= s <= 1`.
pub fn polylog(q: f64, s: f64) -> f64 {
    if s >= 1.0 {
        return if q > 1.0 { zeta(q) } else { f64::INFINITY };
    }
    if s <= 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut pw = 1.0;
    let mut i = 1usize;
    loop {
        pw *= s;
        let term = pw * (i as f64).powf(-q);
        sum += term;
        if term < 1e-18 * sum.abs() && (i as f64) > q.abs() / (1.0 - s) {
            break;
        }
        if i > 50_000_000 {
            break;
        }
        i += 1;
    }
    sum
}

/// Sampler for a law on `{1, 2, ...}`.
#[derive(Debug, Clone, PartialEq)]
pub enum PositiveLaw {
    /// `values[i]` with cumulative probability `cdf[i]`.
    Table { values: Vec<usize>, cdf: Vec<f64> },
    /// `P(i) = (1 - q) q^{i-1}`.
    Geometric { q: f64 },
    /// `P(i) ∝ i^{-a}`.
    Zeta { a: f64 },
    /// `P(i) ∝ i^{-a} s^i`, by rejection from the geometric law.
    TiltedPower { a: f64, s: f64 },
}

impl PositiveLaw {
    pub fn sample(&self, rng: &mut dyn RngCore) -> usize {
        match self {
            PositiveLaw::Table { values, cdf } => {
                let u: f64 = rng.random::<f64>() * cdf.last().unwrap();
                let i = cdf.partition_point(|&c| c <= u).min(values.len() - 1);
                values[i]
            }
            PositiveLaw::Geometric { q } => geometric(*q, rng),
            PositiveLaw::Zeta { a } => Zeta::new(*a).expect("a > 1").sample(rng) as usize,
            PositiveLaw::TiltedPower { a, s } => loop {
                let i = geometric(*s, rng);
                if rng.random::<f64>() < (i as f64).powf(-a) {
                    return i;
                }
            },
        }
    }
}

fn geometric(q: f64, rng: &mut dyn RngCore) -> usize {
    if q <= 0.0 {
        return 1;
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    1 + (u.ln() / q.ln()).floor() as usize
}

/// The critical equivalent `nu_i = w_i s^i` (`i >= 1`) of a weight sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalEquivalent {
    pub weights: WeightSequence,
    pub s: f64,
    pub nu0: f64,
    /// Stability index: 2 in the finite-variance case.
    pub alpha: f64,
    /// Variance of `nu` when finite.
    pub sigma2: Option<f64>,
}

/// Solve `sum i w_i s^i = 1` by bisection on `(0, R]`.
pub fn critical_equivalent(w: &WeightSequence) -> Result<CriticalEquivalent, SamplingError> {
    w.check()?;
    let h = |s: f64| w.series(s, 1);
    let r = w.radius();
    let s = if r.is_finite() {
        let at_r = h(r);
        if at_r.is_finite() && (at_r - 1.0).abs() <= 1e-12 {
            r
        } else if at_r < 1.0 {
            return Err(SamplingError::NoCriticalEquivalent(format!("value {at_r} at radius {r}")));
        } else {
            bisect(h, 0.0, r)
        }
    } else {
        let mut hi = 1.0;
        let mut steps = 0;
        while h(hi) < 1.0 {
            hi *= 2.0;
            steps += 1;
            if steps > 1100 {
                return Err(SamplingError::NoCriticalEquivalent("series bounded".into()));
            }
        }
        bisect(h, 0.0, hi)
    };
    let nu0 = (1.0 - w.series(s, 0)).max(0.0);
    let second = w.series(s, 2);
    let (alpha, sigma2) = match w {
        WeightSequence::Powerlaw { alpha, .. } if s >= 1.0 => {
            if *alpha < 2.0 {
                (*alpha, None)
            } else if second.is_finite() {
                (2.0, Some((second - 1.0).max(0.0)))
            } else {
                (2.0, None)
            }
        }
        _ => (2.0, Some((second - 1.0).max(0.0))),
    };
    Ok(CriticalEquivalent { weights: w.clone(), s, nu0, alpha, sigma2 })
}

fn bisect(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

impl CriticalEquivalent {
    pub fn nu(&self, i: usize) -> f64 {
        if i == 0 {
            self.nu0
        } else {
            self.weights.w(i) * self.s.powi(i as i32)
        }
    }

    /// Mass of the white decoration: `mu°` is Poisson with this mean.
    pub fn lambda(&self) -> f64 {
        1.0 - self.nu0
    }

    pub fn mu_circ(&self, j: usize) -> f64 {
        let l = self.lambda();
        (-l + j as f64 * l.ln() - ln_factorial(j)).exp()
    }

    pub fn mu_bullet(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.nu(i) / self.lambda()
        }
    }

    /// Sampler for `mu•`, the law of `nu` conditioned to be positive.
    pub fn positive_law(&self) -> PositiveLaw {
        match &self.weights {
            WeightSequence::Uniform => PositiveLaw::Geometric { q: self.s },
            WeightSequence::Powerlaw { alpha, .. } => {
                if self.s >= 1.0 {
                    PositiveLaw::Zeta { a: 1.0 + alpha }
                } else {
                    PositiveLaw::TiltedPower { a: 1.0 + alpha, s: self.s }
                }
            }
            WeightSequence::Delta { r } => PositiveLaw::Table { values: vec![r - 1], cdf: vec![1.0] },
            WeightSequence::Explicit { weights } => {
                let mut values = Vec::new();
                let mut cdf = Vec::new();
                let mut acc = 0.0;
                for i in 1..=weights.len() {
                    let p = self.nu(i);
                    if p > 0.0 {
                        acc += p;
                        values.push(i);
                        cdf.push(acc);
                    }
                }
                PositiveLaw::Table { values, cdf }
            }
        }
    }

    pub fn period(&self) -> usize {
        self.weights.period()
    }

    /// Offspring law `mu` of the white reduced tree.
    pub fn reduced_offspring(&self) -> ReducedOffspring {
        ReducedOffspring::new(self)
    }

    /// The law `nu` itself, as an offspring distribution.
    pub fn nu_offspring(&self) -> NuOffspring {
        NuOffspring { nu0: self.nu0, positive: self.positive_law(), period: self.period(), masses: self.clone() }
    }

    /// `sigma^2_mu = s^2 F_w''(s) + 1` when finite.
    pub fn sigma2_mu(&self) -> Option<f64> {
        self.sigma2.map(|_| {
            let s = self.s;
            let f2 = self.weights.series(s, 2) - self.weights.series(s, 1);
            f2 + 1.0
        })
    }
}

pub fn ln_factorial(j: usize) -> f64 {
    statrs::function::gamma::ln_gamma(j as f64 + 1.0)
}

/// An offspring distribution that can be sampled and evaluated.
pub trait Offspring {
    fn sample(&self, rng: &mut dyn RngCore) -> usize;
    fn pmf(&self, k: usize) -> f64;
    /// gcd of the support.
    fn period(&self) -> usize;
}

/// `F_mu = exp(F_nu - 1)`: a Poisson(`1 - nu_0`) number of `mu•` variables.
#[derive(Debug, Clone)]
pub struct ReducedOffspring {
    pub lambda: f64,
    pub positive: PositiveLaw,
    period: usize,
    table: Vec<f64>,
    /// Mass missing from the table.
    pub tail: f64,
}

/// Largest table index for the reduced offspring law.
const MU_TABLE_MAX: usize = 4096;

impl ReducedOffspring {
    pub fn new(ce: &CriticalEquivalent) -> Self {
        // k mu_k = sum_{j=1..k} j nu_j mu_{k-j}
        let mut table = vec![(ce.nu0 - 1.0).exp()];
        let nu: Vec<f64> = (0..=MU_TABLE_MAX).map(|i| ce.nu(i)).collect();
        let mut acc = table[0];
        let mut k = 0;
        while 1.0 - acc > 1e-13 && k < MU_TABLE_MAX {
            k += 1;
            let s: f64 = (1..=k).map(|j| j as f64 * nu[j] * table[k - j]).sum();
            table.push(s / k as f64);
            acc += table[k];
        }
        let tail = (1.0 - acc).max(0.0);
        ReducedOffspring { lambda: ce.lambda(), positive: ce.positive_law(), period: ce.period(), table, tail }
    }

    pub fn masses(&self) -> &[f64] {
        &self.table
    }

    pub fn variance(&self) -> f64 {
        let m1: f64 = self.table.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let m2: f64 = self.table.iter().enumerate().map(|(k, p)| (k * k) as f64 * p).sum();
        m2 - m1 * m1
    }
}

impl Offspring for ReducedOffspring {
    fn sample(&self, rng: &mut dyn RngCore) -> usize {
        let j = if self.lambda > 0.0 { Poisson::new(self.lambda).unwrap().sample(rng) as usize } else { 0 };
        (0..j).map(|_| self.positive.sample(rng)).sum()
    }

    fn pmf(&self, k: usize) -> f64 {
        self.table.get(k).copied().unwrap_or(0.0)
    }

    fn period(&self) -> usize {
        self.period
    }
}

/// `nu` as an offspring law: `0` with probability `nu_0`, else `mu•`.
#[derive(Debug, Clone)]
pub struct NuOffspring {
    nu0: f64,
    positive: PositiveLaw,
    period: usize,
    masses: CriticalEquivalent,
}

impl Offspring for NuOffspring {
    fn sample(&self, rng: &mut dyn RngCore) -> usize {
        if rng.random::<f64>() < self.nu0 {
            0
        } else {
            self.positive.sample(rng)
        }
    }

    fn pmf(&self, k: usize) -> f64 {
        self.masses.nu(k)
    }

    fn period(&self) -> usize {
        self.period
    }
}

/// Rotate a degree sequence with `sum (k_i - 1) = -1` into the unique
/// Lukasiewicz path (cycle lemma).
pub fn cycle_lemma_rotate(deg: &mut [usize]) {
    let n = deg.len();
    let mut w = 0i64;
    let mut best = (0i64, 0usize);
    for (i, &k) in deg.iter().enumerate() {
        w += k as i64 - 1;
        if w < best.0 {
            best = (w, i + 1);
        }
    }
    deg.rotate_left(best.1 % n);
}

pub const MAX_ATTEMPTS: usize = 50_000_000;

/// Galton-Watson tree conditioned to have `n` vertices: i.i.d. rejection on
/// the total offspring plus the cycle lemma; exact-table sequential sampling
/// for `n <= 64`.
pub fn sample_gw_conditioned(off: &dyn Offspring, n: usize, rng: &mut dyn RngCore) -> Result<PlaneTree, SamplingError> {
    if n == 0 {
        return Err(SamplingError::Periodicity { n, period: off.period() });
    }
    let d = off.period().max(1);
    if (n - 1) % d != 0 {
        return Err(SamplingError::Periodicity { n, period: d });
    }
    if n == 1 {
        return Ok(PlaneTree::singleton());
    }
    let mut deg = if n <= 64 { exact_table_degrees(off, n, rng)? } else { rejection_degrees(off, n, rng)? };
    cycle_lemma_rotate(&mut deg);
    Ok(PlaneTree::from_degrees(&deg).expect("cycle lemma"))
}

fn rejection_degrees(off: &dyn Offspring, n: usize, rng: &mut dyn RngCore) -> Result<Vec<usize>, SamplingError> {
    let target = n - 1;
    let mut deg = Vec::with_capacity(n);
    for _ in 0..MAX_ATTEMPTS / n.max(1) + 1 {
        deg.clear();
        let mut total = 0usize;
        for _ in 0..n {
            let k = off.sample(rng);
            total += k;
            if total > target {
                break;
            }
            deg.push(k);
        }
        if deg.len() == n && total == target {
            return Ok(deg);
        }
    }
    Err(SamplingError::Exhausted(MAX_ATTEMPTS))
}

/// Sequential sampling of `n` i.i.d. values conditioned on their sum, using
/// convolution powers of the offspring masses.
fn exact_table_degrees(off: &dyn Offspring, n: usize, rng: &mut dyn RngCore) -> Result<Vec<usize>, SamplingError> {
    let target = n - 1;
    let p: Vec<f64> = (0..=target).map(|k| off.pmf(k)).collect();
    // conv[m][s] = P(sum of m values = s)
    let mut conv = vec![vec![0.0; target + 1]; n + 1];
    conv[0][0] = 1.0;
    for m in 1..=n {
        for s in 0..=target {
            let mut acc = 0.0;
            for k in 0..=s {
                acc += p[k] * conv[m - 1][s - k];
            }
            conv[m][s] = acc;
        }
    }
    if conv[n][target] <= 0.0 {
        return Err(SamplingError::Periodicity { n, period: off.period() });
    }
    let mut deg = Vec::with_capacity(n);
    let mut rem = target;
    for i in 0..n {
        let left = n - i - 1;
        let z = conv[left + 1][rem];
        let mut u = rng.random::<f64>() * z;
        let mut pick = rem;
        for k in 0..=rem {
            let wk = p[k] * conv[left][rem - k];
            if u < wk {
                pick = k;
                break;
            }
            u -= wk;
        }
        // guard against rounding at the end of the scan
        while p[pick] * conv[left][rem - pick] <= 0.0 {
            pick -= 1;
        }
        deg.push(pick);
        rem -= pick;
    }
    Ok(deg)
}

/// `f_j(k) = P(mu•_1 + ... + mu•_j = k)`, extended on demand.
#[derive(Debug, Clone)]
pub struct DecorationTable {
    bullet: Vec<f64>,
    circ: Vec<f64>,
    rows: Vec<Vec<f64>>,
    kmax: usize,
    ce: CriticalEquivalent,
}

impl DecorationTable {
    pub fn new(ce: &CriticalEquivalent) -> Self {
        let mut t = DecorationTable { bullet: vec![], circ: vec![], rows: vec![], kmax: 0, ce: ce.clone() };
        t.grow(16);
        t
    }

    fn grow(&mut self, kmax: usize) {
        if kmax <= self.kmax && !self.rows.is_empty() {
            return;
        }
        let kmax = kmax.max(2 * self.kmax);
        self.kmax = kmax;
        self.bullet = (0..=kmax).map(|i| self.ce.mu_bullet(i)).collect();
        self.circ = (0..=kmax).map(|j| self.ce.mu_circ(j)).collect();
        let mut rows = vec![vec![0.0; kmax + 1]];
        rows[0][0] = 1.0;
        self.rows = rows;
    }

    fn row(&mut self, j: usize) -> &[f64] {
        while self.rows.len() <= j {
            let prev = self.rows.last().unwrap();
            let mut next = vec![0.0; self.kmax + 1];
            for (k, slot) in next.iter_mut().enumerate() {
                let mut acc = 0.0;
                for a in 1..=k {
                    acc += self.bullet[a] * prev[k - a];
                }
                *slot = acc;
            }
            self.rows.push(next);
        }
        &self.rows[j]
    }

    /// `f_j(k)`.
    pub fn f(&mut self, j: usize, k: usize) -> f64 {
        self.grow(k);
        self.row(j)[k]
    }

    pub fn mu_circ(&self, j: usize) -> f64 {
        self.circ.get(j).copied().unwrap_or_else(|| self.ce.mu_circ(j))
    }

    /// Block composition of `k` white grandchildren into black children:
    /// `P(j | k) ∝ mu°_j f_j(k)`, then sizes one at a time given the rest.
    pub fn sample_blocks(&mut self, k: usize, rng: &mut dyn RngCore) -> Vec<usize> {
        if k == 0 {
            return vec![];
        }
        self.grow(k);
        let mut weights = Vec::new();
        let mut total = 0.0;
        for j in 1..=k {
            let wj = self.mu_circ(j) * self.f(j, k);
            weights.push(wj);
            total += wj;
            if j > 2 && self.mu_circ(j) < 1e-30 * total {
                break;
            }
        }
        let mut u = rng.random::<f64>() * total;
        let mut j = weights.len();
        for (i, &wj) in weights.iter().enumerate() {
            if u < wj {
                j = i + 1;
                break;
            }
            u -= wj;
        }
        while weights[j - 1] <= 0.0 {
            j -= 1;
        }
        let mut blocks = Vec::with_capacity(j);
        let mut rem = k;
        for left in (0..j).rev() {
            if left == 0 {
                blocks.push(rem);
                break;
            }
            let z = self.f(left + 1, rem);
            let mut u = rng.random::<f64>() * z;
            let mut pick = 0;
            let mut last_ok = 0;
            for a in 1..=rem - left {
                let wa = self.bullet[a] * self.f(left, rem - a);
                if wa > 0.0 {
                    last_ok = a;
                }
                if u < wa {
                    pick = a;
                    break;
                }
                u -= wa;
            }
            if pick == 0 {
                pick = last_ok;
            }
            blocks.push(pick);
            rem -= pick;
        }
        blocks
    }
}

/// Two-type tree conditioned on `n` white vertices, with uniformly random
/// black labels (so in general not a valid labelling).
pub fn sample_btsg(ce: &CriticalEquivalent, n: usize, rng: &mut dyn RngCore) -> Result<LabelledBiTypeTree, SamplingError> {
    let mu = ce.reduced_offspring();
    let reduced = sample_gw_conditioned(&mu, n, rng)?;
    let mut deco = DecorationTable::new(ce);
    decorate(&reduced, &mut deco, rng)
}

/// Expand a white reduced tree into a two-type tree by sampling the block
/// compositions, then label black vertices uniformly.
pub fn decorate(
    reduced: &PlaneTree,
    deco: &mut DecorationTable,
    rng: &mut dyn RngCore,
) -> Result<LabelledBiTypeTree, SamplingError> {
    let n = reduced.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        let gc = reduced.children(v);
        let blocks = deco.sample_blocks(gc.len(), rng);
        let mut pos = 0;
        for a in blocks {
            let b = children.len();
            children.push(gc[pos..pos + a].to_vec());
            pos += a;
            children[v].push(b);
        }
    }
    let (tree, map) = PlaneTree::from_children(&children, 0).expect("decorated tree");
    let nb = children.len() - n;
    let mut perm: Vec<u32> = (1..=nb as u32).collect();
    perm.shuffle(rng);
    let mut labels = vec![0; tree.len()];
    for b in 0..nb {
        labels[map[n + b]] = perm[b];
    }
    Ok(LabelledBiTypeTree { tree, labels })
}

/// Sampler for random minimal factorizations driven by a weight sequence.
#[derive(Debug, Clone)]
pub struct FactorizationSampler {
    pub ce: CriticalEquivalent,
    mu: ReducedOffspring,
    deco: DecorationTable,
}

impl FactorizationSampler {
    pub fn new(w: &WeightSequence) -> Result<Self, SamplingError> {
        let ce = critical_equivalent(w)?;
        Ok(Self::from_critical(ce))
    }

    pub fn from_critical(ce: CriticalEquivalent) -> Self {
        let mu = ce.reduced_offspring();
        let deco = DecorationTable::new(&ce);
        FactorizationSampler { ce, mu, deco }
    }

    pub fn sample_btsg(&mut self, n: usize, rng: &mut dyn RngCore) -> Result<LabelledBiTypeTree, SamplingError> {
        let reduced = sample_gw_conditioned(&self.mu, n, rng)?;
        decorate(&reduced, &mut self.deco, rng)
    }

    /// Uniformly labelled two-type tree, reordered into a valid labelling and
    /// read back as a factorization.
    pub fn sample(&mut self, n: usize, rng: &mut dyn RngCore) -> Result<Factorization, SamplingError> {
        let t = self.sample_btsg(n, rng)?.canonical_reorder();
        Ok(psi_inverse(&t)?)
    }
}

pub fn sample_minimal_factorization(w: &WeightSequence, n: usize, rng: &mut dyn RngCore) -> Result<Factorization, SamplingError> {
    FactorizationSampler::new(w)?.sample(n, rng)
}

/// Threshold for [`shuffle_k`]; `Infinite` always moves subtrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShuffleThreshold {
    Finite(u32),
    Infinite,
}

/// Shuffle the black children of every white vertex, from the root down. If
/// all their labels exceed `k`, only the labels are permuted; otherwise the
/// children move together with their subtrees.
pub fn shuffle_k(t: &LabelledBiTypeTree, k: ShuffleThreshold, rng: &mut dyn RngCore) -> LabelledBiTypeTree {
    let tree = &t.tree;
    let mut children = tree.children_lists();
    let mut labels = t.labels.clone();
    for v in 0..tree.len() {
        if !t.is_white(v) || children[v].is_empty() {
            continue;
        }
        let all_above = match k {
            ShuffleThreshold::Infinite => false,
            ShuffleThreshold::Finite(k) => children[v].iter().all(|&b| t.labels[b] > k),
        };
        if all_above {
            let mut ls: Vec<u32> = children[v].iter().map(|&b| labels[b]).collect();
            ls.shuffle(rng);
            for (&b, l) in children[v].iter().zip(ls) {
                labels[b] = l;
            }
        } else {
            children[v].shuffle(rng);
        }
    }
    LabelledBiTypeTree { tree: tree.clone(), labels }.rebuild(&children)
}

pub fn rng_from_seed(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_critical_value() {
        let ce = critical_equivalent(&WeightSequence::Uniform).unwrap();
        let golden = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((ce.s - golden).abs() < 1e-12);
        assert!((ce.nu0 - golden).abs() < 1e-12);
        assert!((ce.sigma2.unwrap() - (5f64.sqrt() - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn delta_critical_values() {
        for j in 2..=6usize {
            let ce = critical_equivalent(&WeightSequence::Delta { r: j }).unwrap();
            let expect = (j as f64 - 2.0) / (j as f64 - 1.0);
            assert!((ce.nu0 - expect).abs() < 1e-12, "j = {j}");
            assert!((ce.nu(j - 1) - 1.0 / (j as f64 - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn powerlaw_preset_is_critical() {
        let w = WeightSequence::preset("powerlaw:1.5").unwrap();
        let ce = critical_equivalent(&w).unwrap();
        assert_eq!(ce.s, 1.0);
        assert_eq!(ce.alpha, 1.5);
        assert!(ce.sigma2.is_none());
        let expect = 1.0 - zeta(2.5) / zeta(1.5);
        assert!((ce.nu0 - expect).abs() < 1e-12);
    }

    #[test]
    fn zeta_values() {
        assert!((zeta(2.0) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-13);
        assert!((zeta(1.5) - 2.612_375_348_685_488).abs() < 1e-12);
    }

    #[test]
    fn subcritical_rejected() {
        let w = WeightSequence::Powerlaw { alpha: 1.5, c: Some(0.1) };
        assert!(matches!(critical_equivalent(&w), Err(SamplingError::NoCriticalEquivalent(_))));
    }

    #[test]
    fn tilting_leaves_equivalent_unchanged() {
        let w = WeightSequence::Explicit { weights: vec![0.3, 1.2, 0.0, 2.5] };
        let a = critical_equivalent(&w).unwrap();
        for q in [0.4, 1.7, 3.0] {
            let b = critical_equivalent(&w.tilted(q)).unwrap();
            for i in 0..6 {
                assert!((a.nu(i) - b.nu(i)).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn reduced_offspring_recursion() {
        let ce = critical_equivalent(&WeightSequence::Uniform).unwrap();
        let mu = ce.reduced_offspring();
        assert!(mu.tail < 1e-12);
        let m = mu.masses();
        assert!((m[0] - (ce.nu0 - 1.0).exp()).abs() < 1e-15);
        let mean: f64 = m.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        assert!((mean - 1.0).abs() < 1e-10);
        assert!((mu.variance() - (ce.sigma2.unwrap() + 1.0)).abs() < 1e-9);
        assert!((ce.sigma2_mu().unwrap() - mu.variance()).abs() < 1e-9);
    }

    #[test]
    fn decoration_composes_to_mu() {
        let ce = critical_equivalent(&WeightSequence::Explicit { weights: vec![0.5, 0.2, 0.7] }).unwrap();
        let mu = ce.reduced_offspring();
        let mut d = DecorationTable::new(&ce);
        for k in 0..12 {
            let s: f64 = (0..=k).map(|j| ce.mu_circ(j) * d.f(j, k)).sum();
            assert!((s - mu.pmf(k)).abs() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn gw_sizes_and_period() {
        let mut rng = rng_from_seed(1, 0);
        let ce = critical_equivalent(&WeightSequence::Delta { r: 3 }).unwrap();
        let mu = ce.reduced_offspring();
        assert!(matches!(sample_gw_conditioned(&mu, 4, &mut rng), Err(SamplingError::Periodicity { .. })));
        for n in [1, 3, 5, 65, 301] {
            let t = sample_gw_conditioned(&mu, n, &mut rng).unwrap();
            assert_eq!(t.len(), n);
        }
    }

    #[test]
    fn sampled_factorizations_are_minimal() {
        let mut rng = rng_from_seed(7, 0);
        for w in [WeightSequence::Uniform, WeightSequence::Delta { r: 3 }, WeightSequence::preset("powerlaw:1.5").unwrap()] {
            let mut s = FactorizationSampler::new(&w).unwrap();
            for n in [1usize, 5, 21, 201] {
                let f = s.sample(n, &mut rng).unwrap();
                assert!(f.is_minimal());
                if let WeightSequence::Delta { r } = w {
                    assert!(f.cycles.iter().all(|c| c.len() == r));
                }
            }
        }
    }

    #[test]
    fn shuffle_keeps_shape_counts() {
        let mut rng = rng_from_seed(3, 0);
        let mut s = FactorizationSampler::new(&WeightSequence::Uniform).unwrap();
        let t = s.sample_btsg(50, &mut rng).unwrap().canonical_reorder();
        for k in [ShuffleThreshold::Finite(0), ShuffleThreshold::Finite(5), ShuffleThreshold::Infinite] {
            let u = shuffle_k(&t, k, &mut rng);
            assert_eq!(u.num_white(), t.num_white());
            let mut a = u.tree.degrees();
            let mut b = t.tree.degrees();
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn presets_parse() {
        assert_eq!(WeightSequence::preset("delta:3").unwrap(), WeightSequence::Delta { r: 3 });
        assert!(WeightSequence::preset("delta:1").is_err());
        assert!(WeightSequence::preset("nope").is_err());
        let j: WeightSequence = serde_json::from_str(r#"{"kind":"explicit","weights":[1.0,0.5]}"#).unwrap();
        assert_eq!(j, WeightSequence::Explicit { weights: vec![1.0, 0.5] });
    }
}
