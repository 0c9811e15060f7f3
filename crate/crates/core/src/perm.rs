//! Permutations of `{1..n}`, cycles, and minimal factorizations of the
//! long cycle `c_n = (1 2 ... n)`.
//!
//! Products are read left to right: in `t1 t2` the cycle `t1` acts first.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("cycle must have at least two elements, got {0}")]
    TooShort(usize),
    #[error("cycle must be strictly increasing: {0:?}")]
    NotIncreasing(Vec<u32>),
    #[error("element {elem} outside 1..={n}")]
    OutOfRange { elem: u32, n: u32 },
    #[error("enumeration for n = {n} exceeds the bound {bound}")]
    BoundExceeded { n: u32, bound: u32 },
    #[error("class {0:?} does not satisfy sum(a_i - 1) = n - 1")]
    BadClass(Vec<usize>),
}

/// An increasing cycle `(e1 e2 ... el)` sending `e_j` to `e_{j+1}` and `el` to `e1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Cycle(Vec<u32>);

impl Cycle {
    pub fn new(elems: Vec<u32>) -> Result<Self, PermError> {
        if elems.len() < 2 {
            return Err(PermError::TooShort(elems.len()));
        }
        if elems.windows(2).any(|w| w[0] >= w[1]) || elems[0] == 0 {
            return Err(PermError::NotIncreasing(elems));
        }
        Ok(Cycle(elems))
    }

    pub fn elems(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> u32 {
        self.0[0]
    }

    pub fn max(&self) -> u32 {
        *self.0.last().unwrap()
    }
}

impl TryFrom<Vec<u32>> for Cycle {
    type Error = PermError;
    fn try_from(v: Vec<u32>) -> Result<Self, PermError> {
        Cycle::new(v)
    }
}

impl From<Cycle> for Vec<u32> {
    fn from(c: Cycle) -> Vec<u32> {
        c.0
    }
}

impl std::fmt::Display for Cycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(" "))
    }
}

/// A permutation of `{1..n}` stored as its image table (`img[x-1] = sigma(x)`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    img: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: u32) -> Self {
        Permutation { img: (1..=n).collect() }
    }

    /// The long cycle `1 -> 2 -> ... -> n -> 1`.
    pub fn long_cycle(n: u32) -> Self {
        Permutation { img: (1..=n).map(|x| if x == n { 1 } else { x + 1 }).collect() }
    }

    pub fn from_images(img: Vec<u32>) -> Option<Self> {
        let n = img.len();
        let mut seen = vec![false; n];
        for &y in &img {
            let y = y as usize;
            if y == 0 || y > n || seen[y - 1] {
                return None;
            }
            seen[y - 1] = true;
        }
        Some(Permutation { img })
    }

    pub fn n(&self) -> u32 {
        self.img.len() as u32
    }

    pub fn apply(&self, x: u32) -> u32 {
        self.img[x as usize - 1]
    }

    pub fn images(&self) -> &[u32] {
        &self.img
    }

    /// Composition `self` then `other` (so `other ∘ self` as maps).
    pub fn then(&self, other: &Permutation) -> Permutation {
        Permutation { img: self.img.iter().map(|&x| other.apply(x)).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.img.len()];
        for (i, &y) in self.img.iter().enumerate() {
            inv[y as usize - 1] = i as u32 + 1;
        }
        Permutation { img: inv }
    }

    /// Apply a cycle after `self`, in place.
    pub fn then_cycle(&mut self, c: &Cycle) {
        let e = c.elems();
        let l = e.len();
        for y in self.img.iter_mut() {
            if let Ok(pos) = e.binary_search(y) {
                *y = e[(pos + 1) % l];
            }
        }
    }

    pub fn num_cycles(&self) -> usize {
        let n = self.img.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                x = self.img[x] as usize - 1;
            }
        }
        count
    }

    /// Minimal number of transpositions needed to write the permutation.
    pub fn defect(&self) -> usize {
        self.img.len() - self.num_cycles()
    }
}

/// Product of cycles on `{1..n}`, first cycle acting first.
pub fn compose(cycles: &[Cycle], n: u32) -> Result<Permutation, PermError> {
    let mut p = Permutation::identity(n);
    for c in cycles {
        if c.max() > n {
            return Err(PermError::OutOfRange { elem: c.max(), n });
        }
        p.then_cycle(c);
    }
    Ok(p)
}

/// A sequence of cycles on `{1..n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factorization {
    pub n: u32,
    pub cycles: Vec<Cycle>,
}

/// Why a cycle sequence fails to be a minimal factorization of `c_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum MinimalityViolation {
    OutOfRange { elem: u32 },
    LengthDefect { total: usize, expected: usize },
    WrongProduct { first_mismatch: u32, image: u32 },
}

impl std::fmt::Display for MinimalityViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MinimalityViolation::OutOfRange { elem } => write!(f, "element {elem} out of range"),
            MinimalityViolation::LengthDefect { total, expected } => {
                write!(f, "sum of (length - 1) is {total}, expected {expected}")
            }
            MinimalityViolation::WrongProduct { first_mismatch, image } => {
                write!(f, "product sends {first_mismatch} to {image}")
            }
        }
    }
}

impl Factorization {
    pub fn new(n: u32, cycles: Vec<Cycle>) -> Self {
        Factorization { n, cycles }
    }

    pub fn k(&self) -> usize {
        self.cycles.len()
    }

    pub fn product(&self) -> Result<Permutation, PermError> {
        compose(&self.cycles, self.n)
    }

    /// Cycle lengths in order.
    pub fn class(&self) -> Vec<usize> {
        self.cycles.iter().map(|c| c.len()).collect()
    }

    pub fn largest_cycle(&self) -> usize {
        self.cycles.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    pub fn check_minimal(&self) -> Result<(), MinimalityViolation> {
        for c in &self.cycles {
            if c.max() > self.n {
                return Err(MinimalityViolation::OutOfRange { elem: c.max() });
            }
        }
        let total: usize = self.cycles.iter().map(|c| c.len() - 1).sum();
        let expected = self.n.saturating_sub(1) as usize;
        if total != expected {
            return Err(MinimalityViolation::LengthDefect { total, expected });
        }
        let p = self.product().expect("range checked");
        let c = Permutation::long_cycle(self.n);
        for x in 1..=self.n {
            if p.apply(x) != c.apply(x) {
                return Err(MinimalityViolation::WrongProduct { first_mismatch: x, image: p.apply(x) });
            }
        }
        Ok(())
    }

    pub fn is_minimal(&self) -> bool {
        self.check_minimal().is_ok()
    }

    /// Replace each `(d1 ... dl)` by `(d1 d2)(d1 d3)...(d1 dl)`.
    pub fn transposition_slicing(&self) -> Factorization {
        let mut out = Vec::with_capacity(self.n as usize);
        for c in &self.cycles {
            let e = c.elems();
            for &d in &e[1..] {
                out.push(Cycle(vec![e[0], d]));
            }
        }
        Factorization { n: self.n, cycles: out }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": crate::SCHEMA_FACTORIZATION,
            "n": self.n,
            "cycles": self.cycles,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, serde_json::Error> {
        serde_json::from_value(v.clone())
    }
}

impl std::fmt::Display for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.cycles {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Default size bound for exhaustive enumeration.
pub const ENUMERATION_BOUND: u32 = 7;

/// All increasing cycles on `{1..n}` of the given length (or any length >= 2).
fn candidate_cycles(n: u32, len: Option<usize>) -> Vec<Cycle> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let l = mask.count_ones() as usize;
        if l < 2 || len.is_some_and(|want| want != l) {
            continue;
        }
        let elems: Vec<u32> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
        out.push(Cycle(elems));
    }
    out
}

/// Exhaustive depth-first enumeration of the minimal factorizations of `c_n`,
/// optionally restricted to the ordered cycle type `class`.
///
/// Branches are pruned by requiring every prefix product `P` and the matching
/// remainder `c_n P^{-1}` to stay geodesic in the transposition metric.
pub fn enumerate_minimal_factorizations(
    n: u32,
    class: Option<&[usize]>,
    bound: u32,
) -> Result<Vec<Factorization>, PermError> {
    if n > bound {
        return Err(PermError::BoundExceeded { n, bound });
    }
    if let Some(cl) = class {
        let s: usize = cl.iter().map(|&a| a.saturating_sub(1)).sum();
        if cl.iter().any(|&a| a < 2) || s + 1 != n as usize {
            return Err(PermError::BadClass(cl.to_vec()));
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return Ok(out);
    }
    if n == 1 {
        out.push(Factorization::new(1, vec![]));
        return Ok(out);
    }
    let all = candidate_cycles(n, None);
    let by_len: Vec<Vec<Cycle>> = (0..=n as usize).map(|l| candidate_cycles(n, Some(l))).collect();
    let target = Permutation::long_cycle(n);
    let mut stack = Vec::new();
    dfs(n, class, &all, &by_len, &target, &Permutation::identity(n), 0, &mut stack, &mut out);
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    n: u32,
    class: Option<&[usize]>,
    all: &[Cycle],
    by_len: &[Vec<Cycle>],
    target: &Permutation,
    prefix: &Permutation,
    used: usize,
    stack: &mut Vec<Cycle>,
    out: &mut Vec<Factorization>,
) {
    let need = n as usize - 1;
    if used == need {
        if prefix == target {
            out.push(Factorization::new(n, stack.clone()));
        }
        return;
    }
    let cands: &[Cycle] = match class {
        Some(cl) => match cl.get(stack.len()) {
            Some(&l) => &by_len[l],
            None => return,
        },
        None => all,
    };
    for c in cands {
        let l = c.len() - 1;
        if used + l > need {
            continue;
        }
        let mut p = prefix.clone();
        p.then_cycle(c);
        if p.defect() != used + l {
            continue;
        }
        // remainder r with p then r = target
        let r = p.inverse().then(target);
        if r.defect() != need - used - l {
            continue;
        }
        stack.push(c.clone());
        dfs(n, class, all, by_len, target, &p, used + l, stack, out);
        stack.pop();
    }
}

/// All ordered cycle types `(a_1, ..., a_k)` with `a_i >= 2` and `sum(a_i - 1) = n - 1`.
pub fn ordered_classes(n: u32) -> Vec<Vec<usize>> {
    fn rec(rem: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for d in 1..=rem {
            cur.push(d + 1);
            rec(rem - d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n >= 1 {
        rec(n as usize - 1, &mut Vec::new(), &mut out);
    }
    out
}
