//! Lamination-valued processes coded by trees and by excursions.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::bijection::psi;
use crate::lamination::{hausdorff_convex, BlackFace, Chord, ColoredLamination, UnitAngle};
use crate::perm::Factorization;
use crate::sampling::{critical_equivalent, sample_gw_conditioned, SamplingError, WeightSequence};
use crate::trees::{Contour, LabelledBiTypeTree, PlaneTree};

/// Chord `[g(v) / 2|T|, d(v) / 2|T|]` between the first and last visit of `v`.
pub fn chord_of_vertex(c: &Contour, size: usize, v: usize) -> Chord {
    let den = 2 * size as i64;
    Chord::new(UnitAngle::new(c.first(v) as i64, den), UnitAngle::new(c.last(v) as i64, den))
}

/// Hull of all visit times of `v`, over `2|T|`.
pub fn face_of_vertex(c: &Contour, size: usize, v: usize, label: Option<u32>) -> BlackFace {
    let den = 2 * size as i64;
    BlackFace::new(c.visits(v).iter().map(|&t| UnitAngle::new(t as i64, den)).collect(), label)
}

/// `S_c(f)`: the first `floor(c)` cycles drawn as faces.
pub fn process_s(f: &Factorization, c: f64) -> ColoredLamination {
    crate::lamination::s_c(f, c)
}

/// Faces of the black vertices with label `<= c`, ordered by label.
pub fn black_process(t: &LabelledBiTypeTree, c: f64) -> ColoredLamination {
    let contour = t.tree.contour_walk();
    let mut lam = ColoredLamination::default();
    for (i, &b) in t.blacks_by_label().iter().enumerate() {
        let label = i as u32 + 1;
        if label as f64 > c {
            break;
        }
        lam.push_face(face_of_vertex(&contour, t.tree.len(), b, Some(label)));
    }
    lam
}

/// Root first, then the other vertices in uniform random order.
pub fn white_order(size: usize, rng: &mut dyn RngCore) -> Vec<usize> {
    let mut rest: Vec<usize> = (1..size).collect();
    rest.shuffle(rng);
    let mut out = Vec::with_capacity(size);
    out.push(0);
    out.extend(rest);
    out
}

/// Chords of the first `floor(c)` vertices of `order` in the plane tree `t`.
pub fn white_process(t: &PlaneTree, order: &[usize], c: f64) -> ColoredLamination {
    let contour = t.contour_walk();
    let mut lam = ColoredLamination::default();
    for (i, &v) in order.iter().enumerate() {
        if (i + 1) as f64 > c {
            break;
        }
        lam.chords.push(chord_of_vertex(&contour, t.len(), v));
    }
    lam
}

/// Black labels induced by a uniform white labelling: each black vertex
/// follows its white child with the largest reduced subtree.
#[derive(Debug, Clone)]
pub struct Coupling {
    /// White reduced tree and the original vertex of each of its vertices.
    pub reduced: PlaneTree,
    pub whites: Vec<usize>,
    /// Uniform white order in the reduced tree, root first.
    pub white_order: Vec<usize>,
    /// For each black label `i` (index `i - 1`), the black vertex of `T`.
    pub black_by_label: Vec<usize>,
    /// For each black label, the reduced-tree index of its marked white child.
    pub marked: Vec<usize>,
}

pub fn couple(t: &LabelledBiTypeTree, rng: &mut dyn RngCore) -> Coupling {
    let (reduced, whites) = t.tree.white_reduced();
    let mut index_of = vec![usize::MAX; t.tree.len()];
    for (i, &w) in whites.iter().enumerate() {
        index_of[w] = i;
    }
    let order = white_order(reduced.len(), rng);
    let mut rank = vec![0usize; reduced.len()];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for b in 0..t.tree.len() {
        if t.is_white(b) {
            continue;
        }
        let ch = t.tree.children(b);
        let best = ch.iter().map(|&w| reduced.subtree_size(index_of[w])).max().unwrap();
        let ties: Vec<usize> = ch.iter().map(|&w| index_of[w]).filter(|&i| reduced.subtree_size(i) == best).collect();
        let k = ties[rng.random_range(0..ties.len())];
        pairs.push((rank[k], b, k));
    }
    pairs.sort_unstable();
    Coupling {
        reduced,
        whites,
        white_order: order,
        black_by_label: pairs.iter().map(|p| p.1).collect(),
        marked: pairs.iter().map(|p| p.2).collect(),
    }
}

impl Coupling {
    /// The tree relabelled with the induced black labels.
    pub fn relabelled(&self, t: &LabelledBiTypeTree) -> LabelledBiTypeTree {
        let mut labels = vec![0; t.tree.len()];
        for (i, &b) in self.black_by_label.iter().enumerate() {
            labels[b] = i as u32 + 1;
        }
        LabelledBiTypeTree { tree: t.tree.clone(), labels }
    }

    /// `max_{i <= m} d_H(c_{k(u_i)}(T°), F_{u_i}(T))`.
    pub fn max_distance(&self, t: &LabelledBiTypeTree, m: usize) -> f64 {
        let ct = t.tree.contour_walk();
        let cr = self.reduced.contour_walk();
        let mut worst = 0.0f64;
        for i in 0..m.min(self.black_by_label.len()) {
            let face = face_of_vertex(&ct, t.tree.len(), self.black_by_label[i], None).points();
            let chord = chord_of_vertex(&cr, self.reduced.len(), self.marked[i]).endpoints();
            worst = worst.max(hausdorff_convex(&face, &chord));
        }
        worst
    }
}

/// `max_j d_H(F_j(f), F_{u_j}(T(f)))`, where `u_j` is the black vertex of the
/// dual tree with label `j`.
pub fn label_face_distance(f: &Factorization) -> Result<f64, crate::bijection::BijectionError> {
    let t = psi(f)?;
    let contour = t.tree.contour_walk();
    let blacks = t.blacks_by_label();
    let mut worst = 0.0f64;
    for (j, c) in f.cycles.iter().enumerate() {
        let a = crate::lamination::face_of_cycle(c, f.n, None).points();
        let b = face_of_vertex(&contour, t.tree.len(), blacks[j], None).points();
        worst = worst.max(hausdorff_convex(&a, &b));
    }
    Ok(worst)
}

/// Continuous piecewise-linear excursion on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Excursion {
    pub s: Vec<f64>,
    pub f: Vec<f64>,
}

impl Excursion {
    pub fn new(s: Vec<f64>, f: Vec<f64>) -> Result<Self, String> {
        if s.len() != f.len() || s.len() < 2 {
            return Err("need matching breakpoint arrays".into());
        }
        if s[0] != 0.0 || *s.last().unwrap() != 1.0 || s.windows(2).any(|w| w[0] >= w[1]) {
            return Err("abscissae must increase from 0 to 1".into());
        }
        if f[0] != 0.0 || *f.last().unwrap() != 0.0 || f.iter().any(|&x| !(x >= 0.0)) {
            return Err("values must be >= 0 and vanish at both ends".into());
        }
        Ok(Excursion { s, f })
    }

    pub fn tent() -> Self {
        Excursion { s: vec![0.0, 0.5, 1.0], f: vec![0.0, 1.0, 0.0] }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.s.partition_point(|&v| v <= x).clamp(1, self.s.len() - 1);
        let (s0, s1, f0, f1) = (self.s[i - 1], self.s[i], self.f[i - 1], self.f[i]);
        f0 + (x - s0) / (s1 - s0) * (f1 - f0)
    }

    pub fn max(&self) -> f64 {
        self.f.iter().copied().fold(0.0, f64::max)
    }
}

/// Rescaled contour `scale * C_{2nt}` of a tree with `n` vertices.
pub fn excursion_from_tree(t: &PlaneTree, scale: f64) -> Excursion {
    let c = t.contour();
    let m = (c.len() - 1) as f64;
    let s = (0..c.len()).map(|i| i as f64 / m).collect();
    let f = c.iter().map(|&h| h as f64 * scale).collect();
    Excursion { s, f }
}

/// Contour of a conditioned Galton-Watson tree of size `m`, rescaled by
/// `B_m / m`, as a discrete stand-in for the normalized stable excursion.
/// `alpha = 2` uses the critical equivalent of the uniform sequence; `alpha < 2`
/// uses the power-law preset.
pub fn stable_excursion_approx(alpha: f64, m: usize, rng: &mut dyn RngCore) -> Result<Excursion, SamplingError> {
    let w = if alpha >= 2.0 { WeightSequence::Uniform } else { WeightSequence::Powerlaw { alpha, c: None } };
    let ce = critical_equivalent(&w)?;
    let t = sample_gw_conditioned(&ce.nu_offspring(), m, rng)?;
    let b = crate::stats::scaling_constants(&ce, m).b_n;
    Ok(excursion_from_tree(&t, b / m as f64))
}

/// A chord with real endpoints `e^{-2 i pi g}`, `e^{-2 i pi d}`, born at time `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedChord {
    pub r: f64,
    pub g: f64,
    pub d: f64,
}

/// Level band on which the excursion interval above `t` has linear ends.
#[derive(Debug, Clone, Copy)]
struct Cell {
    t0: f64,
    t1: f64,
    g0: f64,
    gk: f64,
    d0: f64,
    dk: f64,
}

impl Cell {
    fn g(&self, t: f64) -> f64 {
        self.g0 + self.gk * t
    }
    fn d(&self, t: f64) -> f64 {
        self.d0 + self.dk * t
    }
}

fn cells(e: &Excursion) -> Vec<Cell> {
    let mut levels: Vec<f64> = e.f.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let m = e.s.len();
    let cross = |i: usize, j: usize| {
        // line through (f_i, s_i) and (f_j, s_j) as s = a + k t
        let k = (e.s[j] - e.s[i]) / (e.f[j] - e.f[i]);
        (e.s[i] - k * e.f[i], k)
    };
    let mut out = Vec::new();
    for w in levels.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let mut i = 0;
        while i < m {
            if e.f[i] >= t1 {
                let start = i;
                while i + 1 < m && e.f[i + 1] >= t1 {
                    i += 1;
                }
                let end = i;
                let (g0, gk) = cross(start - 1, start);
                let (d0, dk) = cross(end, end + 1);
                out.push(Cell { t0, t1, g0, gk, d0, dk });
            }
            i += 1;
        }
    }
    out
}

/// Exact Poisson process of chords `[g, d]` with intensity
/// `2 ds dt / (d - g) dr` on `{0 <= t < F(s)} x [0, c]`, restricted to
/// `d - g >= eps`. Within a level band the chord ends move linearly, so the
/// restricted intensity integrates to `2 c` per unit level.
pub fn sample_l_c_of_f(e: &Excursion, c: f64, eps: f64, rng: &mut dyn RngCore) -> Vec<TimedChord> {
    let mut out = Vec::new();
    for cell in cells(e) {
        // width w(t) = (d0 - g0) + (dk - gk) t is decreasing in t
        let (w0, wk) = (cell.d0 - cell.g0, cell.dk - cell.gk);
        let hi = if wk < 0.0 { ((w0 - eps) / -wk).min(cell.t1) } else if w0 + wk * cell.t0 >= eps { cell.t1 } else { cell.t0 };
        let len = hi - cell.t0;
        if len <= 0.0 {
            continue;
        }
        let mean = 2.0 * c * len;
        let k = Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0);
        for _ in 0..k {
            let t = cell.t0 + rng.random::<f64>() * len;
            let r = rng.random::<f64>() * c;
            out.push(TimedChord { r, g: cell.g(t), d: cell.d(t) });
        }
    }
    out.sort_by(|a, b| a.r.total_cmp(&b.r));
    out
}

/// One record of a frame dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub r: f64,
    #[serde(rename = "type")]
    pub kind: String,
    pub angles: Vec<f64>,
}

/// JSON lines for a labelled lamination: faces by label, then unlabelled chords.
pub fn frames_jsonl(lam: &ColoredLamination) -> String {
    let mut out = String::new();
    let mut face_edges = std::collections::HashSet::new();
    for f in &lam.faces {
        for e in f.edges() {
            face_edges.insert(e);
        }
        let rec = FrameRecord {
            r: f.label.map(|l| l as f64).unwrap_or(0.0),
            kind: "face".into(),
            angles: f.corners.iter().map(|a| a.to_f64()).collect(),
        };
        out.push_str(&serde_json::to_string(&rec).unwrap());
        out.push('\n');
    }
    for (i, ch) in lam.chords.iter().filter(|c| !face_edges.contains(*c)).enumerate() {
        let rec = FrameRecord { r: (i + 1) as f64, kind: "chord".into(), angles: vec![ch.a.to_f64(), ch.b.to_f64()] };
        out.push_str(&serde_json::to_string(&rec).unwrap());
        out.push('\n');
    }
    out
}

pub fn timed_chords_jsonl(chords: &[TimedChord]) -> String {
    let mut out = String::new();
    for c in chords {
        let rec = FrameRecord { r: c.r, kind: "chord".into(), angles: vec![c.g, c.d] };
        out.push_str(&serde_json::to_string(&rec).unwrap());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::rng_from_seed;

    #[test]
    fn leaf_chord_is_a_point() {
        let t = PlaneTree::from_degrees(&[2, 0, 0]).unwrap();
        let c = t.contour_walk();
        assert!(chord_of_vertex(&c, 3, 1).is_degenerate());
        let root = chord_of_vertex(&c, 3, 0);
        assert_eq!((root.a, root.b), (UnitAngle::new(0, 6), UnitAngle::new(4, 6)));
        assert_eq!(face_of_vertex(&c, 3, 0, None).corners.len(), 3);
    }

    #[test]
    fn tent_cells() {
        let cs = cells(&Excursion::tent());
        assert_eq!(cs.len(), 1);
        assert!((cs[0].g(0.5) - 0.25).abs() < 1e-15);
        assert!((cs[0].d(0.5) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn ppp_chords_noncrossing_nested() {
        let mut rng = rng_from_seed(5, 0);
        let e = Excursion::new(vec![0.0, 0.2, 0.4, 0.7, 1.0], vec![0.0, 0.8, 0.3, 1.1, 0.0]).unwrap();
        let ch = sample_l_c_of_f(&e, 5.0, 0.05, &mut rng);
        assert!(!ch.is_empty());
        for a in &ch {
            assert!(a.d - a.g >= 0.05 - 1e-12);
            for b in &ch {
                let cross = (a.g < b.g && b.g < a.d && a.d < b.d) || (b.g < a.g && a.g < b.d && b.d < a.d);
                assert!(!cross);
            }
        }
    }

    #[test]
    fn tree_excursion_shape() {
        let t = PlaneTree::from_degrees(&[2, 0, 1, 0]).unwrap();
        let e = excursion_from_tree(&t, 1.0);
        assert_eq!(e.f, vec![0.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 0.0, 0.0]);
        Excursion::new(e.s.clone(), e.f.clone()).unwrap();
    }

    #[test]
    fn black_process_matches_faces() {
        let mut rng = rng_from_seed(11, 0);
        let mut s = crate::sampling::FactorizationSampler::new(&WeightSequence::Uniform).unwrap();
        let f = s.sample(60, &mut rng).unwrap();
        let t = psi(&f).unwrap();
        let lam = black_process(&t, f64::INFINITY);
        assert_eq!(lam.faces.len(), f.k());
        assert_eq!(black_process(&t, 2.0).faces.len(), 2.min(f.k()));
        assert!(label_face_distance(&f).unwrap() < 2.0);
        let cp = couple(&t, &mut rng);
        assert_eq!(cp.black_by_label.len(), f.k());
        let w = white_process(&cp.reduced, &cp.white_order, 10.0);
        assert_eq!(w.chords.len(), 10);
        assert!(cp.max_distance(&t, 5).is_finite());
    }

    #[test]
    fn frame_dump_lines() {
        let f = crate::perm::Factorization::new(3, vec![crate::perm::Cycle::new(vec![1, 2, 3]).unwrap()]);
        let s = frames_jsonl(&process_s(&f, f64::INFINITY));
        let rec: FrameRecord = serde_json::from_str(s.lines().next().unwrap()).unwrap();
        assert_eq!(rec.kind, "face");
        assert_eq!(rec.angles.len(), 3);
    }
}
