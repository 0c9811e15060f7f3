//! Bijections between minimal factorizations, labelled laminations and
//! labelled bi-type trees.

use thiserror::Error;

use crate::lamination::{dual_structure, face_of_cycle, validate_properties, BlackFace, ColoredLamination, PropertyViolation, UnitAngle};
use crate::perm::{Cycle, Factorization, MinimalityViolation};
use crate::trees::{LabelledBiTypeTree, PlaneTree, UnViolation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BijectionError {
    #[error("not a minimal factorization: {0}")]
    NotMinimal(MinimalityViolation),
    #[error("lamination fails a property: {0}")]
    Property(PropertyViolation),
    #[error("tree not in the image set: {0}")]
    NotInImage(UnViolation),
    #[error("face corners are not contiguous below black vertex {0}")]
    Drawing(usize),
    #[error("inverse produced a cycle sequence whose product is not the long cycle")]
    Product,
}

/// Labelled lamination: face `i` is the hull of the `i`-th cycle.
pub fn phi(f: &Factorization) -> Result<ColoredLamination, BijectionError> {
    f.check_minimal().map_err(BijectionError::NotMinimal)?;
    Ok(crate::lamination::s_c(f, f64::INFINITY))
}

/// Read back the factorization from a labelled lamination with corners on the
/// `n`-th roots of unity.
pub fn phi_inverse(lam: &ColoredLamination, n: u32) -> Result<Factorization, BijectionError> {
    validate_properties(lam, n).map_err(BijectionError::Property)?;
    let mut faces: Vec<(u32, Vec<u32>)> = lam
        .faces
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let mut c: Vec<u32> = f.corners.iter().map(|a| a.position(n).unwrap()).collect();
            c.sort_unstable();
            (f.label.unwrap_or(i as u32 + 1), c)
        })
        .collect();
    faces.sort();
    let cycles = faces.into_iter().map(|(_, c)| Cycle::new(c).expect("distinct corners")).collect();
    let f = Factorization::new(n, cycles);
    f.check_minimal().map_err(BijectionError::NotMinimal)?;
    Ok(f)
}

/// Dual tree of the labelled lamination: white vertices are the white regions
/// (the root holds arc `(0, 1]`), black vertices are the faces, labelled by
/// cycle index.
pub fn psi(f: &Factorization) -> Result<LabelledBiTypeTree, BijectionError> {
    f.check_minimal().map_err(BijectionError::NotMinimal)?;
    let faces: Vec<Vec<u32>> = f.cycles.iter().map(|c| c.elems().to_vec()).collect();
    let dual = dual_structure(f.n, &faces);
    let r = dual.regions.len();
    let mut children: Vec<Vec<usize>> = Vec::with_capacity(r + faces.len());
    for reg in &dual.regions {
        children.push(reg.child_faces.iter().map(|&b| r + b).collect());
    }
    for gaps in &dual.face_gaps {
        children.push(gaps.clone());
    }
    let (tree, map) = PlaneTree::from_children(&children, 0).expect("dual of a tree-like lamination");
    let mut labels = vec![0; tree.len()];
    for b in 0..faces.len() {
        labels[map[r + b]] = b as u32 + 1;
    }
    Ok(LabelledBiTypeTree { tree, labels })
}

/// Labels of white vertices from the white exploration (`0` on black vertices).
///
/// The root gets `1`. Below a white vertex whose parent carries label `a`, the
/// subtrees of black children labelled `< a` are explored first, then the
/// vertex itself, then the children labelled `> a`; a black vertex explores
/// its white children left to right.
pub fn white_exploration_labels(t: &LabelledBiTypeTree) -> Vec<u32> {
    enum Task {
        White(usize),
        Visit(usize),
        Black(usize),
    }
    let tree = &t.tree;
    let mut out = vec![0u32; tree.len()];
    let mut next = 1u32;
    let mut stack = vec![Task::White(0)];
    while let Some(task) = stack.pop() {
        match task {
            Task::Visit(v) => {
                out[v] = next;
                next += 1;
            }
            Task::Black(b) => {
                for &w in tree.children(b).iter().rev() {
                    stack.push(Task::White(w));
                }
            }
            Task::White(v) => {
                let a = tree.parent(v).map(|p| t.labels[p]).unwrap_or(0);
                let ch = tree.children(v);
                let (low, high): (Vec<usize>, Vec<usize>) = ch.iter().partition(|&&b| t.labels[b] < a);
                for &b in high.iter().rev() {
                    stack.push(Task::Black(b));
                }
                stack.push(Task::Visit(v));
                for &b in low.iter().rev() {
                    stack.push(Task::Black(b));
                }
            }
        }
    }
    out
}

/// Minimum and maximum white-exploration label in every subtree.
fn subtree_label_range(t: &LabelledBiTypeTree, wl: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let n = t.tree.len();
    let mut lo = vec![u32::MAX; n];
    let mut hi = vec![0u32; n];
    for v in (0..n).rev() {
        if wl[v] > 0 {
            lo[v] = lo[v].min(wl[v]);
            hi[v] = hi[v].max(wl[v]);
        }
        if let Some(p) = t.tree.parent(v) {
            lo[p] = lo[p].min(lo[v]);
            hi[p] = hi[p].max(hi[v]);
        }
    }
    (lo, hi)
}

/// Inverse of [`psi`]. The cycle of black vertex `b` is
/// `(m - 1, r_1, ..., r_j)` where `m` is the smallest white label below `b`
/// and `r_i` is the largest white label below its `i`-th child.
pub fn psi_inverse(t: &LabelledBiTypeTree) -> Result<Factorization, BijectionError> {
    let n = t.num_white();
    t.validate_un(n).map_err(BijectionError::NotInImage)?;
    let wl = white_exploration_labels(t);
    let (lo, hi) = subtree_label_range(t, &wl);
    let blacks = t.blacks_by_label();
    let mut cycles = Vec::with_capacity(blacks.len());
    for &b in &blacks {
        let mut e = vec![lo[b] - 1];
        e.extend(t.tree.children(b).iter().map(|&w| hi[w]));
        cycles.push(Cycle::new(e).map_err(|_| BijectionError::Product)?);
    }
    let f = Factorization::new(n as u32, cycles);
    if cfg!(debug_assertions) && !f.is_minimal() {
        return Err(BijectionError::Product);
    }
    Ok(f)
}

/// Draw the faces from the leaves up: each white vertex owns the contiguous
/// block of arcs of its subtree, and a black vertex is the hull of the corners
/// separating its children's blocks.
pub fn lamination_from_tree(t: &LabelledBiTypeTree) -> Result<ColoredLamination, BijectionError> {
    let n = t.num_white();
    t.validate_un(n).map_err(BijectionError::NotInImage)?;
    let wl = white_exploration_labels(t);
    let tree = &t.tree;
    // block (lo, hi] of arcs owned by each vertex
    let mut block: Vec<(u32, u32)> = vec![(0, 0); tree.len()];
    let mut faces = Vec::new();
    for v in (0..tree.len()).rev() {
        let ch = tree.children(v);
        if t.is_white(v) {
            let own = (wl[v] - 1, wl[v]);
            let mut parts: Vec<(u32, u32)> = ch.iter().map(|&b| block[b]).collect();
            parts.push(own);
            parts.sort_unstable();
            for w in parts.windows(2) {
                if w[0].1 != w[1].0 {
                    return Err(BijectionError::Drawing(v));
                }
            }
            block[v] = (parts[0].0, parts.last().unwrap().1);
        } else {
            for w in ch.windows(2) {
                if block[w[0]].1 != block[w[1]].0 {
                    return Err(BijectionError::Drawing(v));
                }
            }
            block[v] = (block[ch[0]].0, block[*ch.last().unwrap()].1);
            let mut corners = vec![UnitAngle::new(block[ch[0]].0 as i64, n as i64)];
            corners.extend(ch.iter().map(|&w| UnitAngle::new(block[w].1 as i64, n as i64)));
            faces.push(BlackFace::new(corners, Some(t.labels[v])));
        }
    }
    faces.sort_by_key(|f| f.label);
    let mut lam = ColoredLamination::default();
    for f in faces {
        lam.push_face(f);
    }
    Ok(lam)
}

/// Faces of `f` as integer corner lists, for callers working combinatorially.
pub fn faces_of(f: &Factorization) -> Vec<BlackFace> {
    f.cycles.iter().enumerate().map(|(i, c)| face_of_cycle(c, f.n, Some(i as u32 + 1))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::enumerate_minimal_factorizations;
    use crate::trees::enumerate_labelled_bitype;

    fn c(v: &[u32]) -> Cycle {
        Cycle::new(v.to_vec()).unwrap()
    }

    fn example() -> Factorization {
        Factorization::new(8, vec![c(&[5, 6, 7, 8]), c(&[2, 3]), c(&[1, 2, 5]), c(&[4, 5])])
    }

    /// The eight-white-vertex example tree, built by hand.
    fn example_tree() -> LabelledBiTypeTree {
        // 0 root; 1 black(3); 2 white A; 3 white B; 4 black(2); 5 leaf; 6 black(4); 7 leaf;
        // 8 black(1); 9, 10, 11 leaves
        let children = vec![
            vec![1, 8],
            vec![2, 3],
            vec![],
            vec![4, 6],
            vec![5],
            vec![],
            vec![7],
            vec![],
            vec![9, 10, 11],
            vec![],
            vec![],
            vec![],
        ];
        let (tree, map) = PlaneTree::from_children(&children, 0).unwrap();
        let mut labels = vec![0; tree.len()];
        for (old, l) in [(1, 3), (4, 2), (6, 4), (8, 1)] {
            labels[map[old]] = l;
        }
        LabelledBiTypeTree::new(tree, labels).unwrap()
    }

    #[test]
    fn example_tree_maps_to_example() {
        let t = example_tree();
        t.validate_un(8).unwrap();
        let wl = white_exploration_labels(&t);
        let whites: Vec<u32> = (0..t.tree.len()).filter(|&v| t.is_white(v)).map(|v| wl[v]).collect();
        assert_eq!(whites, vec![1, 2, 4, 3, 5, 6, 7, 8]);
        assert_eq!(psi_inverse(&t).unwrap(), example());
        assert_eq!(psi(&example()).unwrap(), t);
    }

    #[test]
    fn round_trips_exhaustive() {
        for n in 1..=6u32 {
            let all = enumerate_minimal_factorizations(n, None, 7).unwrap();
            for f in &all {
                let t = psi(f).unwrap();
                t.validate_un(n as usize).unwrap();
                assert_eq!(&psi_inverse(&t).unwrap(), f);
                let lam = phi(f).unwrap();
                assert_eq!(&phi_inverse(&lam, n).unwrap(), f);
                let drawn = lamination_from_tree(&t).unwrap();
                assert_eq!(&phi_inverse(&drawn, n).unwrap(), f);
            }
        }
    }

    #[test]
    fn image_set_counts_match() {
        for n in 1..=5usize {
            let trees = enumerate_labelled_bitype(n);
            let facts = enumerate_minimal_factorizations(n as u32, None, 7).unwrap();
            assert_eq!(trees.len(), facts.len(), "n = {n}");
            for t in &trees {
                assert_eq!(&psi(&psi_inverse(t).unwrap()).unwrap(), t);
            }
        }
    }

    #[test]
    fn rejects_invalid_tree() {
        let mut t = example_tree();
        let blacks = t.blacks_by_label();
        t.labels.swap(blacks[0], blacks[2]);
        assert!(matches!(psi_inverse(&t), Err(BijectionError::NotInImage(_))));
    }
}
