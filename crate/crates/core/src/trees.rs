//! Plane trees in lexicographic (preorder) layout, their contour and
//! Lukasiewicz encodings, and labelled bi-type trees.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("empty tree")]
    Empty,
    #[error("invalid Lukasiewicz path at step {0}")]
    BadLukasiewicz(usize),
    #[error("invalid contour at step {0}")]
    BadContour(usize),
    #[error("children lists do not describe a tree rooted at {0}")]
    NotATree(usize),
    #[error("label issue: {0}")]
    Labels(String),
}

const NONE: usize = usize::MAX;

/// A rooted plane tree. Vertex `0` is the root and vertices are numbered in
/// depth-first (lexicographic) order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlaneTree {
    parent: Vec<usize>,
    child_off: Vec<usize>,
    child_list: Vec<usize>,
    depth: Vec<usize>,
    size: Vec<usize>,
}

impl PlaneTree {
    /// Single vertex.
    pub fn singleton() -> Self {
        PlaneTree::from_degrees(&[0]).unwrap()
    }

    /// Build from the out-degrees listed in depth-first order.
    pub fn from_degrees(deg: &[usize]) -> Result<Self, TreeError> {
        let n = deg.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        let mut w: i64 = 0;
        for (i, &k) in deg.iter().enumerate() {
            w += k as i64 - 1;
            if (w < 0 && i + 1 < n) || (i + 1 == n && w != -1) {
                return Err(TreeError::BadLukasiewicz(i + 1));
            }
        }
        let mut child_off = Vec::with_capacity(n + 1);
        child_off.push(0);
        for &k in deg {
            child_off.push(child_off.last().unwrap() + k);
        }
        let mut parent = vec![NONE; n];
        let mut depth = vec![0; n];
        let mut child_list = vec![0; n - 1];
        // open slots: (vertex, next child slot index)
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for v in 0..n {
            if v > 0 {
                let top = stack.last_mut().expect("validated path");
                let p = top.0;
                child_list[top.1] = v;
                top.1 += 1;
                if top.1 == child_off[p + 1] {
                    stack.pop();
                }
                parent[v] = p;
                depth[v] = depth[p] + 1;
            }
            if deg[v] > 0 {
                stack.push((v, child_off[v]));
            }
        }
        let mut size = vec![1; n];
        for v in (1..n).rev() {
            size[parent[v]] += size[v];
        }
        Ok(PlaneTree { parent, child_off, child_list, depth, size })
    }

    /// Build from arbitrary-index children lists. Returns the tree and the map
    /// from old indices to depth-first indices.
    pub fn from_children(children: &[Vec<usize>], root: usize) -> Result<(Self, Vec<usize>), TreeError> {
        let m = children.len();
        if root >= m {
            return Err(TreeError::NotATree(root));
        }
        let mut order = Vec::with_capacity(m);
        let mut new_index = vec![NONE; m];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            if new_index[v] != NONE {
                return Err(TreeError::NotATree(root));
            }
            new_index[v] = order.len();
            order.push(v);
            for &c in children[v].iter().rev() {
                if c >= m {
                    return Err(TreeError::NotATree(root));
                }
                stack.push(c);
            }
        }
        if order.len() != m {
            return Err(TreeError::NotATree(root));
        }
        let deg: Vec<usize> = order.iter().map(|&v| children[v].len()).collect();
        Ok((PlaneTree::from_degrees(&deg)?, new_index))
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        let p = self.parent[v];
        (p != NONE).then_some(p)
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.child_list[self.child_off[v]..self.child_off[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.child_off[v + 1] - self.child_off[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn subtree_size(&self, v: usize) -> usize {
        self.size[v]
    }

    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.len()).map(|v| self.degree(v)).collect()
    }

    pub fn children_lists(&self) -> Vec<Vec<usize>> {
        (0..self.len()).map(|v| self.children(v).to_vec()).collect()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.degree(v) == 0
    }

    /// Whether `v` lies in the subtree of `u`.
    pub fn in_subtree(&self, u: usize, v: usize) -> bool {
        v >= u && v < u + self.size[u]
    }

    /// `W_0 = 0`, `W_{i+1} = W_i + k_{v_i} - 1`; length `n + 1`.
    pub fn lukasiewicz(&self) -> Vec<i64> {
        let mut w = Vec::with_capacity(self.len() + 1);
        w.push(0);
        for v in 0..self.len() {
            w.push(w[v] + self.degree(v) as i64 - 1);
        }
        w
    }

    pub fn from_lukasiewicz(w: &[i64]) -> Result<Self, TreeError> {
        if w.len() < 2 || w[0] != 0 {
            return Err(TreeError::BadLukasiewicz(0));
        }
        let mut deg = Vec::with_capacity(w.len() - 1);
        for i in 0..w.len() - 1 {
            let k = w[i + 1] - w[i] + 1;
            if k < 0 {
                return Err(TreeError::BadLukasiewicz(i + 1));
            }
            deg.push(k as usize);
        }
        PlaneTree::from_degrees(&deg)
    }

    /// Contour walk with visit times of every vertex.
    pub fn contour_walk(&self) -> Contour {
        let n = self.len();
        let steps = 2 * (n - 1);
        let mut heights = Vec::with_capacity(2 * n + 1);
        let mut vertex_at = Vec::with_capacity(steps + 1);
        // iterative walk: (vertex, next child position)
        let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
        heights.push(0);
        vertex_at.push(0);
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            let ch = self.children(v);
            if *next < ch.len() {
                let c = ch[*next];
                *next += 1;
                stack.push((c, 0));
            } else {
                stack.pop();
                if stack.is_empty() {
                    break;
                }
            }
            let top = stack.last().unwrap().0;
            heights.push(self.depth[top] as i64);
            vertex_at.push(top);
        }
        debug_assert_eq!(vertex_at.len(), steps + 1);
        heights.resize(2 * n + 1, 0);
        let mut visit_off = vec![0usize; n + 1];
        for &v in &vertex_at {
            visit_off[v + 1] += 1;
        }
        for v in 0..n {
            visit_off[v + 1] += visit_off[v];
        }
        let mut fill = visit_off.clone();
        let mut visits = vec![0usize; vertex_at.len()];
        for (t, &v) in vertex_at.iter().enumerate() {
            visits[fill[v]] = t;
            fill[v] += 1;
        }
        Contour { heights, visit_off, visits }
    }

    /// Contour function sampled at `t = 0, 1, ..., 2n`.
    pub fn contour(&self) -> Vec<i64> {
        self.contour_walk().heights
    }

    pub fn from_contour(c: &[i64]) -> Result<Self, TreeError> {
        if c.len() < 3 || c.len() % 2 == 0 || c[0] != 0 {
            return Err(TreeError::BadContour(0));
        }
        let n = (c.len() - 1) / 2;
        let steps = 2 * (n - 1);
        if c[steps..].iter().any(|&h| h != 0) {
            return Err(TreeError::BadContour(steps));
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new()];
        let mut path = vec![0usize];
        for t in 1..=steps {
            let d = c[t] - c[t - 1];
            if d == 1 {
                let id = children.len();
                children.push(Vec::new());
                children[*path.last().unwrap()].push(id);
                path.push(id);
            } else if d == -1 && path.len() > 1 {
                path.pop();
            } else {
                return Err(TreeError::BadContour(t));
            }
        }
        if children.len() != n || path.len() != 1 {
            return Err(TreeError::BadContour(steps));
        }
        Ok(PlaneTree::from_children(&children, 0)?.0)
    }

    /// Vertices whose children can be split into a left block and a right
    /// block each carrying at least `a` descendants.
    pub fn a_nodes(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&u| self.is_a_node(u, a)).collect()
    }

    pub fn is_a_node(&self, u: usize, a: usize) -> bool {
        let ch = self.children(u);
        if a == 0 {
            return true;
        }
        let total: usize = ch.iter().map(|&c| self.size[c]).sum();
        let mut prefix = 0;
        for &c in ch {
            prefix += self.size[c];
            if prefix >= a {
                return total - prefix >= a;
            }
        }
        false
    }

    /// At least two children with subtree size `>= a`.
    pub fn is_branching_point(&self, u: usize, a: usize) -> bool {
        self.children(u).iter().filter(|&&c| self.size[c] >= a).count() >= 2
    }

    /// Sizes of the vertices first visited before `u`, the subtree of `u`,
    /// and the vertices first visited after `u`'s last visit.
    pub fn region_partition(&self, u: usize) -> (usize, usize, usize) {
        let g2 = self.size[u];
        (u, g2, self.len() - u - g2)
    }

    /// Vertices at even height, each joined to its grandchildren. Returns the
    /// reduced tree and, for each of its vertices, the original vertex.
    pub fn white_reduced(&self) -> (PlaneTree, Vec<usize>) {
        let whites: Vec<usize> = (0..self.len()).filter(|&v| self.depth[v] % 2 == 0).collect();
        let mut idx = vec![NONE; self.len()];
        for (i, &w) in whites.iter().enumerate() {
            idx[w] = i;
        }
        let deg: Vec<usize> =
            whites.iter().map(|&w| self.children(w).iter().map(|&b| self.degree(b)).sum()).collect();
        let t = PlaneTree::from_degrees(&deg).expect("grandchildren of a preorder tree");
        (t, whites)
    }

    pub fn contour_csv(&self) -> String {
        walk_csv(&self.contour())
    }

    pub fn lukasiewicz_csv(&self) -> String {
        walk_csv(&self.lukasiewicz())
    }
}

fn walk_csv(w: &[i64]) -> String {
    let mut s = String::from("t,value\n");
    for (t, v) in w.iter().enumerate() {
        s.push_str(&format!("{t},{v}\n"));
    }
    s
}

/// Contour heights plus, for every vertex, the sorted times the walk sits on it.
#[derive(Debug, Clone)]
pub struct Contour {
    pub heights: Vec<i64>,
    visit_off: Vec<usize>,
    visits: Vec<usize>,
}

impl Contour {
    pub fn visits(&self, v: usize) -> &[usize] {
        &self.visits[self.visit_off[v]..self.visit_off[v + 1]]
    }

    /// First visit time `g(v)`.
    pub fn first(&self, v: usize) -> usize {
        self.visits(v)[0]
    }

    /// Last visit time `d(v)`.
    pub fn last(&self, v: usize) -> usize {
        *self.visits(v).last().unwrap()
    }
}

/// All plane trees with `n` vertices (Catalan(n-1) of them), via degree sequences.
pub fn all_plane_trees(n: usize) -> Vec<PlaneTree> {
    fn rec(n: usize, w: i64, deg: &mut Vec<usize>, out: &mut Vec<PlaneTree>) {
        let i = deg.len();
        if i == n {
            if w == -1 {
                out.push(PlaneTree::from_degrees(deg).unwrap());
            }
            return;
        }
        let remaining = (n - i) as i64;
        // after this vertex the walk must be able to reach -1 in the remaining steps
        for k in 0..=(n - i - 1) {
            let nw = w + k as i64 - 1;
            if nw < 0 && i + 1 < n {
                continue;
            }
            if nw + 1 > remaining - 1 {
                break;
            }
            deg.push(k);
            rec(n, nw, deg, out);
            deg.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, 0, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// A plane tree whose even-height vertices are white and odd-height ones black,
/// carrying labels on black vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelledBiTypeTree {
    pub tree: PlaneTree,
    /// `labels[v]` for black `v`; `0` on white vertices.
    pub labels: Vec<u32>,
}

/// Why a labelled tree is not in the image of the factorization bijection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum UnViolation {
    BlackLeaf { vertex: usize },
    WhiteCount { found: usize, expected: usize },
    LabelsNotPermutation,
    RootOrder { vertex: usize },
    CyclicOrder { vertex: usize },
}

impl std::fmt::Display for UnViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", serde_json::to_string(self).unwrap_or_default())
    }
}

impl LabelledBiTypeTree {
    pub fn new(tree: PlaneTree, labels: Vec<u32>) -> Result<Self, TreeError> {
        if labels.len() != tree.len() {
            return Err(TreeError::Labels("label vector length".into()));
        }
        for v in 0..tree.len() {
            let black = tree.depth(v) % 2 == 1;
            if black != (labels[v] != 0) {
                return Err(TreeError::Labels(format!("vertex {v}")));
            }
        }
        Ok(LabelledBiTypeTree { tree, labels })
    }

    pub fn is_white(&self, v: usize) -> bool {
        self.tree.depth(v) % 2 == 0
    }

    pub fn num_white(&self) -> usize {
        (0..self.tree.len()).filter(|&v| self.is_white(v)).count()
    }

    pub fn num_black(&self) -> usize {
        self.tree.len() - self.num_white()
    }

    pub fn label(&self, v: usize) -> u32 {
        self.labels[v]
    }

    /// Black vertices indexed by label (`out[i-1]` has label `i`).
    pub fn blacks_by_label(&self) -> Vec<usize> {
        let mut out = vec![NONE; self.num_black()];
        for v in 0..self.tree.len() {
            let l = self.labels[v] as usize;
            if l > 0 && l <= out.len() {
                out[l - 1] = v;
            }
        }
        out
    }

    /// Membership in the image set for `n` white vertices, with a witness on failure.
    pub fn validate_un(&self, n: usize) -> Result<(), UnViolation> {
        let t = &self.tree;
        for v in 0..t.len() {
            if t.is_leaf(v) && !self.is_white(v) {
                return Err(UnViolation::BlackLeaf { vertex: v });
            }
        }
        let nw = self.num_white();
        if nw != n {
            return Err(UnViolation::WhiteCount { found: nw, expected: n });
        }
        let nb = self.num_black();
        let mut seen = vec![false; nb + 1];
        for v in 0..t.len() {
            if !self.is_white(v) {
                let l = self.labels[v] as usize;
                if l == 0 || l > nb || seen[l] {
                    return Err(UnViolation::LabelsNotPermutation);
                }
                seen[l] = true;
            }
        }
        for v in 0..t.len() {
            if !self.is_white(v) {
                continue;
            }
            let ch: Vec<u32> = t.children(v).iter().map(|&c| self.labels[c]).collect();
            match t.parent(v) {
                None => {
                    if ch.windows(2).any(|w| w[0] < w[1]) {
                        return Err(UnViolation::RootOrder { vertex: v });
                    }
                }
                Some(p) => {
                    let mut seq = vec![self.labels[p]];
                    seq.extend(ch);
                    if !cyclically_decreasing(&seq) {
                        return Err(UnViolation::CyclicOrder { vertex: v });
                    }
                }
            }
        }
        Ok(())
    }

    /// Reorder the black children of each white vertex so that the labels are
    /// valid, carrying subtrees along. Idempotent.
    pub fn canonical_reorder(&self) -> LabelledBiTypeTree {
        let t = &self.tree;
        let mut children = t.children_lists();
        for v in 0..t.len() {
            if !self.is_white(v) {
                continue;
            }
            let pl = t.parent(v).map(|p| self.labels[p]).unwrap_or(0);
            let ch = &mut children[v];
            ch.sort_by(|&a, &b| {
                let (la, lb) = (self.labels[a], self.labels[b]);
                (la > pl).cmp(&(lb > pl)).then(lb.cmp(&la))
            });
        }
        self.rebuild(&children)
    }

    /// Rebuild with new children orders (indices refer to the current tree).
    pub fn rebuild(&self, children: &[Vec<usize>]) -> LabelledBiTypeTree {
        let (tree, map) = PlaneTree::from_children(children, 0).expect("permuted children");
        let mut labels = vec![0; tree.len()];
        for (old, &new) in map.iter().enumerate() {
            labels[new] = self.labels[old];
        }
        LabelledBiTypeTree { tree, labels }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut bl = BTreeMap::new();
        for v in 0..self.tree.len() {
            if self.labels[v] > 0 {
                bl.insert(v.to_string(), self.labels[v]);
            }
        }
        serde_json::json!({
            "schema": crate::SCHEMA_TREE,
            "children": self.tree.children_lists(),
            "black_labels": bl,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, TreeError> {
        #[derive(Deserialize)]
        struct Raw {
            children: Vec<Vec<usize>>,
            #[serde(default)]
            black_labels: BTreeMap<String, u32>,
        }
        let raw: Raw = serde_json::from_value(v.clone()).map_err(|e| TreeError::Labels(e.to_string()))?;
        let (tree, map) = PlaneTree::from_children(&raw.children, 0)?;
        let mut labels = vec![0; tree.len()];
        for (k, l) in raw.black_labels {
            let old: usize = k.parse().map_err(|_| TreeError::Labels(format!("bad key {k}")))?;
            if old >= map.len() {
                return Err(TreeError::Labels(format!("bad key {k}")));
            }
            labels[map[old]] = l;
        }
        LabelledBiTypeTree::new(tree, labels)
    }
}

/// True if the sequence read cyclically is decreasing (a rotation of a
/// strictly decreasing sequence).
pub fn cyclically_decreasing(seq: &[u32]) -> bool {
    let m = seq.len();
    let ascents = (0..m).filter(|&i| seq[i] < seq[(i + 1) % m]).count();
    m <= 1 || ascents <= 1
}

/// Every bi-type plane tree with `n` white vertices and white leaves, with
/// every valid labelling, listed by brute force over label permutations.
/// Plane trees with `n` vertices at even height and no leaf at odd height.
pub fn bitype_shapes(n: usize) -> Vec<PlaneTree> {
    if n == 1 {
        return vec![PlaneTree::singleton()];
    }
    let mut out = Vec::new();
    for nb in 1..n {
        for t in all_plane_trees(n + nb) {
            let whites = (0..t.len()).filter(|&v| t.depth(v) % 2 == 0).count();
            if whites == n && !(0..t.len()).any(|v| t.is_leaf(v) && t.depth(v) % 2 == 1) {
                out.push(t);
            }
        }
    }
    out
}

pub fn enumerate_labelled_bitype(n: usize) -> Vec<LabelledBiTypeTree> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    if n == 1 {
        out.push(LabelledBiTypeTree { tree: PlaneTree::singleton(), labels: vec![0] });
        return out;
    }
    for t in bitype_shapes(n) {
        let nb = t.len() - n;
        let blacks: Vec<usize> = (0..t.len()).filter(|&v| t.depth(v) % 2 == 1).collect();
        let mut perm: Vec<u32> = (1..=nb as u32).collect();
        loop {
            let mut labels = vec![0; t.len()];
            for (i, &b) in blacks.iter().enumerate() {
                labels[b] = perm[i];
            }
            let lt = LabelledBiTypeTree { tree: t.clone(), labels };
            if lt.validate_un(n).is_ok() {
                out.push(lt);
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
    }
    out
}

pub(crate) fn next_permutation(p: &mut [u32]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
