//! Colored laminations of the closed unit disk: chords, black faces, the
//! combinatorial properties of factorization laminations, and Hausdorff
//! distances between colored laminations.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::perm::{Cycle, Factorization};

/// A point `e^{-2 i pi theta}` of the unit circle, stored as the exact
/// rational `theta` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitAngle(Ratio<i64>);

impl UnitAngle {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den > 0, "denominator must be positive");
        UnitAngle(Ratio::new(num.rem_euclid(den), den))
    }

    pub fn zero() -> Self {
        UnitAngle(Ratio::from_integer(0))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// Cartesian point on the circle, clockwise as `theta` grows.
    pub fn point(&self) -> [f64; 2] {
        let a = -2.0 * PI * self.to_f64();
        [a.cos(), a.sin()]
    }

    /// Integer position `theta * n` in `1..=n` (with `0` read as `n`), if exact.
    pub fn position(&self, n: u32) -> Option<u32> {
        let x = self.0 * Ratio::from_integer(n as i64);
        if !x.is_integer() {
            return None;
        }
        let p = x.to_integer() as u32;
        Some(if p == 0 { n } else { p })
    }
}

impl Serialize for UnitAngle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.numer(), self.denom()].serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitAngle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [num, den] = <[i64; 2]>::deserialize(d)?;
        if den <= 0 {
            return Err(serde::de::Error::custom("non-positive denominator"));
        }
        Ok(UnitAngle::new(num, den))
    }
}

/// Segment between two circle points, endpoints sorted. Equal endpoints give a
/// degenerate chord (a single point).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Chord {
    pub a: UnitAngle,
    pub b: UnitAngle,
}

impl Chord {
    pub fn new(x: UnitAngle, y: UnitAngle) -> Self {
        if x <= y {
            Chord { a: x, b: y }
        } else {
            Chord { a: y, b: x }
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    /// Proper crossing in the open disk, decided exactly.
    pub fn crosses(&self, other: &Chord) -> bool {
        let inside = |x: UnitAngle| self.a < x && x < self.b;
        let outside = |x: UnitAngle| x < self.a || self.b < x;
        (inside(other.a) && outside(other.b)) || (outside(other.a) && inside(other.b))
    }

    pub fn endpoints(&self) -> [[f64; 2]; 2] {
        [self.a.point(), self.b.point()]
    }
}

/// Convex hull of finitely many circle points (corners kept sorted).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlackFace {
    pub corners: Vec<UnitAngle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u32>,
}

impl BlackFace {
    pub fn new(mut corners: Vec<UnitAngle>, label: Option<u32>) -> Self {
        corners.sort();
        corners.dedup();
        BlackFace { corners, label }
    }

    /// Boundary segments between cyclically consecutive corners.
    pub fn edges(&self) -> Vec<Chord> {
        let c = &self.corners;
        match c.len() {
            0 | 1 => vec![],
            2 => vec![Chord::new(c[0], c[1])],
            l => (0..l).map(|i| Chord::new(c[i], c[(i + 1) % l])).collect(),
        }
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        self.corners.iter().map(|c| c.point()).collect()
    }
}

/// A set of chords together with a set of black faces. The unit circle is
/// always part of the red set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ColoredLamination {
    pub chords: Vec<Chord>,
    pub faces: Vec<BlackFace>,
}

impl ColoredLamination {
    /// Add a face together with its boundary chords.
    pub fn push_face(&mut self, face: BlackFace) {
        for e in face.edges() {
            self.chords.push(e);
        }
        self.faces.push(face);
    }

    /// Chords plus face edges, sorted and deduplicated.
    pub fn red_segments(&self) -> Vec<Chord> {
        let mut s: Vec<Chord> = self.chords.clone();
        for f in &self.faces {
            s.extend(f.edges());
        }
        s.sort();
        s.dedup();
        s
    }
}

/// Face with corners `e_j / n` (so `n / n` is angle `0`).
pub fn face_of_cycle(c: &Cycle, n: u32, label: Option<u32>) -> BlackFace {
    BlackFace::new(c.elems().iter().map(|&e| UnitAngle::new(e as i64, n as i64)).collect(), label)
}

/// The colored lamination drawn by the first `floor(c) ∧ k` cycles of `f`,
/// faces labelled by their index. `c = f64::INFINITY` keeps every cycle.
pub fn s_c(f: &Factorization, c: f64) -> ColoredLamination {
    let k = f.k();
    let m = if c.is_infinite() { k } else { (c.max(0.0).floor() as usize).min(k) };
    let mut lam = ColoredLamination::default();
    for (i, cy) in f.cycles[..m].iter().enumerate() {
        lam.push_face(face_of_cycle(cy, f.n, Some(i as u32 + 1)));
    }
    lam
}

/// Which of the five factorization properties fails, with a witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyViolation {
    pub property: u8,
    pub witness: String,
}

impl std::fmt::Display for PropertyViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "P{}: {}", self.property, self.witness)
    }
}

fn violation(property: u8, witness: impl Into<String>) -> PropertyViolation {
    PropertyViolation { property, witness: witness.into() }
}

/// A white region of the disk cut out by the faces' boundaries, seen from the
/// face across which it lies (none for the region holding arc 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub parent_face: Option<usize>,
    /// Arcs `(j-1, j]` (recorded as `j`) on this region's boundary.
    pub arcs: Vec<u32>,
    /// Faces hanging off this region, left to right.
    pub child_faces: Vec<usize>,
}

/// Regions of a noncrossing family of faces with integer corners in `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualStructure {
    pub regions: Vec<Region>,
    /// For each face, its regions across the gaps `(a_i, a_{i+1}]` in order.
    pub face_gaps: Vec<Vec<usize>>,
}

/// Interval sweep assigning arcs to regions. `faces[i]` must be sorted and
/// pairwise noncrossing; region `0` is the root region.
pub fn dual_structure(n: u32, faces: &[Vec<u32>]) -> DualStructure {
    let mut order: Vec<usize> = (0..faces.len()).collect();
    order.sort_by(|&x, &y| {
        let (fx, fy) = (&faces[x], &faces[y]);
        fx[0].cmp(&fy[0]).then(fy.last().cmp(&fx.last()))
    });
    let mut regions = vec![Region { parent_face: None, arcs: vec![], child_faces: vec![] }];
    let mut face_gaps = vec![Vec::new(); faces.len()];
    // (region, owning face, gap index, end position)
    let mut stack: Vec<(usize, Option<usize>, usize, u32)> = vec![(0, None, 0, n)];
    let mut next = 0;
    for p in 1..=n {
        while next < order.len() && faces[order[next]][0] == p - 1 {
            let f = order[next];
            next += 1;
            if let Some(top) = stack.last() {
                regions[top.0].child_faces.push(f);
            }
            let r = regions.len();
            regions.push(Region { parent_face: Some(f), arcs: vec![], child_faces: vec![] });
            face_gaps[f].push(r);
            stack.push((r, Some(f), 0, faces[f][1]));
        }
        if let Some(top) = stack.last() {
            regions[top.0].arcs.push(p);
        }
        while let Some(&(_, face, gap, end)) = stack.last() {
            if end != p {
                break;
            }
            stack.pop();
            if let Some(f) = face {
                if gap + 2 < faces[f].len() {
                    let r = regions.len();
                    regions.push(Region { parent_face: Some(f), arcs: vec![], child_faces: vec![] });
                    face_gaps[f].push(r);
                    stack.push((r, Some(f), gap + 1, faces[f][gap + 2]));
                }
            }
        }
    }
    DualStructure { regions, face_gaps }
}

fn integer_faces(lam: &ColoredLamination, n: u32) -> Result<Vec<Vec<u32>>, PropertyViolation> {
    let mut out = Vec::with_capacity(lam.faces.len());
    for (i, f) in lam.faces.iter().enumerate() {
        let mut c = Vec::with_capacity(f.corners.len());
        for a in &f.corners {
            match a.position(n) {
                Some(p) => c.push(p),
                None => return Err(violation(1, format!("face {i} has a corner off the n-th roots"))),
            }
        }
        c.sort_unstable();
        c.dedup();
        if c.len() < 2 {
            return Err(violation(3, format!("face {i} has fewer than two corners")));
        }
        out.push(c);
    }
    Ok(out)
}

fn face_label(lam: &ColoredLamination, i: usize) -> u32 {
    lam.faces[i].label.unwrap_or(i as u32 + 1)
}

/// Find a crossing pair among chords given by integer endpoints `a < b`.
fn find_crossing(chords: &[(u32, u32, usize)]) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..chords.len()).collect();
    order.sort_by(|&x, &y| chords[x].0.cmp(&chords[y].0).then(chords[y].1.cmp(&chords[x].1)));
    let mut stack: Vec<usize> = Vec::new();
    for &i in &order {
        let (a, b, _) = chords[i];
        while let Some(&t) = stack.last() {
            if chords[t].1 <= a {
                stack.pop();
            } else {
                break;
            }
        }
        if let Some(&t) = stack.last() {
            if chords[t].1 < b {
                return Some((chords[t].2, chords[i].2));
            }
        }
        stack.push(i);
    }
    None
}

/// Check the five combinatorial properties characterising laminations drawn
/// by minimal factorizations of the `n`-cycle.
pub fn validate_properties(lam: &ColoredLamination, n: u32) -> Result<(), PropertyViolation> {
    let faces = integer_faces(lam, n)?;
    let k = faces.len();

    // P2: chords belong to exactly one face
    let mut edges: Vec<(u32, u32, usize)> = Vec::new();
    for (i, f) in faces.iter().enumerate() {
        let l = f.len();
        if l == 2 {
            edges.push((f[0], f[1], i));
        } else {
            for j in 0..l {
                let (x, y) = (f[j], f[(j + 1) % l]);
                edges.push((x.min(y), x.max(y), i));
            }
        }
    }
    let mut sorted = edges.clone();
    sorted.sort();
    for w in sorted.windows(2) {
        if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
            return Err(violation(2, format!("faces {} and {} share a chord", w[0].2, w[1].2)));
        }
    }
    for c in &lam.chords {
        let (Some(x), Some(y)) = (c.a.position(n), c.b.position(n)) else {
            return Err(violation(2, "chord off the n-th roots"));
        };
        let key = (x.min(y), x.max(y));
        if sorted.binary_search_by(|e| (e.0, e.1).cmp(&key)).is_err() {
            return Err(violation(2, format!("chord {key:?} borders two white regions")));
        }
    }

    // P3: noncrossing, and points plus faces form a tree under incidence
    if let Some((x, y)) = find_crossing(&edges) {
        return Err(violation(3, format!("faces {x} and {y} cross")));
    }
    let incidences: usize = faces.iter().map(|f| f.len()).sum();
    let mut uf = UnionFind::new(n as usize + k);
    for (i, f) in faces.iter().enumerate() {
        for &p in f {
            if !uf.union(p as usize - 1, n as usize + i) {
                return Err(violation(3, format!("cycle of chords through face {i}")));
            }
        }
    }
    if incidences + 1 != n as usize + k {
        return Err(violation(3, "chords do not connect the n points"));
    }

    // P1: n white regions, one boundary arc each
    let dual = dual_structure(n, &faces);
    if dual.regions.len() != n as usize {
        return Err(violation(1, format!("{} white regions, expected {n}", dual.regions.len())));
    }
    for (r, reg) in dual.regions.iter().enumerate() {
        if reg.arcs.len() != 1 {
            return Err(violation(1, format!("region {r} touches {} arcs", reg.arcs.len())));
        }
    }

    // P4: labels increase clockwise around each point
    let mut around: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n as usize + 1];
    for (i, f) in faces.iter().enumerate() {
        for &p in f {
            let dmin = f.iter().filter(|&&q| q != p).map(|&q| (q + n - p) % n).min().unwrap();
            around[p as usize].push((dmin, face_label(lam, i)));
        }
    }
    for (p, list) in around.iter_mut().enumerate() {
        list.sort_unstable();
        if list.windows(2).any(|w| w[0].1 >= w[1].1) {
            return Err(violation(4, format!("labels around point {p}")));
        }
    }

    // P5: labels decrease clockwise around each white region, from its arc
    for reg in &dual.regions {
        let j = reg.arcs[0];
        let mut seq: Vec<u32> = Vec::new();
        seq.extend(reg.child_faces.iter().filter(|&&f| faces[f][0] >= j).map(|&f| face_label(lam, f)));
        if let Some(pf) = reg.parent_face {
            seq.push(face_label(lam, pf));
        }
        seq.extend(reg.child_faces.iter().filter(|&&f| faces[f][0] < j).map(|&f| face_label(lam, f)));
        if seq.windows(2).any(|w| w[0] <= w[1]) {
            return Err(violation(5, format!("labels around region with arc {j}")));
        }
    }
    Ok(())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// False if already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

// ---------------------------------------------------------------------------
// geometry

type P2 = [f64; 2];

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: P2) -> f64 {
    a[0].hypot(a[1])
}

fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn point_segment_distance(p: P2, a: P2, b: P2) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let l2 = ab[0] * ab[0] + ab[1] * ab[1];
    if l2 == 0.0 {
        return norm(ap);
    }
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / l2).clamp(0.0, 1.0);
    norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

/// Inside a convex polygon given in either orientation (boundary included).
pub fn point_in_convex(p: P2, poly: &[P2]) -> bool {
    let m = poly.len();
    if m < 3 {
        return false;
    }
    let mut sign = 0.0f64;
    for i in 0..m {
        let c = cross(sub(poly[(i + 1) % m], poly[i]), sub(p, poly[i]));
        if c.abs() < 1e-14 {
            continue;
        }
        if sign == 0.0 {
            sign = c.signum();
        } else if c.signum() != sign {
            return false;
        }
    }
    true
}

/// Distance from a point to a filled convex polygon (or segment, or point).
pub fn point_convex_distance(p: P2, poly: &[P2]) -> f64 {
    match poly.len() {
        0 => f64::INFINITY,
        1 => norm(sub(p, poly[0])),
        2 => point_segment_distance(p, poly[0], poly[1]),
        m => {
            if point_in_convex(p, poly) {
                return 0.0;
            }
            (0..m).map(|i| point_segment_distance(p, poly[i], poly[(i + 1) % m])).fold(f64::INFINITY, f64::min)
        }
    }
}

/// Exact Hausdorff distance between two filled convex polygons: the farthest
/// point of one from the other is one of its corners.
pub fn hausdorff_convex(a: &[P2], b: &[P2]) -> f64 {
    let one = |x: &[P2], y: &[P2]| x.iter().map(|&p| point_convex_distance(p, y)).fold(0.0, f64::max);
    one(a, b).max(one(b, a))
}

/// Sample points along a segment with spacing at most `h`.
fn sample_segment(a: P2, b: P2, h: f64, out: &mut Vec<P2>) {
    let m = (norm(sub(b, a)) / h).ceil().max(1.0) as usize;
    for i in 0..=m {
        let t = i as f64 / m as f64;
        out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
    }
}

/// Sample a filled convex polygon with spacing at most `h` via a fan
/// triangulation from its first corner.
fn sample_polygon(poly: &[P2], h: f64, out: &mut Vec<P2>) {
    if poly.len() < 3 {
        if poly.len() == 2 {
            sample_segment(poly[0], poly[1], h, out);
        }
        return;
    }
    let o = poly[0];
    for i in 1..poly.len() - 1 {
        let (b, c) = (poly[i], poly[i + 1]);
        let longest = norm(sub(b, o)).max(norm(sub(c, o))).max(norm(sub(c, b)));
        let m = (longest / h).ceil().max(1.0) as usize;
        for u in 0..=m {
            for v in 0..=(m - u) {
                let (s, t) = (u as f64 / m as f64, v as f64 / m as f64);
                out.push([o[0] + s * (b[0] - o[0]) + t * (c[0] - o[0]), o[1] + s * (b[1] - o[1]) + t * (c[1] - o[1])]);
            }
        }
    }
}

/// Geometric content of one side of a colored lamination.
struct Shape {
    segments: Vec<(P2, P2)>,
    polygons: Vec<Vec<P2>>,
}

impl Shape {
    fn of(lam: &ColoredLamination, filled: bool) -> Shape {
        let segments = lam.red_segments().iter().map(|c| (c.a.point(), c.b.point())).collect();
        let polygons = if filled {
            lam.faces.iter().filter(|f| f.corners.len() >= 3).map(|f| f.points()).collect()
        } else {
            vec![]
        };
        Shape { segments, polygons }
    }

    fn samples(&self, h: f64) -> Vec<P2> {
        let mut out = Vec::new();
        let m = (2.0 * PI / h).ceil() as usize;
        for i in 0..m {
            let a = 2.0 * PI * i as f64 / m as f64;
            out.push([a.cos(), a.sin()]);
        }
        for &(a, b) in &self.segments {
            sample_segment(a, b, h, &mut out);
        }
        for p in &self.polygons {
            sample_polygon(p, h, &mut out);
        }
        out
    }
}

/// Uniform grid over `[-1, 1]^2` bucketing segments and polygons.
struct Grid {
    cell: f64,
    side: usize,
    seg_cells: Vec<Vec<usize>>,
    poly_cells: Vec<Vec<usize>>,
}

impl Grid {
    fn new(shape: &Shape, cell: f64) -> Grid {
        let side = (2.0 / cell).ceil() as usize + 1;
        let mut seg_cells = vec![Vec::new(); side * side];
        let mut poly_cells = vec![Vec::new(); side * side];
        let mut g = Grid { cell, side, seg_cells: vec![], poly_cells: vec![] };
        for (i, &(a, b)) in shape.segments.iter().enumerate() {
            let mut pts = Vec::new();
            sample_segment(a, b, cell / 2.0, &mut pts);
            let mut cells: Vec<usize> = pts.iter().map(|&p| g.index(p)).collect();
            cells.sort_unstable();
            cells.dedup();
            for c in cells {
                seg_cells[c].push(i);
            }
        }
        for (i, poly) in shape.polygons.iter().enumerate() {
            let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
            for p in poly {
                for d in 0..2 {
                    lo[d] = lo[d].min(p[d]);
                    hi[d] = hi[d].max(p[d]);
                }
            }
            let (x0, y0) = g.coords(lo);
            let (x1, y1) = g.coords(hi);
            for x in x0..=x1 {
                for y in y0..=y1 {
                    poly_cells[y * side + x].push(i);
                }
            }
        }
        g.seg_cells = seg_cells;
        g.poly_cells = poly_cells;
        g
    }

    fn coords(&self, p: P2) -> (usize, usize) {
        let f = |v: f64| (((v + 1.0) / self.cell).floor().max(0.0) as usize).min(self.side - 1);
        (f(p[0]), f(p[1]))
    }

    fn index(&self, p: P2) -> usize {
        let (x, y) = self.coords(p);
        y * self.side + x
    }

    fn distance(&self, shape: &Shape, p: P2) -> f64 {
        let (cx, cy) = self.coords(p);
        let here = cy * self.side + cx;
        if self.poly_cells[here].iter().any(|&i| point_in_convex(p, &shape.polygons[i])) {
            return 0.0;
        }
        let mut best = (norm(p) - 1.0).abs();
        let mut r = 0usize;
        loop {
            if r >= 1 && (r - 1) as f64 * self.cell >= best {
                break;
            }
            if r > self.side {
                break;
            }
            let (x0, x1) = (cx as i64 - r as i64, cx as i64 + r as i64);
            let (y0, y1) = (cy as i64 - r as i64, cy as i64 + r as i64);
            for x in x0..=x1 {
                for y in y0..=y1 {
                    if (x != x0 && x != x1 && y != y0 && y != y1)
                        || x < 0
                        || y < 0
                        || x >= self.side as i64
                        || y >= self.side as i64
                    {
                        continue;
                    }
                    for &i in &self.seg_cells[y as usize * self.side + x as usize] {
                        let (a, b) = shape.segments[i];
                        best = best.min(point_segment_distance(p, a, b));
                    }
                }
            }
            r += 1;
        }
        best
    }
}

fn directed(from: &Shape, to: &Shape, h: f64) -> f64 {
    let grid = Grid::new(to, 0.05f64.max(h));
    from.samples(h).into_iter().map(|p| grid.distance(to, p)).fold(0.0, f64::max)
}

fn hausdorff_shapes(a: &Shape, b: &Shape, h: f64) -> f64 {
    directed(a, b, h).max(directed(b, a, h))
}

/// Hausdorff distance on red parts plus Hausdorff distance on colored parts.
/// Each set is sampled with spacing `eps / 2` and distances to the other set
/// are exact, so the result is within `2 eps` of the true value.
pub fn hausdorff_colored(a: &ColoredLamination, b: &ColoredLamination, eps: f64) -> f64 {
    assert!(eps > 0.0, "eps must be positive");
    let h = eps / 2.0;
    let red = hausdorff_shapes(&Shape::of(a, false), &Shape::of(b, false), h);
    let colored = hausdorff_shapes(&Shape::of(a, true), &Shape::of(b, true), h);
    red + colored
}

/// Order faces by label (unlabelled faces last, in input order).
pub fn sort_faces_by_label(lam: &mut ColoredLamination) {
    lam.faces.sort_by(|x, y| match (x.label, y.label) {
        (Some(a), Some(b)) => a.cmp(&b),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    });
}
