//! SVG 1.1 rendering: red unit circle, red chords, black faces.

use std::fmt::Write;

use crate::lamination::ColoredLamination;
use crate::processes::{FrameRecord, TimedChord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgOptions {
    /// Width and height in pixels.
    pub size: f64,
    pub stroke: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { size: 512.0, stroke: 1.0 }
    }
}

struct Canvas {
    out: String,
    r: f64,
    c: f64,
}

impl Canvas {
    fn new(o: &SvgOptions) -> Self {
        let mut out = String::new();
        let s = o.size;
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">"
        );
        let c = s / 2.0;
        let r = c * 0.95;
        let _ = writeln!(out, "<circle cx=\"{c}\" cy=\"{c}\" r=\"{r}\" fill=\"none\" stroke=\"red\" stroke-width=\"{}\"/>", o.stroke);
        Canvas { out, r, c }
    }

    // screen y grows downwards
    fn xy(&self, p: [f64; 2]) -> (f64, f64) {
        (self.c + self.r * p[0], self.c - self.r * p[1])
    }

    fn line(&mut self, a: [f64; 2], b: [f64; 2], stroke: f64) {
        let (x1, y1) = self.xy(a);
        let (x2, y2) = self.xy(b);
        let _ = writeln!(
            self.out,
            "<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" stroke=\"red\" stroke-width=\"{stroke}\"/>"
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn angle_point(theta: f64) -> [f64; 2] {
    let a = -2.0 * std::f64::consts::PI * theta;
    [a.cos(), a.sin()]
}

pub fn render_lamination(lam: &ColoredLamination, o: &SvgOptions) -> String {
    let mut cv = Canvas::new(o);
    let face_edges: std::collections::HashSet<_> = lam.faces.iter().flat_map(|f| f.edges()).collect();
    for ch in lam.chords.iter().filter(|c| !face_edges.contains(*c)) {
        let [a, b] = ch.endpoints();
        cv.line(a, b, o.stroke);
    }
    for f in &lam.faces {
        let pts: Vec<String> = f
            .points()
            .into_iter()
            .map(|p| {
                let (x, y) = cv.xy(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            cv.out,
            "<polygon points=\"{}\" fill=\"black\" stroke=\"black\" stroke-width=\"{}\"/>",
            pts.join(" "),
            o.stroke
        );
    }
    cv.finish()
}

pub fn render_chords(chords: &[TimedChord], o: &SvgOptions) -> String {
    let mut cv = Canvas::new(o);
    for c in chords {
        cv.line(angle_point(c.g), angle_point(c.d), o.stroke);
    }
    cv.finish()
}

/// Faces black, chords red, from frame-dump records.
pub fn render_records(records: &[FrameRecord], o: &SvgOptions) -> String {
    let mut cv = Canvas::new(o);
    for r in records.iter().filter(|r| r.kind == "chord" && r.angles.len() == 2) {
        cv.line(angle_point(r.angles[0]), angle_point(r.angles[1]), o.stroke);
    }
    for r in records.iter().filter(|r| r.kind == "face") {
        let pts: Vec<String> = r
            .angles
            .iter()
            .map(|&a| {
                let (x, y) = cv.xy(angle_point(a));
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            cv.out,
            "<polygon points=\"{}\" fill=\"black\" stroke=\"black\" stroke-width=\"{}\"/>",
            pts.join(" "),
            o.stroke
        );
    }
    cv.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bijection::phi;
    use crate::perm::{Cycle, Factorization};

    #[test]
    fn empty_is_one_circle() {
        let s = render_lamination(&ColoredLamination::default(), &SvgOptions::default());
        assert_eq!(s.matches("<circle").count(), 1);
        assert!(s.contains("stroke=\"red\""));
        assert!(!s.contains("<polygon"));
    }

    #[test]
    fn faces_are_polygons() {
        let cyc = |v: Vec<u32>| Cycle::new(v).unwrap();
        let f = Factorization::new(
            8,
            vec![cyc(vec![5, 6, 7, 8]), cyc(vec![2, 3]), cyc(vec![1, 2, 5]), cyc(vec![4, 5])],
        );
        let s = render_lamination(&phi(&f).unwrap(), &SvgOptions::default());
        assert_eq!(s.matches("<polygon").count(), 4);
        assert_eq!(s.matches("<line").count(), 0);
    }
}
