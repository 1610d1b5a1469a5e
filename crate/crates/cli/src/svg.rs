//! Deterministic SVG scenes. Shape corners arrive as exact rationals and
//! are rounded only here, at emission; identical input yields identical
//! bytes.

use kcm2d::geom::QPoint;
use num_traits::ToPrimitive;

const SCALE: f64 = 16.0;
const PAD: f64 = 24.0;

pub struct Scene {
    elements: Vec<String>,
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

fn fmt(v: f64) -> String {
    // Fixed precision keeps the byte output stable across runs.
    format!("{v:.3}")
}

impl Scene {
    pub fn new() -> Scene {
        Scene {
            elements: Vec::new(),
            min_x: 0.0,
            max_x: 0.0,
            min_y: 0.0,
            max_y: 0.0,
        }
    }

    fn cover(&mut self, x: f64, y: f64) {
        self.min_x = self.min_x.min(x);
        self.max_x = self.max_x.max(x);
        self.min_y = self.min_y.min(y);
        self.max_y = self.max_y.max(y);
    }

    /// A unit square centred on the lattice site.
    pub fn add_site(&mut self, s: (i64, i64), class: &str) {
        let (x, y) = (s.0 as f64, s.1 as f64);
        self.cover(x - 0.5, y - 0.5);
        self.cover(x + 0.5, y + 0.5);
        self.elements.push(format!(
            "<rect class=\"{class}\" x=\"{}\" y=\"{}\" width=\"1\" height=\"1\"/>",
            fmt(x - 0.5),
            fmt(-y - 0.5)
        ));
    }

    /// A closed polygon; vertices are sorted counterclockwise around their
    /// centroid, so convex pieces render correctly whatever the input
    /// order.
    pub fn add_convex_polygon(&mut self, corners: &[QPoint], class: &str) {
        if corners.len() < 3 {
            return;
        }
        let mut pts: Vec<(f64, f64)> = corners
            .iter()
            .map(|p| (p.x.to_f64().unwrap(), p.y.to_f64().unwrap()))
            .collect();
        let n = pts.len() as f64;
        let (cx, cy) = pts
            .iter()
            .fold((0.0, 0.0), |(ax, ay), (x, y)| (ax + x / n, ay + y / n));
        pts.sort_by(|a, b| {
            let ta = (a.1 - cy).atan2(a.0 - cx);
            let tb = (b.1 - cy).atan2(b.0 - cx);
            ta.partial_cmp(&tb).unwrap()
        });
        for &(x, y) in &pts {
            self.cover(x, y);
        }
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt(x), fmt(-y)))
            .collect();
        self.elements.push(format!(
            "<polygon class=\"{class}\" points=\"{}\"/>",
            path.join(" ")
        ));
    }

    pub fn to_svg(&self) -> String {
        let w = (self.max_x - self.min_x) * SCALE + 2.0 * PAD;
        let h = (self.max_y - self.min_y) * SCALE + 2.0 * PAD;
        let tx = PAD - self.min_x * SCALE;
        let ty = PAD + self.max_y * SCALE;
        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n",
            fmt(w.max(2.0 * PAD)),
            fmt(h.max(2.0 * PAD))
        ));
        out.push_str(
            "<style>.site{fill:#444}.site-alt{fill:#999}.ball{fill:#c33}\
             .droplet{fill:none;stroke:#06c;stroke-width:0.12}\
             .input{fill:#2a2}</style>\n",
        );
        out.push_str(&format!(
            "<g transform=\"translate({},{}) scale({SCALE})\">\n",
            fmt(tx),
            fmt(ty)
        ));
        for e in &self.elements {
            out.push_str(e);
            out.push('\n');
        }
        out.push_str("</g>\n</svg>\n");
        out
    }
}
