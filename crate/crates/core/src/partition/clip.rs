//! Convex polygon clipping and areas.

pub type Point = [f64; 2];

/// Signed area, positive for counter-clockwise rings.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        acc += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * acc
}

#[inline]
fn side(a: Point, b: Point, p: Point) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

fn clip_halfplane(poly: &[Point], a: Point, b: Point) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let s = poly[k];
        let e = poly[(k + 1) % n];
        let sc = side(a, b, s);
        let ec = side(a, b, e);
        let s_in = sc >= 0.0;
        let e_in = ec >= 0.0;
        if s_in != e_in {
            let t = sc / (sc - ec);
            out.push([s[0] + (e[0] - s[0]) * t, s[1] + (e[1] - s[1]) * t]);
        }
        if e_in {
            out.push(e);
        }
    }
    out
}

/// Intersection of `subject` with the counter-clockwise convex polygon `clip`
/// (Sutherland–Hodgman).
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut out = subject.to_vec();
    let n = clip.len();
    for k in 0..n {
        if out.len() < 3 {
            return Vec::new();
        }
        out = clip_halfplane(&out, clip[k], clip[(k + 1) % n]);
    }
    if out.len() < 3 {
        Vec::new()
    } else {
        out
    }
}

/// Area of the intersection of two counter-clockwise convex polygons.
pub fn overlap_area(a: &[Point], b: &[Point]) -> f64 {
    signed_area(&clip_convex(a, b)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub lo: Point,
    pub hi: Point,
}

impl Aabb {
    pub fn of(poly: &[Point]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in poly {
            for c in 0..2 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        Self { lo, hi }
    }

    pub fn overlaps(&self, other: &Aabb) -> bool {
        self.lo[0] <= other.hi[0] && other.lo[0] <= self.hi[0] && self.lo[1] <= other.hi[1] && other.lo[1] <= self.hi[1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, s: f64) -> Vec<Point> {
        vec![[x0, y0], [x0 + s, y0], [x0 + s, y0 + s], [x0, y0 + s]]
    }

    #[test]
    fn unit_square_area() {
        assert_eq!(signed_area(&square(0.0, 0.0, 1.0)), 1.0);
        let mut cw = square(0.0, 0.0, 1.0);
        cw.reverse();
        assert_eq!(signed_area(&cw), -1.0);
    }

    #[test]
    fn offset_squares_overlap() {
        let a = square(0.0, 0.0, 1.0);
        let b = square(0.5, 0.25, 1.0);
        assert!((overlap_area(&a, &b) - 0.5 * 0.75).abs() < 1e-15);
    }

    #[test]
    fn touching_squares_have_zero_overlap() {
        let a = square(0.0, 0.0, 1.0);
        let b = square(1.0, 0.0, 1.0);
        assert_eq!(overlap_area(&a, &b), 0.0);
    }

    #[test]
    fn triangle_inside_square() {
        let tri = vec![[0.1, 0.1], [0.9, 0.1], [0.5, 0.8]];
        let a = square(0.0, 0.0, 1.0);
        assert!((overlap_area(&tri, &a) - signed_area(&tri)).abs() < 1e-15);
    }
}
