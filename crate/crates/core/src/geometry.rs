//! Planar geometry in image coordinates (origin top-left, y grows downward).
//!
//! Quadrangles keep their vertices in one canonical order, top-left first and
//! then clockwise as seen on screen. With y pointing down that order has a
//! positive shoelace area, which every routine here relies on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }
}

fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Signed shoelace area; positive for clockwise-on-screen polygons.
fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc / 2.0
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q2.sub(q1), p1.sub(q1));
    let d2 = cross(q2.sub(q1), p2.sub(q1));
    let d3 = cross(p2.sub(p1), q1.sub(p1));
    let d4 = cross(p2.sub(p1), q2.sub(p1));
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Axis-aligned rectangle `[x0, x1) x [y0, y1)` in pixel units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let r = Self { x0, y0, x1, y1 };
        if ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite rectangle {r:?}")));
        }
        if x0 >= x1 || y0 >= y1 {
            return Err(Error::InvalidGeometry(format!("empty rectangle {r:?}")));
        }
        Ok(r)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    pub fn contains_point(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x < self.x1 && p.y >= self.y0 && p.y < self.y1
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x0.max(other.x0);
        let y0 = self.y0.max(other.y0);
        let x1 = self.x1.min(other.x1);
        let y1 = self.y1.min(other.y1);
        (x0 < x1 && y0 < y1).then_some(Rect { x0, y0, x1, y1 })
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Rect {
        Rect { x0: self.x0 + dx, y0: self.y0 + dy, x1: self.x1 + dx, y1: self.y1 + dy }
    }

    pub fn to_quad(&self) -> Quadrangle {
        Quadrangle([
            Point::new(self.x0, self.y0),
            Point::new(self.x1, self.y0),
            Point::new(self.x1, self.y1),
            Point::new(self.x0, self.y1),
        ])
    }
}

/// Four-vertex polygon in canonical order: top-left, top-right,
/// bottom-right, bottom-left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrangle([Point; 4]);

impl Quadrangle {
    /// Builds a quadrangle from vertices already in canonical order.
    pub fn new(vertices: [Point; 4]) -> Result<Self> {
        if !vertices.iter().all(Point::is_finite) {
            return Err(Error::InvalidGeometry(format!("non-finite vertex in {vertices:?}")));
        }
        let [a, b, c, d] = vertices;
        if segments_intersect(a, b, c, d) || segments_intersect(b, c, d, a) {
            return Err(Error::InvalidGeometry(format!("self-intersecting quadrangle {vertices:?}")));
        }
        if signed_area(&vertices) <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "quadrangle {vertices:?} is degenerate or not clockwise from top-left"
            )));
        }
        Ok(Self(vertices))
    }

    /// Accepts four vertices in any order and rewrites them into canonical
    /// order before validating.
    pub fn normalized(points: [Point; 4]) -> Result<Self> {
        if !points.iter().all(Point::is_finite) {
            return Err(Error::InvalidGeometry(format!("non-finite vertex in {points:?}")));
        }
        let cx = points.iter().map(|p| p.x).sum::<f64>() / 4.0;
        let cy = points.iter().map(|p| p.y).sum::<f64>() / 4.0;
        let mut sorted = points;
        // Increasing atan2 with y down walks clockwise on screen.
        sorted.sort_by(|a, b| {
            let ta = (a.y - cy).atan2(a.x - cx);
            let tb = (b.y - cy).atan2(b.x - cx);
            ta.total_cmp(&tb)
        });
        let start = (0..4)
            .min_by(|&i, &j| {
                let (p, q) = (sorted[i], sorted[j]);
                (p.x + p.y).total_cmp(&(q.x + q.y)).then(p.y.total_cmp(&q.y)).then(p.x.total_cmp(&q.x))
            })
            .unwrap_or(0);
        sorted.rotate_left(start);
        Self::new(sorted)
    }

    pub fn from_rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Ok(Rect::new(x0, y0, x1, y1)?.to_quad())
    }

    pub fn vertices(&self) -> &[Point; 4] {
        &self.0
    }

    /// Shoelace area in square pixels.
    pub fn area(&self) -> f64 {
        signed_area(&self.0)
    }

    /// Arithmetic mean of the four vertices.
    pub fn center(&self) -> Point {
        let x = self.0.iter().map(|p| p.x).sum::<f64>() / 4.0;
        let y = self.0.iter().map(|p| p.y).sum::<f64>() / 4.0;
        Point::new(x, y)
    }

    pub fn bounds(&self) -> Rect {
        let mut r = Rect { x0: f64::INFINITY, y0: f64::INFINITY, x1: f64::NEG_INFINITY, y1: f64::NEG_INFINITY };
        for p in &self.0 {
            r.x0 = r.x0.min(p.x);
            r.y0 = r.y0.min(p.y);
            r.x1 = r.x1.max(p.x);
            r.y1 = r.y1.max(p.y);
        }
        r
    }

    pub fn min_x(&self) -> f64 {
        self.bounds().x0
    }

    pub fn min_y(&self) -> f64 {
        self.bounds().y0
    }

    pub fn height(&self) -> f64 {
        self.bounds().height()
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Quadrangle {
        Quadrangle(self.0.map(|p| Point::new(p.x + dx, p.y + dy)))
    }

    pub fn is_convex(&self) -> bool {
        (0..4).all(|i| {
            let a = self.0[i];
            let b = self.0[(i + 1) % 4];
            let c = self.0[(i + 2) % 4];
            cross(b.sub(a), c.sub(b)) >= 0.0
        })
    }

    /// Area of overlap with `other`.
    ///
    /// Exact for convex inputs. Non-convex quadrangles are replaced by their
    /// convex hulls first.
    pub fn intersection_area(&self, other: &Quadrangle) -> f64 {
        let subject = convex_hull(&self.0);
        let clip = convex_hull(&other.0);
        clip_convex(&subject, &clip).map(|poly| signed_area(&poly).max(0.0)).unwrap_or(0.0)
    }

    /// Intersection over union, in `[0, 1]`.
    pub fn iou(&self, other: &Quadrangle) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            return 0.0;
        }
        (inter / union).clamp(0.0, 1.0)
    }
}

impl Serialize for Quadrangle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pts: [[f64; 2]; 4] = self.0.map(|p| [p.x, p.y]);
        pts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Quadrangle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pts = <[[f64; 2]; 4]>::deserialize(d)?;
        Quadrangle::new(pts.map(|[x, y]| Point::new(x, y))).map_err(serde::de::Error::custom)
    }
}

/// Free-function form of [`Quadrangle::area`].
pub fn quad_area(q: &Quadrangle) -> f64 {
    q.area()
}

pub fn quad_intersection_area(a: &Quadrangle, b: &Quadrangle) -> f64 {
    a.intersection_area(b)
}

pub fn quad_iou(a: &Quadrangle, b: &Quadrangle) -> f64 {
    a.iou(b)
}

pub fn quad_center(q: &Quadrangle) -> Point {
    q.center()
}

/// Convex hull with positive orientation (monotone chain).
fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if cross(b.sub(a), p.sub(a)) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    if signed_area(&hull) < 0.0 {
        hull.reverse();
    }
    hull
}

/// Sutherland-Hodgman clipping of one positively oriented convex polygon
/// by another.
fn clip_convex(subject: &[Point], clip: &[Point]) -> Option<Vec<Point>> {
    if subject.len() < 3 || clip.len() < 3 {
        return None;
    }
    let mut output = subject.to_vec();
    for i in 0..clip.len() {
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let edge = b.sub(a);
        let side = |p: Point| cross(edge, p.sub(a));
        let input = std::mem::take(&mut output);
        if input.is_empty() {
            return None;
        }
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    output.push(intersect(prev, cur, sp, sc));
                }
                output.push(cur);
            } else if sp >= 0.0 {
                output.push(intersect(prev, cur, sp, sc));
            }
        }
    }
    (output.len() >= 3).then_some(output)
}

fn intersect(p: Point, q: Point, sp: f64, sq: f64) -> Point {
    let t = sp / (sp - sq);
    Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}
