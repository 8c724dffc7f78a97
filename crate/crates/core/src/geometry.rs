//! Planar predicates shared by graph construction and every routing decision.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cross products with magnitude below this are treated as collinear.
pub const COLLINEAR_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-finite coordinate ({x}, {y})")]
    NonFinite { x: f64, y: f64 },
    #[error("segment endpoints coincide at ({x}, {y})")]
    DegenerateSegment { x: f64, y: f64 },
    #[error("no candidates to choose from")]
    NoCandidates,
    #[error("candidate coincides with the center")]
    CandidateAtCenter,
}

/// A point in the plane. Coordinates are always finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint", into = "RawPoint")]
pub struct Point {
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPoint {
    x: f64,
    y: f64,
}

impl TryFrom<RawPoint> for Point {
    type Error = GeometryError;

    fn try_from(raw: RawPoint) -> Result<Self, Self::Error> {
        Point::new(raw.x, raw.y)
    }
}

impl From<Point> for RawPoint {
    fn from(p: Point) -> Self {
        RawPoint { x: p.x, y: p.y }
    }
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Self, GeometryError> {
        if x.is_finite() && y.is_finite() {
            Ok(Point { x, y })
        } else {
            Err(GeometryError::NonFinite { x, y })
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Direction of `other` as seen from `self`, in `[0, 2π)` measured
    /// counter-clockwise from the +x axis.
    pub fn bearing_to(&self, other: &Point) -> f64 {
        let a = (other.y - self.y).atan2(other.x - self.x);
        if a < 0.0 {
            a + TAU
        } else {
            a
        }
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point {
            x: 0.5 * (self.x + other.x),
            y: 0.5 * (self.y + other.y),
        }
    }

    /// Mirror image across the x axis.
    pub fn reflect_x(&self) -> Point {
        Point {
            x: self.x,
            y: -self.y,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Builds a point from literals known to be finite.
///
/// Panics on NaN or infinity; intended for fixtures and constants.
pub fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y).expect("finite coordinates")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    a: Point,
    b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self, GeometryError> {
        if a == b {
            return Err(GeometryError::DegenerateSegment { x: a.x, y: a.y });
        }
        Ok(Segment { a, b })
    }

    pub fn a(&self) -> Point {
        self.a
    }

    pub fn b(&self) -> Point {
        self.b
    }

    pub fn length(&self) -> f64 {
        dist(self.a, self.b)
    }

    /// Whether `p` lies on the closed segment (within the collinearity tolerance).
    pub fn contains(&self, p: Point) -> bool {
        orientation(self.a, self.b, p) == Orientation::Collinear && within_box(self.a, self.b, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Clockwise,
    CounterClockwise,
    Collinear,
}

impl Orientation {
    pub fn reversed(self) -> Self {
        match self {
            Orientation::Clockwise => Orientation::CounterClockwise,
            Orientation::CounterClockwise => Orientation::Clockwise,
            Orientation::Collinear => Orientation::Collinear,
        }
    }
}

/// Rotation sense used when scanning neighbors around a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Cw,
    Ccw,
}

pub fn cross(p: Point, q: Point, r: Point) -> f64 {
    (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
}

/// Sign of the turn `p -> q -> r`.
pub fn orientation(p: Point, q: Point, r: Point) -> Orientation {
    let c = cross(p, q, r);
    if c.abs() < COLLINEAR_EPS {
        Orientation::Collinear
    } else if c > 0.0 {
        Orientation::CounterClockwise
    } else {
        Orientation::Clockwise
    }
}

pub fn dist(p: Point, q: Point) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

pub fn dist_sq(p: Point, q: Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    dx * dx + dy * dy
}

fn within_box(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) - COLLINEAR_EPS
        && p.x <= a.x.max(b.x) + COLLINEAR_EPS
        && p.y >= a.y.min(b.y) - COLLINEAR_EPS
        && p.y <= a.y.max(b.y) + COLLINEAR_EPS
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Intersection {
    None,
    /// Interiors cross at a single point.
    Proper(Point),
    /// An endpoint of one segment lies on the other.
    Touching(Point),
}

impl Intersection {
    pub fn point(&self) -> Option<Point> {
        match *self {
            Intersection::None => None,
            Intersection::Proper(p) | Intersection::Touching(p) => Some(p),
        }
    }

    pub fn is_proper(&self) -> bool {
        matches!(self, Intersection::Proper(_))
    }
}

pub fn segments_intersect(s1: &Segment, s2: &Segment) -> Intersection {
    let (p1, p2, q1, q2) = (s1.a, s1.b, s2.a, s2.b);
    let o1 = orientation(p1, p2, q1);
    let o2 = orientation(p1, p2, q2);
    let o3 = orientation(q1, q2, p1);
    let o4 = orientation(q1, q2, p2);

    let none_collinear = [o1, o2, o3, o4]
        .iter()
        .all(|o| *o != Orientation::Collinear);
    if none_collinear {
        if o1 != o2 && o3 != o4 {
            return Intersection::Proper(line_intersection(p1, p2, q1, q2));
        }
        return Intersection::None;
    }

    // Some endpoint is collinear with the other segment; report the first
    // endpoint that actually lies on the other segment, in a fixed order so
    // the result does not depend on argument order.
    let mut touching: Vec<Point> = Vec::with_capacity(4);
    if o1 == Orientation::Collinear && within_box(p1, p2, q1) {
        touching.push(q1);
    }
    if o2 == Orientation::Collinear && within_box(p1, p2, q2) {
        touching.push(q2);
    }
    if o3 == Orientation::Collinear && within_box(q1, q2, p1) {
        touching.push(p1);
    }
    if o4 == Orientation::Collinear && within_box(q1, q2, p2) {
        touching.push(p2);
    }
    touching
        .into_iter()
        .min_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)))
        .map_or(Intersection::None, Intersection::Touching)
}

fn line_intersection(p1: Point, p2: Point, q1: Point, q2: Point) -> Point {
    let d1x = p2.x - p1.x;
    let d1y = p2.y - p1.y;
    let d2x = q2.x - q1.x;
    let d2y = q2.y - q1.y;
    let denom = d1x * d2y - d1y * d2x;
    let t = ((q1.x - p1.x) * d2y - (q1.y - p1.y) * d2x) / denom;
    Point {
        x: p1.x + t * d1x,
        y: p1.y + t * d1y,
    }
}

/// Rotation from bearing `from` to bearing `to` in the given sense, in `(0, 2π]`.
///
/// A zero rotation maps to a full turn, so the starting direction itself is
/// the last one reached.
pub fn rotation(from: f64, to: f64, sense: Sense) -> f64 {
    let raw = match sense {
        Sense::Ccw => to - from,
        Sense::Cw => from - to,
    };
    let r = raw.rem_euclid(TAU);
    if r <= 0.0 {
        TAU
    } else {
        r
    }
}

/// Index of the candidate first met when sweeping from the direction
/// `center -> from` in the given sense. The `from` direction itself is only
/// reached after a full turn, which lets a pendant node bounce a token back.
pub fn angle_order_after(
    center: Point,
    from: Point,
    candidates: &[Point],
    sense: Sense,
) -> Result<usize, GeometryError> {
    if candidates.is_empty() {
        return Err(GeometryError::NoCandidates);
    }
    let start = center.bearing_to(&from);
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if *c == center {
            return Err(GeometryError::CandidateAtCenter);
        }
        let r = rotation(start, center.bearing_to(c), sense);
        if best.is_none_or(|(_, br)| r < br) {
            best = Some((i, r));
        }
    }
    Ok(best.map(|(i, _)| i).expect("non-empty"))
}
