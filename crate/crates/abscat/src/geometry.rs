//! Obstacle geometry: the excluded compact set K (one convex component plus
//! finitely many point components), exterior lines, convex cylinder
//! intersections C(O) and the direction obstruction set D(B).

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unit-vector tolerance for [`Line`] directions.
pub const UNIT_TOL: f64 = 1e-12;
/// Exclusion radius around point components (quadrature singularity guard).
pub const POINT_EXCLUSION: f64 = 1e-9;

/// Plane vector / point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }
    pub fn from_angle(theta: f64) -> Self {
        Vec2::new(theta.cos(), theta.sin())
    }
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }
    /// Scalar 2D cross product a × b = a1 b2 − a2 b1.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }
    /// Rotation by +90°: (x, y) → (−y, x).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }
    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }
    pub fn unit(self) -> Vec2 {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        self / n
    }
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}
impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}
impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}
impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}
impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Straight line {anchor + τ·dir : τ ∈ ℝ} with |dir| = 1.
#[derive(Debug, Clone, Copy)]
pub struct Line {
    anchor: Vec2,
    dir: Vec2,
}

impl Line {
    pub fn new(anchor: Vec2, dir: Vec2) -> Result<Line> {
        if (dir.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::geometry(format!(
                "line direction must be unit (|v| = {})",
                dir.norm()
            )));
        }
        Ok(Line { anchor, dir })
    }

    /// Sinogram line for angle θ and signed offset s: direction (cos θ, sin θ),
    /// anchor s·(−sin θ, cos θ).
    pub fn from_angle_offset(theta: f64, s: f64) -> Line {
        let dir = Vec2::from_angle(theta);
        Line {
            anchor: dir.perp() * s,
            dir,
        }
    }

    pub fn anchor(&self) -> Vec2 {
        self.anchor
    }
    pub fn dir(&self) -> Vec2 {
        self.dir
    }
    pub fn point_at(&self, tau: f64) -> Vec2 {
        self.anchor + self.dir * tau
    }
    /// Signed perpendicular offset of `p` from the line (along dir.perp()).
    pub fn signed_offset(&self, p: Vec2) -> f64 {
        (p - self.anchor).dot(self.dir.perp())
    }
    /// Parameter of the orthogonal projection of `p` onto the line.
    pub fn project(&self, p: Vec2) -> f64 {
        (p - self.anchor).dot(self.dir)
    }
    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        self.signed_offset(p).abs()
    }
}

/// Convex region: disc or convex polygon (counter-clockwise vertices).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexRegion {
    Disc { center: Vec2, radius: f64 },
    Polygon { vertices: Vec<Vec2> },
}

impl ConvexRegion {
    pub fn disc(center: Vec2, radius: f64) -> Self {
        ConvexRegion::Disc { center, radius }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexRegion::Disc { radius, .. } => {
                if *radius <= 0.0 {
                    return Err(Error::geometry("disc radius must be positive"));
                }
            }
            ConvexRegion::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::geometry("polygon needs at least 3 vertices"));
                }
                // convexity + ccw: all consecutive cross products positive
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    if (b - a).cross(c - b) <= 0.0 {
                        return Err(Error::geometry(
                            "polygon must be convex with counter-clockwise vertices",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Support function h(n) = max_{x in K} n·x.
    pub fn support(&self, n: Vec2) -> f64 {
        match self {
            ConvexRegion::Disc { center, radius } => center.dot(n) + radius * n.norm(),
            ConvexRegion::Polygon { vertices } => vertices
                .iter()
                .map(|v| v.dot(n))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            ConvexRegion::Disc { center, radius } => (p - *center).norm() <= *radius,
            ConvexRegion::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    (b - a).cross(p - a) >= 0.0
                })
            }
        }
    }

    /// Euclidean distance from `p` to the region (0 inside).
    pub fn distance(&self, p: Vec2) -> f64 {
        match self {
            ConvexRegion::Disc { center, radius } => ((p - *center).norm() - radius).max(0.0),
            ConvexRegion::Polygon { vertices } => {
                if self.contains(p) {
                    return 0.0;
                }
                let n = vertices.len();
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    best = best.min(segment_distance(p, a, b));
                }
                best
            }
        }
    }

    /// Exact line-region intersection test.
    pub fn intersects_line(&self, line: &Line) -> bool {
        match self {
            ConvexRegion::Disc { center, radius } => line.distance_to_point(*center) <= *radius,
            ConvexRegion::Polygon { vertices } => {
                // a line misses a convex polygon iff all vertices lie strictly
                // on one side
                let mut pos = false;
                let mut neg = false;
                for v in vertices {
                    let s = line.signed_offset(*v);
                    if s > 0.0 {
                        pos = true;
                    } else if s < 0.0 {
                        neg = true;
                    } else {
                        return true; // vertex exactly on the line
                    }
                }
                pos && neg
            }
        }
    }

    /// Center of a bounding disc and its radius.
    pub fn bounding_disc(&self) -> (Vec2, f64) {
        match self {
            ConvexRegion::Disc { center, radius } => (*center, *radius),
            ConvexRegion::Polygon { vertices } => {
                let mut c = Vec2::ZERO;
                for v in vertices {
                    c = c + *v;
                }
                c = c / vertices.len() as f64;
                let r = vertices
                    .iter()
                    .map(|v| (*v - c).norm())
                    .fold(0.0, f64::max);
                (c, r)
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            ConvexRegion::Disc { radius, .. } => std::f64::consts::PI * radius * radius,
            ConvexRegion::Polygon { vertices } => {
                let n = vertices.len();
                let mut s = 0.0;
                for i in 0..n {
                    s += vertices[i].cross(vertices[(i + 1) % n]);
                }
                0.5 * s
            }
        }
    }
}

fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.norm2()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// The obstacle K: one convex component K₁ (index 0) plus point components
/// x⁽ⁱ⁾ (indices 1..). `d` is the cached minimum pairwise component distance;
/// the surrounding curves γ_l of point components are circles of radius d/4.
#[derive(Debug, Clone)]
pub struct Obstacle {
    convex: ConvexRegion,
    points: Vec<Vec2>,
    d: f64,
}

impl Obstacle {
    pub fn new(convex: ConvexRegion, points: Vec<Vec2>) -> Result<Obstacle> {
        convex.validate()?;
        for (i, p) in points.iter().enumerate() {
            if convex.contains(*p) {
                return Err(Error::geometry(format!(
                    "point component {i} lies inside the convex component"
                )));
            }
        }
        let d = min_pairwise_distance(&convex, &points)?;
        Ok(Obstacle { convex, points, d })
    }

    pub fn convex(&self) -> &ConvexRegion {
        &self.convex
    }
    pub fn points(&self) -> &[Vec2] {
        &self.points
    }
    /// Minimum pairwise component distance (Eq. for d); +∞ when K = K₁ only.
    pub fn min_distance(&self) -> f64 {
        self.d
    }
    /// Number of connected components (1 + number of points).
    pub fn n_components(&self) -> usize {
        1 + self.points.len()
    }
    /// Radius of the surrounding circles γ_l for point components.
    pub fn gamma_radius(&self) -> f64 {
        if self.points.is_empty() {
            0.25 // arbitrary but finite; never used without point components
        } else {
            0.25 * self.d
        }
    }

    /// Center of the surrounding curve of component `l` (0 = convex).
    pub fn component_anchor(&self, l: usize) -> Vec2 {
        if l == 0 {
            self.convex.bounding_disc().0
        } else {
            self.points[l - 1]
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        if self.convex.contains(p) {
            return true;
        }
        self.points
            .iter()
            .any(|q| (p - *q).norm() <= POINT_EXCLUSION)
    }

    /// Distance from `p` to the nearest component.
    pub fn distance(&self, p: Vec2) -> f64 {
        let mut d = self.convex.distance(p);
        for q in &self.points {
            d = d.min((p - *q).norm());
        }
        d
    }

    /// Bounding disc of the whole obstacle including the γ circles.
    pub fn bounding_disc(&self) -> (Vec2, f64) {
        let (c, mut r) = self.convex.bounding_disc();
        for q in &self.points {
            r = r.max((*q - c).norm() + self.gamma_radius());
        }
        (c, r)
    }
}

fn min_pairwise_distance(convex: &ConvexRegion, points: &[Vec2]) -> Result<f64> {
    let mut d = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let dc = convex.distance(*p);
        if dc <= 0.0 {
            return Err(Error::geometry(format!(
                "point component {i} touches the convex component"
            )));
        }
        d = d.min(dc);
        for q in points.iter().skip(i + 1) {
            let dd = (*p - *q).norm();
            if dd <= 0.0 {
                return Err(Error::geometry("coincident point components"));
            }
            d = d.min(dd);
        }
    }
    Ok(d)
}

/// Line-exterior test: true iff the line misses every component of K.
pub fn line_in_exterior(line: &Line, obs: &Obstacle) -> bool {
    if obs.convex.intersects_line(line) {
        return false;
    }
    obs.points
        .iter()
        .all(|p| line.distance_to_point(*p) > POINT_EXCLUSION)
}

/// Polygonal over-approximation of C(O) = ∩_{ŵ∈O} (K₁ + ℝŵ) as an
/// intersection of slabs, one per direction.
#[derive(Debug, Clone)]
pub struct CylinderIntersection {
    /// Clip polygon (counter-clockwise); meaningful only when `bounded`.
    pub polygon: Vec<Vec2>,
    /// False when the direction set cannot bound the intersection
    /// (all directions parallel).
    pub bounded: bool,
}

impl CylinderIntersection {
    pub fn contains(&self, p: Vec2) -> bool {
        let n = self.polygon.len();
        if n < 3 {
            return false;
        }
        (0..n).all(|i| {
            let a = self.polygon[i];
            let b = self.polygon[(i + 1) % n];
            (b - a).cross(p - a) >= -1e-12
        })
    }
}

/// Intersection of the cylinders K₁ + ℝŵ over the given directions.
pub fn cylinder_intersection(obs: &Obstacle, directions: &[Vec2]) -> Result<CylinderIntersection> {
    if directions.is_empty() {
        return Err(Error::geometry("cylinder_intersection: empty direction list"));
    }
    let bounded = directions.iter().any(|w| {
        directions
            .iter()
            .any(|u| w.cross(*u).abs() > 1e-9 * w.norm() * u.norm())
    });
    // start from a box comfortably containing K1 and clip by each slab
    let (c, r) = obs.convex.bounding_disc();
    let big = 16.0 * (r + c.norm() + 1.0);
    let mut poly = vec![
        Vec2::new(c.x - big, c.y - big),
        Vec2::new(c.x + big, c.y - big),
        Vec2::new(c.x + big, c.y + big),
        Vec2::new(c.x - big, c.y + big),
    ];
    for w in directions {
        let n = w.unit().perp();
        // slab: -h(-n) <= x·n <= h(n)
        let hi = obs.convex.support(n);
        let lo = -obs.convex.support(-n);
        poly = clip_halfplane(&poly, n, hi);
        poly = clip_halfplane(&poly, -n, -lo);
        if poly.len() < 3 {
            break;
        }
    }
    Ok(CylinderIntersection {
        polygon: poly,
        bounded,
    })
}

/// Sutherland–Hodgman clip of `poly` by the half-plane {x·n <= c}.
fn clip_halfplane(poly: &[Vec2], n: Vec2, c: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let len = poly.len();
    for i in 0..len {
        let a = poly[i];
        let b = poly[(i + 1) % len];
        let da = a.dot(n) - c;
        let db = b.dot(n) - c;
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let t = da / (da - db);
            out.push(a + (b - a) * t);
        }
    }
    out
}

/// Declared support bound for a sampled field (see the fields module).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportBound {
    Bounded(ConvexRegion),
    Unbounded,
}

impl SupportBound {
    pub fn disc(center: Vec2, radius: f64) -> Self {
        SupportBound::Bounded(ConvexRegion::disc(center, radius))
    }
}

/// Discretized obstruction set D(B) on a uniform angle grid.
#[derive(Debug, Clone)]
pub struct ObstructionSet {
    pub n_angles: usize,
    /// Direction indices k (angle 2πk/n) belonging to D(B).
    pub members: Vec<usize>,
}

impl ObstructionSet {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
    pub fn contains_index(&self, k: usize) -> bool {
        self.members.binary_search(&k).is_ok()
    }
    pub fn angle(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.n_angles as f64
    }
}

/// Directions v̂ admitting an angular neighborhood N_v̂ (± `nbhd_halfwidth`
/// grid steps) with supp(B) ⊂ C(N_v̂). An unbounded support bound yields the
/// empty set immediately (a nonempty D(B) forces compact support).
pub fn obstruction_set(
    support: &SupportBound,
    obs: &Obstacle,
    n_angles: usize,
    nbhd_halfwidth: usize,
) -> ObstructionSet {
    let region = match support {
        SupportBound::Unbounded => {
            return ObstructionSet {
                n_angles,
                members: Vec::new(),
            }
        }
        SupportBound::Bounded(region) => region,
    };
    // per-direction slab containment of the declared support
    let in_slab: Vec<bool> = (0..n_angles)
        .map(|k| {
            let w = Vec2::from_angle(2.0 * std::f64::consts::PI * k as f64 / n_angles as f64);
            let n = w.perp();
            let hi = obs.convex.support(n);
            let lo = -obs.convex.support(-n);
            let shi = region.support(n);
            let slo = -region.support(-n);
            slo >= lo - 1e-12 && shi <= hi + 1e-12
        })
        .collect();
    let members = (0..n_angles)
        .filter(|&k| {
            (0..=2 * nbhd_halfwidth).all(|j| {
                let idx = (k + n_angles + j - nbhd_halfwidth) % n_angles;
                in_slab[idx]
            })
        })
        .collect();
    ObstructionSet { n_angles, members }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_disc_obstacle() -> Obstacle {
        Obstacle::new(ConvexRegion::disc(Vec2::ZERO, 1.0), vec![]).unwrap()
    }

    #[test]
    fn line_through_disc_center_hits() {
        let obs = unit_disc_obstacle();
        let l = Line::from_angle_offset(0.3, 0.0);
        assert!(!line_in_exterior(&l, &obs));
    }

    #[test]
    fn horizontal_line_at_height_two_misses() {
        let obs = unit_disc_obstacle();
        let l = Line::from_angle_offset(0.0, 2.0);
        assert!(line_in_exterior(&l, &obs));
    }

    #[test]
    fn line_hits_disc_and_point_component() {
        // disc B_1(0) with a point at (3, 0); the x-axis hits both
        let obs = Obstacle::new(
            ConvexRegion::disc(Vec2::ZERO, 1.0),
            vec![Vec2::new(3.0, 0.0)],
        )
        .unwrap();
        let l = Line::new(Vec2::new(-10.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        assert!(!line_in_exterior(&l, &obs));
        // exact disc-line intersection: offset 0.999 still hits, 1.001 misses
        // the disc but the point is exactly on neither
        let l2 = Line::from_angle_offset(0.0, 0.999);
        assert!(!line_in_exterior(&l2, &obs));
        let l3 = Line::from_angle_offset(0.0, 1.001);
        assert!(line_in_exterior(&l3, &obs));
    }

    #[test]
    fn exterior_line_points_stay_outside() {
        let obs = Obstacle::new(
            ConvexRegion::disc(Vec2::new(0.5, -0.25), 1.25),
            vec![Vec2::new(4.0, 1.0), Vec2::new(-3.0, 2.0)],
        )
        .unwrap();
        for k in 0..24 {
            let theta = 0.26 * k as f64;
            let l = Line::from_angle_offset(theta, 2.4);
            if line_in_exterior(&l, &obs) {
                for j in -40..=40 {
                    let p = l.point_at(j as f64 * 0.5);
                    assert!(!obs.contains(p));
                }
            }
        }
    }

    #[test]
    fn cylinder_intersection_single_direction_unbounded() {
        let obs = unit_disc_obstacle();
        let ci = cylinder_intersection(&obs, &[Vec2::new(1.0, 0.0)]).unwrap();
        assert!(!ci.bounded);
    }

    #[test]
    fn cylinder_intersection_two_orthogonal_gives_square() {
        let obs = unit_disc_obstacle();
        let ci =
            cylinder_intersection(&obs, &[Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]).unwrap();
        assert!(ci.bounded);
        // resulting region is the square [-1,1]^2: check corners and area
        assert!(ci.contains(Vec2::new(0.999, 0.999)));
        assert!(!ci.contains(Vec2::new(1.01, 0.0)));
        let area = ConvexRegion::Polygon {
            vertices: ci.polygon.clone(),
        }
        .area();
        assert_relative_eq!(area, 4.0, max_relative = 1e-9);
    }

    #[test]
    fn cylinder_intersection_full_grid_approaches_disc() {
        let obs = unit_disc_obstacle();
        let dirs: Vec<Vec2> = (0..180)
            .map(|k| Vec2::from_angle(std::f64::consts::PI * k as f64 / 180.0))
            .collect();
        let ci = cylinder_intersection(&obs, &dirs).unwrap();
        assert!(ci.bounded);
        // Hausdorff-close to B_1(0): contains K1 and stays within (1 + eps)
        for k in 0..360 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 360.0;
            assert!(ci.contains(Vec2::from_angle(th) * 0.9995));
        }
        let max_r = ci.polygon.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(max_r < 1.0 + 2e-4, "max_r = {max_r}");
        // convex and contains K1
        let area = ConvexRegion::Polygon {
            vertices: ci.polygon.clone(),
        }
        .area();
        assert!(area >= std::f64::consts::PI);
    }

    #[test]
    fn obstruction_set_unbounded_support_is_empty() {
        let obs = unit_disc_obstacle();
        let d = obstruction_set(&SupportBound::Unbounded, &obs, 720, 3);
        assert!(d.is_empty());
    }

    #[test]
    fn obstruction_set_annulus_is_empty() {
        // support surrounding K1 sticks out of every slab of width 2
        let obs = unit_disc_obstacle();
        let d = obstruction_set(&SupportBound::disc(Vec2::ZERO, 2.5), &obs, 720, 3);
        assert!(d.is_empty());
    }

    #[test]
    fn obstruction_set_thin_strip_contains_x_axis() {
        // field support in {|y| <= 0.5, 2 <= x <= 10} as a polygon
        let obs = unit_disc_obstacle();
        let strip = ConvexRegion::Polygon {
            vertices: vec![
                Vec2::new(2.0, -0.5),
                Vec2::new(10.0, -0.5),
                Vec2::new(10.0, 0.5),
                Vec2::new(2.0, 0.5),
            ],
        };
        let d = obstruction_set(&SupportBound::Bounded(strip), &obs, 720, 3);
        assert!(!d.is_empty());
        assert!(d.contains_index(0), "direction (1,0) must obstruct");
        // and a neighborhood of it
        assert!(d.contains_index(1));
        assert!(d.contains_index(719));
        // but not the perpendicular direction
        assert!(!d.contains_index(180));
    }

    #[test]
    fn obstruction_set_monotone_in_support() {
        let obs = unit_disc_obstacle();
        let small = obstruction_set(
            &SupportBound::disc(Vec2::new(4.0, 0.0), 0.4),
            &obs,
            360,
            3,
        );
        let large = obstruction_set(
            &SupportBound::disc(Vec2::new(4.0, 0.0), 0.9),
            &obs,
            360,
            3,
        );
        for k in &large.members {
            assert!(small.contains_index(*k), "enlarging support grew D(B)");
        }
    }

    #[test]
    fn obstacle_distance_and_gamma() {
        let obs = Obstacle::new(
            ConvexRegion::disc(Vec2::ZERO, 1.0),
            vec![Vec2::new(3.0, 0.0), Vec2::new(-2.0, 2.0)],
        )
        .unwrap();
        // d = min over pairs: point(3,0) to disc = 2, point(-2,2) to disc ~ 1.828,
        // between points = 5.385
        assert_relative_eq!(obs.min_distance(), 8.0f64.sqrt() - 1.0, epsilon = 1e-12);
        assert_relative_eq!(obs.gamma_radius(), obs.min_distance() / 4.0);
        assert!(obs.distance(Vec2::new(2.0, 0.0)) > 0.9);
    }
}
