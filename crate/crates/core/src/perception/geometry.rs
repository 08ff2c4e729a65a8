use std::f64::consts::FRAC_PI_2;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::types::{Box3D, CategorySpec, OrientedRect, Plane, Point3};
use super::PerceptionError;

/// Right-handed frame on a plane: `e1 × e2 = n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneBasis {
    pub origin: Point3,
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
    pub n: Vector3<f64>,
}

impl PlaneBasis {
    /// `e1` is the coordinate axis least aligned with the normal, made
    /// orthogonal to it; the origin is the foot of the camera origin.
    pub fn of(plane: &Plane) -> Self {
        let n = plane.n;
        let axis = (0..3)
            .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
            .expect("three axes");
        let helper = Vector3::ith(axis, 1.0);
        let e1 = (helper - n * helper.dot(&n)).normalize();
        let e2 = n.cross(&e1);
        Self {
            origin: Point3::from(-plane.d * n),
            e1,
            e2,
            n,
        }
    }

    pub fn to_plane(&self, p: &Point3) -> Vector2<f64> {
        let r = p - self.origin;
        Vector2::new(r.dot(&self.e1), r.dot(&self.e2))
    }

    pub fn to_world(&self, q: &Vector2<f64>, height: f64) -> Point3 {
        self.origin + self.e1 * q.x + self.e2 * q.y + self.n * height
    }
}

/// Orthogonal projection onto the plane, in [`PlaneBasis`] coordinates.
pub fn project_to_plane(points: &[Point3], plane: &Plane) -> Vec<Vector2<f64>> {
    let basis = PlaneBasis::of(plane);
    points.iter().map(|p| basis.to_plane(p)).collect()
}

fn cross(o: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Counter-clockwise convex hull without collinear vertices, starting at
/// the lowest-x (then lowest-y) point.
pub fn convex_hull(points: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Vector2<f64>> = Vec::with_capacity(2 * pts.len());
    for p in &pts {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

/// Folds an angle into [0, π/2), swapping dims for each quarter turn.
fn normalize(angle: f64, dims: (f64, f64)) -> (f64, (f64, f64)) {
    let turns = (angle / FRAC_PI_2).floor();
    let mut a = angle - turns * FRAC_PI_2;
    let mut dims = if (turns as i64).rem_euclid(2) == 1 {
        (dims.1, dims.0)
    } else {
        dims
    };
    if FRAC_PI_2 - a < 1e-9 {
        a = 0.0;
        dims = (dims.1, dims.0);
    }
    if a < 1e-12 {
        a = 0.0;
    }
    (a, dims)
}

/// Minimum-area enclosing rectangle by rotating calipers over hull edges.
pub fn min_area_rect(points: &[Vector2<f64>]) -> Result<OrientedRect, PerceptionError> {
    if points.len() < 3 {
        return Err(PerceptionError::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Err(PerceptionError::Collinear);
    }
    let span = hull
        .iter()
        .map(|p| (p - hull[0]).norm())
        .fold(0.0, f64::max);
    let mut best: Option<(f64, OrientedRect)> = None;
    for i in 0..hull.len() {
        let edge = hull[(i + 1) % hull.len()] - hull[i];
        let u = edge / edge.norm();
        let w = Vector2::new(-u.y, u.x);
        let (mut u0, mut u1, mut w0, mut w1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &hull {
            let (a, b) = (p.dot(&u), p.dot(&w));
            u0 = u0.min(a);
            u1 = u1.max(a);
            w0 = w0.min(b);
            w1 = w1.max(b);
        }
        let area = (u1 - u0) * (w1 - w0);
        if best.as_ref().is_none_or(|(a, _)| area < a * (1.0 - 1e-9)) {
            let (angle, dims) = normalize(u.y.atan2(u.x), (u1 - u0, w1 - w0));
            best = Some((
                area,
                OrientedRect {
                    center: u * (u0 + u1) / 2.0 + w * (w0 + w1) / 2.0,
                    angle,
                    dims,
                },
            ));
        }
    }
    let (area, rect) = best.expect("hull has edges");
    if area <= 1e-12 * span * span {
        return Err(PerceptionError::Collinear);
    }
    Ok(rect)
}

/// Minimum-area rectangle with its dims replaced by the category
/// footprint, the longer footprint side on the longer fitted side.
pub fn fit_rectangle(
    points: &[Vector2<f64>],
    category: &CategorySpec,
) -> Result<OrientedRect, PerceptionError> {
    let rect = min_area_rect(points)?;
    let [w, d, _] = category.extents;
    let (big, small) = (w.max(d), w.min(d));
    let dims = if rect.dims.0 >= rect.dims.1 {
        (big, small)
    } else {
        (small, big)
    };
    Ok(OrientedRect { dims, ..rect })
}

/// Lifts the rectangle onto the plane and extrudes it `height` along the
/// plane normal.
pub fn extrude_box(rect: &OrientedRect, plane: &Plane, height: f64, category: &str) -> Box3D {
    let basis = PlaneBasis::of(plane);
    let bottom = rect.corners();
    let mut corners = [Point3::origin(); 8];
    for (i, c) in bottom.iter().enumerate() {
        corners[i] = basis.to_world(c, 0.0);
        corners[i + 4] = basis.to_world(c, height);
    }
    let center = Point3::from(corners.iter().map(|p| p.coords).sum::<Vector3<f64>>() / 8.0);
    Box3D {
        corners,
        center,
        category: category.to_string(),
    }
}
