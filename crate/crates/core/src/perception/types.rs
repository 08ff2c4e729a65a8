use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::PerceptionError;

/// Camera-frame point in meters: x right, y down, z forward.
pub type Point3 = nalgebra::Point3<f64>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Point3>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Result<Self, PerceptionError> {
        if let Some(i) = points
            .iter()
            .position(|p| !p.coords.iter().all(|c| c.is_finite()))
        {
            return Err(PerceptionError::Invalid(format!("point {i} is not finite")));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Option<Point3> {
        if self.points.is_empty() {
            return None;
        }
        let sum: Vector3<f64> = self.points.iter().map(|p| p.coords).sum();
        Some(Point3::from(sum / self.points.len() as f64))
    }

    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
        }
    }
}

impl From<Vec<Point3>> for PointCloud {
    fn from(points: Vec<Point3>) -> Self {
        Self { points }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self {
            fx: 600.0,
            fy: 600.0,
            cx: 320.0,
            cy: 240.0,
            width: 640,
            height: 480,
        }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<(), PerceptionError> {
        if !(self.fx > 0.0 && self.fy > 0.0 && self.cx.is_finite() && self.cy.is_finite()) {
            return Err(PerceptionError::Invalid(
                "focal lengths must be positive".into(),
            ));
        }
        if self.width == 0 || self.height == 0 {
            return Err(PerceptionError::Invalid(
                "image size must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Pinhole projection to pixel coordinates; `None` behind the camera.
    pub fn project(&self, p: &Point3) -> Option<(f64, f64)> {
        (p.z > 0.0).then(|| (self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy))
    }
}

/// Pixel-space region of interest, edges inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roi2D {
    pub u_min: f64,
    pub v_min: f64,
    pub u_max: f64,
    pub v_max: f64,
    pub category: String,
}

impl Roi2D {
    pub fn validate(&self, cam: &CameraIntrinsics) -> Result<(), PerceptionError> {
        let ok = self.u_min < self.u_max
            && self.v_min < self.v_max
            && self.u_min >= 0.0
            && self.v_min >= 0.0
            && self.u_max <= cam.width as f64
            && self.v_max <= cam.height as f64;
        if ok {
            Ok(())
        } else {
            Err(PerceptionError::Invalid(format!(
                "RoI [{}, {}]x[{}, {}] outside a {}x{} image",
                self.u_min, self.u_max, self.v_min, self.v_max, cam.width, cam.height
            )))
        }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        (self.u_min..=self.u_max).contains(&u) && (self.v_min..=self.v_max).contains(&v)
    }
}

/// Plane `n·x + d = 0` with unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub n: Vector3<f64>,
    pub d: f64,
}

impl Plane {
    /// Normalizes `n`; fails on a zero normal.
    pub fn new(n: Vector3<f64>, d: f64) -> Result<Self, PerceptionError> {
        let norm = n.norm();
        if !(norm > 1e-12 && norm.is_finite() && d.is_finite()) {
            return Err(PerceptionError::Invalid("degenerate plane normal".into()));
        }
        Ok(Self {
            n: n / norm,
            d: d / norm,
        })
    }

    /// Plane through three points, `None` if they are collinear.
    pub fn through(a: &Point3, b: &Point3, c: &Point3) -> Option<Self> {
        let n = (b - a).cross(&(c - a));
        let norm = n.norm();
        let scale = (b - a).norm().max((c - a).norm()).max(1e-300);
        if norm <= 1e-12 * scale * scale {
            return None;
        }
        let n = n / norm;
        Some(
            Self {
                n,
                d: -n.dot(&a.coords),
            }
            .facing_origin(),
        )
    }

    /// Flips the sign so the camera origin lies on the positive side.
    pub fn facing_origin(self) -> Self {
        if self.d < 0.0 {
            Self {
                n: -self.n,
                d: -self.d,
            }
        } else {
            self
        }
    }

    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.n.dot(&p.coords) + self.d
    }
}

/// Object footprint and height in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySpec {
    pub name: String,
    /// (w, d, h)
    pub extents: [f64; 3],
}

impl CategorySpec {
    pub fn new(name: &str, w: f64, d: f64, h: f64) -> Result<Self, PerceptionError> {
        let spec = Self {
            name: name.to_string(),
            extents: [w, d, h],
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), PerceptionError> {
        if self.extents.iter().all(|e| e.is_finite() && *e > 0.0) {
            Ok(())
        } else {
            Err(PerceptionError::Invalid(format!(
                "extents of {:?} must be positive",
                self.name
            )))
        }
    }

    pub fn height(&self) -> f64 {
        self.extents[2]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Catalog {
    pub categories: Vec<CategorySpec>,
}

impl Catalog {
    pub fn get(&self, name: &str) -> Result<&CategorySpec, PerceptionError> {
        self.categories
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| PerceptionError::UnknownCategory(name.to_string()))
    }

    /// Three grocery-sized boxes.
    pub fn default_grocery() -> Self {
        Self {
            categories: vec![
                CategorySpec {
                    name: "cereal".into(),
                    extents: [0.20, 0.08, 0.28],
                },
                CategorySpec {
                    name: "cracker".into(),
                    extents: [0.16, 0.10, 0.06],
                },
                CategorySpec {
                    name: "tea".into(),
                    extents: [0.12, 0.12, 0.10],
                },
            ],
        }
    }
}

/// Rectangle in plane coordinates. `dims.0` lies along `angle`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedRect {
    pub center: Vector2<f64>,
    pub angle: f64,
    pub dims: (f64, f64),
}

impl OrientedRect {
    /// Corners in the order (−,−), (+,−), (+,+), (−,+): counter-clockwise.
    pub fn corners(&self) -> [Vector2<f64>; 4] {
        let (s, c) = self.angle.sin_cos();
        let u = Vector2::new(c, s) * (self.dims.0 / 2.0);
        let w = Vector2::new(-s, c) * (self.dims.1 / 2.0);
        [
            self.center - u - w,
            self.center + u - w,
            self.center + u + w,
            self.center - u + w,
        ]
    }
}

/// Eight-corner box: bottom four counter-clockwise about the floor normal,
/// then the top four in the same order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Box3D {
    pub corners: [Point3; 8],
    pub center: Point3,
    pub category: String,
}

impl Box3D {
    /// Checks edge orthogonality, congruent opposite faces and the center.
    pub fn is_cuboid(&self, tol: f64) -> bool {
        let c = &self.corners;
        let e1 = c[1] - c[0];
        let e2 = c[3] - c[0];
        let e3 = c[4] - c[0];
        let unit = |v: Vector3<f64>| v / v.norm().max(1e-300);
        let ortho = unit(e1).dot(&unit(e2)).abs() < tol
            && unit(e1).dot(&unit(e3)).abs() < tol
            && unit(e2).dot(&unit(e3)).abs() < tol;
        let offsets_match = (0..4).all(|i| ((c[i + 4] - c[i]) - e3).norm() < tol)
            && ((c[2] - c[1]) - e2).norm() < tol
            && ((c[2] - c[3]) - e1).norm() < tol;
        let mean: Vector3<f64> = c.iter().map(|p| p.coords).sum::<Vector3<f64>>() / 8.0;
        ortho && offsets_match && (mean - self.center.coords).norm() < 1e-9
    }
}
