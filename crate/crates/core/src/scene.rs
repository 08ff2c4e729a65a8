//! Synthetic tabletop-free scenes: boxes standing on a floor, seen by a
//! tilted pinhole camera.
//!
//! The world frame has the floor at z = 0, x forward, y left and z up. The
//! camera sits at `(0, 0, camera_height)` pitched down by `camera_tilt_deg`.

use nalgebra::{Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::perception::{CameraIntrinsics, Catalog, PerceptionError, Point3, PointCloud, Roi2D};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub category: String,
    /// Footprint center on the floor, meters.
    pub x: f64,
    pub y: f64,
    /// Rotation about world up, radians.
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneSpec {
    pub camera_height: f64,
    pub camera_tilt_deg: f64,
    pub intrinsics: CameraIntrinsics,
    pub catalog: Catalog,
    pub objects: Vec<SceneObject>,
    /// Object surface samples per square meter.
    pub density: f64,
    /// Floor samples per square meter.
    pub floor_density: f64,
    /// Sampled floor patch `[x_min, x_max, y_min, y_max]`, meters.
    pub floor_extent: [f64; 4],
    /// Per-axis Gaussian noise, meters.
    pub noise_sigma: f64,
    /// Share of the final cloud made of uniform outliers.
    pub outlier_fraction: f64,
    /// Pixels added around projected boxes.
    pub roi_padding: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            camera_height: 0.9,
            camera_tilt_deg: 40.0,
            intrinsics: CameraIntrinsics::default(),
            catalog: Catalog::default_grocery(),
            objects: vec![SceneObject {
                category: "cereal".into(),
                x: 0.8,
                y: 0.0,
                yaw: 0.3,
            }],
            density: 30_000.0,
            floor_density: 8_000.0,
            floor_extent: [0.3, 1.5, -0.8, 0.8],
            noise_sigma: 0.002,
            outlier_fraction: 0.05,
            roi_padding: 4.0,
        }
    }
}

/// Ground truth for one object, camera frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthBox {
    pub category: String,
    pub center: Point3,
    pub corners: [Point3; 8],
    pub yaw: f64,
    pub extents: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub cloud: PointCloud,
    pub rois: Vec<Roi2D>,
    pub ground_truth: Vec<GroundTruthBox>,
}

/// World → camera rigid transform.
#[derive(Debug, Clone, Copy)]
pub struct CameraPose {
    rot: Matrix3<f64>,
    origin: Vector3<f64>,
}

impl CameraPose {
    pub fn new(height: f64, tilt_deg: f64) -> Self {
        let (s, c) = tilt_deg.to_radians().sin_cos();
        let x_c = Vector3::new(0.0, -1.0, 0.0);
        let y_c = Vector3::new(-s, 0.0, -c);
        let z_c = Vector3::new(c, 0.0, -s);
        Self {
            rot: Matrix3::from_rows(&[x_c.transpose(), y_c.transpose(), z_c.transpose()]),
            origin: Vector3::new(0.0, 0.0, height),
        }
    }

    pub fn to_camera(&self, w: &Vector3<f64>) -> Point3 {
        Point3::from(self.rot * (w - self.origin))
    }

    pub fn position(&self) -> Vector3<f64> {
        self.origin
    }

    /// World down expressed in the camera frame.
    pub fn gravity(&self) -> [f64; 3] {
        let g = self.rot * Vector3::new(0.0, 0.0, -1.0);
        [g.x, g.y, g.z]
    }
}

struct Footprint {
    center: Vector2<f64>,
    u: Vector2<f64>,
    v: Vector2<f64>,
    half: (f64, f64),
}

impl Footprint {
    fn new(obj: &SceneObject, extents: [f64; 3]) -> Self {
        let (s, c) = obj.yaw.sin_cos();
        Self {
            center: Vector2::new(obj.x, obj.y),
            u: Vector2::new(c, s),
            v: Vector2::new(-s, c),
            half: (extents[0] / 2.0, extents[1] / 2.0),
        }
    }

    fn corners(&self) -> [Vector2<f64>; 4] {
        let (a, b) = (self.u * self.half.0, self.v * self.half.1);
        [
            self.center - a - b,
            self.center + a - b,
            self.center + a + b,
            self.center - a + b,
        ]
    }

    fn contains(&self, p: &Vector2<f64>) -> bool {
        let r = p - self.center;
        r.dot(&self.u).abs() <= self.half.0 && r.dot(&self.v).abs() <= self.half.1
    }

    /// Separating-axis overlap test.
    fn overlaps(&self, other: &Footprint) -> bool {
        let (ca, cb) = (self.corners(), other.corners());
        [self.u, self.v, other.u, other.v].iter().all(|axis| {
            let range = |cs: &[Vector2<f64>; 4]| {
                cs.iter()
                    .map(|c| c.dot(axis))
                    .fold((f64::MAX, f64::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)))
            };
            let (a0, a1) = range(&ca);
            let (b0, b1) = range(&cb);
            a0 < b1 && b0 < a1
        })
    }
}

impl SceneSpec {
    pub fn camera_pose(&self) -> CameraPose {
        CameraPose::new(self.camera_height, self.camera_tilt_deg)
    }

    pub fn validate(&self) -> Result<(), PerceptionError> {
        let bad = |m: String| Err(PerceptionError::Invalid(m));
        self.intrinsics.validate()?;
        if !(self.density > 0.0 && self.floor_density > 0.0) {
            return bad("densities must be positive".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise sigma {}", self.noise_sigma));
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return bad(format!("outlier fraction {}", self.outlier_fraction));
        }
        if self.camera_height.is_nan() || self.camera_height <= 0.0 {
            return bad(format!("camera height {}", self.camera_height));
        }
        let [x0, x1, y0, y1] = self.floor_extent;
        if !(x0 < x1 && y0 < y1) {
            return bad("empty floor extent".into());
        }
        let mut prints = Vec::new();
        for obj in &self.objects {
            let spec = self.catalog.get(&obj.category)?;
            spec.validate()?;
            prints.push(Footprint::new(obj, spec.extents));
        }
        for i in 0..prints.len() {
            for j in i + 1..prints.len() {
                if prints[i].overlaps(&prints[j]) {
                    return bad(format!("objects {i} and {j} overlap"));
                }
            }
        }
        Ok(())
    }
}

fn sample_rect<R: Rng>(
    rng: &mut R,
    origin: Vector3<f64>,
    a: Vector3<f64>,
    b: Vector3<f64>,
    density: f64,
    out: &mut Vec<Vector3<f64>>,
) {
    let n = (a.cross(&b).norm() * density).round() as usize;
    for _ in 0..n {
        let (s, t): (f64, f64) = (rng.random(), rng.random());
        out.push(origin + a * s + b * t);
    }
}

/// Samples the scene. Identical `(spec, seed)` give identical output.
pub fn gen_scene(spec: &SceneSpec, seed: u64) -> Result<Scene, PerceptionError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pose = CameraPose::new(spec.camera_height, spec.camera_tilt_deg);
    let eye = pose.position();
    let cam = &spec.intrinsics;
    let up = Vector3::z();

    let mut world: Vec<Vector3<f64>> = Vec::new();
    let mut prints = Vec::new();
    let mut ground_truth = Vec::new();
    let mut rois = Vec::new();
    for obj in &spec.objects {
        let ext = spec.catalog.get(&obj.category)?.extents;
        let fp = Footprint::new(obj, ext);
        let base = fp.corners().map(|c| Vector3::new(c.x, c.y, 0.0));
        let h = up * ext[2];
        let top_origin = base[0] + h;
        let faces = [
            (top_origin, base[1] - base[0], base[3] - base[0]),
            (base[0], base[1] - base[0], h),
            (base[1], base[2] - base[1], h),
            (base[2], base[3] - base[2], h),
            (base[3], base[0] - base[3], h),
        ];
        for (o, a, b) in faces {
            let n = b.cross(&a);
            let n = if n.dot(&(o + (a + b) / 2.0 - Vector3::new(obj.x, obj.y, ext[2] / 2.0))) < 0.0
            {
                -n
            } else {
                n
            };
            let facing = n.dot(&(eye - (o + (a + b) / 2.0))) > 0.0;
            if facing {
                sample_rect(&mut rng, o, a, b, spec.density, &mut world);
            }
        }
        let corners_w: Vec<Vector3<f64>> = base
            .iter()
            .copied()
            .chain(base.iter().map(|c| c + h))
            .collect();
        let corners: [Point3; 8] = std::array::from_fn(|i| pose.to_camera(&corners_w[i]));
        let projected: Vec<(f64, f64)> = corners.iter().filter_map(|c| cam.project(c)).collect();
        if projected.len() == 8 {
            let clamp_u = |u: f64| u.clamp(0.0, cam.width as f64);
            let clamp_v = |v: f64| v.clamp(0.0, cam.height as f64);
            let (u0, u1, v0, v1) = projected.iter().fold(
                (f64::MAX, f64::MIN, f64::MAX, f64::MIN),
                |(a, b, c, d), &(u, v)| (a.min(u), b.max(u), c.min(v), d.max(v)),
            );
            rois.push(Roi2D {
                u_min: clamp_u(u0 - spec.roi_padding),
                v_min: clamp_v(v0 - spec.roi_padding),
                u_max: clamp_u(u1 + spec.roi_padding),
                v_max: clamp_v(v1 + spec.roi_padding),
                category: obj.category.clone(),
            });
        }
        ground_truth.push(GroundTruthBox {
            category: obj.category.clone(),
            center: pose.to_camera(&Vector3::new(obj.x, obj.y, ext[2] / 2.0)),
            corners,
            yaw: obj.yaw,
            extents: ext,
        });
        prints.push(fp);
    }

    let [x0, x1, y0, y1] = spec.floor_extent;
    let n_floor = ((x1 - x0) * (y1 - y0) * spec.floor_density).round() as usize;
    for _ in 0..n_floor {
        let p = Vector2::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
        if !prints.iter().any(|f| f.contains(&p)) {
            world.push(Vector3::new(p.x, p.y, 0.0));
        }
    }

    let mut points: Vec<Point3> = world.iter().map(|w| pose.to_camera(w)).collect();
    if spec.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| PerceptionError::Invalid(e.to_string()))?;
        for p in &mut points {
            p.x += noise.sample(&mut rng);
            p.y += noise.sample(&mut rng);
            p.z += noise.sample(&mut rng);
        }
    }
    let f = spec.outlier_fraction;
    let n_out = (points.len() as f64 * f / (1.0 - f)).round() as usize;
    for _ in 0..n_out {
        let z = rng.random_range(0.3..1.5);
        let u = rng.random_range(0.0..cam.width as f64);
        let v = rng.random_range(0.0..cam.height as f64);
        points.push(Point3::new(
            (u - cam.cx) * z / cam.fx,
            (v - cam.cy) * z / cam.fy,
            z,
        ));
    }
    Ok(Scene {
        cloud: PointCloud::new(points)?,
        rois,
        ground_truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::{detect_boxes, DetectParams};

    #[test]
    fn camera_pose_maps_floor_below_axis() {
        let pose = CameraPose::new(0.9, 40.0);
        let p = pose.to_camera(&Vector3::new(0.9 / 40f64.to_radians().tan(), 0.0, 0.0));
        assert!(p.x.abs() < 1e-12 && p.y.abs() < 1e-12 && p.z > 0.0);
        let left = pose.to_camera(&Vector3::new(1.0, 0.5, 0.0));
        assert!(left.x < 0.0);
    }

    #[test]
    fn overlapping_objects_rejected() {
        let spec = SceneSpec {
            objects: vec![
                SceneObject {
                    category: "tea".into(),
                    x: 0.8,
                    y: 0.0,
                    yaw: 0.0,
                },
                SceneObject {
                    category: "tea".into(),
                    x: 0.85,
                    y: 0.05,
                    yaw: 0.7,
                },
            ],
            ..Default::default()
        };
        assert!(spec.validate().is_err());
        let unknown = SceneSpec {
            objects: vec![SceneObject {
                category: "anvil".into(),
                x: 0.8,
                y: 0.0,
                yaw: 0.0,
            }],
            ..Default::default()
        };
        assert!(matches!(
            unknown.validate(),
            Err(PerceptionError::UnknownCategory(_))
        ));
    }

    #[test]
    fn deterministic() {
        let spec = SceneSpec::default();
        assert_eq!(gen_scene(&spec, 5).unwrap(), gen_scene(&spec, 5).unwrap());
        assert_ne!(
            gen_scene(&spec, 5).unwrap().cloud,
            gen_scene(&spec, 6).unwrap().cloud
        );
    }

    #[test]
    fn noiseless_fit_is_submillimeter() {
        let spec = SceneSpec {
            noise_sigma: 0.0,
            outlier_fraction: 0.0,
            ..Default::default()
        };
        let scene = gen_scene(&spec, 1).unwrap();
        let params = DetectParams {
            down: spec.camera_pose().gravity(),
            ..Default::default()
        };
        let dets = detect_boxes(
            &scene.cloud,
            &scene.rois,
            &spec.intrinsics,
            &spec.catalog,
            &params,
        );
        let b = dets[0].result.as_ref().unwrap();
        let err = (b.center - scene.ground_truth[0].center).norm();
        assert!(err < 1e-3, "center error {err}");
        assert!(b.is_cuboid(1e-6));
    }
}
