use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::metrics::markdown_table;
use crate::perception::{detect_boxes, DetectParams};
use crate::scene::{gen_scene, SceneObject, SceneSpec};

use super::{fmt_f, metrics_json, ExperimentError, ExperimentName, ExperimentOutput};

const POSE_STREAM: u64 = 7;

/// One fit of one object placed at one random pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseResult {
    pub category: String,
    pub pose: usize,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub detected: bool,
    /// Distance between fitted and true box centers, meters.
    pub center_error: Option<f64>,
    /// Mean distance between matched corners, meters.
    pub corner_error: Option<f64>,
    pub failure: Option<String>,
}

impl PoseResult {
    pub fn within(&self, tol: f64) -> bool {
        self.center_error.is_some_and(|e| e <= tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptionResult {
    pub tolerance_m: f64,
    pub fits: Vec<PoseResult>,
    /// Fraction of all fits whose center error is within tolerance.
    pub fraction_within: f64,
}

/// Detection parameters with the floor search aligned to the scene camera.
pub(crate) fn detect_params_for(spec: &SceneSpec, base: &DetectParams) -> DetectParams {
    DetectParams {
        down: spec.camera_pose().gravity(),
        ..base.clone()
    }
}

/// Mean corner distance under the best cyclic matching of the two
/// footprints; the box symmetry makes the corner order ambiguous.
fn corner_error(
    fit: &[crate::perception::Point3; 8],
    truth: &[crate::perception::Point3; 8],
) -> f64 {
    let mut best = f64::INFINITY;
    for shift in 0..4 {
        for flip in [false, true] {
            let mut sum = 0.0;
            for layer in 0..2 {
                for i in 0..4 {
                    let j = if flip {
                        (4 + shift - i) % 4
                    } else {
                        (i + shift) % 4
                    };
                    sum += (fit[layer * 4 + i] - truth[layer * 4 + j]).norm();
                }
            }
            best = best.min(sum / 8.0);
        }
    }
    best
}

pub fn run_perception(cfg: &SimConfig) -> Result<PerceptionResult, ExperimentError> {
    let pc = &cfg.perception;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(POSE_STREAM);
    let mut fits = Vec::new();
    for (ci, category) in pc.scene.catalog.categories.iter().enumerate() {
        for pose in 0..pc.poses_per_category {
            let x = rng.random_range(pc.x_range[0]..=pc.x_range[1]);
            let y = rng.random_range(pc.y_range[0]..=pc.y_range[1]);
            let yaw = rng.random_range(0.0..std::f64::consts::PI);
            let spec = SceneSpec {
                objects: vec![SceneObject {
                    category: category.name.clone(),
                    x,
                    y,
                    yaw,
                }],
                ..pc.scene.clone()
            };
            let scene_seed = cfg
                .seed
                .wrapping_mul(1_000_003)
                .wrapping_add((ci * pc.poses_per_category + pose) as u64);
            let scene = gen_scene(&spec, scene_seed)?;
            let params = detect_params_for(&spec, &pc.detect);
            let det = detect_boxes(
                &scene.cloud,
                &scene.rois,
                &spec.intrinsics,
                &spec.catalog,
                &params,
            );
            let truth = &scene.ground_truth[0];
            let (center_error, corners, failure) = match det.first().map(|d| &d.result) {
                Some(Ok(b)) => (
                    Some((b.center - truth.center).norm()),
                    Some(corner_error(&b.corners, &truth.corners)),
                    None,
                ),
                Some(Err(e)) => (None, None, Some(e.to_string())),
                None => (None, None, Some("no region of interest".to_string())),
            };
            fits.push(PoseResult {
                category: category.name.clone(),
                pose,
                x,
                y,
                yaw,
                detected: center_error.is_some(),
                center_error,
                corner_error: corners,
                failure,
            });
        }
    }
    let within = fits.iter().filter(|f| f.within(pc.tolerance_m)).count();
    Ok(PerceptionResult {
        tolerance_m: pc.tolerance_m,
        fraction_within: within as f64 / fits.len().max(1) as f64,
        fits,
    })
}

impl PerceptionResult {
    pub fn output(&self) -> ExperimentOutput {
        let mut csv = String::from(
            "category,pose,x_m,y_m,yaw_rad,detected,center_error_mm,corner_error_mm,failure\n",
        );
        let mm = |e: Option<f64>| e.map_or(String::new(), |e| format!("{:.3}", e * 1e3));
        for f in &self.fits {
            csv += &format!(
                "{},{},{:.4},{:.4},{:.4},{},{},{},{}\n",
                f.category,
                f.pose,
                f.x,
                f.y,
                f.yaw,
                f.detected,
                mm(f.center_error),
                mm(f.corner_error),
                f.failure.as_deref().unwrap_or("")
            );
        }
        let mut categories: Vec<&str> = self.fits.iter().map(|f| f.category.as_str()).collect();
        categories.dedup();
        let rows: Vec<Vec<String>> = categories
            .iter()
            .map(|c| {
                let group: Vec<&PoseResult> =
                    self.fits.iter().filter(|f| f.category == *c).collect();
                let errs: Vec<f64> = group.iter().filter_map(|f| f.center_error).collect();
                let mean = errs.iter().sum::<f64>() / errs.len().max(1) as f64;
                let max = errs.iter().copied().fold(0.0, f64::max);
                let ok = group.iter().filter(|f| f.within(self.tolerance_m)).count();
                vec![
                    c.to_string(),
                    group.len().to_string(),
                    errs.len().to_string(),
                    fmt_f(mean * 1e3, 2),
                    fmt_f(max * 1e3, 2),
                    format!("{ok}/{}", group.len()),
                ]
            })
            .collect();
        let summary = format!(
            "# perception\n\nBox-center error of single-object scenes at random floor poses. \
             {:.1}% of fits are within {} mm.\n\n{}",
            self.fraction_within * 100.0,
            self.tolerance_m * 1e3,
            markdown_table(
                &[
                    "category",
                    "poses",
                    "detected",
                    "mean mm",
                    "max mm",
                    "within tolerance"
                ],
                &rows
            )
        );
        ExperimentOutput {
            experiment: ExperimentName::Perception,
            tables: vec![("perception.csv".into(), csv)],
            summary,
            metrics: metrics_json(self),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::Point3;

    #[test]
    fn corner_error_ignores_corner_order() {
        let square = |z: f64| {
            [(0.0, 0.0), (1.0, 0.0), (1.0, 2.0), (0.0, 2.0)].map(|(x, y)| Point3::new(x, y, z))
        };
        let (lo, hi) = (square(0.0), square(1.0));
        let truth: [Point3; 8] = [lo[0], lo[1], lo[2], lo[3], hi[0], hi[1], hi[2], hi[3]];
        let rotated: [Point3; 8] = [lo[2], lo[3], lo[0], lo[1], hi[2], hi[3], hi[0], hi[1]];
        let reversed: [Point3; 8] = [lo[3], lo[2], lo[1], lo[0], hi[3], hi[2], hi[1], hi[0]];
        assert_eq!(corner_error(&rotated, &truth), 0.0);
        assert_eq!(corner_error(&reversed, &truth), 0.0);
    }
}
