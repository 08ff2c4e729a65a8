use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::types::{Plane, PointCloud};
use super::PerceptionError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacParams {
    pub iterations: usize,
    /// Inlier distance, meters.
    pub inlier_tol: f64,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            iterations: 200,
            inlier_tol: 0.01,
            seed: 0,
        }
    }
}

/// Number of distinct point triples, saturating.
pub fn triple_count(n: usize) -> u128 {
    let n = n as u128;
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

fn inliers(cloud: &PointCloud, plane: &Plane, tol: f64) -> Vec<usize> {
    cloud
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| plane.signed_distance(p).abs() <= tol)
        .map(|(i, _)| i)
        .collect()
}

fn count_inliers(cloud: &PointCloud, plane: &Plane, tol: f64) -> usize {
    cloud
        .points
        .iter()
        .filter(|p| plane.signed_distance(p).abs() <= tol)
        .count()
}

fn best_of<I>(
    cloud: &PointCloud,
    triples: I,
    tol: f64,
) -> Result<(Plane, Vec<usize>), PerceptionError>
where
    I: Iterator<Item = (usize, usize, usize)>,
{
    let pts = &cloud.points;
    let mut best: Option<(usize, Plane)> = None;
    for (i, j, k) in triples {
        let Some(plane) = Plane::through(&pts[i], &pts[j], &pts[k]) else {
            continue;
        };
        let count = count_inliers(cloud, &plane, tol);
        if best.is_none_or(|(c, _)| count > c) {
            best = Some((count, plane));
        }
    }
    let (_, plane) = best.ok_or(PerceptionError::Collinear)?;
    Ok((plane, inliers(cloud, &plane, tol)))
}

fn check(cloud: &PointCloud) -> Result<(), PerceptionError> {
    if cloud.len() < 3 {
        return Err(PerceptionError::TooFewPoints {
            needed: 3,
            got: cloud.len(),
        });
    }
    Ok(())
}

/// Plane with the most inliers over every point triple.
pub fn exhaustive_plane(
    cloud: &PointCloud,
    inlier_tol: f64,
) -> Result<(Plane, Vec<usize>), PerceptionError> {
    check(cloud)?;
    let n = cloud.len();
    let triples =
        (0..n).flat_map(move |i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| (i, j, k))));
    best_of(cloud, triples, inlier_tol)
}

/// Seeded RANSAC plane fit. The normal faces the camera origin. When the
/// iteration budget covers every triple, all triples are tried instead of
/// sampling.
pub fn ransac_plane(
    cloud: &PointCloud,
    params: &RansacParams,
) -> Result<(Plane, Vec<usize>), PerceptionError> {
    check(cloud)?;
    if params.iterations as u128 >= triple_count(cloud.len()) {
        return exhaustive_plane(cloud, params.inlier_tol);
    }
    let n = cloud.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let triples = (0..params.iterations).map(move |_| {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let mut k = rng.random_range(0..n - 2);
        if k >= lo {
            k += 1;
        }
        if k >= hi {
            k += 1;
        }
        (i, j, k)
    });
    best_of(cloud, triples, params.inlier_tol)
}
