use bridgesim::perception::{
    convex_hull, detect_boxes, exhaustive_plane, min_area_rect, ransac_plane, triple_count,
    DetectParams, Point3, PointCloud, RansacParams,
};
use bridgesim::scene::{gen_scene, SceneObject, SceneSpec};
use nalgebra::Vector2;
use proptest::prelude::*;

fn small_cloud() -> impl Strategy<Value = PointCloud> {
    let coord = -1.0..1.0f64;
    // a noisy plane plus scattered points, so there is a clear winner to find
    (3usize..20, 0usize..11).prop_flat_map(move |(on_plane, off)| {
        (
            prop::collection::vec((coord.clone(), coord.clone(), -0.004..0.004f64), on_plane),
            prop::collection::vec((coord.clone(), coord.clone(), coord.clone()), off),
        )
            .prop_map(|(plane, scatter)| {
                let points = plane
                    .into_iter()
                    .map(|(x, y, z)| Point3::new(x, y, 0.3 * x - 0.2 * y + 1.0 + z))
                    .chain(scatter.into_iter().map(|(x, y, z)| Point3::new(x, y, z)))
                    .collect();
                PointCloud::new(points).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ransac_matches_exhaustive(cloud in small_cloud(), seed in any::<u64>()) {
        prop_assume!(cloud.len() <= 30);
        let params = RansacParams {
            iterations: triple_count(cloud.len()) as usize,
            inlier_tol: 0.01,
            seed,
        };
        let (_, exhaustive) = exhaustive_plane(&cloud, params.inlier_tol).unwrap();
        let (_, ransac) = ransac_plane(&cloud, &params).unwrap();
        prop_assert_eq!(ransac.len(), exhaustive.len());
    }

    #[test]
    fn hull_contains_every_point(pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 3..60)) {
        let pts: Vec<Vector2<f64>> = pts.into_iter().map(|(x, y)| Vector2::new(x, y)).collect();
        let hull = convex_hull(&pts);
        prop_assume!(hull.len() >= 3);
        for p in &pts {
            for i in 0..hull.len() {
                let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
                let cross = (b - a).perp(&(p - a));
                prop_assert!(cross >= -1e-9, "point outside hull edge");
            }
        }
    }

    #[test]
    fn min_rect_encloses_points(pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 3..60)) {
        let pts: Vec<Vector2<f64>> = pts.into_iter().map(|(x, y)| Vector2::new(x, y)).collect();
        prop_assume!(convex_hull(&pts).len() >= 3);
        let rect = min_area_rect(&pts).unwrap();
        let (c, s) = (rect.angle.cos(), rect.angle.sin());
        for p in &pts {
            let d = p - rect.center;
            let u = c * d.x + s * d.y;
            let v = -s * d.x + c * d.y;
            prop_assert!(u.abs() <= rect.dims.0 / 2.0 + 1e-9 && v.abs() <= rect.dims.1 / 2.0 + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn detected_boxes_are_cuboids(x in 0.65..0.95f64, y in -0.2..0.2f64, yaw in 0.0..std::f64::consts::PI, cat in 0usize..3, seed in any::<u64>()) {
        let base = SceneSpec::default();
        let category = base.catalog.categories[cat].name.clone();
        let spec = SceneSpec { objects: vec![SceneObject { category, x, y, yaw }], ..base };
        let scene = gen_scene(&spec, seed).unwrap();
        let params = DetectParams { down: spec.camera_pose().gravity(), ..Default::default() };
        for d in detect_boxes(&scene.cloud, &scene.rois, &spec.intrinsics, &spec.catalog, &params) {
            let b = d.result.unwrap();
            prop_assert!(b.is_cuboid(1e-9));
            let mean = b.corners.iter().map(|p| p.coords).sum::<nalgebra::Vector3<f64>>() / 8.0;
            prop_assert!((mean - b.center.coords).norm() < 1e-12);
            prop_assert!((b.center - scene.ground_truth[0].center).norm() <= 0.01);
        }
    }
}
