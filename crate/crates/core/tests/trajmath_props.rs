use bridgesim::trajmath::{
    assign_waypoint_derivatives, build_spline, linear_resample, quintic_coeffs, quintic_eval,
    resample, zoh_resample, JointTrajectory, QuinticSegment,
};
use proptest::prelude::*;

/// Random waypoint trajectories whose joints move no faster than
/// `MAX_RATE` between waypoints.
const MAX_RATE: f64 = 180.0;

fn trajectory() -> impl Strategy<Value = JointTrajectory> {
    (1usize..8, 2usize..12).prop_flat_map(|(dof, n)| {
        (
            prop::collection::vec(0.05..0.5f64, n - 1),
            prop::collection::vec(-180.0..180.0f64, dof),
            prop::collection::vec(prop::collection::vec(-1.0..1.0f64, dof), n - 1),
        )
            .prop_map(|(gaps, start, steps)| {
                let mut t = 0.0;
                let mut q = start;
                let mut points = vec![(t, q.clone())];
                for (g, step) in gaps.into_iter().zip(steps) {
                    t += g;
                    for (qj, s) in q.iter_mut().zip(step) {
                        *qj += s * MAX_RATE * g;
                    }
                    points.push((t, q.clone()));
                }
                JointTrajectory::from_positions(points).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn spline_is_c2_and_hits_waypoints(traj in trajectory()) {
        let spline = build_spline(&assign_waypoint_derivatives(&traj).unwrap()).unwrap();
        let (dv, da) = spline.max_knot_jumps();
        prop_assert!(dv < 1e-9 && da < 1e-9, "jumps {dv} {da}");
        for p in traj.points() {
            let (q, _, _) = spline.eval(p.t);
            for (a, b) in q.iter().zip(p.q.as_slice()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
        let (_, v0, _) = spline.eval(traj.start_time());
        prop_assert!(v0.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn resampled_grid_covers_span(traj in trajectory(), period in 0.001..0.05f64) {
        let spline = build_spline(&assign_waypoint_derivatives(&traj).unwrap()).unwrap();
        let out = resample(&spline, period).unwrap();
        prop_assert_eq!(out.first().unwrap().t, traj.start_time());
        prop_assert_eq!(out.last().unwrap().t, traj.end_time());
        prop_assert!(out.windows(2).all(|w| w[1].t > w[0].t && w[1].t - w[0].t <= period + 1e-12));
    }

    #[test]
    fn linear_stays_between_waypoints(traj in trajectory()) {
        let out = linear_resample(&traj, 0.005).unwrap();
        let pts = traj.points();
        for p in &out {
            let i = pts.partition_point(|w| w.t <= p.t).saturating_sub(1).min(pts.len() - 2);
            for j in 0..traj.dof() {
                let (a, b) = (pts[i].q[j], pts[i + 1].q[j]);
                prop_assert!(p.q[j] >= a.min(b) - 1e-9 && p.q[j] <= a.max(b) + 1e-9);
            }
        }
    }

    #[test]
    fn zoh_jumps_reach_waypoint_delta(traj in trajectory()) {
        let out = zoh_resample(&traj, 0.001).unwrap();
        let largest = out
            .windows(2)
            .map(|w| w[0].q.max_abs_diff(&w[1].q))
            .fold(0.0, f64::max);
        prop_assert!(largest >= traj.max_waypoint_delta() - 1e-12);
    }

    #[test]
    fn quintic_meets_boundary_conditions(
        q0 in -100.0..100.0f64, q1 in -100.0..100.0f64,
        v0 in -50.0..50.0f64, v1 in -50.0..50.0f64,
        a0 in -50.0..50.0f64, a1 in -50.0..50.0f64,
        h in 0.01..2.0f64,
    ) {
        let seg = QuinticSegment { t0: 1.0, t1: 1.0 + h, coeffs: vec![quintic_coeffs(q0, v0, a0, q1, v1, a1, h).unwrap()] };
        let (q, v, a) = quintic_eval(&seg, 1.0).unwrap();
        prop_assert!((q[0] - q0).abs() < 1e-9 && (v[0] - v0).abs() < 1e-9 && (a[0] - a0).abs() < 1e-9);
        let (q, v, a) = quintic_eval(&seg, 1.0 + h).unwrap();
        let (q, v, a) = (q[0], v[0], a[0]);
        let scale = 1.0 + (q0.abs() + q1.abs()) / h.powi(2);
        prop_assert!((q - q1).abs() < 1e-9 * scale);
        prop_assert!((v - v1).abs() < 1e-8 * scale);
        prop_assert!((a - a1).abs() < 1e-7 * scale);
    }
}
