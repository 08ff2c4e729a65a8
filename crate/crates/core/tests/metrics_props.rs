use bridgesim::metrics::{histogram, tracking_std};
use bridgesim::rtcontrol::{motor_step, ServoParams, ServoState};
use proptest::prelude::*;

fn series() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (1usize..5, 2usize..60).prop_flat_map(|(dof, n)| {
        (
            prop::collection::vec(prop::collection::vec(-90.0..90.0f64, dof), n),
            prop::collection::vec(prop::collection::vec(-2.0..2.0f64, dof), n),
        )
            .prop_map(|(reference, err)| {
                let measured = reference
                    .iter()
                    .zip(&err)
                    .map(|(r, e)| r.iter().zip(e).map(|(a, b)| a + b).collect())
                    .collect();
                (reference, measured)
            })
    })
}

proptest! {
    #[test]
    fn tracking_std_is_translation_invariant((reference, measured) in series(), offset in -100.0..100.0f64, shift in 0usize..10) {
        let base = tracking_std("a", &reference, &measured).unwrap();
        let moved = |s: &[Vec<f64>]| s.iter().map(|r| r.iter().map(|x| x + offset).collect()).collect::<Vec<Vec<f64>>>();
        let shifted = tracking_std("b", &moved(&reference), &moved(&measured)).unwrap();
        for (a, b) in base.std_dev.iter().zip(&shifted.std_dev) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        // rotating both series in time keeps the error population unchanged
        let k = shift % reference.len();
        let rot = |s: &[Vec<f64>]| {
            let mut v = s.to_vec();
            v.rotate_left(k);
            v
        };
        let rotated = tracking_std("c", &rot(&reference), &rot(&measured)).unwrap();
        for (a, b) in base.std_dev.iter().zip(&rotated.std_dev) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn tracking_std_scales_with_error((reference, measured) in series(), scale in 0.1..10.0f64) {
        let base = tracking_std("a", &reference, &measured).unwrap();
        let scaled: Vec<Vec<f64>> = reference
            .iter()
            .zip(&measured)
            .map(|(r, m)| r.iter().zip(m).map(|(a, b)| a + scale * (b - a)).collect())
            .collect();
        let got = tracking_std("b", &reference, &scaled).unwrap();
        for (a, b) in base.std_dev.iter().zip(&got.std_dev) {
            prop_assert!((b - scale * a).abs() < 1e-9 * (1.0 + b.abs()));
        }
        prop_assert!(got.std_dev.iter().all(|s| *s >= 0.0));
    }

    #[test]
    fn histogram_mass_is_conserved(samples in prop::collection::vec(0.0..50.0f64, 0..300), bin in 0.25..5.0f64, split in 1u32..6) {
        let coarse = histogram(&samples, bin).unwrap();
        let fine = histogram(&samples, bin / split as f64).unwrap();
        prop_assert_eq!(coarse.total(), samples.len() as u64);
        prop_assert_eq!(fine.total(), samples.len() as u64);
    }

    #[test]
    fn critically_damped_step_never_overshoots(omega_n in 5.0..80.0f64, step in -90.0..90.0f64) {
        let params = ServoParams { omega_n, zeta: 1.0 };
        let dt = 0.001;
        let mut s = ServoState::at_rest(0.0);
        let settle = 7.0 / omega_n;
        let mut t = 0.0;
        while t < 3.0 * settle {
            s = motor_step(s, &params, step, dt);
            t += dt;
            prop_assert!(s.theta.abs() <= step.abs() + 1e-9);
            if t >= settle {
                prop_assert!((s.theta - step).abs() <= 0.01 * step.abs() + 1e-12);
            }
        }
    }
}
