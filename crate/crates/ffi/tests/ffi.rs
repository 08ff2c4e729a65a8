use std::ffi::CStr;
use std::ptr;

use bridgesim::perception::detect_boxes;
use bridgesim::scene::{gen_scene, SceneObject, SceneSpec};
use bridgesim_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let needed = unsafe { bs_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(needed > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(bs_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn quintic_coefficients_and_errors() {
    let mut c = [0.0; 6];
    assert_eq!(
        unsafe { bs_quintic_coeffs(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, c.as_mut_ptr()) },
        BsStatus::Ok
    );
    let expect = [0.0, 0.0, 0.0, 10.0, -15.0, 6.0];
    for (a, b) in c.iter().zip(expect) {
        assert!((a - b).abs() < 1e-12);
    }
    assert_eq!(unsafe { bs_last_error_message(ptr::null_mut(), 0) }, 0);
    assert_eq!(
        unsafe { bs_quintic_coeffs(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, c.as_mut_ptr()) },
        BsStatus::Trajectory
    );
    assert!(last_error().contains("duration"));
    assert_eq!(
        unsafe { bs_quintic_coeffs(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, ptr::null_mut()) },
        BsStatus::NullPointer
    );
}

#[test]
fn error_message_truncates() {
    unsafe { bs_quintic_coeffs(0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0, ptr::null_mut()) };
    let mut small = [1 as std::ffi::c_char; 4];
    let needed = unsafe { bs_last_error_message(small.as_mut_ptr(), small.len()) };
    assert!(needed > 4);
    assert_eq!(small[3], 0);
}

#[test]
fn spline_handle_lifecycle() {
    let times = [0.0, 0.5, 1.0];
    let q = [0.0, 10.0, 20.0, -5.0, 40.0, 0.0];
    let mut s: *mut BsSpline = ptr::null_mut();
    assert_eq!(
        unsafe { bs_spline_new(times.as_ptr(), q.as_ptr(), 3, 2, &mut s) },
        BsStatus::Ok
    );
    let (mut dof, mut t0, mut t1) = (0usize, 0.0, 0.0);
    assert_eq!(
        unsafe { bs_spline_info(s, &mut dof, &mut t0, &mut t1) },
        BsStatus::Ok
    );
    assert_eq!((dof, t0, t1), (2, 0.0, 1.0));
    let (mut qo, mut vo) = ([0.0; 2], [0.0; 2]);
    assert_eq!(
        unsafe { bs_spline_eval(s, 0.5, qo.as_mut_ptr(), vo.as_mut_ptr(), ptr::null_mut()) },
        BsStatus::Ok
    );
    assert!((qo[0] - 20.0).abs() < 1e-9 && (qo[1] + 5.0).abs() < 1e-9);
    assert_eq!(
        unsafe { bs_spline_eval(s, 0.0, qo.as_mut_ptr(), vo.as_mut_ptr(), ptr::null_mut()) },
        BsStatus::Ok
    );
    assert_eq!(vo, [0.0, 0.0]);
    unsafe { bs_spline_free(s) };
    unsafe { bs_spline_free(ptr::null_mut()) };

    let bad_times = [0.0, 0.0];
    assert_eq!(
        unsafe { bs_spline_new(bad_times.as_ptr(), q.as_ptr(), 2, 1, &mut s) },
        BsStatus::Trajectory
    );
    assert!(s.is_null());
}

#[test]
fn encode_then_parse_in_chunks() {
    let q = [1.0, -2.5, 3.0];
    let mut frames = Vec::new();
    let mut buf = [0u8; 256];
    let mut len = 0usize;
    assert_eq!(
        unsafe {
            bs_encode_arm_ref_sample(
                7,
                123,
                1,
                q.as_ptr(),
                3,
                buf.as_mut_ptr(),
                buf.len(),
                &mut len,
            )
        },
        BsStatus::Ok
    );
    frames.extend_from_slice(&buf[..len]);
    assert_eq!(
        unsafe { bs_encode_result(8, 456, 7, 0, buf.as_mut_ptr(), buf.len(), &mut len) },
        BsStatus::Ok
    );
    frames.extend_from_slice(&buf[..len]);
    assert_eq!(
        unsafe { bs_encode_result(8, 456, 7, 0, buf.as_mut_ptr(), 3, &mut len) },
        BsStatus::BufferTooSmall
    );
    assert_eq!(len, 22);
    assert_eq!(
        unsafe {
            bs_encode_arm_ref_sample(
                1,
                0,
                9,
                q.as_ptr(),
                3,
                buf.as_mut_ptr(),
                buf.len(),
                &mut len,
            )
        },
        BsStatus::InvalidArgument
    );

    let mut p: *mut BsFrameParser = ptr::null_mut();
    assert_eq!(unsafe { bs_frame_parser_new(&mut p) }, BsStatus::Ok);
    let mut total = 0;
    for chunk in frames.chunks(5) {
        let mut n = 0usize;
        assert_eq!(
            unsafe { bs_frame_parser_feed(p, chunk.as_ptr(), chunk.len(), &mut n) },
            BsStatus::Ok
        );
        total += n;
    }
    assert_eq!(total, 2);
    let mut info = BsMessageInfo::default();
    let mut qo = [0.0; 8];
    assert_eq!(
        unsafe { bs_frame_parser_next(p, &mut info, qo.as_mut_ptr(), qo.len()) },
        BsStatus::Ok
    );
    assert_eq!(
        (info.msg_type, info.seq, info.t_send_ns, info.side, info.dof),
        (4, 7, 123, 1, 3)
    );
    assert_eq!(&qo[..3], &q);
    assert_eq!(
        unsafe { bs_frame_parser_next(p, &mut info, ptr::null_mut(), 0) },
        BsStatus::Ok
    );
    assert_eq!((info.msg_type, info.goal_seq, info.status), (7, 7, 0));
    assert_eq!(
        unsafe { bs_frame_parser_next(p, &mut info, ptr::null_mut(), 0) },
        BsStatus::Empty
    );

    let junk = [0u8, 0, 0, 13, 99, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0];
    assert_eq!(
        unsafe { bs_frame_parser_feed(p, junk.as_ptr(), junk.len(), ptr::null_mut()) },
        BsStatus::Protocol
    );
    unsafe { bs_frame_parser_free(p) };
}

#[test]
fn detect_box_matches_library() {
    let spec = SceneSpec {
        objects: vec![SceneObject {
            category: "tea".into(),
            x: 0.8,
            y: 0.05,
            yaw: 0.7,
        }],
        ..SceneSpec::default()
    };
    let scene = gen_scene(&spec, 3).unwrap();
    let xyz: Vec<f64> = scene
        .cloud
        .points
        .iter()
        .flat_map(|p| [p.x, p.y, p.z])
        .collect();
    let cam = spec.intrinsics;
    let roi = &scene.rois[0];
    let ext = spec.catalog.get("tea").unwrap().extents;
    let down = spec.camera_pose().gravity();
    let mut out = BsBox {
        corners: [0.0; 24],
        center: [0.0; 3],
    };
    let status = unsafe {
        bs_detect_box(
            xyz.as_ptr(),
            scene.cloud.len(),
            BsIntrinsics {
                fx: cam.fx,
                fy: cam.fy,
                cx: cam.cx,
                cy: cam.cy,
                width: cam.width,
                height: cam.height,
            },
            BsRoi {
                u_min: roi.u_min,
                v_min: roi.v_min,
                u_max: roi.u_max,
                v_max: roi.v_max,
            },
            ext.as_ptr(),
            down.as_ptr(),
            &mut out,
        )
    };
    assert_eq!(status, BsStatus::Ok);
    let params = bridgesim::perception::DetectParams {
        down,
        ..Default::default()
    };
    let lib = detect_boxes(&scene.cloud, &scene.rois, &cam, &spec.catalog, &params);
    let b = lib[0].result.as_ref().unwrap();
    assert_eq!(out.center, [b.center.x, b.center.y, b.center.z]);
    let err = (0..3)
        .map(|i| (out.center[i] - scene.ground_truth[0].center[i]).powi(2))
        .sum::<f64>()
        .sqrt();
    assert!(err < 0.01);

    let empty = BsRoi {
        u_min: 0.0,
        v_min: 0.0,
        u_max: 1.0,
        v_max: 1.0,
    };
    let status = unsafe {
        bs_detect_box(
            xyz.as_ptr(),
            scene.cloud.len(),
            BsIntrinsics {
                fx: cam.fx,
                fy: cam.fy,
                cx: cam.cx,
                cy: cam.cy,
                width: cam.width,
                height: cam.height,
            },
            empty,
            ext.as_ptr(),
            down.as_ptr(),
            &mut out,
        )
    };
    assert_eq!(status, BsStatus::Perception);
}

#[test]
fn tracking_std_through_abi() {
    let reference = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let measured = [1.0, 5.0, -1.0, 5.0, 1.0, 5.0];
    let mut std = [0.0; 2];
    let mut max = 0.0;
    let status = unsafe {
        bs_tracking_std(
            reference.as_ptr(),
            measured.as_ptr(),
            3,
            2,
            std.as_mut_ptr(),
            &mut max,
        )
    };
    assert_eq!(status, BsStatus::Ok);
    assert!((std[0] - (8.0f64 / 9.0).sqrt()).abs() < 1e-12);
    assert_eq!(std[1], 0.0);
    assert_eq!(max, std[0]);
    let status = unsafe {
        bs_tracking_std(
            reference.as_ptr(),
            measured.as_ptr(),
            0,
            2,
            std.as_mut_ptr(),
            &mut max,
        )
    };
    assert_eq!(status, BsStatus::Metrics);
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/bridgesim.h"))
            .unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 14);
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/bridgesim.h");
    let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .output()
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
