//! C ABI over the bridgesim core.
//!
//! Every function returns a [`BsStatus`]. On failure a message is kept per
//! thread and can be copied out with [`bs_last_error_message`]. Handles are
//! opaque pointers created by `*_new` and released by the matching
//! `*_free`; freeing `NULL` is a no-op.
//!
//! Angles are degrees, times seconds (protocol timestamps nanoseconds),
//! lengths meters.

use std::cell::RefCell;
use std::collections::VecDeque;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bridgesim::metrics::tracking_std;
use bridgesim::perception::{
    detect_boxes, CameraIntrinsics, Catalog, CategorySpec, DetectParams, Point3, PointCloud, Roi2D,
};
use bridgesim::protocol::{encode, FrameParser, Message, Payload, Side};
use bridgesim::trajmath::{
    assign_waypoint_derivatives, build_spline, quintic_coeffs, JointTrajectory, QuinticSpline,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Trajectory = 3,
    Protocol = 4,
    Perception = 5,
    Metrics = 6,
    BufferTooSmall = 7,
    Empty = 8,
    Panic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: BsStatus, msg: impl Into<String>) -> BsStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> BsStatus) -> BsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == BsStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            status
        }
        Err(_) => fail(BsStatus::Panic, "internal panic"),
    }
}

/// Builds a slice from a C pointer, accepting `NULL` only for zero length.
unsafe fn slice<'a, T>(p: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize) -> Option<&'a mut [T]> {
    if len == 0 {
        Some(&mut [])
    } else if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts_mut(p, len))
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `cap > 0`). Returns the length the full
/// message needs including the terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be valid for `cap` bytes or `NULL` with `cap == 0`.
#[no_mangle]
pub unsafe extern "C" fn bs_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = (bytes.len() - 1).min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Quintic coefficients `c0..c5` over `[0, duration]` matching position,
/// velocity and acceleration at both ends. `out` receives six values.
///
/// # Safety
/// `out` must be valid for six doubles.
#[no_mangle]
pub unsafe extern "C" fn bs_quintic_coeffs(
    p0: f64,
    v0: f64,
    a0: f64,
    p1: f64,
    v1: f64,
    a1: f64,
    duration: f64,
    out: *mut f64,
) -> BsStatus {
    guard(|| {
        let Some(out) = slice_mut(out, 6) else {
            return fail(BsStatus::NullPointer, "out is NULL");
        };
        match quintic_coeffs(p0, v0, a0, p1, v1, a1, duration) {
            Ok(c) => {
                out.copy_from_slice(&c);
                BsStatus::Ok
            }
            Err(e) => fail(BsStatus::Trajectory, e.to_string()),
        }
    })
}

/// Piecewise quintic through timed waypoints.
pub struct BsSpline(QuinticSpline);

/// Builds a spline through `n` waypoints. `times` holds `n` strictly
/// increasing times; `positions` holds `n × dof` angles, row-major.
/// Interior velocities and accelerations are derived from neighbours and
/// both ends start and stop at rest.
///
/// # Safety
/// `times` and `positions` must be valid for `n` and `n * dof` doubles;
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_spline_new(
    times: *const f64,
    positions: *const f64,
    n: usize,
    dof: usize,
    out: *mut *mut BsSpline,
) -> BsStatus {
    guard(|| {
        if out.is_null() {
            return fail(BsStatus::NullPointer, "out is NULL");
        }
        *out = ptr::null_mut();
        if n < 2 || dof == 0 {
            return fail(
                BsStatus::InvalidArgument,
                "need at least two waypoints and one joint",
            );
        }
        let (Some(times), Some(q)) = (slice(times, n), slice(positions, n * dof)) else {
            return fail(BsStatus::NullPointer, "times or positions is NULL");
        };
        let points = times
            .iter()
            .zip(q.chunks_exact(dof))
            .map(|(t, row)| (*t, row.to_vec()));
        let spline = JointTrajectory::from_positions(points)
            .and_then(|t| assign_waypoint_derivatives(&t))
            .and_then(|t| build_spline(&t));
        match spline {
            Ok(s) => {
                *out = Box::into_raw(Box::new(BsSpline(s)));
                BsStatus::Ok
            }
            Err(e) => fail(BsStatus::Trajectory, e.to_string()),
        }
    })
}

/// # Safety
/// `spline` must come from [`bs_spline_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bs_spline_free(spline: *mut BsSpline) {
    if !spline.is_null() {
        drop(Box::from_raw(spline));
    }
}

/// Joint count and time span of a spline. Any output may be `NULL`.
///
/// # Safety
/// `spline` must be a live handle; non-NULL outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn bs_spline_info(
    spline: *const BsSpline,
    dof: *mut usize,
    start: *mut f64,
    end: *mut f64,
) -> BsStatus {
    guard(|| {
        let Some(BsSpline(s)) = spline.as_ref() else {
            return fail(BsStatus::NullPointer, "spline is NULL");
        };
        if let Some(d) = dof.as_mut() {
            *d = s.dof();
        }
        if let Some(t) = start.as_mut() {
            *t = s.start_time();
        }
        if let Some(t) = end.as_mut() {
            *t = s.end_time();
        }
        BsStatus::Ok
    })
}

/// Evaluates the spline at `t`, clamped to its span. Each output holds
/// `dof` doubles; `v` and `a` may be `NULL`.
///
/// # Safety
/// `spline` must be a live handle and outputs valid for `dof` doubles.
#[no_mangle]
pub unsafe extern "C" fn bs_spline_eval(
    spline: *const BsSpline,
    t: f64,
    q: *mut f64,
    v: *mut f64,
    a: *mut f64,
) -> BsStatus {
    guard(|| {
        let Some(BsSpline(s)) = spline.as_ref() else {
            return fail(BsStatus::NullPointer, "spline is NULL");
        };
        if !t.is_finite() {
            return fail(BsStatus::InvalidArgument, "t is not finite");
        }
        let Some(q_out) = slice_mut(q, s.dof()) else {
            return fail(BsStatus::NullPointer, "q is NULL");
        };
        let (qv, vv, av) = s.eval(t);
        q_out.copy_from_slice(&qv);
        if let Some(out) = slice_mut(v, s.dof()).filter(|_| !v.is_null()) {
            out.copy_from_slice(&vv);
        }
        if let Some(out) = slice_mut(a, s.dof()).filter(|_| !a.is_null()) {
            out.copy_from_slice(&av);
        }
        BsStatus::Ok
    })
}

fn side_from(side: u8) -> Result<Side, BsStatus> {
    Side::from_byte(side).map_err(|e| fail(BsStatus::InvalidArgument, e.to_string()))
}

unsafe fn write_frame(msg: &Message, buf: *mut u8, cap: usize, len: *mut usize) -> BsStatus {
    if len.is_null() {
        return fail(BsStatus::NullPointer, "len is NULL");
    }
    let bytes = match encode(msg) {
        Ok(b) => b,
        Err(e) => return fail(BsStatus::Protocol, e.to_string()),
    };
    *len = bytes.len();
    if cap < bytes.len() {
        return fail(
            BsStatus::BufferTooSmall,
            format!("frame needs {} bytes", bytes.len()),
        );
    }
    if buf.is_null() {
        return fail(BsStatus::NullPointer, "buf is NULL");
    }
    ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
    BsStatus::Ok
}

/// Encodes an ArmRefSample frame into `buf`. `len` receives the frame size,
/// also when the buffer is too small.
///
/// # Safety
/// `q` must be valid for `dof` doubles, `buf` for `cap` bytes, `len` valid.
#[no_mangle]
pub unsafe extern "C" fn bs_encode_arm_ref_sample(
    seq: u32,
    t_send_ns: u64,
    side: u8,
    q: *const f64,
    dof: usize,
    buf: *mut u8,
    cap: usize,
    len: *mut usize,
) -> BsStatus {
    guard(|| {
        let side = match side_from(side) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let Some(q) = slice(q, dof) else {
            return fail(BsStatus::NullPointer, "q is NULL");
        };
        let msg = Message::new(
            seq,
            t_send_ns,
            Payload::ArmRefSample {
                side,
                q: q.to_vec(),
            },
        );
        write_frame(&msg, buf, cap, len)
    })
}

/// Encodes a Result frame for goal `goal_seq`.
///
/// # Safety
/// `buf` must be valid for `cap` bytes and `len` valid.
#[no_mangle]
pub unsafe extern "C" fn bs_encode_result(
    seq: u32,
    t_send_ns: u64,
    goal_seq: u32,
    status: u8,
    buf: *mut u8,
    cap: usize,
    len: *mut usize,
) -> BsStatus {
    guard(|| {
        let msg = Message::new(seq, t_send_ns, Payload::Result { goal_seq, status });
        write_frame(&msg, buf, cap, len)
    })
}

/// Header and scalar fields of a decoded message. Fields that the message
/// type does not carry are zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BsMessageInfo {
    pub msg_type: u8,
    pub seq: u32,
    pub t_send_ns: u64,
    pub side: u8,
    /// Joint count of an ArmRefSample or GoalArmTrajectory.
    pub dof: u16,
    /// Waypoint count of a GoalArmTrajectory.
    pub waypoints: u32,
    pub goal_seq: u32,
    pub status: u8,
    /// Feedback progress or gripper position.
    pub value: f64,
}

fn info_of(msg: &Message) -> BsMessageInfo {
    let mut info = BsMessageInfo {
        msg_type: msg.msg_type().tag(),
        seq: msg.seq,
        t_send_ns: msg.t_send_ns,
        ..Default::default()
    };
    match &msg.payload {
        Payload::GoalBase { duration, .. } => info.value = *duration,
        Payload::GoalGripper { side, position } => {
            info.side = *side as u8;
            info.value = *position;
        }
        Payload::GoalArmTrajectory {
            side,
            dof,
            waypoints,
        } => {
            info.side = *side as u8;
            info.dof = *dof;
            info.waypoints = waypoints.len() as u32;
        }
        Payload::ArmRefSample { side, q } => {
            info.side = *side as u8;
            info.dof = q.len() as u16;
        }
        Payload::Ack { goal_seq, status } | Payload::Result { goal_seq, status } => {
            info.goal_seq = *goal_seq;
            info.status = *status;
        }
        Payload::Feedback { goal_seq, progress } => {
            info.goal_seq = *goal_seq;
            info.value = *progress;
        }
    }
    info
}

/// Incremental frame decoder with a queue of decoded messages.
pub struct BsFrameParser {
    parser: FrameParser,
    ready: VecDeque<Message>,
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bs_frame_parser_new(out: *mut *mut BsFrameParser) -> BsStatus {
    guard(|| {
        if out.is_null() {
            return fail(BsStatus::NullPointer, "out is NULL");
        }
        *out = Box::into_raw(Box::new(BsFrameParser {
            parser: FrameParser::new(),
            ready: VecDeque::new(),
        }));
        BsStatus::Ok
    })
}

/// # Safety
/// `parser` must come from [`bs_frame_parser_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bs_frame_parser_free(parser: *mut BsFrameParser) {
    if !parser.is_null() {
        drop(Box::from_raw(parser));
    }
}

/// Feeds bytes in any chunking. `decoded` (may be `NULL`) receives how many
/// complete messages this call queued. A malformed frame returns
/// `BS_STATUS_PROTOCOL` and discards the buffered bytes.
///
/// # Safety
/// `parser` must be a live handle and `bytes` valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn bs_frame_parser_feed(
    parser: *mut BsFrameParser,
    bytes: *const u8,
    len: usize,
    decoded: *mut usize,
) -> BsStatus {
    guard(|| {
        let Some(p) = parser.as_mut() else {
            return fail(BsStatus::NullPointer, "parser is NULL");
        };
        let Some(bytes) = slice(bytes, len) else {
            return fail(BsStatus::NullPointer, "bytes is NULL");
        };
        match p.parser.feed(bytes) {
            Ok(msgs) => {
                if let Some(d) = decoded.as_mut() {
                    *d = msgs.len();
                }
                p.ready.extend(msgs);
                BsStatus::Ok
            }
            Err(e) => {
                p.parser.reset();
                fail(BsStatus::Protocol, e.to_string())
            }
        }
    })
}

/// Pops the oldest decoded message. For ArmRefSample frames the joint
/// angles are copied to `q` when `q_cap >= dof`; otherwise `q` is left
/// alone. Returns `BS_STATUS_EMPTY` when nothing is queued.
///
/// # Safety
/// `parser` must be a live handle, `info` valid, `q` valid for `q_cap`
/// doubles or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn bs_frame_parser_next(
    parser: *mut BsFrameParser,
    info: *mut BsMessageInfo,
    q: *mut f64,
    q_cap: usize,
) -> BsStatus {
    guard(|| {
        let Some(p) = parser.as_mut() else {
            return fail(BsStatus::NullPointer, "parser is NULL");
        };
        let Some(info) = info.as_mut() else {
            return fail(BsStatus::NullPointer, "info is NULL");
        };
        let Some(msg) = p.ready.pop_front() else {
            return fail(BsStatus::Empty, "no decoded message");
        };
        *info = info_of(&msg);
        if let Payload::ArmRefSample { q: values, .. } = &msg.payload {
            if let Some(out) =
                slice_mut(q, values.len()).filter(|_| !q.is_null() && q_cap >= values.len())
            {
                out.copy_from_slice(values);
            }
        }
        BsStatus::Ok
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BsIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BsRoi {
    pub u_min: f64,
    pub v_min: f64,
    pub u_max: f64,
    pub v_max: f64,
}

/// Fitted box: eight corners (bottom four, then top four, each as x, y, z)
/// and the center, camera frame.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BsBox {
    pub corners: [f64; 24],
    pub center: [f64; 3],
}

/// Fits one box of known extents `[width, depth, height]` inside `roi`.
/// `points` holds `n × 3` camera-frame coordinates; `down` is the gravity
/// direction in the camera frame, used to find the floor.
///
/// # Safety
/// `points` must be valid for `3 * n` doubles, `extents` and `down` for
/// three, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bs_detect_box(
    points: *const f64,
    n: usize,
    intrinsics: BsIntrinsics,
    roi: BsRoi,
    extents: *const f64,
    down: *const f64,
    out: *mut BsBox,
) -> BsStatus {
    guard(|| {
        let (Some(xyz), Some(ext), Some(down), Some(out)) = (
            slice(points, 3 * n),
            slice(extents, 3),
            slice(down, 3),
            out.as_mut(),
        ) else {
            return fail(BsStatus::NullPointer, "NULL argument");
        };
        let category = match CategorySpec::new("target", ext[0], ext[1], ext[2]) {
            Ok(c) => c,
            Err(e) => return fail(BsStatus::InvalidArgument, e.to_string()),
        };
        let cam = CameraIntrinsics {
            fx: intrinsics.fx,
            fy: intrinsics.fy,
            cx: intrinsics.cx,
            cy: intrinsics.cy,
            width: intrinsics.width,
            height: intrinsics.height,
        };
        if let Err(e) = cam.validate() {
            return fail(BsStatus::InvalidArgument, e.to_string());
        }
        let cloud = PointCloud::from(
            xyz.chunks_exact(3)
                .map(|p| Point3::new(p[0], p[1], p[2]))
                .collect::<Vec<_>>(),
        );
        let roi = Roi2D {
            u_min: roi.u_min,
            v_min: roi.v_min,
            u_max: roi.u_max,
            v_max: roi.v_max,
            category: "target".into(),
        };
        let params = DetectParams {
            down: [down[0], down[1], down[2]],
            ..Default::default()
        };
        let catalog = Catalog {
            categories: vec![category],
        };
        let found = detect_boxes(&cloud, &[roi], &cam, &catalog, &params);
        match found.into_iter().next().map(|d| d.result) {
            Some(Ok(b)) => {
                for (i, c) in b.corners.iter().enumerate() {
                    out.corners[3 * i..3 * i + 3].copy_from_slice(&[c.x, c.y, c.z]);
                }
                out.center = [b.center.x, b.center.y, b.center.z];
                BsStatus::Ok
            }
            Some(Err(e)) => fail(BsStatus::Perception, e.to_string()),
            None => fail(BsStatus::Perception, "no detection"),
        }
    })
}

/// Population standard deviation of `measured − reference` per joint.
/// Both series hold `n × dof` values, row-major; `std_out` receives `dof`
/// values and `max_out` (may be `NULL`) their maximum.
///
/// # Safety
/// Inputs must be valid for `n * dof` doubles and `std_out` for `dof`.
#[no_mangle]
pub unsafe extern "C" fn bs_tracking_std(
    reference: *const f64,
    measured: *const f64,
    n: usize,
    dof: usize,
    std_out: *mut f64,
    max_out: *mut f64,
) -> BsStatus {
    guard(|| {
        if dof == 0 {
            return fail(BsStatus::InvalidArgument, "dof is zero");
        }
        let (Some(r), Some(m), Some(out)) = (
            slice(reference, n * dof),
            slice(measured, n * dof),
            slice_mut(std_out, dof),
        ) else {
            return fail(BsStatus::NullPointer, "NULL argument");
        };
        let rows = |s: &[f64]| s.chunks_exact(dof).map(<[f64]>::to_vec).collect::<Vec<_>>();
        match tracking_std("ffi", &rows(r), &rows(m)) {
            Ok(report) => {
                out.copy_from_slice(&report.std_dev);
                if let Some(max) = max_out.as_mut() {
                    *max = report.max_std_dev;
                }
                BsStatus::Ok
            }
            Err(e) => fail(BsStatus::Metrics, e.to_string()),
        }
    })
}
