use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use planforge_ffi::*;

fn c(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(pf_last_error()) }.to_string_lossy().into_owned()
}

fn spec_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/two_rooms.json")
}

#[test]
fn synth_reconstruct_and_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds");
    unsafe {
        assert_eq!(pf_synth_generate(c(&spec_path()).as_ptr(), c(&ds).as_ptr()), PfStatus::Ok, "{}", last_error());
        let mut plan = ptr::null_mut();
        let opts = pf_options_default();
        assert_eq!(
            pf_reconstruct(c(&ds.join("manifest.json")).as_ptr(), &opts, &mut plan),
            PfStatus::Ok,
            "{}",
            last_error()
        );
        assert!(!plan.is_null());
        assert_eq!(pf_plan_room_count(plan), 2);
        assert_eq!(pf_plan_door_count(plan), 1);

        let mut area = 0.0;
        assert_eq!(pf_plan_room_area(plan, 0, &mut area), PfStatus::Ok);
        assert!((area - 12.0).abs() / 12.0 < 0.01, "{area}");
        assert_eq!(pf_plan_room_area(plan, 7, &mut area), PfStatus::OutOfRange);

        let mut buf = [0 as std::ffi::c_char; 32];
        let mut len = 0;
        assert_eq!(pf_plan_room_id(plan, 1, buf.as_mut_ptr(), buf.len(), &mut len), PfStatus::Ok);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "study");
        assert_eq!(len, 5);
        assert_eq!(pf_plan_room_id(plan, 1, buf.as_mut_ptr(), 5, &mut len), PfStatus::OutOfRange);

        let mut count = 0;
        assert_eq!(pf_plan_room_vertices(plan, 0, ptr::null_mut(), 0, &mut count), PfStatus::OutOfRange);
        assert_eq!(count, 4);
        let mut xy = vec![0.0; 2 * count];
        assert_eq!(pf_plan_room_vertices(plan, 0, xy.as_mut_ptr(), count, &mut count), PfStatus::Ok);
        assert!(xy[0].abs() < 0.05 && xy[1].abs() < 0.05);

        let saved = dir.path().join("plan.json");
        assert_eq!(pf_plan_save(plan, c(&saved).as_ptr()), PfStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(pf_plan_load(c(&saved).as_ptr(), &mut loaded), PfStatus::Ok);
        assert_eq!(pf_plan_room_count(loaded), 2);
        let svg = dir.path().join("plan.svg");
        assert_eq!(pf_plan_render_svg(loaded, c(&svg).as_ptr()), PfStatus::Ok);
        assert!(std::fs::read_to_string(&svg).unwrap().contains("<polygon"));

        pf_plan_free(plan);
        pf_plan_free(loaded);
        pf_plan_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut plan = ptr::null_mut();
        let missing = c(Path::new("/nonexistent/manifest.json"));
        assert_eq!(pf_reconstruct(missing.as_ptr(), ptr::null(), &mut plan), PfStatus::InputError);
        assert!(plan.is_null());
        assert!(last_error().contains("/nonexistent/manifest.json"), "{}", last_error());
        assert_eq!(pf_reconstruct(ptr::null(), ptr::null(), &mut plan), PfStatus::NullArgument);
        assert_eq!(pf_plan_room_count(ptr::null()), 0);
    }
}

#[test]
fn metric_helpers() {
    assert!((pf_psnr_from_mse(1.0, 255.0) - 48.1308).abs() < 1e-3);
    assert!(pf_psnr_from_mse(0.0, 255.0).is_infinite());
    unsafe {
        let x = [1.0, 5.0, 9.0, 20.0];
        let mut s = 0.0;
        assert_eq!(pf_ssim(x.as_ptr(), x.as_ptr(), 2, 2, 255.0, &mut s), PfStatus::Ok);
        assert!((s - 1.0).abs() < 1e-12);
        let mut m = 0.0;
        assert_eq!(pf_mape([10.3].as_ptr(), [10.0].as_ptr(), 1, &mut m), PfStatus::Ok);
        assert!((m - 3.0).abs() < 1e-9);
        assert_eq!(pf_mape([1.0].as_ptr(), [0.0].as_ptr(), 1, &mut m), PfStatus::InputError);
    }
}

#[test]
fn geometry_helpers() {
    let square = [0.0, 0.0, 2.0, 0.0, 2.0, 2.0, 0.0, 2.0];
    unsafe {
        assert_eq!(pf_point_in_polygon(1.0, 1.0, square.as_ptr(), 4), 1);
        assert_eq!(pf_point_in_polygon(3.0, 1.0, square.as_ptr(), 4), 0);
        assert_eq!(pf_point_in_polygon(1.0, 1.0, square.as_ptr(), 2), -1);
        let intr = PfIntrinsics { f: 500.0, cx: 320.0, cy: 240.0, width: 640, height: 480 };
        let mut p = [0.0; 3];
        assert_eq!(pf_backproject(570.0, 240.0, 2000.0, &intr, 1000.0, p.as_mut_ptr()), PfStatus::Ok);
        assert_eq!(p, [1.0, 0.0, 2.0]);
        assert_eq!(pf_backproject(1.0, 1.0, 0.0, &intr, 1000.0, p.as_mut_ptr()), PfStatus::PipelineError);
    }
}
