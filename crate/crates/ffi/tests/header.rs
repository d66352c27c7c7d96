use std::path::PathBuf;
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn header() -> String {
    std::fs::read_to_string(crate_dir().join("include/planforge.h")).expect("header generated by build.rs")
}

#[test]
fn header_declares_the_api() {
    let h = header();
    for name in [
        "pf_last_error",
        "pf_options_default",
        "pf_reconstruct",
        "pf_plan_load",
        "pf_plan_save",
        "pf_plan_render_svg",
        "pf_plan_room_count",
        "pf_plan_door_count",
        "pf_plan_room_area",
        "pf_plan_room_id",
        "pf_plan_room_vertices",
        "pf_plan_free",
        "pf_synth_generate",
        "pf_psnr_from_mse",
        "pf_ssim",
        "pf_mape",
        "pf_point_in_polygon",
        "pf_backproject",
    ] {
        assert!(h.contains(&format!("{name}(")), "missing {name}");
    }
    assert!(h.contains("typedef struct PfFloorPlan PfFloorPlan;"), "plan handle must be opaque");
    assert!(h.contains("PF_STATUS_OK = 0"));
    assert!(h.contains("PF_STATUS_INPUT_ERROR = 1"));
    assert!(h.contains("PF_STATUS_PIPELINE_ERROR = 2"));
    assert!(h.contains("#ifndef PLANFORGE_H"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/c/smoke.c"))
        .output()
    else {
        eprintln!("no C compiler on PATH; syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
