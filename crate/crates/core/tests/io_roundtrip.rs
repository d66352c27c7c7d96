use std::fs;
use std::path::{Path, PathBuf};

use proptest::prelude::*;

use planforge::assemble::boundary_hull;
use planforge::geom::Vec2;
use planforge::ingest::{
    decode_depth, decode_edge_mask, emit_manifest, level_pose, parse_manifest, write_depth, write_edge_mask, Capture,
    CaptureKind, DatasetManifest, DoorEntry, RoomCaptures,
};
use planforge::plan_io::{plan_from_str, plan_to_string};
use planforge::{
    CameraIntrinsics, DepthMap, DoorBox, DoorPlacement, EdgeMask, Error, FloorPlan, Label, RoomPolygon, SceneScale,
};

const INTR: CameraIntrinsics = CameraIntrinsics { f: 5.0, cx: 4.0, cy: 3.0, width: 8, height: 6 };

fn plan_strategy() -> impl Strategy<Value = FloorPlan> {
    prop::collection::vec((0.5..5.0f64, 0.5..5.0f64, -0.3..0.3f64, 0.0..1.0f64, 0usize..4), 1..4).prop_map(|specs| {
        let mut x = 0.0;
        let mut rooms = Vec::new();
        let mut doors = Vec::new();
        for (i, (w, h, y0, ratio, wall)) in specs.into_iter().enumerate() {
            let id = format!("room{i}");
            rooms.push(RoomPolygon::new(
                id.clone(),
                vec![Vec2::new(x, y0), Vec2::new(x + w, y0), Vec2::new(x + w, y0 + h), Vec2::new(x, y0 + h)],
            ));
            doors.push(DoorPlacement { room_id: id, wall, ratio: 0.1 + 0.8 * ratio, width: 0.2, clamped: i % 2 == 1 });
            x += w + 0.1;
        }
        let boundary = boundary_hull(&rooms).unwrap();
        FloorPlan { rooms, boundary, doors }
    })
}

fn round6(plan: &FloorPlan) -> FloorPlan {
    let r = |v: f64| {
        let x = (v * 1e6).round() / 1e6;
        if x == 0.0 {
            0.0
        } else {
            x
        }
    };
    let pts = |vs: &[Vec2]| vs.iter().map(|p| Vec2::new(r(p.x), r(p.y))).collect::<Vec<_>>();
    FloorPlan {
        rooms: plan
            .rooms
            .iter()
            .map(|room| RoomPolygon { id: room.id.clone(), vertices: pts(&room.vertices) })
            .collect(),
        boundary: planforge::BoundaryPolygon { vertices: pts(&plan.boundary.vertices) },
        doors: plan.doors.iter().map(|d| DoorPlacement { ratio: r(d.ratio), width: r(d.width), ..d.clone() }).collect(),
    }
}

fn write_rasters(dir: &Path) {
    fs::create_dir_all(dir.join("captures")).unwrap();
    write_depth(&dir.join("captures/d.png"), &DepthMap::new(8, 6, vec![1500; 48]).unwrap()).unwrap();
    write_edge_mask(&dir.join("captures/e.png"), &EdgeMask::filled(8, 6, Label::Wall)).unwrap();
}

fn manifest_strategy() -> impl Strategy<Value = Vec<RoomCaptures>> {
    let door = (0.0..3.0f64, 0.5..2.0f64, prop::option::of(0usize..4)).prop_map(|(u, w, wall)| DoorEntry {
        bbox: DoorBox { u_min: u, v_min: 0.0, u_max: u + w, v_max: 5.0, u_left: 0.0, u_right: 8.0 },
        wall,
    });
    let capture = (-3.0..3.0f64, -3.0..3.0f64, -3.1..3.1f64, prop::collection::vec(door, 0..2), any::<bool>())
        .prop_map(|(x, y, yaw, doors, is_door)| Capture {
            depth: PathBuf::from("captures/d.png"),
            edges: PathBuf::from("captures/e.png"),
            pose: level_pose(x, y, 1.4, yaw),
            doors,
            kind: if is_door { CaptureKind::Door } else { CaptureKind::Corner },
        });
    prop::collection::vec(prop::collection::vec(capture, 1..5), 1..4).prop_map(|rooms| {
        rooms.into_iter().enumerate().map(|(i, captures)| RoomCaptures { id: format!("r{i}"), captures }).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plan_round_trips_at_micrometers(plan in plan_strategy()) {
        let text = plan_to_string(&plan).unwrap();
        let back = plan_from_str(&text, Path::new("mem")).unwrap();
        prop_assert_eq!(&back, &round6(&plan));
        prop_assert_eq!(plan_to_string(&back).unwrap(), text);
    }

    #[test]
    fn manifest_round_trips(rooms in manifest_strategy(), s in 100.0..5000.0f64) {
        let dir = tempfile::tempdir().unwrap();
        write_rasters(dir.path());
        let m = DatasetManifest { root: dir.path().to_path_buf(), version: 1, intrinsics: INTR, scale: SceneScale::new(s).unwrap(), rooms };
        let path = dir.path().join("manifest.json");
        emit_manifest(&m, &path).unwrap();
        prop_assert_eq!(parse_manifest(&path).unwrap(), m);
    }

    #[test]
    fn rasters_round_trip(values in prop::collection::vec(any::<u16>(), 48), labels in prop::collection::vec(0u8..3, 48)) {
        let dir = tempfile::tempdir().unwrap();
        let depth = DepthMap::new(8, 6, values).unwrap();
        let labels = labels.into_iter().map(|l| [Label::Other, Label::Wall, Label::Edge][l as usize]).collect();
        let mask = EdgeMask::new(8, 6, labels).unwrap();
        write_depth(&dir.path().join("d.png"), &depth).unwrap();
        write_edge_mask(&dir.path().join("e.png"), &mask).unwrap();
        prop_assert_eq!(decode_depth(&dir.path().join("d.png"), &INTR).unwrap(), depth);
        prop_assert_eq!(decode_edge_mask(&dir.path().join("e.png")).unwrap(), mask);
    }
}

#[test]
fn negative_zero_is_written_as_zero() {
    let room = RoomPolygon::new(
        "a",
        vec![Vec2::new(-0.0, -1e-9), Vec2::new(2.0, 0.0), Vec2::new(2.0, 2.0), Vec2::new(0.0, 2.0)],
    );
    let plan =
        FloorPlan { boundary: boundary_hull(std::slice::from_ref(&room)).unwrap(), rooms: vec![room], doors: vec![] };
    let text = plan_to_string(&plan).unwrap();
    assert!(!text.contains("-0.000000"), "{text}");
}

#[test]
fn mask_value_outside_the_palette_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.png");
    image::GrayImage::from_fn(4, 4, |u, v| image::Luma([if (u, v) == (2, 1) { 77 } else { 0 }])).save(&path).unwrap();
    match decode_edge_mask(&path) {
        Err(Error::UnexpectedMaskValue { value: 77, u: 2, v: 1 }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn eight_bit_depth_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.png");
    image::GrayImage::new(8, 6).save(&path).unwrap();
    assert!(matches!(decode_depth(&path, &INTR), Err(Error::UnsupportedBitDepth { .. })));
}

#[test]
fn depth_size_must_match_intrinsics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.png");
    write_depth(&path, &DepthMap::new(4, 4, vec![1; 16]).unwrap()).unwrap();
    assert!(matches!(decode_depth(&path, &INTR), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn manifest_with_missing_raster_names_it() {
    let dir = tempfile::tempdir().unwrap();
    write_rasters(dir.path());
    let capture = Capture {
        depth: PathBuf::from("captures/d.png"),
        edges: PathBuf::from("captures/nope.png"),
        pose: level_pose(0.0, 0.0, 1.4, 0.0),
        doors: vec![],
        kind: CaptureKind::Corner,
    };
    let m = DatasetManifest {
        root: dir.path().to_path_buf(),
        version: 1,
        intrinsics: INTR,
        scale: SceneScale::new(1000.0).unwrap(),
        rooms: vec![RoomCaptures { id: "a".into(), captures: vec![capture] }],
    };
    let path = dir.path().join("manifest.json");
    emit_manifest(&m, &path).unwrap();
    let err = parse_manifest(&path).unwrap_err();
    assert!(err.is_input_error());
    assert!(err.to_string().contains("nope.png"), "{err}");
}
