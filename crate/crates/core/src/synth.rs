//! Synthetic Manhattan floors: ray-cast depth, edge masks, poses and door
//! boxes for every room, plus the analytic ground truth.
//!
//! The world frame is the session frame of the written poses: X right, Y
//! down, Z forward, floor at `Y = 0`. Plan (x, y) is world (X, Z).

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backproject::project_point;
use crate::error::{Error, Result};
use crate::geom::{self, Vec2, Vec3};
use crate::ingest::{self, Capture, CaptureKind, DatasetManifest, DoorEntry, RoomCaptures, MANIFEST_VERSION};
use crate::types::{CameraIntrinsics, CapturePose, DepthMap, DoorBox, EdgeMask, Label, RoomPolygon, SceneScale};

/// Half-width of the junction band marked as edge, m.
pub const EDGE_BAND: f64 = 0.03;
/// Camera offset from the room center, away from the target corner, m.
pub const CAMERA_OFFSET: f64 = 0.5;
/// Smallest allowed room side, m.
pub const MIN_ROOM_SIDE: f64 = 1.5;
pub const DOOR_HEIGHT: f64 = 2.0;
pub const DEFAULT_SCALE: f64 = 1000.0;

pub fn default_intrinsics() -> CameraIntrinsics {
    CameraIntrinsics { f: 200.0, cx: 120.0, cy: 160.0, width: 240, height: 320 }
}

/// Axis-aligned rectangular room, plan meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSpec {
    pub id: String,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl RoomSpec {
    /// Counter-clockwise from the lower-left corner; wall `i` runs from
    /// corner `i` to corner `i + 1`.
    pub fn polygon(&self) -> RoomPolygon {
        RoomPolygon::new(
            self.id.clone(),
            vec![
                Vec2::new(self.x0, self.y0),
                Vec2::new(self.x1, self.y0),
                Vec2::new(self.x1, self.y1),
                Vec2::new(self.x0, self.y1),
            ],
        )
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }
}

/// Door on wall `wall` of room `room`; `ratio` locates its centroid as a
/// fraction of the wall length from the wall's left corner (its end vertex).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoorSpec {
    pub room: String,
    pub wall: usize,
    pub ratio: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Noise {
    /// Standard deviation of a per-capture depth scale error, as a fraction.
    pub depth_sigma: f64,
    /// Standard deviation of independent per-pixel depth error, as a fraction.
    pub depth_pixel_sigma: f64,
    /// Heading error of the written pose, radians.
    pub yaw_sigma: f64,
    /// Horizontal position error of the written pose, m.
    pub translation_sigma: f64,
}

/// Floor-standing box that blocks rays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Occluder {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub height: f64,
}

fn default_camera_height() -> f64 {
    1.4
}

fn default_ceiling_height() -> f64 {
    2.6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloorSpec {
    pub rooms: Vec<RoomSpec>,
    #[serde(default)]
    pub doors: Vec<DoorSpec>,
    #[serde(default = "default_camera_height")]
    pub camera_height: f64,
    #[serde(default = "default_ceiling_height")]
    pub ceiling_height: f64,
    #[serde(default)]
    pub noise: Noise,
    #[serde(default)]
    pub occluders: Vec<Occluder>,
    #[serde(default)]
    pub seed: u64,
}

impl FloorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rooms.is_empty() {
            return Err(Error::invalid("floor spec", "no rooms"));
        }
        for r in &self.rooms {
            if r.id.is_empty() || !r.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(Error::invalid("floor spec", format!("room id {:?} must be [A-Za-z0-9_-]+", r.id)));
            }
            if !(r.x1 - r.x0 >= MIN_ROOM_SIDE && r.y1 - r.y0 >= MIN_ROOM_SIDE) {
                return Err(Error::invalid("floor spec", format!("room {} is narrower than {MIN_ROOM_SIDE} m", r.id)));
            }
        }
        for (i, a) in self.rooms.iter().enumerate() {
            for b in &self.rooms[i + 1..] {
                if a.id == b.id {
                    return Err(Error::invalid("floor spec", format!("duplicate room id {}", a.id)));
                }
                let overlap = geom::intersection_area(&a.polygon().vertices, &b.polygon().vertices);
                if overlap > 1e-9 {
                    return Err(Error::invalid(
                        "floor spec",
                        format!("rooms {} and {} overlap by {overlap:.6} m^2", a.id, b.id),
                    ));
                }
            }
        }
        for d in &self.doors {
            let room = self.room(&d.room).ok_or_else(|| Error::UnmatchedRoom(d.room.clone()))?.polygon();
            if d.wall >= 4 {
                return Err(Error::invalid("floor spec", format!("door wall {} out of range", d.wall)));
            }
            let len = crate::doors::wall_length(&room, d.wall);
            let offset = d.ratio * len;
            if !(d.width > 0.0 && offset - d.width / 2.0 >= 0.0 && offset + d.width / 2.0 <= len) {
                return Err(Error::invalid("floor spec", format!("door on {} wall {} does not fit", d.room, d.wall)));
            }
            if DOOR_HEIGHT >= self.ceiling_height {
                return Err(Error::invalid("floor spec", "ceiling lower than the door height"));
            }
        }
        let n = self.noise;
        for s in [n.depth_sigma, n.depth_pixel_sigma, n.yaw_sigma, n.translation_sigma] {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::invalid("floor spec", "noise sigmas must be finite and >= 0"));
            }
        }
        if !(self.camera_height > 0.0 && self.camera_height < self.ceiling_height) {
            return Err(Error::invalid("floor spec", "camera must be between floor and ceiling"));
        }
        for o in &self.occluders {
            if !(o.x1 > o.x0 && o.y1 > o.y0 && o.height > 0.0) {
                return Err(Error::invalid("floor spec", "empty occluder"));
            }
        }
        Ok(())
    }

    pub fn room(&self, id: &str) -> Option<&RoomSpec> {
        self.rooms.iter().find(|r| r.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtRoom {
    pub id: String,
    pub vertices: Vec<Vec2>,
    pub area: f64,
    pub aspect_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtDoor {
    pub room: String,
    pub wall: usize,
    pub ratio: f64,
    /// Centroid distance from the wall's left corner, m.
    pub offset: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub rooms: Vec<GtRoom>,
    pub doors: Vec<GtDoor>,
}

impl GroundTruth {
    pub fn from_spec(spec: &FloorSpec) -> Self {
        let mut rooms: Vec<GtRoom> = spec
            .rooms
            .iter()
            .map(|r| {
                let w = r.x1 - r.x0;
                let h = r.y1 - r.y0;
                GtRoom {
                    id: r.id.clone(),
                    vertices: r.polygon().vertices,
                    area: w * h,
                    aspect_ratio: w.max(h) / w.min(h),
                }
            })
            .collect();
        rooms.sort_by(|a, b| a.id.cmp(&b.id));
        let doors = spec
            .doors
            .iter()
            .map(|d| {
                let len = spec.room(&d.room).map(|r| crate::doors::wall_length(&r.polygon(), d.wall)).unwrap_or(0.0);
                GtDoor { room: d.room.clone(), wall: d.wall, ratio: d.ratio, offset: d.ratio * len, width: d.width }
            })
            .collect();
        Self { rooms, doors }
    }

    pub fn room(&self, id: &str) -> Option<&GtRoom> {
        self.rooms.iter().find(|r| r.id == id)
    }

    pub fn polygons(&self) -> Vec<RoomPolygon> {
        self.rooms.iter().map(|r| RoomPolygon::new(r.id.clone(), r.vertices.clone())).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomReport {
    pub id: String,
    pub area: f64,
    pub aspect_ratio: f64,
    pub corners: Vec<Vec2>,
}

/// Per-room area, aspect ratio and corners, sorted by room id.
pub fn ground_truth_report(gt: &GroundTruth) -> Vec<RoomReport> {
    let mut out: Vec<RoomReport> = gt
        .polygons()
        .into_iter()
        .map(|p| RoomReport {
            id: p.id.clone(),
            area: p.area(),
            aspect_ratio: p.aspect_ratio(0.0),
            corners: p.vertices,
        })
        .collect();
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

/// What a pixel ray hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surface {
    Wall,
    Floor,
    Ceiling,
    Occluder,
}

/// Unquantized render of one capture.
#[derive(Debug, Clone)]
pub struct Render {
    pub width: u32,
    pub height: u32,
    /// Camera-frame depth in meters, row-major; `None` where nothing was hit.
    pub depth: Vec<Option<f64>>,
    pub surfaces: Vec<Option<Surface>>,
    pub labels: Vec<Label>,
}

/// Entry and exit parameters of a ray through an axis-aligned box.
fn slab(origin: Vec3, dir: Vec3, lo: Vec3, hi: Vec3) -> Option<(f64, f64, usize, usize)> {
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    let (mut axis0, mut axis1) = (0, 0);
    let o = [origin.x, origin.y, origin.z];
    let d = [dir.x, dir.y, dir.z];
    let l = [lo.x, lo.y, lo.z];
    let h = [hi.x, hi.y, hi.z];
    for k in 0..3 {
        if d[k] == 0.0 {
            if o[k] < l[k] || o[k] > h[k] {
                return None;
            }
            continue;
        }
        let (mut a, mut b) = ((l[k] - o[k]) / d[k], (h[k] - o[k]) / d[k]);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        if a > t0 {
            t0 = a;
            axis0 = k;
        }
        if b < t1 {
            t1 = b;
            axis1 = k;
        }
    }
    (t0 <= t1).then_some((t0, t1, axis0, axis1))
}

fn camera_axes(pose: &CapturePose) -> [Vec3; 3] {
    [
        pose.q.rotate(Vec3::new(1.0, 0.0, 0.0)),
        pose.q.rotate(Vec3::new(0.0, 1.0, 0.0)),
        pose.q.rotate(Vec3::new(0.0, 0.0, 1.0)),
    ]
}

/// World point in the camera frame of `pose`.
pub fn world_to_camera(p: Vec3, pose: &CapturePose) -> Vec3 {
    let d = p - pose.t;
    let [ex, ey, ez] = camera_axes(pose);
    Vec3::new(d.dot(ex), d.dot(ey), d.dot(ez))
}

/// Ray-casts every pixel of a camera at `pose` inside `room`.
pub fn render_capture(room: &RoomSpec, spec: &FloorSpec, intr: &CameraIntrinsics, pose: &CapturePose) -> Render {
    let (w, h) = (intr.width, intr.height);
    let n = w as usize * h as usize;
    let mut out =
        Render { width: w, height: h, depth: vec![None; n], surfaces: vec![None; n], labels: vec![Label::Other; n] };
    let [ex, ey, ez] = camera_axes(pose);
    let lo = Vec3::new(room.x0, -spec.ceiling_height, room.y0);
    let hi = Vec3::new(room.x1, 0.0, room.y1);
    let corners = room.polygon().vertices;
    for v in 0..h {
        for u in 0..w {
            let dc = Vec3::new((u as f64 - intr.cx) / intr.f, (v as f64 - intr.cy) / intr.f, 1.0);
            let dir = ex * dc.x + ey * dc.y + ez * dc.z;
            let Some((_, t_exit, _, axis)) = slab(pose.t, dir, lo, hi) else { continue };
            let mut t = t_exit;
            let mut surface = match axis {
                1 if dir.y > 0.0 => Surface::Floor,
                1 => Surface::Ceiling,
                _ => Surface::Wall,
            };
            for o in &spec.occluders {
                let olo = Vec3::new(o.x0, -o.height, o.y0);
                let ohi = Vec3::new(o.x1, 0.0, o.y1);
                if let Some((t0, _, _, _)) = slab(pose.t, dir, olo, ohi) {
                    if t0 > 0.0 && t0 < t {
                        t = t0;
                        surface = Surface::Occluder;
                    }
                }
            }
            if !(t > 0.0) {
                continue;
            }
            let i = (v * w + u) as usize;
            let hit = pose.t + dir * t;
            out.depth[i] = Some(t);
            out.surfaces[i] = Some(surface);
            out.labels[i] = match surface {
                Surface::Wall => {
                    let plan = Vec2::new(hit.x, hit.z);
                    let near_corner = corners.iter().any(|c| c.distance(plan) < EDGE_BAND);
                    if near_corner || -hit.y < EDGE_BAND {
                        Label::Edge
                    } else {
                        Label::Wall
                    }
                }
                _ => Label::Other,
            };
        }
    }
    out
}

/// Raw 16-bit depth after noise; values that do not fit become 0 (invalid).
fn quantize(render: &Render, scale: SceneScale, gain: f64, pixel_sigma: f64, rng: &mut ChaCha8Rng) -> DepthMap {
    let pixel = (pixel_sigma > 0.0).then(|| Normal::new(0.0, pixel_sigma).expect("finite sigma"));
    let values = render
        .depth
        .iter()
        .map(|d| {
            let Some(z) = d else { return 0 };
            let jitter = pixel.as_ref().map_or(1.0, |n| 1.0 + n.sample(rng));
            let raw = (z * gain * jitter * scale.get()).round();
            if (1.0..=u16::MAX as f64).contains(&raw) {
                raw as u16
            } else {
                0
            }
        })
        .collect();
    DepthMap { width: render.width, height: render.height, values }
}

/// Planned capture before rendering.
#[derive(Debug, Clone)]
struct Shot {
    room: usize,
    name: String,
    kind: CaptureKind,
    position: Vec2,
    yaw: f64,
    door: Option<usize>,
}

fn heading_yaw(forward: Vec2) -> f64 {
    (-forward.x).atan2(forward.y)
}

fn plan_shots(spec: &FloorSpec, intr: &CameraIntrinsics) -> Result<Vec<Shot>> {
    let mut shots = Vec::new();
    for (ri, room) in spec.rooms.iter().enumerate() {
        let c = room.center();
        for (k, &corner) in room.polygon().vertices.iter().enumerate() {
            let toward = (corner - c).normalized().expect("room has extent");
            let position = c - toward * CAMERA_OFFSET;
            let yaw = heading_yaw(corner - position);
            let pose = ingest::level_pose(position.x, position.y, spec.camera_height, yaw);
            let p = world_to_camera(Vec3::new(corner.x, -spec.camera_height, corner.y), &pose);
            let (u, _, _) = project_point(p, intr, SceneScale::new(1.0)?);
            if !(p.z > 0.0 && (0.0..intr.width as f64).contains(&u)) {
                return Err(Error::OccludedCorner { room: room.id.clone(), corner: k });
            }
            shots.push(Shot {
                room: ri,
                name: format!("{}_c{k}", room.id),
                kind: CaptureKind::Corner,
                position,
                yaw,
                door: None,
            });
        }
        for (di, d) in spec.doors.iter().enumerate().filter(|(_, d)| d.room == room.id) {
            let (a, b) = room.polygon().wall(d.wall);
            let along = (b - a).normalized().expect("wall has length");
            let outward = Vec2::new(along.y, -along.x);
            shots.push(Shot {
                room: ri,
                name: format!("{}_door{di}", room.id),
                kind: CaptureKind::Door,
                position: c,
                yaw: heading_yaw(outward),
                door: Some(di),
            });
        }
    }
    Ok(shots)
}

/// Door box seen by a camera at `pose` facing the door's wall.
fn door_box(spec: &FloorSpec, d: &DoorSpec, intr: &CameraIntrinsics, pose: &CapturePose) -> DoorBox {
    let room = spec.room(&d.room).expect("validated").polygon();
    let (start, end) = room.wall(d.wall);
    let dir = (start - end).normalized().expect("wall has length");
    let centroid = end + (start - end) * d.ratio;
    let unit = SceneScale::new(1.0).expect("positive");
    let project = |p: Vec2, height: f64| {
        let (u, v, _) = project_point(world_to_camera(Vec3::new(p.x, -height, p.y), pose), intr, unit);
        (u, v)
    };
    let (ua, v_top) = project(centroid - dir * (d.width / 2.0), DOOR_HEIGHT);
    let (ub, v_bottom) = project(centroid + dir * (d.width / 2.0), 0.0);
    let (u_left, _) = project(end, spec.camera_height);
    let (u_right, _) = project(start, spec.camera_height);
    DoorBox { u_min: ua.min(ub), v_min: v_top, u_max: ua.max(ub), v_max: v_bottom, u_left, u_right }
}

/// Rendered capture, ready to be written.
struct Rendered {
    capture: Capture,
    depth: DepthMap,
    mask: EdgeMask,
}

/// Renders the spec's dataset and writes it under `out_dir`
/// (`manifest.json`, `ground_truth.json`, `captures/*.png`).
pub fn generate(
    spec: &FloorSpec,
    intr: &CameraIntrinsics,
    scale: SceneScale,
    out_dir: &Path,
) -> Result<(DatasetManifest, GroundTruth)> {
    spec.validate()?;
    intr.validate()?;
    let shots = plan_shots(spec, intr)?;
    let rendered: Vec<Rendered> = shots
        .par_iter()
        .enumerate()
        .map(|(i, shot)| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(i as u64);
            let room = &spec.rooms[shot.room];
            let truth = ingest::level_pose(shot.position.x, shot.position.y, spec.camera_height, shot.yaw);
            let n = spec.noise;
            let mut draw = |sigma: f64| {
                if sigma > 0.0 {
                    Normal::new(0.0, sigma).expect("finite sigma").sample(&mut rng)
                } else {
                    0.0
                }
            };
            let yaw_err = draw(n.yaw_sigma);
            let dx = draw(n.translation_sigma);
            let dy = draw(n.translation_sigma);
            let gain = 1.0 + draw(n.depth_sigma);
            let written =
                ingest::level_pose(shot.position.x + dx, shot.position.y + dy, spec.camera_height, shot.yaw + yaw_err);
            let render = render_capture(room, spec, intr, &truth);
            let depth = quantize(&render, scale, gain, n.depth_pixel_sigma, &mut rng);
            let mask = EdgeMask { width: render.width, height: render.height, labels: render.labels };
            let doors = shot
                .door
                .map(|di| {
                    let d = &spec.doors[di];
                    vec![DoorEntry { bbox: door_box(spec, d, intr, &truth), wall: Some(d.wall) }]
                })
                .unwrap_or_default();
            let capture = Capture {
                depth: PathBuf::from(format!("captures/{}_depth.png", shot.name)),
                edges: PathBuf::from(format!("captures/{}_edges.png", shot.name)),
                pose: written,
                doors,
                kind: shot.kind,
            };
            Rendered { capture, depth, mask }
        })
        .collect();

    fs::create_dir_all(out_dir.join("captures")).map_err(|e| Error::io(out_dir, e))?;
    let mut rooms: Vec<RoomCaptures> =
        spec.rooms.iter().map(|r| RoomCaptures { id: r.id.clone(), captures: Vec::new() }).collect();
    for (shot, r) in shots.iter().zip(rendered) {
        ingest::write_depth(&out_dir.join(&r.capture.depth), &r.depth)?;
        ingest::write_edge_mask(&out_dir.join(&r.capture.edges), &r.mask)?;
        rooms[shot.room].captures.push(r.capture);
    }
    let manifest =
        DatasetManifest { root: out_dir.to_path_buf(), version: MANIFEST_VERSION, intrinsics: *intr, scale, rooms };
    ingest::emit_manifest(&manifest, &out_dir.join("manifest.json"))?;
    let gt = GroundTruth::from_spec(spec);
    crate::plan_io::write_json(&gt, &out_dir.join("ground_truth.json"))?;
    Ok((manifest, gt))
}

/// Distance from a world point to the nearest surface of `room`.
pub fn distance_to_room_surface(p: Vec3, room: &RoomSpec, ceiling_height: f64) -> f64 {
    let planes = [
        (p.x - room.x0).abs(),
        (p.x - room.x1).abs(),
        (p.z - room.y0).abs(),
        (p.z - room.y1).abs(),
        p.y.abs(),
        (p.y + ceiling_height).abs(),
    ];
    planes.into_iter().fold(f64::INFINITY, f64::min)
}
