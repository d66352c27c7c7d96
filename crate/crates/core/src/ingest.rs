//! Dataset manifest, raster decoding and pose reduction.
//!
//! Frame conventions: the session frame has X right, Y along gravity
//! (pointing down) and Z forward, i.e. it coincides with the camera frame of
//! a level camera. Poses map camera coordinates into the session frame. The
//! plan plane is (X, Z) mapped to plan (x, y), which is right-handed when
//! seen from above.

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Quaternion, Vec3};
use crate::types::{CameraIntrinsics, CapturePose, DepthMap, DoorBox, EdgeMask, Label, PlanTransform, SceneScale};

pub const MANIFEST_VERSION: u32 = 1;

/// Poses pitched further than this from level are rejected.
pub const MAX_PITCH_DEG: f64 = 80.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaptureKind {
    /// Photo of a room corner; feeds wall regularization.
    #[default]
    Corner,
    /// Photo of a door wall; only its door boxes are used.
    Door,
}

impl CaptureKind {
    fn is_corner(&self) -> bool {
        *self == CaptureKind::Corner
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoorEntry {
    pub bbox: DoorBox,
    /// Plan wall index, when the capture tool recorded it.
    pub wall: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Capture {
    /// Raster paths as written in the manifest (relative to its directory).
    pub depth: PathBuf,
    pub edges: PathBuf,
    pub pose: CapturePose,
    pub doors: Vec<DoorEntry>,
    pub kind: CaptureKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomCaptures {
    pub id: String,
    pub captures: Vec<Capture>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    /// Directory that relative raster paths resolve against.
    pub root: PathBuf,
    pub version: u32,
    pub intrinsics: CameraIntrinsics,
    pub scale: SceneScale,
    pub rooms: Vec<RoomCaptures>,
}

impl DatasetManifest {
    pub fn resolve(&self, rel: &Path) -> PathBuf {
        self.root.join(rel)
    }

    pub fn capture_count(&self) -> usize {
        self.rooms.iter().map(|r| r.captures.len()).sum()
    }

    pub fn validate(&self, check_files: bool) -> Result<()> {
        self.intrinsics.validate()?;
        if self.rooms.is_empty() {
            return Err(Error::invalid("manifest", "no rooms"));
        }
        for room in &self.rooms {
            if room.captures.is_empty() {
                return Err(Error::invalid("manifest", format!("room {} has no captures", room.id)));
            }
            for c in &room.captures {
                c.pose.validate()?;
                for d in &c.doors {
                    d.bbox.validate()?;
                }
                if check_files {
                    for p in [&c.depth, &c.edges] {
                        let full = self.resolve(p);
                        if !full.is_file() {
                            return Err(Error::MissingFile(full));
                        }
                    }
                }
            }
        }
        let mut ids: Vec<&str> = self.rooms.iter().map(|r| r.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("manifest", "duplicate room id"));
        }
        Ok(())
    }
}

// On-disk document. Field names are part of the file contract.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestDoc {
    version: u32,
    intrinsics: CameraIntrinsics,
    scale_s: f64,
    rooms: Vec<RoomDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoomDoc {
    id: String,
    captures: Vec<CaptureDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaptureDoc {
    depth: PathBuf,
    edges: PathBuf,
    pose: PoseDoc,
    #[serde(default)]
    doors: Vec<DoorDoc>,
    #[serde(default, skip_serializing_if = "CaptureKind::is_corner")]
    kind: CaptureKind,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseDoc {
    qw: f64,
    qx: f64,
    qy: f64,
    qz: f64,
    tx: f64,
    ty: f64,
    tz: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DoorDoc {
    u_min: f64,
    v_min: f64,
    u_max: f64,
    v_max: f64,
    u_left: f64,
    u_right: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    wall: Option<usize>,
}

/// Reads and fully validates a manifest, including the existence of every
/// referenced raster.
pub fn parse_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let malformed = |message: String| Error::Malformed { path: path.to_path_buf(), message };
    let doc: ManifestDoc = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
    if doc.version != MANIFEST_VERSION {
        return Err(malformed(format!("unsupported version {}", doc.version)));
    }
    let rooms = doc
        .rooms
        .into_iter()
        .map(|r| {
            let captures = r
                .captures
                .into_iter()
                .map(|c| {
                    let p = c.pose;
                    Ok(Capture {
                        depth: c.depth,
                        edges: c.edges,
                        pose: CapturePose::new(Quaternion::new(p.qw, p.qx, p.qy, p.qz), Vec3::new(p.tx, p.ty, p.tz))?,
                        doors: c
                            .doors
                            .into_iter()
                            .map(|d| DoorEntry {
                                bbox: DoorBox {
                                    u_min: d.u_min,
                                    v_min: d.v_min,
                                    u_max: d.u_max,
                                    v_max: d.v_max,
                                    u_left: d.u_left,
                                    u_right: d.u_right,
                                },
                                wall: d.wall,
                            })
                            .collect(),
                        kind: c.kind,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RoomCaptures { id: r.id, captures })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = DatasetManifest {
        root: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        version: doc.version,
        intrinsics: doc.intrinsics,
        scale: SceneScale::new(doc.scale_s)?,
        rooms,
    };
    manifest.validate(true)?;
    Ok(manifest)
}

/// Serializes a manifest. Raster paths are written exactly as stored.
pub fn emit_manifest(m: &DatasetManifest, path: &Path) -> Result<()> {
    let doc = ManifestDoc {
        version: m.version,
        intrinsics: m.intrinsics,
        scale_s: m.scale.get(),
        rooms: m
            .rooms
            .iter()
            .map(|r| RoomDoc {
                id: r.id.clone(),
                captures: r
                    .captures
                    .iter()
                    .map(|c| CaptureDoc {
                        depth: c.depth.clone(),
                        edges: c.edges.clone(),
                        pose: PoseDoc {
                            qw: c.pose.q.w,
                            qx: c.pose.q.x,
                            qy: c.pose.q.y,
                            qz: c.pose.q.z,
                            tx: c.pose.t.x,
                            ty: c.pose.t.y,
                            tz: c.pose.t.z,
                        },
                        doors: c
                            .doors
                            .iter()
                            .map(|d| DoorDoc {
                                u_min: d.bbox.u_min,
                                v_min: d.bbox.v_min,
                                u_max: d.bbox.u_max,
                                v_max: d.bbox.v_max,
                                u_left: d.bbox.u_left,
                                u_right: d.bbox.u_right,
                                wall: d.wall,
                            })
                            .collect(),
                        kind: c.kind,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Decodes a 16-bit single-channel raster. Raw values pass through untouched.
pub fn decode_depth(path: &Path, intr: &CameraIntrinsics) -> Result<DepthMap> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let img = image::open(path)?;
    let DynamicImage::ImageLuma16(buf) = img else {
        return Err(Error::UnsupportedBitDepth { path: path.to_path_buf(), expected: "16-bit grayscale" });
    };
    let (w, h) = buf.dimensions();
    let map = DepthMap::new(w, h, buf.into_raw())?;
    map.validate_against(intr)?;
    Ok(map)
}

/// Decodes an 8-bit mask with values 0 (other), 128 (wall), 255 (edge).
pub fn decode_edge_mask(path: &Path) -> Result<EdgeMask> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let img = image::open(path)?;
    let DynamicImage::ImageLuma8(buf) = img else {
        return Err(Error::UnsupportedBitDepth { path: path.to_path_buf(), expected: "8-bit grayscale" });
    };
    let (w, h) = buf.dimensions();
    let labels = buf
        .enumerate_pixels()
        .map(|(u, v, px)| Label::from_mask_value(px.0[0]).ok_or(Error::UnexpectedMaskValue { value: px.0[0], u, v }))
        .collect::<Result<Vec<_>>>()?;
    EdgeMask::new(w, h, labels)
}

pub fn write_depth(path: &Path, depth: &DepthMap) -> Result<()> {
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(depth.width, depth.height, depth.values.clone()).expect("sized buffer");
    buf.save(path)?;
    Ok(())
}

pub fn write_edge_mask(path: &Path, mask: &EdgeMask) -> Result<()> {
    let raw: Vec<u8> = mask.labels.iter().map(|l| l.mask_value()).collect();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(mask.width, mask.height, raw).expect("sized buffer");
    buf.save(path)?;
    Ok(())
}

/// Camera forward axis in the session frame.
pub fn forward_axis(pose: &CapturePose) -> Vec3 {
    pose.q.rotate(Vec3::new(0.0, 0.0, 1.0))
}

/// Reduces a session pose to a plan transform: yaw is the heading of the
/// camera's forward axis projected onto the plan, translation is the
/// horizontal part of `t`.
pub fn reduce_pose(pose: &CapturePose) -> Result<PlanTransform> {
    pose.validate()?;
    let f = forward_axis(pose);
    let horizontal = f.x.hypot(f.z);
    if f.y.abs() > MAX_PITCH_DEG.to_radians().sin() || horizontal == 0.0 {
        return Err(Error::UnusablePose);
    }
    // plan forward of a camera with heading psi is (-sin psi, cos psi)
    let yaw = (-f.x).atan2(f.z);
    Ok(PlanTransform::new(yaw, pose.t.x, pose.t.z))
}

/// Rotation by `yaw` about the up direction, i.e. a counter-clockwise plan turn.
pub fn yaw_quaternion(yaw: f64) -> Quaternion {
    Quaternion::from_axis_angle(Vec3::new(0.0, -1.0, 0.0), yaw)
}

/// Pose for a level camera at plan position (`x`, `y`), height `height` above
/// the floor (floor at Y = 0), heading `yaw`.
pub fn level_pose(x: f64, y: f64, height: f64, yaw: f64) -> CapturePose {
    CapturePose { q: yaw_quaternion(yaw), t: Vec3::new(x, -height, y) }
}

/// Applies a session-frame rotation `r` after `pose`.
pub fn compose_pose(r: Quaternion, pose: &CapturePose) -> CapturePose {
    CapturePose { q: r.mul(pose.q), t: r.rotate(pose.t) }
}
