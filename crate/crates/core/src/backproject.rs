//! Pinhole back-projection of depth rasters and projection onto the plan.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geom::{Vec2, Vec3};
use crate::types::{CameraIntrinsics, DepthMap, EdgeMask, Label, LabeledCloud, PlanTransform, PointSet2D, SceneScale};

/// Default cap on edge points fed to clustering.
pub const DEFAULT_MAX_POINTS: usize = 50_000;

/// Camera-frame point (meters) for pixel (`u`, `v`) with raw depth `d`:
/// `Z = d / s`, `X = (u - cx) Z / f`, `Y = (v - cy) Z / f`.
pub fn backproject_pixel(u: f64, v: f64, d: f64, intr: &CameraIntrinsics, scale: SceneScale) -> Result<Vec3> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidDepth);
    }
    if !(0.0..intr.width as f64).contains(&u) || !(0.0..intr.height as f64).contains(&v) {
        return Err(Error::invalid("pixel", format!("({u}, {v}) outside the image")));
    }
    let z = d / scale.get();
    Ok(Vec3::new((u - intr.cx) * z / intr.f, (v - intr.cy) * z / intr.f, z))
}

/// Forward pinhole model: camera-frame point to (u, v, raw depth).
pub fn project_point(p: Vec3, intr: &CameraIntrinsics, scale: SceneScale) -> (f64, f64, f64) {
    (intr.f * p.x / p.z + intr.cx, intr.f * p.y / p.z + intr.cy, p.z * scale.get())
}

/// One camera-frame point per pixel with nonzero depth, carrying its mask label.
pub fn backproject_capture(
    depth: &DepthMap,
    mask: &EdgeMask,
    intr: &CameraIntrinsics,
    scale: SceneScale,
    capture_id: &str,
) -> Result<LabeledCloud> {
    mask.validate_against(depth)?;
    depth.validate_against(intr)?;
    let mut cloud = LabeledCloud { capture_id: capture_id.to_string(), ..Default::default() };
    for v in 0..depth.height {
        for u in 0..depth.width {
            let d = depth.get(u, v);
            if d == 0 {
                continue;
            }
            cloud.points.push(backproject_pixel(u as f64, v as f64, d as f64, intr, scale)?);
            cloud.labels.push(mask.get(u, v));
        }
    }
    Ok(cloud)
}

/// Keeps points whose label is in `keep`, drops the vertical axis and maps
/// them through `xform`. Camera (X, Z) becomes plan (x, y).
pub fn project_to_plan(cloud: &LabeledCloud, xform: &PlanTransform, keep: &[Label]) -> PointSet2D {
    let points = cloud
        .points
        .iter()
        .zip(&cloud.labels)
        .filter(|(_, l)| keep.contains(l))
        .map(|(p, _)| xform.apply(Vec2::new(p.x, p.z)))
        .collect();
    PointSet2D::new(points)
}

/// Uniform-stride decimation to at most `max` points.
pub fn decimate(points: PointSet2D, max: usize) -> PointSet2D {
    if max == 0 || points.len() <= max {
        return points;
    }
    let stride = points.len().div_ceil(max);
    PointSet2D::new(points.points.into_iter().step_by(stride).collect())
}

/// Debug dump: one `x y z label` row per point.
pub fn write_xyz(cloud: &LabeledCloud, mut out: impl Write) -> std::io::Result<()> {
    for (p, l) in cloud.points.iter().zip(&cloud.labels) {
        let tag = match l {
            Label::Other => "other",
            Label::Wall => "wall",
            Label::Edge => "edge",
        };
        writeln!(out, "{:.6} {:.6} {:.6} {tag}", p.x, p.y, p.z)?;
    }
    Ok(())
}
