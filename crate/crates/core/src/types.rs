//! Domain value types shared by every stage. Each carries a `validate`
//! method that checks its invariants.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Quaternion, Vec2, Vec3};

/// Tolerance on quaternion norm.
pub const UNIT_QUATERNION_TOL: f64 = 1e-9;

/// Tolerance for the wedge perpendicularity invariant.
pub const PERPENDICULAR_TOL: f64 = 1e-9;

/// Tolerance on right angles after Manhattan snapping (radians).
pub const RIGHT_ANGLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    /// Focal length in pixels.
    pub f: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<()> {
        if !(self.f > 0.0 && self.f.is_finite()) {
            return Err(Error::invalid("intrinsics", format!("focal length {} must be > 0", self.f)));
        }
        if !(0.0..self.width as f64).contains(&self.cx) || !(0.0..self.height as f64).contains(&self.cy) {
            return Err(Error::invalid(
                "intrinsics",
                format!("principal point ({}, {}) outside {}x{} image", self.cx, self.cy, self.width, self.height),
            ));
        }
        Ok(())
    }

    pub fn diagonal(&self) -> f64 {
        (self.width as f64).hypot(self.height as f64)
    }
}

/// Raw depth units per meter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SceneScale(f64);

impl SceneScale {
    pub fn new(s: f64) -> Result<Self> {
        if s > 0.0 && s.is_finite() {
            Ok(Self(s))
        } else {
            Err(Error::invalid("scene scale", format!("{s} must be positive and finite")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SceneScale {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Self::new(s)
    }
}

impl From<SceneScale> for f64 {
    fn from(s: SceneScale) -> f64 {
        s.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Other,
    Wall,
    Edge,
}

impl Label {
    /// Edge-mask raster encoding.
    pub fn from_mask_value(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::Other),
            128 => Some(Label::Wall),
            255 => Some(Label::Edge),
            _ => None,
        }
    }

    pub fn mask_value(self) -> u8 {
        match self {
            Label::Other => 0,
            Label::Wall => 128,
            Label::Edge => 255,
        }
    }
}

/// Raw per-pixel depth, row-major. Zero marks an invalid pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub width: u32,
    pub height: u32,
    pub values: Vec<u16>,
}

impl DepthMap {
    pub fn new(width: u32, height: u32, values: Vec<u16>) -> Result<Self> {
        let map = Self { width, height, values };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.width as usize * self.height as usize {
            return Err(Error::invalid("depth map", "value count does not match dimensions"));
        }
        Ok(())
    }

    pub fn validate_against(&self, intr: &CameraIntrinsics) -> Result<()> {
        if self.width != intr.width || self.height != intr.height {
            return Err(Error::DimensionMismatch {
                expected_w: intr.width,
                expected_h: intr.height,
                got_w: self.width,
                got_h: self.height,
            });
        }
        Ok(())
    }

    pub fn get(&self, u: u32, v: u32) -> u16 {
        self.values[(v * self.width + u) as usize]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMask {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<Label>,
}

impl EdgeMask {
    pub fn new(width: u32, height: u32, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != width as usize * height as usize {
            return Err(Error::invalid("edge mask", "label count does not match dimensions"));
        }
        Ok(Self { width, height, labels })
    }

    pub fn filled(width: u32, height: u32, label: Label) -> Self {
        Self { width, height, labels: vec![label; width as usize * height as usize] }
    }

    pub fn validate_against(&self, depth: &DepthMap) -> Result<()> {
        if self.width != depth.width || self.height != depth.height {
            return Err(Error::DimensionMismatch {
                expected_w: depth.width,
                expected_h: depth.height,
                got_w: self.width,
                got_h: self.height,
            });
        }
        Ok(())
    }

    pub fn get(&self, u: u32, v: u32) -> Label {
        self.labels[(v * self.width + u) as usize]
    }
}

/// Camera-to-session pose as reported by the tracking session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapturePose {
    pub q: Quaternion,
    pub t: Vec3,
}

impl CapturePose {
    pub fn new(q: Quaternion, t: Vec3) -> Result<Self> {
        let pose = Self { q, t };
        pose.validate()?;
        Ok(pose)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.q.norm();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_QUATERNION_TOL {
            return Err(Error::NonUnitQuaternion(n));
        }
        if !self.t.is_finite() {
            return Err(Error::invalid("pose", "non-finite translation"));
        }
        Ok(())
    }
}

/// Rigid plan-plane transform: rotate by `yaw`, then translate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanTransform {
    pub yaw: f64,
    pub tx: f64,
    pub ty: f64,
}

impl PlanTransform {
    pub const IDENTITY: PlanTransform = PlanTransform { yaw: 0.0, tx: 0.0, ty: 0.0 };

    pub fn new(yaw: f64, tx: f64, ty: f64) -> Self {
        Self { yaw: geom::wrap_angle(yaw), tx, ty }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.yaw > -PI && self.yaw <= PI) || !self.tx.is_finite() || !self.ty.is_finite() {
            return Err(Error::invalid("plan transform", format!("{self:?}")));
        }
        Ok(())
    }

    pub fn translation(&self) -> Vec2 {
        Vec2::new(self.tx, self.ty)
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        p.rotated(self.yaw) + self.translation()
    }

    pub fn apply_dir(&self, d: Vec2) -> Vec2 {
        d.rotated(self.yaw)
    }

    /// `self` after `inner`: x -> self(inner(x)).
    pub fn compose(&self, inner: &PlanTransform) -> PlanTransform {
        let t = self.apply(inner.translation());
        PlanTransform::new(self.yaw + inner.yaw, t.x, t.y)
    }

    pub fn inverse(&self) -> PlanTransform {
        let t = (-self.translation()).rotated(-self.yaw);
        PlanTransform::new(-self.yaw, t.x, t.y)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledCloud {
    pub capture_id: String,
    pub points: Vec<Vec3>,
    pub labels: Vec<Label>,
}

impl LabeledCloud {
    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.labels.len() {
            return Err(Error::invalid("labeled cloud", "points and labels differ in length"));
        }
        if self.points.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("labeled cloud", "non-finite coordinate"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet2D {
    pub points: Vec<Vec2>,
}

impl PointSet2D {
    pub fn new(points: Vec<Vec2>) -> Self {
        Self { points }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.iter().all(|p| p.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid("point set", "non-finite coordinate"))
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Regularized corner: the polyline `apex - dir1*len1 -> apex -> apex + dir2*len2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wedge {
    pub apex: Vec2,
    /// Direction of the first wall, pointing into the apex.
    pub dir1: Vec2,
    /// Direction of the second wall, pointing away from the apex.
    pub dir2: Vec2,
    pub len1: f64,
    pub len2: f64,
}

impl Wedge {
    pub fn validate(&self) -> Result<()> {
        let unit = |d: Vec2| (d.norm() - 1.0).abs() < 1e-9;
        if !unit(self.dir1) || !unit(self.dir2) {
            return Err(Error::invalid("wedge", "directions must be unit vectors"));
        }
        if self.dir1.dot(self.dir2).abs() > PERPENDICULAR_TOL {
            return Err(Error::invalid(
                "wedge",
                format!("walls not perpendicular (dot {:e})", self.dir1.dot(self.dir2)),
            ));
        }
        if !(self.len1 > 0.0 && self.len2 > 0.0) {
            return Err(Error::invalid("wedge", "wall lengths must be positive"));
        }
        Ok(())
    }

    pub fn start(&self) -> Vec2 {
        self.apex - self.dir1 * self.len1
    }

    pub fn end(&self) -> Vec2 {
        self.apex + self.dir2 * self.len2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    /// `means[1]` is the wedge apex.
    pub means: [Vec2; 3],
    pub assignments: Vec<usize>,
    /// Sum of squared distances to the assigned means.
    pub inertia: f64,
}

impl ClusterResult {
    pub fn validate(&self, points: &[Vec2]) -> Result<()> {
        if self.assignments.len() != points.len() {
            return Err(Error::invalid("cluster result", "assignment count mismatch"));
        }
        for (p, &a) in points.iter().zip(&self.assignments) {
            let own = p.distance(self.means[a]);
            if self.means.iter().any(|m| p.distance(*m) < own - 1e-12) {
                return Err(Error::invalid("cluster result", "point not assigned to its nearest mean"));
            }
        }
        Ok(())
    }

    pub fn members(&self, points: &[Vec2], cluster: usize) -> Vec<Vec2> {
        points.iter().zip(&self.assignments).filter(|(_, &a)| a == cluster).map(|(p, _)| *p).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomPolygon {
    pub id: String,
    /// Counter-clockwise ring, no repeated closing vertex.
    pub vertices: Vec<Vec2>,
}

impl RoomPolygon {
    /// Builds a polygon, reordering vertices counter-clockwise if needed.
    pub fn new(id: impl Into<String>, mut vertices: Vec<Vec2>) -> Self {
        if geom::signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Self { id: id.into(), vertices }
    }

    pub fn area(&self) -> f64 {
        geom::signed_area(&self.vertices).abs()
    }

    /// Long side over short side of the bounding box in the frame rotated by `-axis`.
    pub fn aspect_ratio(&self, axis: f64) -> f64 {
        let (w, h) = self.extent(axis);
        w.max(h) / w.min(h)
    }

    pub fn extent(&self, axis: f64) -> (f64, f64) {
        let local: Vec<Vec2> = self.vertices.iter().map(|v| v.rotated(-axis)).collect();
        let (mut lo, mut hi) =
            (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in local {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (hi.x - lo.x, hi.y - lo.y)
    }

    /// Wall `i` runs from vertex `i` to vertex `i + 1`.
    pub fn wall(&self, i: usize) -> (Vec2, Vec2) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn wall_count(&self) -> usize {
        self.vertices.len()
    }

    /// Interior angle at each vertex, radians.
    pub fn interior_angles(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let prev = self.vertices[(i + n - 1) % n];
                let cur = self.vertices[i];
                let next = self.vertices[(i + 1) % n];
                let a = cur - prev;
                let b = next - cur;
                PI - a.cross(b).atan2(a.dot(b))
            })
            .collect()
    }

    pub fn is_manhattan(&self) -> bool {
        self.interior_angles()
            .iter()
            .all(|&a| (a - PI / 2.0).abs() <= RIGHT_ANGLE_TOL || (a - 3.0 * PI / 2.0).abs() <= RIGHT_ANGLE_TOL)
    }

    /// Checks the ring is simple, counter-clockwise and at least a triangle.
    pub fn validate(&self) -> Result<()> {
        validate_ring("room polygon", &self.vertices)
    }

    /// Rotates the vertex list so it starts at the lowest, then leftmost,
    /// vertex in the frame rotated by `-axis`.
    pub fn canonicalize(&mut self, axis: f64) {
        let local: Vec<Vec2> = self.vertices.iter().map(|v| v.rotated(-axis)).collect();
        let min_y = local.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let start = local
            .iter()
            .enumerate()
            .filter(|(_, p)| p.y <= min_y + 1e-9)
            .min_by(|a, b| a.1.x.total_cmp(&b.1.x))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.vertices.rotate_left(start);
    }
}

fn validate_ring(what: &'static str, ring: &[Vec2]) -> Result<()> {
    let n = ring.len();
    if n < 3 {
        return Err(Error::invalid(what, "fewer than 3 vertices"));
    }
    if ring.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid(what, "non-finite vertex"));
    }
    if geom::signed_area(ring) <= 0.0 {
        return Err(Error::invalid(what, "ring is not counter-clockwise"));
    }
    for i in 0..n {
        for j in i + 1..n {
            // adjacent edges share an endpoint
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]) {
                return Err(Error::invalid(what, format!("edges {i} and {j} intersect")));
            }
        }
    }
    Ok(())
}

fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o = |p: Vec2, q: Vec2, r: Vec2| (q - p).cross(r - p);
    let (d1, d2, d3, d4) = (o(c, d, a), o(c, d, b), o(a, b, c), o(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2| {
        o(p, q, r) == 0.0 && r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPolygon {
    pub vertices: Vec<Vec2>,
}

impl BoundaryPolygon {
    pub fn validate(&self) -> Result<()> {
        validate_ring("boundary polygon", &self.vertices)?;
        if !self.is_convex() {
            return Err(Error::invalid("boundary polygon", "not convex"));
        }
        Ok(())
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            (b - a).cross(c - b) > 0.0
        })
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

/// Door detection in image space plus the pixel columns of the wall's corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoorBox {
    pub u_min: f64,
    pub v_min: f64,
    pub u_max: f64,
    pub v_max: f64,
    pub u_left: f64,
    pub u_right: f64,
}

impl DoorBox {
    pub fn validate(&self) -> Result<()> {
        if !(self.u_min < self.u_max) {
            return Err(Error::invalid("door box", "u_min must be < u_max"));
        }
        if !(self.u_left < self.u_right) {
            return Err(Error::invalid("door box", "u_left must be < u_right"));
        }
        Ok(())
    }

    pub fn centroid_u(&self) -> f64 {
        (self.u_min + self.u_max) / 2.0
    }
}

/// Door symbol on a plan wall.
///
/// `ratio` is the centroid's offset along the wall as a fraction of its length,
/// measured from the wall's end vertex `i + 1`, which is the left-hand corner
/// for a viewer inside the room facing the wall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoorPlacement {
    pub room_id: String,
    pub wall: usize,
    pub ratio: f64,
    pub width: f64,
    #[serde(default)]
    pub clamped: bool,
}

impl DoorPlacement {
    pub fn validate(&self, room: &RoomPolygon) -> Result<()> {
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(Error::invalid("door placement", format!("ratio {} outside [0, 1]", self.ratio)));
        }
        if self.wall >= room.wall_count() {
            return Err(Error::invalid("door placement", format!("wall {} out of range", self.wall)));
        }
        let (a, b) = room.wall(self.wall);
        let len = a.distance(b);
        if !(self.width > 0.0 && self.width < len) {
            return Err(Error::DoorTooWide { width: self.width, wall: len });
        }
        Ok(())
    }

    /// Door centroid in plan coordinates.
    pub fn centroid(&self, room: &RoomPolygon) -> Vec2 {
        let (start, end) = room.wall(self.wall);
        end + (start - end) * self.ratio
    }

    /// Door opening endpoints on the wall.
    pub fn span(&self, room: &RoomPolygon) -> (Vec2, Vec2) {
        let (start, end) = room.wall(self.wall);
        let dir = (start - end).normalized().unwrap_or(Vec2::new(1.0, 0.0));
        let c = self.centroid(room);
        (c - dir * (self.width / 2.0), c + dir * (self.width / 2.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloorPlan {
    pub rooms: Vec<RoomPolygon>,
    pub boundary: BoundaryPolygon,
    pub doors: Vec<DoorPlacement>,
}

impl FloorPlan {
    pub fn room(&self, id: &str) -> Option<&RoomPolygon> {
        self.rooms.iter().find(|r| r.id == id)
    }
}

/// Evaluation bundle. Fields a given evaluation cannot compute stay `None`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub ssim: Option<f64>,
    /// `f64::INFINITY` for identical images.
    #[serde(with = "crate::plan_io::inf_as_string")]
    pub psnr_db: Option<f64>,
    pub pixel_error_pct: Option<f64>,
    pub corner_error_pct: Option<f64>,
    pub area_mape_pct: Option<f64>,
    pub aspect_mape_pct: Option<f64>,
}

impl MetricsReport {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.ssim {
            if !(-1.0..=1.0).contains(&s) {
                return Err(Error::invalid("metrics report", format!("ssim {s} outside [-1, 1]")));
            }
        }
        if let Some(p) = self.pixel_error_pct {
            if !(0.0..=100.0).contains(&p) {
                return Err(Error::invalid("metrics report", format!("pixel error {p} outside [0, 100]")));
            }
        }
        for m in [self.area_mape_pct, self.aspect_mape_pct, self.corner_error_pct].into_iter().flatten() {
            if m < 0.0 {
                return Err(Error::invalid("metrics report", "negative error"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn room_polygon_normalizes_to_ccw() {
        let cw = vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0), Vec2::new(1.0, 0.0)];
        let room = RoomPolygon::new("a", cw);
        assert!(geom::signed_area(&room.vertices) > 0.0);
        let again = RoomPolygon::new("a", room.vertices.clone());
        assert_eq!(again, room);
        room.validate().unwrap();
        assert!(room.is_manhattan());
    }

    #[test]
    fn self_intersecting_ring_rejected() {
        let bow = RoomPolygon {
            id: "x".into(),
            vertices: vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(2.0, 1.0)],
        };
        assert!(bow.validate().is_err());
    }

    #[test]
    fn plan_transform_group_laws() {
        let a = PlanTransform::new(0.7, 1.0, -2.0);
        let b = PlanTransform::new(-2.1, 0.3, 0.4);
        let p = Vec2::new(0.25, 3.5);
        let ab = a.compose(&b);
        assert!(ab.apply(p).distance(a.apply(b.apply(p))) < 1e-12);
        assert!(a.inverse().apply(a.apply(p)).distance(p) < 1e-12);
    }

    #[test]
    fn non_unit_quaternion_rejected() {
        let err = CapturePose::new(Quaternion::new(0.8, 0.0, 0.0, 0.0), Vec3::default()).unwrap_err();
        assert!(err.to_string().contains("non-unit quaternion"));
    }

    #[test]
    fn intrinsics_invariants() {
        let ok = CameraIntrinsics { f: 500.0, cx: 320.0, cy: 240.0, width: 640, height: 480 };
        ok.validate().unwrap();
        assert!(CameraIntrinsics { f: 0.0, ..ok }.validate().is_err());
        assert!(CameraIntrinsics { cx: 640.0, ..ok }.validate().is_err());
        assert!(SceneScale::new(0.0).is_err());
        assert!(SceneScale::new(f64::NAN).is_err());
    }

    #[test]
    fn canonical_start_is_bottom_left() {
        let mut r = RoomPolygon::new(
            "r",
            vec![Vec2::new(4.0, 3.0), Vec2::new(0.0, 3.0), Vec2::new(0.0, 0.0), Vec2::new(4.0, 0.0)],
        );
        r.canonicalize(0.0);
        assert_eq!(r.vertices[0], Vec2::new(0.0, 0.0));
        assert_eq!(r.vertices[1], Vec2::new(4.0, 0.0));
    }
}
