//! Comparison of a reconstructed plan against ground truth.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::error::{Error, Result};
use crate::geom::{self, Vec2};
use crate::metrics::{self, Raster};
use crate::synth::GroundTruth;
use crate::types::{EdgeMask, FloorPlan, Label, MetricsReport, RoomPolygon};

/// Outline raster resolution, pixels per meter.
pub const RASTER_PX_PER_M: f64 = 50.0;
const RASTER_MARGIN: f64 = 0.5;

/// Orientation of a room's longest wall, reduced to (-pi/4, pi/4].
pub fn room_axis(room: &RoomPolygon) -> f64 {
    let longest =
        (0..room.wall_count()).map(|i| room.wall(i)).max_by(|a, b| a.0.distance(a.1).total_cmp(&b.0.distance(b.1)));
    let Some((a, b)) = longest else { return 0.0 };
    let mut t = (b - a).angle().rem_euclid(FRAC_PI_2);
    if t > FRAC_PI_4 {
        t -= FRAC_PI_2;
    }
    t
}

/// Grid covering a set of rooms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub origin: Vec2,
    pub px_per_m: f64,
    pub width: u32,
    pub height: u32,
}

/// Axis-aligned bounding box of all room vertices.
pub fn bounds(rooms: &[&RoomPolygon]) -> (Vec2, Vec2) {
    let (mut lo, mut hi) = (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in rooms.iter().flat_map(|r| r.vertices.iter()) {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}

impl Grid {
    pub fn covering(rooms: &[&RoomPolygon], px_per_m: f64) -> Grid {
        let (lo, hi) = bounds(rooms);
        let origin = lo - Vec2::new(RASTER_MARGIN, RASTER_MARGIN);
        let size = hi - lo + Vec2::new(2.0 * RASTER_MARGIN, 2.0 * RASTER_MARGIN);
        Grid {
            origin,
            px_per_m,
            width: (size.x * px_per_m).ceil().max(1.0) as u32,
            height: (size.y * px_per_m).ceil().max(1.0) as u32,
        }
    }

    /// Plan position of pixel (u, v); rows grow upward in plan y.
    pub fn center(&self, u: u32, v: u32) -> Vec2 {
        self.origin + Vec2::new((u as f64 + 0.5) / self.px_per_m, (v as f64 + 0.5) / self.px_per_m)
    }
}

/// Marks pixels within one pixel of any room wall as edge.
pub fn rasterize_outlines(rooms: &[&RoomPolygon], grid: &Grid) -> EdgeMask {
    let reach = 1.0 / grid.px_per_m;
    let walls: Vec<(Vec2, Vec2)> = rooms.iter().flat_map(|r| (0..r.wall_count()).map(|i| r.wall(i))).collect();
    let mut labels = Vec::with_capacity(grid.width as usize * grid.height as usize);
    for v in 0..grid.height {
        for u in 0..grid.width {
            let c = grid.center(u, v);
            let hit = walls.iter().any(|&(a, b)| geom::point_segment_distance(c, a, b) <= reach);
            labels.push(if hit { Label::Edge } else { Label::Other });
        }
    }
    EdgeMask { width: grid.width, height: grid.height, labels }
}

/// Area and aspect MAPE, corner error and outline image metrics. Rooms are
/// matched by id; every room must appear on both sides.
pub fn evaluate(plan: &FloorPlan, gt: &GroundTruth) -> Result<MetricsReport> {
    let truth = gt.polygons();
    for r in &plan.rooms {
        if gt.room(&r.id).is_none() {
            return Err(Error::UnmatchedRoom(r.id.clone()));
        }
    }
    let mut pairs = Vec::new();
    for t in &truth {
        let est = plan.room(&t.id).ok_or_else(|| Error::UnmatchedRoom(t.id.clone()))?;
        pairs.push((est, t));
    }
    let areas: Vec<f64> = pairs.iter().map(|(e, _)| e.area()).collect();
    let gt_areas: Vec<f64> = pairs.iter().map(|(_, t)| t.area()).collect();
    let aspects: Vec<f64> = pairs.iter().map(|(e, _)| e.aspect_ratio(room_axis(e))).collect();
    let gt_aspects: Vec<f64> = pairs.iter().map(|(_, t)| t.aspect_ratio(room_axis(t))).collect();

    let truth_refs: Vec<&RoomPolygon> = truth.iter().collect();
    let grid = Grid::covering(&truth_refs, RASTER_PX_PER_M);
    // corner error is normalized by the diagonal of the floor's bounding box
    let (lo, hi) = bounds(&truth_refs);
    let diag = (hi - lo).norm();
    let corners: Vec<(Vec<Vec2>, Vec<Vec2>, f64)> = pairs
        .iter()
        .filter(|(e, t)| e.vertices.len() == t.vertices.len())
        .map(|(e, t)| (e.vertices.clone(), t.vertices.clone(), diag.max(1e-9)))
        .collect();
    let corner_error = if corners.is_empty() { None } else { Some(metrics::corner_error_dataset(&corners)?) };

    let est_refs: Vec<&RoomPolygon> = plan.rooms.iter().collect();
    let est_mask = rasterize_outlines(&est_refs, &grid);
    let gt_mask = rasterize_outlines(&truth_refs, &grid);
    let (x, y) = (Raster::from_edges(&est_mask), Raster::from_edges(&gt_mask));

    let report = MetricsReport {
        ssim: Some(metrics::ssim(&x, &y, 255.0)?),
        psnr_db: Some(metrics::psnr(&y, &x, 255.0)?),
        pixel_error_pct: Some(metrics::pixel_error(&est_mask, &gt_mask)?),
        corner_error_pct: corner_error,
        area_mape_pct: Some(metrics::mape(&areas, &gt_areas)?),
        aspect_mape_pct: Some(metrics::mape(&aspects, &gt_aspects)?),
    };
    report.validate()?;
    Ok(report)
}
