//! End-to-end reconstruction: captures to wedges, wedges to rooms, rooms to
//! an aligned floor plan with doors.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::assemble::{self, DEFAULT_SNAP_ANGLE_DEG, DEFAULT_SNAP_DIST};
use crate::backproject::{self, DEFAULT_MAX_POINTS};
use crate::doors;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::ingest::{self, CaptureKind, DatasetManifest};
use crate::regularize::{self, RegularizeConfig};
use crate::types::{FloorPlan, Label, PlanTransform, RoomPolygon, Wedge};

#[derive(Debug, Clone)]
pub struct Config {
    pub seed: u64,
    pub snap_dist: f64,
    pub snap_angle_deg: f64,
    pub max_points: usize,
    pub regularize: RegularizeConfig,
    /// Directory for per-capture debug dumps.
    pub keep_intermediates: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            snap_dist: DEFAULT_SNAP_DIST,
            snap_angle_deg: DEFAULT_SNAP_ANGLE_DEG,
            max_points: DEFAULT_MAX_POINTS,
            regularize: RegularizeConfig::default(),
            keep_intermediates: None,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.snap_dist >= 0.0 && self.snap_dist.is_finite()) {
            return Err(Error::invalid("config", "snap distance must be >= 0"));
        }
        if !(self.snap_angle_deg >= 0.0 && self.snap_angle_deg < 45.0) {
            return Err(Error::invalid("config", "snap angle must be in [0, 45) degrees"));
        }
        if self.max_points < 3 {
            return Err(Error::invalid("config", "max points must be at least 3"));
        }
        Ok(())
    }
}

/// Wedge of one corner capture, placed in the session plan.
#[derive(Debug, Clone, Serialize)]
pub struct PlacedWedge {
    pub room: String,
    pub capture: usize,
    pub pose: PlanTransform,
    pub wedge: Wedge,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub plan: FloorPlan,
    /// Manhattan axis of the floor, radians.
    pub axis: f64,
    pub wedges: Vec<PlacedWedge>,
}

/// Per-capture clustering seed derived from the run seed.
pub fn capture_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn context(manifest: &DatasetManifest, room: usize, capture: usize) -> String {
    let c = &manifest.rooms[room].captures[capture];
    format!("room {} capture {capture} ({})", manifest.rooms[room].id, c.depth.display())
}

fn dump<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    crate::plan_io::write_json(value, &dir.join(name))
}

fn process_capture(
    manifest: &DatasetManifest,
    room: usize,
    capture: usize,
    index: usize,
    cfg: &Config,
) -> Result<PlacedWedge> {
    let c = &manifest.rooms[room].captures[capture];
    let ctx = || context(manifest, room, capture);
    let depth = ingest::decode_depth(&manifest.resolve(&c.depth), &manifest.intrinsics)
        .map_err(|e| e.in_stage("ingest", ctx()))?;
    let mask = ingest::decode_edge_mask(&manifest.resolve(&c.edges)).map_err(|e| e.in_stage("ingest", ctx()))?;
    let pose = ingest::reduce_pose(&c.pose).map_err(|e| e.in_stage("ingest", ctx()))?;
    let cloud = backproject::backproject_capture(&depth, &mask, &manifest.intrinsics, manifest.scale, &ctx())
        .map_err(|e| e.in_stage("backprojection", ctx()))?;
    let local = backproject::project_to_plan(&cloud, &PlanTransform::IDENTITY, &[Label::Edge]);
    let local = backproject::decimate(local, cfg.max_points);
    let layout = regularize::regularize_capture(&local, capture_seed(cfg.seed, index), &cfg.regularize)
        .map_err(|e| e.in_stage("local regularization", ctx()))?;
    let placed = PlacedWedge {
        room: manifest.rooms[room].id.clone(),
        capture,
        pose,
        wedge: regularize::place_wedge(&layout.wedge, &pose),
    };
    if let Some(dir) = &cfg.keep_intermediates {
        let stem = format!("{}_{capture}", placed.room);
        let path = dir.join(format!("{stem}_cloud.xyz"));
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        backproject::write_xyz(&cloud, std::io::BufWriter::new(file)).map_err(|e| Error::io(&path, e))?;
        let boundary: Vec<[f64; 2]> = layout.boundary.points.iter().map(|p| [p.x, p.y]).collect();
        dump(dir, &format!("{stem}_boundary.json"), &boundary)?;
        dump(dir, &format!("{stem}_means.json"), &layout.clusters.means)?;
        dump(dir, &format!("{stem}_wedge.json"), &placed)?;
    }
    Ok(placed)
}

/// Runs the whole pipeline on a parsed manifest. Captures are processed in
/// parallel; results are independent of scheduling.
pub fn reconstruct(manifest: &DatasetManifest, cfg: &Config) -> Result<Reconstruction> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> =
        manifest.rooms.iter().enumerate().flat_map(|(ri, r)| (0..r.captures.len()).map(move |ci| (ri, ci))).collect();
    let corner_jobs: Vec<(usize, (usize, usize))> = jobs
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, (r, c))| manifest.rooms[*r].captures[*c].kind == CaptureKind::Corner)
        .collect();
    let wedges: Vec<PlacedWedge> = corner_jobs
        .par_iter()
        .map(|&(index, (room, capture))| process_capture(manifest, room, capture, index, cfg))
        .collect::<Result<Vec<_>>>()?;

    let axis = assemble::estimate_axis(&wedges.iter().map(|w| w.wedge).collect::<Vec<_>>());
    let tol = cfg.snap_angle_deg.to_radians();
    let mut rooms = Vec::new();
    for room in &manifest.rooms {
        let own: Vec<Wedge> = wedges.iter().filter(|w| w.room == room.id).map(|w| w.wedge).collect();
        let poly = assemble::assemble_room(&own, axis, &room.id)
            .and_then(|p| assemble::snap_manhattan(&p, axis, tol))
            .map_err(|e| e.in_stage("global assembly", format!("room {}", room.id)))?;
        rooms.push(poly);
    }
    let hull = assemble::boundary_hull(&rooms).map_err(|e| e.in_stage("global assembly", "boundary"))?;
    let aligned = rooms
        .iter()
        .map(|r| {
            assemble::align_to_boundary(r, &hull, cfg.snap_dist, axis, tol)
                .map_err(|e| e.in_stage("boundary alignment", format!("room {}", r.id)))
        })
        .collect::<Result<Vec<_>>>()?;
    let boundary = assemble::boundary_hull(&aligned).map_err(|e| e.in_stage("boundary alignment", "boundary"))?;

    let mut placements = Vec::new();
    for (ri, room) in manifest.rooms.iter().enumerate() {
        let poly = &aligned[ri];
        for (ci, c) in room.captures.iter().enumerate() {
            for entry in &c.doors {
                let ctx = || context(manifest, ri, ci);
                let placed = place_entry(poly, c, entry).map_err(|e| e.in_stage("doors", ctx()))?;
                placements.push(placed);
            }
        }
    }
    let plan =
        assemble::build_floorplan(aligned, boundary, placements).map_err(|e| e.in_stage("floor plan", "all rooms"))?;
    if let Some(dir) = &cfg.keep_intermediates {
        dump(dir, "axis.json", &axis)?;
    }
    Ok(Reconstruction { plan, axis, wedges })
}

fn place_entry(
    room: &RoomPolygon,
    c: &ingest::Capture,
    entry: &ingest::DoorEntry,
) -> Result<crate::types::DoorPlacement> {
    let ratio = doors::door_ratio(&entry.bbox)?;
    let wall = match entry.wall {
        Some(w) => w,
        None => {
            let pose = ingest::reduce_pose(&c.pose)?;
            let heading = pose.apply_dir(Vec2::new(0.0, 1.0));
            doors::wall_facing(room, pose.translation(), heading).ok_or(Error::DoorOutsideWall)?
        }
    };
    if wall >= room.wall_count() {
        return Err(Error::invalid("door entry", format!("room {} has no wall {wall}", room.id)));
    }
    let width = doors::width_from_box(&entry.bbox, doors::wall_length(room, wall));
    doors::place_door(ratio, room, wall, width)
}

/// Parses `manifest_path` and reconstructs it.
pub fn reconstruct_path(manifest_path: &Path, cfg: &Config) -> Result<Reconstruction> {
    let manifest = ingest::parse_manifest(manifest_path)?;
    reconstruct(&manifest, cfg)
}
