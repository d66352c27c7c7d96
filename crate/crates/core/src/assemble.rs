//! Global stage: rooms from placed wedges, Manhattan snapping, the convex
//! boundary, ray-cast containment and alignment of rooms to the boundary.

use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::geom::{self, Vec2};
use crate::types::{BoundaryPolygon, DoorPlacement, FloorPlan, RoomPolygon, Wedge};

pub const DEFAULT_SNAP_DIST: f64 = 0.3;
pub const DEFAULT_SNAP_ANGLE_DEG: f64 = 5.0;
/// Largest spread of wall offsets merged into one wall.
pub const MAX_GROUP_SPREAD: f64 = 0.5;
/// Points this close to a boundary edge count as inside.
pub const EDGE_EPS: f64 = 1e-9;
/// Tolerated pairwise room overlap, m^2.
pub const OVERLAP_TOL: f64 = 1e-6;

/// Dominant Manhattan orientation of a set of wedges, in (-pi/4, pi/4].
///
/// Directions are averaged on the circle after multiplying angles by four,
/// which identifies the four axis directions.
pub fn estimate_axis(wedges: &[Wedge]) -> f64 {
    let (mut c, mut s) = (0.0, 0.0);
    for w in wedges {
        for d in [w.dir1, w.dir2] {
            let a = 4.0 * d.angle();
            c += a.cos();
            s += a.sin();
        }
    }
    if c == 0.0 && s == 0.0 {
        return 0.0;
    }
    let axis = s.atan2(c) / 4.0;
    if axis <= -FRAC_PI_4 {
        axis + std::f64::consts::FRAC_PI_2
    } else {
        axis
    }
}

fn split_two(mut offsets: Vec<f64>) -> Result<(f64, f64)> {
    offsets.sort_by(f64::total_cmp);
    let gap = (0..offsets.len() - 1)
        .max_by(|&a, &b| (offsets[a + 1] - offsets[a]).total_cmp(&(offsets[b + 1] - offsets[b])))
        .unwrap_or(0);
    let (lo, hi) = offsets.split_at(gap + 1);
    let mean = |g: &[f64]| g.iter().sum::<f64>() / g.len() as f64;
    for g in [lo, hi] {
        let spread = g[g.len() - 1] - g[0];
        if spread > MAX_GROUP_SPREAD {
            return Err(Error::InconsistentCaptures { spread });
        }
    }
    Ok((mean(lo), mean(hi)))
}

/// Rectangle bounded by the wedges' wall lines.
///
/// Each wedge contributes two lines through its apex. In the frame aligned
/// with `axis`, lines are split into horizontal and vertical families; each
/// family is split into two walls at its largest offset gap and every wall
/// takes the mean offset of its lines.
pub fn assemble_room(wedges: &[Wedge], axis: f64, id: &str) -> Result<RoomPolygon> {
    if wedges.len() < 4 {
        return Err(Error::InsufficientWalls);
    }
    let (mut horizontal, mut vertical) = (Vec::new(), Vec::new());
    for w in wedges {
        let apex = w.apex.rotated(-axis);
        for d in [w.dir1, w.dir2] {
            let d = d.rotated(-axis);
            if d.x.abs() >= d.y.abs() {
                horizontal.push(apex.y);
            } else {
                vertical.push(apex.x);
            }
        }
    }
    if horizontal.len() < 2 || vertical.len() < 2 {
        return Err(Error::InsufficientWalls);
    }
    let (y0, y1) = split_two(horizontal)?;
    let (x0, x1) = split_two(vertical)?;
    if x1 - x0 < 1e-6 || y1 - y0 < 1e-6 {
        return Err(Error::DegenerateRoom);
    }
    let ring =
        [Vec2::new(x0, y0), Vec2::new(x1, y0), Vec2::new(x1, y1), Vec2::new(x0, y1)].map(|p| p.rotated(axis)).to_vec();
    let mut room = RoomPolygon::new(id, ring);
    room.canonicalize(axis);
    Ok(room)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Orientation {
    Horizontal,
    Vertical,
}

fn orientation(d: Vec2) -> Orientation {
    if d.x.abs() >= d.y.abs() {
        Orientation::Horizontal
    } else {
        Orientation::Vertical
    }
}

/// Signed turn from edge `a` to edge `b`.
fn turn(a: Vec2, b: Vec2) -> f64 {
    a.cross(b).atan2(a.dot(b))
}

fn already_manhattan(local: &[Vec2]) -> bool {
    const ALIGN_TOL: f64 = 1e-9;
    let n = local.len();
    if n < 4 {
        return false;
    }
    let mut prev = None;
    for i in 0..=n {
        let d = local[(i + 1) % n] - local[i % n];
        let len = d.norm();
        if len == 0.0 {
            return false;
        }
        let o = orientation(d);
        let off = match o {
            Orientation::Horizontal => d.y.abs(),
            Orientation::Vertical => d.x.abs(),
        };
        if off > ALIGN_TOL * len || prev == Some(o) {
            return false;
        }
        prev = Some(o);
    }
    true
}

fn drop_near_collinear(mut ring: Vec<Vec2>, tol: f64) -> Vec<Vec2> {
    ring.dedup();
    while ring.len() > 1 && ring[0] == ring[ring.len() - 1] {
        ring.pop();
    }
    loop {
        let n = ring.len();
        if n < 3 {
            return ring;
        }
        let flat = (0..n).find(|&i| {
            let prev = ring[(i + n - 1) % n];
            let next = ring[(i + 1) % n];
            turn(ring[i] - prev, next - ring[i]).abs() <= tol
        });
        match flat {
            Some(i) => {
                ring.remove(i);
            }
            None => return ring,
        }
    }
}

/// One snapping pass on a ring in the axis-aligned frame. Returns the new
/// ring or `None` when fewer than four walls survive.
fn snap_local(ring: &[Vec2]) -> Option<Vec<Vec2>> {
    let n = ring.len();
    if n < 3 {
        return None;
    }
    let edges: Vec<(Orientation, f64, f64)> = (0..n)
        .map(|i| {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            let o = orientation(b - a);
            let mid = (a + b) * 0.5;
            let offset = match o {
                Orientation::Horizontal => mid.y,
                Orientation::Vertical => mid.x,
            };
            (o, offset, a.distance(b))
        })
        .collect();
    // start at an orientation change so runs do not wrap
    let start = (0..n).find(|&i| edges[i].0 != edges[(i + n - 1) % n].0)?;
    let mut runs: Vec<(Orientation, f64, f64)> = Vec::new();
    for k in 0..n {
        let (o, off, len) = edges[(start + k) % n];
        match runs.last_mut() {
            Some(r) if r.0 == o => {
                r.1 += off * len;
                r.2 += len;
            }
            _ => runs.push((o, off * len, len)),
        }
    }
    if runs.len() < 4 {
        return None;
    }
    let lines: Vec<(Orientation, f64)> = runs.iter().map(|&(o, s, l)| (o, s / l)).collect();
    let m = lines.len();
    let out = (0..m)
        .map(|k| {
            let (o1, c1) = lines[(k + m - 1) % m];
            let (_, c2) = lines[k];
            match o1 {
                Orientation::Horizontal => Vec2::new(c2, c1),
                Orientation::Vertical => Vec2::new(c1, c2),
            }
        })
        .collect();
    Some(out)
}

/// Snaps every wall to the nearest of `axis` / `axis + 90 deg`.
///
/// Vertices whose turn is within `angle_tol` of straight are dropped first.
/// Consecutive walls snapping to the same direction are merged into one
/// collinear wall whose offset is the length-weighted mean of their
/// midpoints; the remaining walls alternate direction and the corners are
/// their intersections. Already-Manhattan input is returned unchanged.
pub fn snap_manhattan(poly: &RoomPolygon, axis: f64, angle_tol: f64) -> Result<RoomPolygon> {
    let local: Vec<Vec2> = poly.vertices.iter().map(|v| v.rotated(-axis)).collect();
    if already_manhattan(&local) && geom::signed_area(&local) > 0.0 {
        return Ok(poly.clone());
    }
    let mut ring = drop_near_collinear(local, angle_tol);
    for _ in 0..8 {
        ring = snap_local(&ring).ok_or(Error::DegenerateRoom)?;
        let before = ring.len();
        ring = drop_near_collinear(ring, 0.0);
        if ring.len() == before {
            break;
        }
    }
    if ring.len() < 4 || !already_manhattan(&ring) {
        return Err(Error::DegenerateRoom);
    }
    let mut room = RoomPolygon::new(poly.id.clone(), ring.iter().map(|p| p.rotated(axis)).collect());
    room.canonicalize(axis);
    room.validate().map_err(|_| Error::DegenerateRoom)?;
    Ok(room)
}

/// Convex hull of all room vertices.
pub fn boundary_hull(rooms: &[RoomPolygon]) -> Result<BoundaryPolygon> {
    let all: Vec<Vec2> = rooms.iter().flat_map(|r| r.vertices.iter().copied()).collect();
    let hull = geom::convex_hull(&all);
    if hull.len() < 3 {
        return Err(Error::DegenerateRoom);
    }
    Ok(BoundaryPolygon { vertices: hull })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Outside,
}

/// Ray-cast parity test along +x. An edge counts iff exactly one endpoint
/// lies strictly above the ray; points within [`EDGE_EPS`] of an edge are
/// inside.
pub fn point_in_boundary(p: Vec2, b: &BoundaryPolygon) -> Containment {
    if b.edges().any(|(a, c)| geom::point_segment_distance(p, a, c) <= EDGE_EPS) {
        return Containment::Inside;
    }
    let mut crossings = 0usize;
    for (a, c) in b.edges() {
        if (a.y > p.y) != (c.y > p.y) {
            let x = a.x + (p.y - a.y) * (c.x - a.x) / (c.y - a.y);
            if p.x < x {
                crossings += 1;
            }
        }
    }
    if crossings % 2 == 1 {
        Containment::Inside
    } else {
        Containment::Outside
    }
}

/// Distance from `p` to the boundary ring.
pub fn distance_to_boundary(p: Vec2, b: &BoundaryPolygon) -> f64 {
    b.edges().map(|(a, c)| geom::point_segment_distance(p, a, c)).fold(f64::INFINITY, f64::min)
}

/// Moves every inside vertex lying within `snap_dist` of the boundary to its
/// perpendicular foot on the nearest boundary edge (clamped to the edge).
pub fn project_to_boundary(room: &RoomPolygon, b: &BoundaryPolygon, snap_dist: f64) -> RoomPolygon {
    let vertices = room
        .vertices
        .iter()
        .map(|&v| {
            if point_in_boundary(v, b) == Containment::Outside {
                return v;
            }
            let nearest = b
                .edges()
                .map(|(a, c)| (geom::point_segment_distance(v, a, c), a, c))
                .min_by(|x, y| x.0.total_cmp(&y.0));
            match nearest {
                Some((d, a, c)) if d <= snap_dist && d > 0.0 => geom::closest_on_segment(v, a, c),
                _ => v,
            }
        })
        .collect();
    RoomPolygon { id: room.id.clone(), vertices }
}

/// Boundary alignment followed by Manhattan re-snapping.
pub fn align_to_boundary(
    room: &RoomPolygon,
    b: &BoundaryPolygon,
    snap_dist: f64,
    axis: f64,
    angle_tol: f64,
) -> Result<RoomPolygon> {
    snap_manhattan(&project_to_boundary(room, b, snap_dist), axis, angle_tol)
}

/// Validates and bundles the final plan. Rooms are sorted by id.
pub fn build_floorplan(
    mut rooms: Vec<RoomPolygon>,
    boundary: BoundaryPolygon,
    doors: Vec<DoorPlacement>,
) -> Result<FloorPlan> {
    boundary.validate()?;
    rooms.sort_by(|a, b| a.id.cmp(&b.id));
    for r in &rooms {
        r.validate()?;
        for &v in &r.vertices {
            if point_in_boundary(v, &boundary) == Containment::Outside && distance_to_boundary(v, &boundary) > 1e-6 {
                return Err(Error::invalid("floor plan", format!("room {} has a vertex outside the boundary", r.id)));
            }
        }
    }
    for i in 0..rooms.len() {
        if i + 1 < rooms.len() && rooms[i].id == rooms[i + 1].id {
            return Err(Error::invalid("floor plan", format!("duplicate room id {}", rooms[i].id)));
        }
        for j in i + 1..rooms.len() {
            let overlap = geom::intersection_area(&rooms[i].vertices, &rooms[j].vertices);
            if overlap > OVERLAP_TOL {
                return Err(Error::OverlappingRooms(rooms[i].id.clone(), rooms[j].id.clone(), overlap));
            }
        }
    }
    for d in &doors {
        let room = rooms.iter().find(|r| r.id == d.room_id).ok_or_else(|| Error::UnmatchedRoom(d.room_id.clone()))?;
        d.validate(room)?;
    }
    Ok(FloorPlan { rooms, boundary, doors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn rect(id: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> RoomPolygon {
        RoomPolygon::new(id, vec![v(x0, y0), v(x1, y0), v(x1, y1), v(x0, y1)])
    }

    /// Exact wedges at the four corners of a rectangle, as a CCW walk.
    fn rect_wedges(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Wedge> {
        let c = [v(x0, y0), v(x1, y0), v(x1, y1), v(x0, y1)];
        (0..4)
            .map(|i| {
                let prev = c[(i + 3) % 4];
                let next = c[(i + 1) % 4];
                Wedge {
                    apex: c[i],
                    dir1: (c[i] - prev).normalized().unwrap(),
                    dir2: (next - c[i]).normalized().unwrap(),
                    len1: c[i].distance(prev) / 2.0,
                    len2: c[i].distance(next) / 2.0,
                }
            })
            .collect()
    }

    #[test]
    fn exact_wedges_give_the_square() {
        let room = assemble_room(&rect_wedges(0.0, 0.0, 1.0, 1.0), 0.0, "u").unwrap();
        assert_eq!(room.vertices, rect("u", 0.0, 0.0, 1.0, 1.0).vertices);
        assert!((room.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_wedges_are_insufficient() {
        let w = rect_wedges(0.0, 0.0, 1.0, 1.0);
        assert!(matches!(assemble_room(&w[..3], 0.0, "u"), Err(Error::InsufficientWalls)));
    }

    #[test]
    fn scattered_captures_are_inconsistent() {
        let mut w = rect_wedges(0.0, 0.0, 4.0, 3.0);
        w[0].apex = w[0].apex + v(0.0, -0.8);
        assert!(matches!(assemble_room(&w, 0.0, "u"), Err(Error::InconsistentCaptures { .. })));
    }

    #[test]
    fn rotated_axis_assembly() {
        let axis = 0.3;
        let w: Vec<Wedge> = rect_wedges(1.0, 2.0, 5.0, 5.0)
            .iter()
            .map(|w| Wedge { apex: w.apex.rotated(axis), dir1: w.dir1.rotated(axis), dir2: w.dir2.rotated(axis), ..*w })
            .collect();
        assert!((estimate_axis(&w) - axis).abs() < 1e-12);
        let room = assemble_room(&w, axis, "r").unwrap();
        assert!((room.area() - 12.0).abs() < 1e-9);
        assert!(room.vertices[0].distance(v(1.0, 2.0).rotated(axis)) < 1e-12);
    }

    #[test]
    fn axis_estimate_range() {
        for deg in [-44.0, -10.0, 0.0, 30.0, 45.0] {
            let a = f64::to_radians(deg);
            let w: Vec<Wedge> = rect_wedges(0.0, 0.0, 2.0, 2.0)
                .iter()
                .map(|w| Wedge { dir1: w.dir1.rotated(a), dir2: w.dir2.rotated(a), ..*w })
                .collect();
            let got = estimate_axis(&w);
            assert!(got > -FRAC_PI_4 && got <= FRAC_PI_4 + 1e-12);
            assert!((got - a).abs() < 1e-9, "{deg}: {got}");
        }
    }

    #[test]
    fn two_degree_rotation_snaps_to_axis() {
        let base = rect("r", -2.0, -1.5, 2.0, 1.5);
        let rotated = RoomPolygon::new("r", base.vertices.iter().map(|p| p.rotated(2f64.to_radians())).collect());
        let snapped = snap_manhattan(&rotated, 0.0, 5f64.to_radians()).unwrap();
        assert!(snapped.is_manhattan());
        assert_eq!(snapped.vertices.len(), 4);
        for w in 0..4 {
            let (a, b) = snapped.wall(w);
            assert!((a.x - b.x).abs() < 1e-12 || (a.y - b.y).abs() < 1e-12);
        }
        assert!((snapped.area() - 12.0).abs() / 12.0 < 0.005);
    }

    #[test]
    fn manhattan_polygon_is_a_fixed_point() {
        let r = rect("r", 0.0, 0.0, 4.0, 3.0);
        assert_eq!(snap_manhattan(&r, 0.0, 0.1).unwrap(), r);
        let l =
            RoomPolygon::new("l", vec![v(0.0, 0.0), v(2.0, 0.0), v(2.0, 1.0), v(1.0, 1.0), v(1.0, 2.0), v(0.0, 2.0)]);
        assert_eq!(snap_manhattan(&l, 0.0, 0.1).unwrap(), l);
    }

    #[test]
    fn shallow_vertex_is_merged() {
        // interior angle 170 degrees at the middle of the bottom wall
        let dip = 2.0 * 5f64.to_radians().tan();
        let p = RoomPolygon::new("p", vec![v(0.0, 0.0), v(2.0, -dip), v(4.0, 0.0), v(4.0, 3.0), v(0.0, 3.0)]);
        let angles = p.interior_angles();
        assert!((angles[1].to_degrees() - 170.0).abs() < 1e-9);
        let s = snap_manhattan(&p, 0.0, 5f64.to_radians()).unwrap();
        assert_eq!(s.vertices.len(), 4);
        assert!(s.is_manhattan());
    }

    #[test]
    fn collapse_is_degenerate() {
        let tri = RoomPolygon::new("t", vec![v(0.0, 0.0), v(1.0, 0.0), v(0.0, 1.0)]);
        assert!(matches!(snap_manhattan(&tri, 0.0, 0.08), Err(Error::DegenerateRoom)));
    }

    #[test]
    fn hull_examples() {
        let one = rect("a", 0.0, 0.0, 4.0, 3.0);
        assert_eq!(boundary_hull(std::slice::from_ref(&one)).unwrap().vertices.len(), 4);
        let two = [rect("a", 0.0, 0.0, 1.0, 1.0), rect("b", 1.0, 0.0, 2.0, 1.0)];
        let h = boundary_hull(&two).unwrap();
        assert_eq!(h.vertices, vec![v(0.0, 0.0), v(2.0, 0.0), v(2.0, 1.0), v(0.0, 1.0)]);
        // L of three unit rooms: the notch corner (1,1)-(2,1)-(1,2) is cut by the hypotenuse
        let l = [rect("a", 0.0, 0.0, 1.0, 1.0), rect("b", 1.0, 0.0, 2.0, 1.0), rect("c", 0.0, 1.0, 1.0, 2.0)];
        let h = boundary_hull(&l).unwrap();
        assert!(h.vertices.contains(&v(2.0, 1.0)) && h.vertices.contains(&v(1.0, 2.0)));
        assert_eq!(h.vertices.len(), 5);
        assert!((geom::signed_area(&h.vertices) - 3.5).abs() < 1e-12);
        h.validate().unwrap();
    }

    #[test]
    fn containment_examples() {
        let sq = BoundaryPolygon { vertices: vec![v(0.0, 0.0), v(2.0, 0.0), v(2.0, 2.0), v(0.0, 2.0)] };
        assert_eq!(point_in_boundary(v(1.0, 1.0), &sq), Containment::Inside);
        assert_eq!(point_in_boundary(v(3.0, 1.0), &sq), Containment::Outside);
        assert_eq!(point_in_boundary(v(2.0, 1.0), &sq), Containment::Inside);
        assert_eq!(point_in_boundary(v(0.0, 0.0), &sq), Containment::Inside);
        // ray through a vertex
        let diamond = BoundaryPolygon { vertices: vec![v(0.0, -1.0), v(1.0, 0.0), v(0.0, 1.0), v(-1.0, 0.0)] };
        assert_eq!(point_in_boundary(v(-2.0, 0.0), &diamond), Containment::Outside);
        assert_eq!(point_in_boundary(v(-0.5, 0.0), &diamond), Containment::Inside);
    }

    /// Alg. 3 route: foot of the perpendicular from slopes, `m1 * m2 = -1`.
    fn slope_foot(p: Vec2, c: Vec2, f: Vec2) -> Vec2 {
        let m = (c.y - f.y) / (c.x - f.x);
        let x = (m * (p.y - c.y) + m * m * c.x + p.x) / (m * m + 1.0);
        v(x, c.y + m * (x - c.x))
    }

    #[test]
    fn projection_matches_slope_condition() {
        let b = BoundaryPolygon { vertices: vec![v(0.0, 0.0), v(6.0, 1.0), v(5.0, 5.0), v(-1.0, 4.0)] };
        let room = RoomPolygon { id: "r".into(), vertices: vec![v(5.5, 2.0), v(2.0, 0.5), v(2.0, 2.0)] };
        let out = project_to_boundary(&room, &b, 0.5);
        // (5.5, 2) is 0.49 m from edge (6,1)-(5,5); (2, 0.5) is near the bottom edge
        assert!(out.vertices[0].distance(slope_foot(v(5.5, 2.0), v(6.0, 1.0), v(5.0, 5.0))) < 1e-12);
        assert!(out.vertices[1].distance(slope_foot(v(2.0, 0.5), v(0.0, 0.0), v(6.0, 1.0))) < 1e-12);
        assert_eq!(out.vertices[2], v(2.0, 2.0));
        for p in &out.vertices[..2] {
            assert!(distance_to_boundary(*p, &b) < 1e-9);
        }
    }

    #[test]
    fn vertical_boundary_projection() {
        let b = BoundaryPolygon { vertices: vec![v(0.0, 0.0), v(5.0, 0.0), v(5.0, 4.0), v(0.0, 4.0)] };
        let room = RoomPolygon { id: "r".into(), vertices: vec![v(4.6, 2.0), v(5.0, 1.0), v(4.0, 2.0)] };
        let near = project_to_boundary(&room, &b, 0.5);
        assert_eq!(near.vertices[0], v(5.0, 2.0));
        assert_eq!(near.vertices[1], v(5.0, 1.0));
        assert_eq!(near.vertices[2], v(4.0, 2.0));
        let far = project_to_boundary(&room, &b, 0.3);
        assert_eq!(far.vertices[2], v(4.0, 2.0));
    }

    #[test]
    fn floorplan_rejects_overlap() {
        let a = rect("a", 0.0, 0.0, 2.0, 2.0);
        let b = rect("b", 1.0, 0.0, 3.0, 2.0);
        let hull = boundary_hull(&[a.clone(), b.clone()]).unwrap();
        let err = build_floorplan(vec![a.clone(), b], hull, vec![]).unwrap_err();
        assert!(matches!(err, Error::OverlappingRooms(ref x, ref y, _) if x == "a" && y == "b"));

        let c = rect("c", 2.0, 0.0, 3.0, 2.0);
        let hull = boundary_hull(&[a.clone(), c.clone()]).unwrap();
        let plan = build_floorplan(vec![c, a], hull, vec![]).unwrap();
        assert_eq!(plan.rooms[0].id, "a");
    }

    #[test]
    fn single_room_plan_uses_its_own_hull() {
        let a = rect("a", 0.0, 0.0, 4.0, 3.0);
        let hull = boundary_hull(std::slice::from_ref(&a)).unwrap();
        let plan = build_floorplan(vec![a.clone()], hull, vec![]).unwrap();
        assert_eq!(plan.boundary.vertices, a.vertices);
        let _ = FRAC_PI_2;
    }
}
