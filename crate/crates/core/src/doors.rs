//! Door boxes from image space onto plan walls.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::types::{DoorBox, DoorPlacement, RoomPolygon};

/// Symbol width when the box gives none.
pub const DEFAULT_DOOR_WIDTH: f64 = 0.9;

/// Fraction of the wall's image span, from the left corner to the box centroid.
pub fn door_ratio(b: &DoorBox) -> Result<f64> {
    b.validate()?;
    let c = b.centroid_u();
    if !(b.u_left < c && c < b.u_right) {
        return Err(Error::DoorOutsideWall);
    }
    Ok((c - b.u_left) / (b.u_right - b.u_left))
}

/// Door width on a plan wall of length `wall_len`, from the box's share of
/// the wall's image span. Falls back to [`DEFAULT_DOOR_WIDTH`].
pub fn width_from_box(b: &DoorBox, wall_len: f64) -> f64 {
    let span = b.u_right - b.u_left;
    let w = wall_len * (b.u_max - b.u_min) / span;
    if w.is_finite() && w > 0.0 && w < wall_len {
        w
    } else {
        DEFAULT_DOOR_WIDTH
    }
}

/// Length of wall `wall` of `room`.
pub fn wall_length(room: &RoomPolygon, wall: usize) -> f64 {
    let (a, b) = room.wall(wall);
    a.distance(b)
}

/// Places a door of `width` at `ratio * L` from the wall's left corner.
/// A door that would overrun a corner is shifted back onto the wall and
/// flagged `clamped`.
pub fn place_door(ratio: f64, room: &RoomPolygon, wall: usize, width: f64) -> Result<DoorPlacement> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::DoorOutsideWall);
    }
    if wall >= room.wall_count() {
        return Err(Error::invalid("door placement", format!("room {} has no wall {wall}", room.id)));
    }
    let len = wall_length(room, wall);
    if !(width > 0.0 && width < len) {
        return Err(Error::DoorTooWide { width, wall: len });
    }
    let half = width / 2.0;
    let offset = ratio * len;
    let fitted = offset.clamp(half, len - half);
    let clamped = fitted != offset;
    Ok(DoorPlacement {
        room_id: room.id.clone(),
        wall,
        ratio: if clamped { fitted / len } else { ratio },
        width,
        clamped,
    })
}

/// Distance of the door centroid from the wall's left corner.
pub fn door_offset(d: &DoorPlacement, room: &RoomPolygon) -> f64 {
    d.ratio * wall_length(room, d.wall)
}

/// First wall hit by the ray from `origin` along `heading`.
pub fn wall_facing(room: &RoomPolygon, origin: Vec2, heading: Vec2) -> Option<usize> {
    (0..room.wall_count())
        .filter_map(|i| {
            let (a, b) = room.wall(i);
            let e = b - a;
            let denom = heading.cross(e);
            if denom.abs() < 1e-15 {
                return None;
            }
            let t = (a - origin).cross(e) / denom;
            let s = (a - origin).cross(heading) / denom;
            (t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s)).then_some((t, i))
        })
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .map(|(_, i)| i)
}

/// Hinge point, opening direction along the wall and inward normal for the
/// door symbol. The hinge is the opening end nearer the wall's end vertex.
pub fn door_frame(d: &DoorPlacement, room: &RoomPolygon) -> (Vec2, Vec2, Vec2) {
    let (hinge_side, far) = d.span(room);
    let along = (far - hinge_side).normalized().unwrap_or(Vec2::new(1.0, 0.0));
    let (a, b) = room.wall(d.wall);
    let inward = (b - a).normalized().map(Vec2::perp).unwrap_or(Vec2::new(0.0, 1.0));
    (hinge_side, along, inward)
}
