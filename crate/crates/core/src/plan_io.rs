//! Plan files: JSON mirroring [`FloorPlan`], coordinates in meters with six
//! decimals, so that outputs diff cleanly and compare byte for byte.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::types::{BoundaryPolygon, DoorPlacement, FloorPlan, RoomPolygon};

pub const PLAN_VERSION: u32 = 1;

/// Number printed with exactly six decimals.
struct Fixed(f64);

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite coordinate"));
        }
        let mut text = format!("{:.6}", self.0);
        if text == "-0.000000" {
            text.remove(0);
        }
        RawValue::from_string(text).map_err(serde::ser::Error::custom)?.serialize(s)
    }
}

fn point(p: Vec2) -> [Fixed; 2] {
    [Fixed(p.x), Fixed(p.y)]
}

#[derive(Serialize)]
struct RoomOut<'a> {
    id: &'a str,
    vertices: Vec<[Fixed; 2]>,
}

#[derive(Serialize)]
struct DoorOut<'a> {
    room: &'a str,
    wall: usize,
    ratio: Fixed,
    width: Fixed,
    clamped: bool,
}

#[derive(Serialize)]
struct PlanOut<'a> {
    version: u32,
    rooms: Vec<RoomOut<'a>>,
    boundary: Vec<[Fixed; 2]>,
    doors: Vec<DoorOut<'a>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RoomIn {
    id: String,
    vertices: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DoorIn {
    room: String,
    wall: usize,
    ratio: f64,
    width: f64,
    #[serde(default)]
    clamped: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanIn {
    version: u32,
    rooms: Vec<RoomIn>,
    boundary: Vec<[f64; 2]>,
    #[serde(default)]
    doors: Vec<DoorIn>,
}

pub fn plan_to_string(plan: &FloorPlan) -> Result<String> {
    let doc = PlanOut {
        version: PLAN_VERSION,
        rooms: plan
            .rooms
            .iter()
            .map(|r| RoomOut { id: &r.id, vertices: r.vertices.iter().copied().map(point).collect() })
            .collect(),
        boundary: plan.boundary.vertices.iter().copied().map(point).collect(),
        doors: plan
            .doors
            .iter()
            .map(|d| DoorOut {
                room: &d.room_id,
                wall: d.wall,
                ratio: Fixed(d.ratio),
                width: Fixed(d.width),
                clamped: d.clamped,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::invalid("plan", e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn plan_from_str(text: &str, origin: &Path) -> Result<FloorPlan> {
    let malformed = |message: String| Error::Malformed { path: origin.to_path_buf(), message };
    let doc: PlanIn = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    if doc.version != PLAN_VERSION {
        return Err(malformed(format!("unsupported plan version {}", doc.version)));
    }
    let to_vec = |v: &[[f64; 2]]| v.iter().map(|p| Vec2::new(p[0], p[1])).collect::<Vec<_>>();
    let rooms: Vec<RoomPolygon> =
        doc.rooms.iter().map(|r| RoomPolygon { id: r.id.clone(), vertices: to_vec(&r.vertices) }).collect();
    for r in &rooms {
        r.validate()?;
    }
    let boundary = BoundaryPolygon { vertices: to_vec(&doc.boundary) };
    boundary.validate()?;
    let doors: Vec<DoorPlacement> = doc
        .doors
        .into_iter()
        .map(|d| DoorPlacement { room_id: d.room, wall: d.wall, ratio: d.ratio, width: d.width, clamped: d.clamped })
        .collect();
    for d in &doors {
        let room = rooms.iter().find(|r| r.id == d.room_id).ok_or_else(|| Error::UnmatchedRoom(d.room_id.clone()))?;
        d.validate(room)?;
    }
    Ok(FloorPlan { rooms, boundary, doors })
}

pub fn write_plan(plan: &FloorPlan, path: &Path) -> Result<()> {
    fs::write(path, plan_to_string(plan)?).map_err(|e| Error::io(path, e))
}

pub fn read_plan(path: &Path) -> Result<FloorPlan> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    plan_from_str(&text, path)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed { path: path.to_path_buf(), message: e.to_string() })
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::invalid("document", e.to_string()))?;
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// `Option<f64>` where infinities are written as the strings `"inf"` / `"-inf"`.
pub mod inf_as_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) if *x == f64::INFINITY => s.serialize_str("inf"),
            Some(x) if *x == f64::NEG_INFINITY => s.serialize_str("-inf"),
            Some(x) => s.serialize_f64(*x),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Num(x)) => Ok(Some(x)),
            Some(Repr::Text(t)) => match t.as_str() {
                "inf" => Ok(Some(f64::INFINITY)),
                "-inf" => Ok(Some(f64::NEG_INFINITY)),
                _ => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
            },
        }
    }
}
