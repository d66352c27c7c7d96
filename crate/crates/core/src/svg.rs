//! SVG rendering of a floor plan.

use std::fmt::Write;

use crate::doors::door_frame;
use crate::geom::Vec2;
use crate::types::FloorPlan;

const PX_PER_M: f64 = 100.0;
const MARGIN_M: f64 = 1.0;

fn escape(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            '&' => "&amp;".to_string(),
            '<' => "&lt;".to_string(),
            '>' => "&gt;".to_string(),
            '"' => "&quot;".to_string(),
            '\'' => "&apos;".to_string(),
            c => c.to_string(),
        })
        .collect()
}

struct View {
    min: Vec2,
    max: Vec2,
}

impl View {
    /// Plan meters to SVG pixels, y flipped.
    fn px(&self, p: Vec2) -> (f64, f64) {
        ((p.x - self.min.x) * PX_PER_M, (self.max.y - p.y) * PX_PER_M)
    }

    fn pt(&self, p: Vec2) -> String {
        let (x, y) = self.px(p);
        format!("{x:.2},{y:.2}")
    }
}

/// Rooms as `polygon.room`, the boundary as a dashed path, each door as a
/// `g.door` holding a swing arc and a tick perpendicular to the wall, a 1 m
/// grid and a 1 m scale bar.
pub fn render_svg(plan: &FloorPlan) -> String {
    let all = plan.rooms.iter().flat_map(|r| r.vertices.iter()).chain(plan.boundary.vertices.iter());
    let (mut lo, mut hi) = (Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0));
    let mut first = true;
    for p in all {
        if first {
            (lo, hi) = (*p, *p);
            first = false;
        }
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let view = View {
        min: Vec2::new((lo.x - MARGIN_M).floor(), (lo.y - MARGIN_M).floor()),
        max: Vec2::new((hi.x + MARGIN_M).ceil(), (hi.y + MARGIN_M).ceil()),
    };
    let (w, h) = ((view.max.x - view.min.x) * PX_PER_M, (view.max.y - view.min.y) * PX_PER_M);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(
        s,
        "<style>.grid line{{stroke:#ddd;stroke-width:1}} .room{{fill:#f4f0e6;stroke:#222;stroke-width:3}} \
         .boundary{{fill:none;stroke:#c33;stroke-width:1.5;stroke-dasharray:6 4}} \
         .door path{{fill:none;stroke:#06c;stroke-width:1.5}} .door line{{stroke:#06c;stroke-width:3}} \
         .label{{font:14px sans-serif;text-anchor:middle}}</style>"
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let _ = writeln!(s, r#"<g class="grid">"#);
    let mut x = view.min.x;
    while x <= view.max.x + 1e-9 {
        let (px, _) = view.px(Vec2::new(x, 0.0));
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="0" x2="{px:.2}" y2="{h:.2}"/>"#);
        x += 1.0;
    }
    let mut y = view.min.y;
    while y <= view.max.y + 1e-9 {
        let (_, py) = view.px(Vec2::new(0.0, y));
        let _ = writeln!(s, r#"<line x1="0" y1="{py:.2}" x2="{w:.2}" y2="{py:.2}"/>"#);
        y += 1.0;
    }
    let _ = writeln!(s, "</g>");

    for r in &plan.rooms {
        let pts: Vec<String> = r.vertices.iter().map(|&p| view.pt(p)).collect();
        let _ = writeln!(s, r#"<polygon class="room" data-id="{}" points="{}"/>"#, escape(&r.id), pts.join(" "));
        let c = r.vertices.iter().fold(Vec2::ZERO, |a, &b| a + b) * (1.0 / r.vertices.len().max(1) as f64);
        let (cx, cy) = view.px(c);
        let _ =
            writeln!(s, r#"<text class="label" x="{cx:.2}" y="{cy:.2}">{} ({:.2} m²)</text>"#, escape(&r.id), r.area());
    }

    if !plan.boundary.vertices.is_empty() {
        let mut d = String::new();
        for (i, &p) in plan.boundary.vertices.iter().enumerate() {
            let _ = write!(d, "{}{} ", if i == 0 { "M" } else { "L" }, view.pt(p));
        }
        d.push('Z');
        let _ = writeln!(s, r#"<path class="boundary" d="{d}"/>"#);
    }

    for door in &plan.doors {
        let Some(room) = plan.room(&door.room_id) else { continue };
        let (hinge, along, inward) = door_frame(door, room);
        let leaf_end = hinge + along * door.width;
        let swung = hinge + inward * door.width;
        let r = door.width * PX_PER_M;
        let (hx, hy) = view.px(hinge);
        let (sx, sy) = view.px(swung);
        let (ex, ey) = view.px(leaf_end);
        let centroid = hinge + along * (door.width / 2.0);
        let (t0x, t0y) = view.px(centroid);
        let (t1x, t1y) = view.px(centroid + inward * 0.15);
        // y is flipped on screen, so a clockwise plan turn is a positive sweep
        let sweep = if along.cross(inward) > 0.0 { 1 } else { 0 };
        let _ = writeln!(s, r#"<g class="door" data-room="{}" data-wall="{}">"#, escape(&door.room_id), door.wall);
        let _ =
            writeln!(s, r#"<path d="M{hx:.2},{hy:.2} L{sx:.2},{sy:.2} A{r:.2},{r:.2} 0 0 {sweep} {ex:.2},{ey:.2}"/>"#);
        let _ = writeln!(s, r#"<line x1="{t0x:.2}" y1="{t0y:.2}" x2="{t1x:.2}" y2="{t1y:.2}"/>"#);
        let _ = writeln!(s, "</g>");
    }

    let bar0 = view.px(Vec2::new(view.min.x + 0.5, view.min.y + 0.4));
    let bar1 = view.px(Vec2::new(view.min.x + 1.5, view.min.y + 0.4));
    let _ = writeln!(s, r#"<g class="scale-bar">"#);
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="4"/>"#,
        bar0.0, bar0.1, bar1.0, bar1.1
    );
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="14">1 m</text>"#, bar0.0, bar0.1 - 8.0);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{BoundaryPolygon, DoorPlacement, RoomPolygon};

    #[test]
    fn escapes_ids() {
        assert_eq!(escape(r#"a<&>"'"#), "a&lt;&amp;&gt;&quot;&apos;");
    }

    #[test]
    fn one_room_one_polygon() {
        let room = RoomPolygon::new(
            "a",
            vec![Vec2::new(0.0, 0.0), Vec2::new(4.0, 0.0), Vec2::new(4.0, 3.0), Vec2::new(0.0, 3.0)],
        );
        let plan = FloorPlan {
            boundary: BoundaryPolygon { vertices: room.vertices.clone() },
            doors: vec![DoorPlacement { room_id: "a".into(), wall: 0, ratio: 0.5, width: 0.9, clamped: false }],
            rooms: vec![room],
        };
        let svg = render_svg(&plan);
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg.matches(r#"<g class="door""#).count(), 1);
    }
}
