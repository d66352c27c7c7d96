//! Per-capture regularization: boundary extraction, three-cluster k-means
//! and right-angle wedge fitting, then placement into the session plan.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Vec2};
use crate::types::{ClusterResult, PlanTransform, PointSet2D, Wedge};

pub const DEFAULT_HULL_EPS: f64 = 0.02;
pub const DEFAULT_LLOYD_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100;
const MAX_RESEEDS: usize = 5;

/// How the two wall lines of a wedge are obtained from the clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WallFit {
    /// Lines join the cluster means directly.
    Means,
    /// Lines are total-least-squares fits through the two outer clusters;
    /// the apex is their intersection.
    #[default]
    LeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizeConfig {
    pub hull_eps: f64,
    pub lloyd_tol: f64,
    pub max_iter: usize,
    /// Independent k-means++ initializations; the lowest inertia wins.
    pub restarts: usize,
    pub wall_fit: WallFit,
}

impl Default for RegularizeConfig {
    fn default() -> Self {
        Self {
            hull_eps: DEFAULT_HULL_EPS,
            lloyd_tol: DEFAULT_LLOYD_TOL,
            max_iter: DEFAULT_MAX_ITER,
            restarts: 4,
            wall_fit: WallFit::default(),
        }
    }
}

/// Outer contour of a capture's plan points: hull vertices plus every point
/// within `eps` of a hull edge. The result keeps input order.
pub fn extract_boundary(points: &PointSet2D, eps: f64) -> Result<PointSet2D> {
    if points.len() < 3 {
        return Err(Error::DegenerateCapture);
    }
    let hull = geom::convex_hull(&points.points);
    if hull.len() < 3 || geom::signed_area(&hull) <= 0.0 {
        return Err(Error::DegenerateCapture);
    }
    let edges: Vec<(Vec2, Vec2)> = (0..hull.len()).map(|i| (hull[i], hull[(i + 1) % hull.len()])).collect();
    let kept = points
        .points
        .iter()
        .copied()
        .filter(|&p| edges.iter().any(|&(a, b)| geom::point_segment_distance(p, a, b) <= eps))
        .collect();
    Ok(PointSet2D::new(kept))
}

/// k-means with k = 3, k-means++ seeding from `seed`, Lloyd iterations until
/// the largest mean shift drops below `cfg.lloyd_tol`. Means are ordered so
/// `means[1]` has the widest angle to the other two (the wedge apex) and
/// `means[0] -> means[1] -> means[2]` turns left.
pub fn cluster3(points: &PointSet2D, seed: u64, cfg: &RegularizeConfig) -> Result<ClusterResult> {
    let pts = &points.points;
    if pts.len() < 3 {
        return Err(Error::DegenerateCapture);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Lloyd> = None;
    for _ in 0..cfg.restarts.max(1) {
        let run = (0..MAX_RESEEDS).find_map(|_| {
            let init = seed_plus_plus(pts, &mut rng)?;
            lloyd(pts, init, cfg.lloyd_tol, cfg.max_iter)
        });
        if let Some(run) = run {
            if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
                best = Some(run);
            }
        }
    }
    let best = best.ok_or(Error::ClusterCollapse)?;
    Ok(order_for_wedge(best))
}

/// Outcome of one Lloyd run.
pub struct Lloyd {
    pub means: [Vec2; 3],
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Objective after each assignment step.
    pub history: Vec<f64>,
}

fn seed_plus_plus(pts: &[Vec2], rng: &mut ChaCha8Rng) -> Option<[Vec2; 3]> {
    let mut centers = vec![pts[rng.random_range(0..pts.len())]];
    let mut d2: Vec<f64> = pts.iter().map(|p| (*p - centers[0]).norm_sq()).collect();
    while centers.len() < 3 {
        let total: f64 = d2.iter().sum();
        if !(total > 0.0) {
            return None;
        }
        let mut r = rng.random::<f64>() * total;
        let mut pick = pts.len() - 1;
        for (i, &w) in d2.iter().enumerate() {
            if w > 0.0 && r < w {
                pick = i;
                break;
            }
            r -= w;
        }
        let c = pts[pick];
        centers.push(c);
        for (d, p) in d2.iter_mut().zip(pts) {
            *d = d.min((*p - c).norm_sq());
        }
    }
    Some([centers[0], centers[1], centers[2]])
}

fn nearest(p: Vec2, means: &[Vec2; 3]) -> (usize, f64) {
    let mut best = (0, (p - means[0]).norm_sq());
    for (k, m) in means.iter().enumerate().skip(1) {
        let d = (p - *m).norm_sq();
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

/// Lloyd iterations from `means` until no mean moves more than `tol`.
/// `None` when a cluster empties.
pub fn lloyd(pts: &[Vec2], mut means: [Vec2; 3], tol: f64, max_iter: usize) -> Option<Lloyd> {
    let mut assignments = vec![0usize; pts.len()];
    let mut history = Vec::new();
    for _ in 0..max_iter {
        let mut sums = [Vec2::ZERO; 3];
        let mut counts = [0usize; 3];
        let mut inertia = 0.0;
        for (a, &p) in assignments.iter_mut().zip(pts) {
            let (k, d) = nearest(p, &means);
            *a = k;
            inertia += d;
            sums[k] = sums[k] + p;
            counts[k] += 1;
        }
        history.push(inertia);
        if counts.contains(&0) {
            return None;
        }
        let mut shift: f64 = 0.0;
        for k in 0..3 {
            let m = sums[k] * (1.0 / counts[k] as f64);
            shift = shift.max(m.distance(means[k]));
            means[k] = m;
        }
        if shift < tol {
            break;
        }
    }
    // final assignment against the converged means
    let mut counts = [0usize; 3];
    let mut inertia = 0.0;
    for (a, &p) in assignments.iter_mut().zip(pts) {
        let (k, d) = nearest(p, &means);
        *a = k;
        inertia += d;
        counts[k] += 1;
    }
    if counts.contains(&0) {
        return None;
    }
    Some(Lloyd { means, assignments, inertia, history })
}

fn angle_at(apex: Vec2, a: Vec2, b: Vec2) -> f64 {
    let (u, v) = (a - apex, b - apex);
    u.cross(v).abs().atan2(u.dot(v))
}

fn order_for_wedge(run: Lloyd) -> ClusterResult {
    let m = run.means;
    let angles = [angle_at(m[0], m[1], m[2]), angle_at(m[1], m[0], m[2]), angle_at(m[2], m[0], m[1])];
    let mut apex = 0;
    for k in 1..3 {
        if angles[k] > angles[apex] {
            apex = k;
        }
    }
    let others: Vec<usize> = (0..3).filter(|&k| k != apex).collect();
    let (mut first, mut last) = (others[0], others[1]);
    if (m[apex] - m[first]).cross(m[last] - m[apex]) < 0.0 {
        std::mem::swap(&mut first, &mut last);
    }
    let order = [first, apex, last];
    let mut relabel = [0usize; 3];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    ClusterResult {
        means: [m[first], m[apex], m[last]],
        assignments: run.assignments.iter().map(|&a| relabel[a]).collect(),
        inertia: run.inertia,
    }
}

/// Right-angle wedge from three means: the segment `m1 -> m2` is kept, the
/// segment `m2 -> m3` is rotated about `m2` by the smallest angle that makes
/// it perpendicular (ties go counter-clockwise). Apex is `m2`.
pub fn fit_wedge(c: &ClusterResult) -> Result<Wedge> {
    wedge_from_means(c.means[0], c.means[1], c.means[2])
}

fn wedge_from_means(m1: Vec2, m2: Vec2, m3: Vec2) -> Result<Wedge> {
    let (len1, len2) = (m1.distance(m2), m2.distance(m3));
    let (Some(dir1), Some(d2)) = ((m2 - m1).normalized(), (m3 - m2).normalized()) else {
        return Err(Error::DegenerateMeans);
    };
    if len1 <= 1e-12 || len2 <= 1e-12 {
        return Err(Error::DegenerateMeans);
    }
    let theta = dir1.cross(d2).atan2(dir1.dot(d2));
    let dir2 = if theta >= 0.0 || theta == -std::f64::consts::PI { dir1.perp() } else { -dir1.perp() };
    Ok(Wedge { apex: m2, dir1, dir2, len1, len2 })
}

/// Wedge fitting under the configured wall model. With least squares the
/// two outer clusters are line-fitted, the apex is the intersection, and the
/// means projected onto their lines feed the right-angle adjustment. Falls
/// back to the means when a fit is degenerate.
pub fn fit_wedge_with(points: &PointSet2D, c: &ClusterResult, fit: WallFit) -> Result<Wedge> {
    if fit == WallFit::Means {
        return fit_wedge(c);
    }
    let line = |k: usize| geom::fit_line(&c.members(&points.points, k));
    let (Some((p1, d1)), Some((p3, d3))) = (line(0), line(2)) else {
        return fit_wedge(c);
    };
    // nearly parallel walls cannot form a corner
    if d1.cross(d3).abs() < 20f64.to_radians().sin() {
        return fit_wedge(c);
    }
    let Some(apex) = geom::line_intersection(p1, d1, p3, d3) else {
        return fit_wedge(c);
    };
    let foot = |m: Vec2, p: Vec2, d: Vec2| p + d * (m - p).dot(d);
    wedge_from_means(foot(c.means[0], p1, d1), apex, foot(c.means[2], p3, d3))
}

/// Rigidly maps a wedge into the session plan.
pub fn place_wedge(w: &Wedge, xform: &PlanTransform) -> Wedge {
    Wedge {
        apex: xform.apply(w.apex),
        dir1: xform.apply_dir(w.dir1),
        dir2: xform.apply_dir(w.dir2),
        len1: w.len1,
        len2: w.len2,
    }
}

/// Intermediate products of regularizing one capture.
#[derive(Debug, Clone)]
pub struct LocalLayout {
    pub boundary: PointSet2D,
    pub clusters: ClusterResult,
    /// Wedge in the capture's own plan frame.
    pub wedge: Wedge,
}

/// Boundary, clusters and wedge for one capture's local plan points.
pub fn regularize_capture(points: &PointSet2D, seed: u64, cfg: &RegularizeConfig) -> Result<LocalLayout> {
    let boundary = extract_boundary(points, cfg.hull_eps)?;
    let clusters = cluster3(&boundary, seed, cfg)?;
    let wedge = fit_wedge_with(&boundary, &clusters, cfg.wall_fit)?;
    Ok(LocalLayout { boundary, clusters, wedge })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn pts(v: &[(f64, f64)]) -> PointSet2D {
        PointSet2D::new(v.iter().map(|&(x, y)| Vec2::new(x, y)).collect())
    }

    fn brute_boundary(points: &[Vec2], eps: f64) -> Vec<Vec2> {
        // hull edges by brute force: pairs with every other point on the left or on the line
        let mut edges = Vec::new();
        for (i, &a) in points.iter().enumerate() {
            for (j, &b) in points.iter().enumerate() {
                if i == j || a == b {
                    continue;
                }
                if points.iter().all(|&p| (b - a).cross(p - a) >= 0.0) {
                    edges.push((a, b));
                }
            }
        }
        points
            .iter()
            .copied()
            .filter(|&p| edges.iter().any(|&(a, b)| geom::point_segment_distance(p, a, b) <= eps))
            .collect()
    }

    #[test]
    fn square_with_interior_grid() {
        let mut v = vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        for i in 0..=20 {
            for j in 0..=20 {
                let (x, y) = (0.01 + 0.049 * i as f64, 0.01 + 0.049 * j as f64);
                v.push((x, y));
            }
        }
        let input = pts(&v);
        let got = extract_boundary(&input, 0.02).unwrap();
        let want = brute_boundary(&input.points, 0.02);
        assert_eq!(got.points, want);
        for c in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)] {
            assert!(got.points.contains(&Vec2::new(c.0, c.1)));
        }
        // every kept grid point is edge-adjacent
        assert!(got.points.iter().all(|p| p.x <= 0.02 || p.y <= 0.02 || p.x >= 0.98 || p.y >= 0.98));
        assert!(got.len() > 4);
    }

    #[test]
    fn three_points_are_their_own_boundary() {
        let input = pts(&[(0.0, 0.0), (2.0, 0.0), (0.5, 1.0)]);
        assert_eq!(extract_boundary(&input, 0.02).unwrap(), input);
    }

    #[test]
    fn collinear_input_is_degenerate() {
        let input = pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]);
        assert!(matches!(extract_boundary(&input, 0.02), Err(Error::DegenerateCapture)));
    }

    #[test]
    fn three_blobs_recovered() {
        let centers = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = Normal::new(0.0, 0.01).unwrap();
        let mut v = Vec::new();
        for c in centers {
            for _ in 0..200 {
                v.push(c + Vec2::new(n.sample(&mut rng), n.sample(&mut rng)));
            }
        }
        let res = cluster3(&PointSet2D::new(v.clone()), 3, &RegularizeConfig::default()).unwrap();
        for c in centers {
            assert!(res.means.iter().any(|m| m.distance(c) < 0.05), "missing blob {c:?}: {:?}", res.means);
        }
        // the corner blob is the apex
        assert!(res.means[1].distance(Vec2::new(1.0, 0.0)) < 0.05);
        res.validate(&v).unwrap();
    }

    #[test]
    fn three_distinct_points_each_own_mean() {
        let input = pts(&[(0.0, 0.0), (3.0, 0.0), (3.0, 2.0)]);
        let res = cluster3(&input, 9, &RegularizeConfig::default()).unwrap();
        let mut means = res.means.to_vec();
        means.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        assert_eq!(means, input.points);
        assert_eq!(res.means[1], Vec2::new(3.0, 0.0));
    }

    #[test]
    fn identical_points_collapse() {
        let input = pts(&[(1.0, 1.0); 5]);
        assert!(matches!(cluster3(&input, 0, &RegularizeConfig::default()), Err(Error::ClusterCollapse)));
    }

    #[test]
    fn same_seed_same_result() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v: Vec<Vec2> = (0..500).map(|_| Vec2::new(rng.random(), rng.random())).collect();
        let input = PointSet2D::new(v);
        let cfg = RegularizeConfig::default();
        assert_eq!(cluster3(&input, 42, &cfg).unwrap(), cluster3(&input, 42, &cfg).unwrap());
    }

    #[test]
    fn lloyd_objective_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let v: Vec<Vec2> = (0..300).map(|_| Vec2::new(rng.random::<f64>() * 4.0, rng.random())).collect();
            let init = [v[0], v[1], v[2]];
            if let Some(run) = lloyd(&v, init, 1e-9, 100) {
                for w in run.history.windows(2) {
                    assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", run.history);
                }
            }
        }
    }

    fn cluster_of(means: [(f64, f64); 3]) -> ClusterResult {
        ClusterResult { means: means.map(|(x, y)| Vec2::new(x, y)), assignments: vec![], inertia: 0.0 }
    }

    #[test]
    fn wedge_closed_form_rotation() {
        let w = fit_wedge(&cluster_of([(0.0, 0.0), (1.0, 0.0), (1.1, 1.0)])).unwrap();
        assert_eq!(w.apex, Vec2::new(1.0, 0.0));
        assert_eq!(w.dir1, Vec2::new(1.0, 0.0));
        assert!(w.dir2.distance(Vec2::new(0.0, 1.0)) < 1e-15);
        assert!((w.len2 - (0.01f64 + 1.0).sqrt()).abs() < 1e-15);
        assert!((w.len1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn perpendicular_means_unchanged() {
        let w = fit_wedge(&cluster_of([(0.0, 0.0), (2.0, 0.0), (2.0, 3.0)])).unwrap();
        assert_eq!((w.dir1, w.dir2), (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)));
        assert_eq!(w.end(), Vec2::new(2.0, 3.0));
    }

    #[test]
    fn mirrored_means_give_mirrored_wedge() {
        let m = [(0.2, -0.1), (1.3, 0.2), (1.1, 1.4)];
        let w = fit_wedge(&cluster_of(m)).unwrap();
        let mirror = |p: Vec2| Vec2::new(-p.x, p.y);
        let wm = fit_wedge(&cluster_of(m.map(|(x, y)| (-x, y)))).unwrap();
        assert_eq!(wm.apex, mirror(w.apex));
        assert!(wm.start().distance(mirror(w.start())) < 1e-12);
        assert!(wm.end().distance(mirror(w.end())) < 1e-12);
    }

    #[test]
    fn coincident_means_rejected() {
        assert!(matches!(fit_wedge(&cluster_of([(1.0, 1.0), (1.0, 1.0), (2.0, 0.0)])), Err(Error::DegenerateMeans)));
        assert!(matches!(fit_wedge(&cluster_of([(0.0, 1.0), (1.0, 1.0), (1.0, 1.0)])), Err(Error::DegenerateMeans)));
    }

    #[test]
    fn reversed_line_breaks_counter_clockwise() {
        let w = fit_wedge(&cluster_of([(0.0, 0.0), (1.0, 0.0), (0.0, 0.0)])).unwrap();
        assert_eq!(w.dir2, Vec2::new(0.0, 1.0));
        let w = fit_wedge(&cluster_of([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)])).unwrap();
        assert_eq!(w.dir2, Vec2::new(0.0, 1.0));
    }

    #[test]
    fn placement_is_rigid() {
        let w = fit_wedge(&cluster_of([(0.0, 0.0), (1.0, 0.0), (1.0, 2.0)])).unwrap();
        assert_eq!(place_wedge(&w, &PlanTransform::IDENTITY), w);
        let q = place_wedge(&w, &PlanTransform::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0));
        assert!(q.dir1.distance(Vec2::new(0.0, 1.0)) < 1e-15);
        assert!(q.dir2.distance(Vec2::new(-1.0, 0.0)) < 1e-15);
        assert_eq!((q.len1, q.len2), (w.len1, w.len2));
    }

    #[test]
    fn least_squares_apex_sits_on_the_corner() {
        // L-shaped wall points: a dense stack at the corner plus two arms
        let mut v = Vec::new();
        for i in 0..150 {
            let s = 0.01 * i as f64;
            v.push(Vec2::new(3.0 - s, 2.0));
            v.push(Vec2::new(3.0, 2.0 - s));
        }
        for _ in 0..300 {
            v.push(Vec2::new(3.0, 2.0));
        }
        let input = PointSet2D::new(v);
        let cfg = RegularizeConfig::default();
        let c = cluster3(&input, 1, &cfg).unwrap();
        let ls = fit_wedge_with(&input, &c, WallFit::LeastSquares).unwrap();
        assert!(ls.apex.distance(Vec2::new(3.0, 2.0)) < 1e-9, "{:?}", ls.apex);
        let means = fit_wedge_with(&input, &c, WallFit::Means).unwrap();
        assert_eq!(means.apex, c.means[1]);
    }
}
