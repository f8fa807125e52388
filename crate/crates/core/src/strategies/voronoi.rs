//! Voronoi vertices of a small site set by brute force over all triples.

use crate::world::{FieldSpec, Vec2};

/// Sites closer than this to a circumcenter than its radius disqualify it.
pub const EMPTY_CIRCLE_TOL: f64 = 1e-9;
/// Vertices closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiVertex {
    pub point: Vec2,
    /// Indices of one defining site triple.
    pub sites: [usize; 3],
    /// Distance to the defining sites.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VoronoiDiagram {
    pub sites: Vec<Vec2>,
    pub vertices: Vec<VoronoiVertex>,
}

/// Center of the circle through three points; `None` when they are
/// (numerically) collinear.
pub fn circumcenter(a: Vec2, b: Vec2, c: Vec2) -> Option<Vec2> {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let d = 2.0 * (bx * cy - by * cx);
    let scale = (bx * bx + by * by).max(cx * cx + cy * cy);
    if scale == 0.0 || d.abs() <= 1e-12 * scale {
        return None;
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    Some(Vec2::new(a.x + ux, a.y + uy))
}

/// Every circumcenter of a site triple whose circle holds no other site
/// strictly inside and that lies on the field, deduplicated.
pub fn voronoi_diagram(sites: &[Vec2], field: &FieldSpec) -> VoronoiDiagram {
    let n = sites.len();
    let mut vertices: Vec<VoronoiVertex> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let Some(c) = circumcenter(sites[i], sites[j], sites[k]) else {
                    continue;
                };
                if !field.contains(c) {
                    continue;
                }
                let r = c.dist(sites[i]);
                let empty = (0..n)
                    .filter(|&m| m != i && m != j && m != k)
                    .all(|m| c.dist(sites[m]) >= r - EMPTY_CIRCLE_TOL);
                if !empty || vertices.iter().any(|v| v.point.dist(c) < DEDUP_TOL) {
                    continue;
                }
                vertices.push(VoronoiVertex {
                    point: c,
                    sites: [i, j, k],
                    radius: r,
                });
            }
        }
    }
    VoronoiDiagram {
        sites: sites.to_vec(),
        vertices,
    }
}
