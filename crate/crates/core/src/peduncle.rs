//! Peduncle identification: the longest curvature-limited simple path in
//! the stem graph.
//!
//! Orientations are undirected lines folded into (-pi/2, pi/2], and the
//! curvature between the path and a succeeding edge is the circular
//! distance of their orientations. A path extension is compliant when that
//! curvature stays at or below the threshold; the path orientation is
//! recomputed from the origin vertex to the current vertex after every
//! extension. The search branches over all compliant successors from every
//! possible origin, so the returned path is the global optimum among
//! curvature-compliant simple paths.

use serde::{Deserialize, Serialize};

use crate::error::PeduncleError;
use crate::geom::{fold_half_turn, Point2};
use crate::skeleton::{GraphEdge, StemGraph};

/// Which orientation the curvature rule compares a succeeding edge against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureReference {
    /// Orientation of the whole path, origin vertex to current vertex.
    WholePath,
    /// Orientation of the most recently traversed edge.
    LastEdge,
}

/// An alternating vertex/edge sequence, all distinct.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphPath {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    /// Total arc length, px.
    pub length: f64,
    /// Undirected orientation from origin to terminus vertex.
    pub orientation: Option<f64>,
}

/// The selected peduncle: its path, junctions in traversal order, and the
/// concatenated pixel polyline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeduncleResult {
    pub path: GraphPath,
    pub junctions: Vec<Point2>,
    pub polyline: Vec<Point2>,
}

/// Undirected orientation of the line from `v_s` to `v_d` per the edge
/// orientation rule, folded into (-pi/2, pi/2].
pub fn edge_orientation(v_s: Point2, v_d: Point2) -> Result<f64, PeduncleError> {
    if v_s.dist_sq(v_d) < 1e-18 {
        return Err(PeduncleError::DegenerateEdge);
    }
    Ok(fold_half_turn((v_d.y - v_s.y).atan2(v_d.x - v_s.x)))
}

/// Circular distance of two undirected orientations, in [0, pi/2].
pub fn curvature(path_theta: f64, edge_theta: f64) -> f64 {
    let d = (path_theta - edge_theta).abs();
    d.min(std::f64::consts::PI - d)
}

const LEN_EPS: f64 = 1e-9;
const CURV_EPS: f64 = 1e-12;

struct Search<'g> {
    g: &'g StemGraph,
    incident: Vec<Vec<usize>>,
    max_curvature: f64,
    reference: CurvatureReference,
    used: Vec<bool>,
    vertices: Vec<usize>,
    edges: Vec<usize>,
    length: f64,
    best: Option<GraphPath>,
}

impl<'g> Search<'g> {
    fn theta_ref(&self) -> Option<f64> {
        match self.reference {
            CurvatureReference::WholePath => {
                let origin = self.g.vertices[self.vertices[0]].pos;
                let cur = self.g.vertices[*self.vertices.last().unwrap()].pos;
                edge_orientation(origin, cur).ok()
            }
            CurvatureReference::LastEdge => self
                .edges
                .last()
                .and_then(|&e| self.g.edges[e].orientation),
        }
    }

    fn compliant(&self, e: &GraphEdge) -> bool {
        if self.edges.is_empty() {
            return true;
        }
        match (self.theta_ref(), e.orientation) {
            (Some(tp), Some(te)) => curvature(tp, te) <= self.max_curvature + CURV_EPS,
            // Degenerate edges and degenerate path orientations skip the check.
            _ => true,
        }
    }

    fn record(&mut self) {
        if self.edges.is_empty() {
            return;
        }
        let better = match &self.best {
            None => true,
            Some(b) => {
                self.length > b.length + LEN_EPS
                    || ((self.length - b.length).abs() <= LEN_EPS
                        && (self.vertices[0], &self.edges) < (b.vertices[0], &b.edges))
            }
        };
        if better {
            let origin = self.g.vertices[self.vertices[0]].pos;
            let terminus = self.g.vertices[*self.vertices.last().unwrap()].pos;
            self.best = Some(GraphPath {
                vertices: self.vertices.clone(),
                edges: self.edges.clone(),
                length: self.length,
                orientation: edge_orientation(origin, terminus).ok(),
            });
        }
    }

    fn dfs(&mut self, cur: usize) {
        self.record();
        for i in 0..self.incident[cur].len() {
            let eid = self.incident[cur][i];
            let e = &self.g.edges[eid];
            let next = e.other(cur);
            if next == cur || self.used[next] {
                continue;
            }
            if !self.compliant(e) {
                continue;
            }
            self.used[next] = true;
            self.vertices.push(next);
            self.edges.push(eid);
            self.length += e.length;
            self.dfs(next);
            self.length -= self.g.edges[eid].length;
            self.edges.pop();
            self.vertices.pop();
            self.used[next] = false;
        }
    }
}

/// Find the peduncle: the longest path whose extensions all satisfy the
/// curvature rule. Ties break toward the lexicographically smallest
/// (origin id, edge id sequence).
pub fn find_peduncle(
    g: &StemGraph,
    max_curvature: f64,
    reference: CurvatureReference,
) -> Result<PeduncleResult, PeduncleError> {
    if g.edges.is_empty() || g.vertices.is_empty() {
        return Err(PeduncleError::NoStem);
    }
    let mut incident = vec![Vec::new(); g.vertices.len()];
    for (i, e) in g.edges.iter().enumerate() {
        incident[e.a].push(i);
        if e.b != e.a {
            incident[e.b].push(i);
        }
    }

    let mut search = Search {
        g,
        incident,
        max_curvature,
        reference,
        used: vec![false; g.vertices.len()],
        vertices: Vec::new(),
        edges: Vec::new(),
        length: 0.0,
        best: None,
    };
    for start in 0..g.vertices.len() {
        search.used[start] = true;
        search.vertices.push(start);
        search.dfs(start);
        search.vertices.pop();
        search.used[start] = false;
    }

    let path = search.best.ok_or(PeduncleError::NoStem)?;
    let junctions = path_junctions(g, &path);
    let polyline = path_polyline(g, &path);
    Ok(PeduncleResult {
        path,
        junctions,
        polyline,
    })
}

/// Junction vertices of the path (graph degree >= 3) in traversal order.
pub fn path_junctions(g: &StemGraph, path: &GraphPath) -> Vec<Point2> {
    path.vertices
        .iter()
        .filter(|&&v| g.vertices[v].is_junction())
        .map(|&v| g.vertices[v].pos)
        .collect()
}

/// Concatenated edge polylines oriented along the path.
pub fn path_polyline(g: &StemGraph, path: &GraphPath) -> Vec<Point2> {
    let mut out: Vec<Point2> = Vec::new();
    for (i, &eid) in path.edges.iter().enumerate() {
        let e = &g.edges[eid];
        let from = path.vertices[i];
        let mut pts = e.polyline.clone();
        if e.a != from {
            pts.reverse();
        }
        if i == 0 {
            out.extend(pts);
        } else {
            out.extend(pts.into_iter().skip(1));
        }
    }
    out
}
