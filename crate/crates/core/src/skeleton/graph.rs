//! Conversion of a skeleton into a weighted graph of junctions, tails and
//! polyline edges, plus length-based spur pruning.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::Skeleton;
use crate::geom::{fold_half_turn, Point2};

/// Graph vertex: a junction cluster centroid, a tail pixel, or a promoted
/// cycle pixel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vertex {
    pub pos: Point2,
    pub degree: usize,
}

impl Vertex {
    pub fn is_tail(&self) -> bool {
        self.degree == 1
    }

    pub fn is_junction(&self) -> bool {
        self.degree >= 3
    }
}

/// Graph edge: a maximal chain of degree-2 skeleton pixels between two
/// vertices, carried as a polyline from vertex position to vertex position.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub polyline: Vec<Point2>,
    /// Arc length along the polyline, px.
    pub length: f64,
    /// Undirected line orientation of the endpoint vertices, radians in
    /// (-pi/2, pi/2]; None when the endpoints coincide.
    pub orientation: Option<f64>,
}

impl GraphEdge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Skeleton-derived stem graph.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StemGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<GraphEdge>,
    /// Positions of junctions that pruning dissolved away.
    pub dissolved_junctions: Vec<Point2>,
}

fn polyline_length(poly: &[Point2]) -> f64 {
    poly.windows(2).map(|w| w[0].dist(w[1])).sum()
}

fn endpoint_orientation(a: Point2, b: Point2) -> Option<f64> {
    if a.dist_sq(b) < 1e-18 {
        None
    } else {
        Some(fold_half_turn((b.y - a.y).atan2(b.x - a.x)))
    }
}

impl StemGraph {
    /// Build a graph from vertex positions and `(a, b, polyline)` edges.
    /// Lengths, orientations and degrees are derived. Polylines may omit the
    /// endpoint positions; they are prepended/appended when missing.
    pub fn from_parts(positions: Vec<Point2>, edge_list: Vec<(usize, usize, Vec<Point2>)>) -> Self {
        let mut vertices: Vec<Vertex> = positions
            .into_iter()
            .map(|pos| Vertex { pos, degree: 0 })
            .collect();
        let mut edges = Vec::with_capacity(edge_list.len());
        for (a, b, mut polyline) in edge_list {
            let pa = vertices[a].pos;
            let pb = vertices[b].pos;
            if polyline.first().map_or(true, |p| p.dist_sq(pa) > 1e-18) {
                polyline.insert(0, pa);
            }
            if polyline.last().map_or(true, |p| p.dist_sq(pb) > 1e-18) {
                polyline.push(pb);
            }
            vertices[a].degree += 1;
            vertices[b].degree += 1;
            edges.push(GraphEdge {
                a,
                b,
                length: polyline_length(&polyline),
                orientation: endpoint_orientation(pa, pb),
                polyline,
            });
        }
        Self {
            vertices,
            edges,
            dissolved_junctions: Vec::new(),
        }
    }

    /// Edge ids incident to a vertex (self-loops listed once).
    pub fn incident(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.a == v || e.b == v)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn tails(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.vertices[v].is_tail())
            .collect()
    }

    pub fn junctions(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.vertices[v].is_junction())
            .collect()
    }
}

/// Convert a skeleton into a stem graph.
///
/// Pixels with a neighbor count other than two become vertices; adjacent
/// branch pixels (count >= 3) merge into one vertex at their centroid.
/// Maximal chains of two-neighbor pixels become edges. Pure pixel cycles
/// get one promoted vertex carrying a self-loop edge. Isolated pixels are
/// dropped.
pub fn build_graph(skel: &Skeleton) -> StemGraph {
    let img = skel.image();
    let (w, h) = (img.width() as i64, img.height() as i64);
    let idx = |x: i64, y: i64| (y * w + x) as usize;

    let mut ncount = vec![0u8; (w * h) as usize];
    for (x, y) in img.on_pixels() {
        let (x, y) = (x as i64, y as i64);
        let mut c = 0;
        for dy in -1..=1 {
            for dx in -1..=1 {
                if (dx != 0 || dy != 0) && img.get_i(x + dx, y + dy) {
                    c += 1;
                }
            }
        }
        ncount[idx(x, y)] = c;
    }

    let is_on = |x: i64, y: i64| img.get_i(x, y);
    let is_node = |x: i64, y: i64| is_on(x, y) && ncount[idx(x, y)] != 2;

    // Vertex ids per node pixel. Branch pixels cluster by 8-connectivity.
    let mut vertex_of = vec![usize::MAX; (w * h) as usize];
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut cluster_members: Vec<Vec<(i64, i64)>> = Vec::new();
    for (x, y) in img.on_pixels() {
        let (x, y) = (x as i64, y as i64);
        if !is_node(x, y) || vertex_of[idx(x, y)] != usize::MAX {
            continue;
        }
        let vid = vertices.len();
        let mut members = Vec::new();
        if ncount[idx(x, y)] >= 3 {
            // Flood-fill adjacent branch pixels.
            let mut stack = vec![(x, y)];
            vertex_of[idx(x, y)] = vid;
            while let Some((cx, cy)) = stack.pop() {
                members.push((cx, cy));
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (nx, ny) = (cx + dx, cy + dy);
                        if is_on(nx, ny)
                            && ncount[idx(nx, ny)] >= 3
                            && vertex_of[idx(nx, ny)] == usize::MAX
                        {
                            vertex_of[idx(nx, ny)] = vid;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
        } else {
            vertex_of[idx(x, y)] = vid;
            members.push((x, y));
        }
        let n = members.len() as f64;
        let cx = members.iter().map(|p| p.0 as f64).sum::<f64>() / n;
        let cy = members.iter().map(|p| p.1 as f64).sum::<f64>() / n;
        vertices.push(Vertex {
            pos: Point2::new(cx, cy),
            degree: 0,
        });
        cluster_members.push(members);
    }

    let mut consumed = vec![false; (w * h) as usize];
    let mut raw_edges: Vec<(usize, usize, Vec<Point2>)> = Vec::new();

    // Trace chains leaving each node pixel.
    for (vid, members) in cluster_members.iter().enumerate() {
        for &(px, py) in members {
            for (dx, dy) in NBR_ORDER {
                let (qx, qy) = (px + dx, py + dy);
                if !is_on(qx, qy) || is_node(qx, qy) || consumed[idx(qx, qy)] {
                    continue;
                }
                let mut poly = vec![
                    vertices[vid].pos,
                    Point2::new(px as f64, py as f64),
                ];
                let (mut prev, mut cur) = ((px, py), (qx, qy));
                loop {
                    consumed[idx(cur.0, cur.1)] = true;
                    poly.push(Point2::new(cur.0 as f64, cur.1 as f64));
                    if is_node(cur.0, cur.1) {
                        break;
                    }
                    let mut next = None;
                    for (ddx, ddy) in NBR_ORDER {
                        let cand = (cur.0 + ddx, cur.1 + ddy);
                        if cand != prev && is_on(cand.0, cand.1) {
                            // Chain pixels have exactly two neighbors.
                            next = Some(cand);
                            break;
                        }
                    }
                    match next {
                        Some(n) => {
                            prev = cur;
                            cur = n;
                        }
                        None => break, // dangling chain end (shouldn't happen)
                    }
                }
                let end_vid = if is_node(cur.0, cur.1) {
                    vertex_of[idx(cur.0, cur.1)]
                } else {
                    vid
                };
                if is_node(cur.0, cur.1) {
                    poly.push(vertices[end_vid].pos);
                }
                raw_edges.push((vid, end_vid, poly));
            }
        }
    }
    // The chain walk consumes interior pixels only; the closing node pixel of
    // each polyline is a vertex pixel, never consumed. A chain traced from
    // one side is consumed before its far node pixel scans it again.

    // Direct node-node adjacencies (no chain pixels in between).
    for (vid, members) in cluster_members.iter().enumerate() {
        for &(px, py) in members {
            for (dx, dy) in NBR_ORDER {
                let (qx, qy) = (px + dx, py + dy);
                if !is_on(qx, qy) || !is_node(qx, qy) {
                    continue;
                }
                let ovid = vertex_of[idx(qx, qy)];
                if ovid == vid {
                    continue;
                }
                // Count each unordered pixel pair once.
                if (py, px) < (qy, qx) {
                    let poly = vec![
                        vertices[vid].pos,
                        Point2::new(px as f64, py as f64),
                        Point2::new(qx as f64, qy as f64),
                        vertices[ovid].pos,
                    ];
                    raw_edges.push((vid, ovid, poly));
                }
            }
        }
    }

    // Pure cycles: leftover chains with no node pixel. Promote the first
    // pixel to a vertex and trace the loop as a self-loop edge.
    for (x, y) in img.on_pixels() {
        let (x, y) = (x as i64, y as i64);
        if is_node(x, y) || consumed[idx(x, y)] {
            continue;
        }
        let vid = vertices.len();
        vertices.push(Vertex {
            pos: Point2::new(x as f64, y as f64),
            degree: 0,
        });
        consumed[idx(x, y)] = true;
        let mut poly = vec![Point2::new(x as f64, y as f64)];
        // Walk one direction until the loop closes.
        let mut prev = (x, y);
        let mut cur = (x, y);
        for (dx, dy) in NBR_ORDER {
            if is_on(x + dx, y + dy) {
                cur = (x + dx, y + dy);
                break;
            }
        }
        while cur != (x, y) {
            consumed[idx(cur.0, cur.1)] = true;
            poly.push(Point2::new(cur.0 as f64, cur.1 as f64));
            let mut next = (x, y);
            for (ddx, ddy) in NBR_ORDER {
                let cand = (cur.0 + ddx, cur.1 + ddy);
                if cand != prev && is_on(cand.0, cand.1) {
                    next = cand;
                    break;
                }
            }
            prev = cur;
            cur = next;
        }
        poly.push(Point2::new(x as f64, y as f64));
        raw_edges.push((vid, vid, poly));
    }

    // Degrees, then drop isolated vertices.
    let mut degree = vec![0usize; vertices.len()];
    for (a, b, _) in &raw_edges {
        degree[*a] += 1;
        degree[*b] += 1;
    }
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut out_vertices = Vec::new();
    for (i, v) in vertices.into_iter().enumerate() {
        if degree[i] > 0 {
            remap[i] = out_vertices.len();
            out_vertices.push(Vertex {
                pos: v.pos,
                degree: degree[i],
            });
        }
    }
    let edges = raw_edges
        .into_iter()
        .map(|(a, b, polyline)| {
            let (a, b) = (remap[a], remap[b]);
            GraphEdge {
                a,
                b,
                length: polyline_length(&polyline),
                orientation: endpoint_orientation(out_vertices[a].pos, out_vertices[b].pos),
                polyline,
            }
        })
        .collect();

    StemGraph {
        vertices: out_vertices,
        edges,
        dissolved_junctions: Vec::new(),
    }
}

/// Fixed neighbor scan order for deterministic tracing.
const NBR_ORDER: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

/// Remove junction-tail edges shorter than `min_len_mm`, dissolving
/// junctions whose degree drops to two by merging their remaining edges.
/// Iterates to a fixpoint. Tail-tail and junction-junction edges are never
/// pruned regardless of length.
pub fn prune_spurs(g: &StemGraph, min_len_mm: f64, px_per_mm: f64) -> StemGraph {
    let threshold_px = min_len_mm * px_per_mm;
    let mut vertices: Vec<Option<Vertex>> = g.vertices.iter().cloned().map(Some).collect();
    let mut edges: Vec<Option<GraphEdge>> = g.edges.iter().cloned().map(Some).collect();
    let mut dissolved = g.dissolved_junctions.clone();
    let original_junctions: HashSet<usize> = g
        .vertices
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_junction())
        .map(|(i, _)| i)
        .collect();

    let degree_of = |vertices: &[Option<Vertex>]| -> Vec<usize> {
        vertices.iter().map(|v| v.as_ref().map_or(0, |v| v.degree)).collect()
    };

    loop {
        let mut changed = false;

        // Batch-remove qualifying spurs based on current degrees.
        let degrees = degree_of(&vertices);
        let to_remove: Vec<usize> = edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| {
                let e = e.as_ref()?;
                if e.a == e.b {
                    return None;
                }
                let (da, db) = (degrees[e.a], degrees[e.b]);
                let junction_tail = (da >= 3 && db == 1) || (da == 1 && db >= 3);
                (junction_tail && e.length < threshold_px).then_some(i)
            })
            .collect();
        for i in to_remove {
            let e = edges[i].take().unwrap();
            for v in [e.a, e.b] {
                let vv = vertices[v].as_mut().unwrap();
                vv.degree -= 1;
                if vv.degree == 0 {
                    vertices[v] = None;
                }
            }
            changed = true;
        }

        // Dissolve degree-2 vertices whose two edge slots are distinct edges.
        for v in 0..vertices.len() {
            let Some(vert) = vertices[v].as_ref() else { continue };
            if vert.degree != 2 {
                continue;
            }
            let incident: Vec<usize> = edges
                .iter()
                .enumerate()
                .filter(|(_, e)| {
                    e.as_ref()
                        .map_or(false, |e| e.a == v || e.b == v)
                })
                .map(|(i, _)| i)
                .collect();
            if incident.len() != 2 {
                continue; // a self-loop occupies both slots; leave it
            }
            let e1 = edges[incident[0]].take().unwrap();
            let e2 = edges[incident[1]].take().unwrap();
            // Orient e1 to end at v and e2 to start at v.
            let (start, mut poly1) = if e1.b == v {
                (e1.a, e1.polyline.clone())
            } else {
                let mut p = e1.polyline.clone();
                p.reverse();
                (e1.b, p)
            };
            let (end, poly2) = if e2.a == v {
                (e2.b, e2.polyline.clone())
            } else {
                let mut p = e2.polyline.clone();
                p.reverse();
                (e2.a, p)
            };
            poly1.extend_from_slice(&poly2[1..]);
            let pa = vertices[start].as_ref().unwrap().pos;
            let pb = vertices[end].as_ref().unwrap().pos;
            edges.push(Some(GraphEdge {
                a: start,
                b: end,
                length: polyline_length(&poly1),
                orientation: endpoint_orientation(pa, pb),
                polyline: poly1,
            }));
            if original_junctions.contains(&v) {
                dissolved.push(vertices[v].as_ref().unwrap().pos);
            }
            vertices[v] = None;
            changed = true;
        }

        if !changed {
            break;
        }
    }

    // Compact indices.
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut out_vertices = Vec::new();
    for (i, v) in vertices.into_iter().enumerate() {
        if let Some(v) = v {
            remap[i] = out_vertices.len();
            out_vertices.push(v);
        }
    }
    let out_edges: Vec<GraphEdge> = edges
        .into_iter()
        .flatten()
        .map(|mut e| {
            e.a = remap[e.a];
            e.b = remap[e.b];
            e
        })
        .collect();

    StemGraph {
        vertices: out_vertices,
        edges: out_edges,
        dissolved_junctions: dissolved,
    }
}
