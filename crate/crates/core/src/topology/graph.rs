use serde::{Deserialize, Serialize};

use super::UnionFind;
use crate::geometry::{clip_polygon_to_box, discs_intersect, Aabb, PlanarPolygon};
use crate::network::FractureNetwork;
use crate::scalar::Real;

/// Fracture intersection graph with two virtual nodes: SOURCE (inflow plane
/// `x = min`) and SINK (outflow plane `x = max`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionGraph {
    pub n_fractures: usize,
    /// Unordered edges `(a, b)` with `a < b`, sorted.
    pub edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl IntersectionGraph {
    pub fn from_edges(n_fractures: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut e: Vec<(usize, usize)> = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        e.sort_unstable();
        e.dedup();
        let mut adjacency = vec![Vec::new(); n_fractures + 2];
        for &(a, b) in &e {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Self {
            n_fractures,
            edges: e,
            adjacency,
        }
    }

    pub fn source(&self) -> usize {
        self.n_fractures
    }

    pub fn sink(&self) -> usize {
        self.n_fractures + 1
    }

    pub fn node_count(&self) -> usize {
        self.n_fractures + 2
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Edges between fractures only.
    pub fn fracture_edges(&self) -> impl Iterator<Item = &(usize, usize)> {
        let n = self.n_fractures;
        self.edges.iter().filter(move |(_, b)| *b < n)
    }

    pub fn components(&self) -> UnionFind {
        let mut uf = UnionFind::new(self.node_count());
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        uf
    }
}

/// Whether the clipped polygon has an edge lying in the domain face plane.
fn touches_face<T: Real>(clipped: &PlanarPolygon<T>, axis: usize, value: T) -> bool {
    let v = &clipped.vertices;
    (0..v.len()).any(|i| {
        let (p, q) = (v[i], v[(i + 1) % v.len()]);
        p[axis] == value && q[axis] == value && p != q
    })
}

/// Builds the graph: fracture pairs with an exact disc–disc intersection
/// (sweep-and-prune over x-extents), plus boundary edges for fractures whose
/// domain-clipped polygon has an edge on the inflow/outflow face.
pub fn build_intersection_graph<T: Real>(net: &FractureNetwork<T>, eps: T, m: usize) -> IntersectionGraph {
    use rayon::prelude::*;

    let n = net.fractures.len();
    let boxes: Vec<Aabb<T>> = net.fractures.iter().map(|f| f.bounding_box()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        boxes[a].min.x
            .partial_cmp(&boxes[b].min.x)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let pair_edges: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|oi| {
            let a = order[oi];
            let mut found = Vec::new();
            for &b in &order[oi + 1..] {
                if boxes[b].min.x > boxes[a].max.x {
                    break;
                }
                if boxes[a].overlaps(&boxes[b])
                    && discs_intersect(&net.fractures[a], &net.fractures[b], eps)
                {
                    found.push((a, b));
                }
            }
            found
        })
        .collect();

    let (source, sink) = (n, n + 1);
    let boundary_edges: Vec<(usize, usize)> = net
        .fractures
        .par_iter()
        .flat_map_iter(|f| {
            let mut e = Vec::new();
            let clipped = clip_polygon_to_box(&f.polygon(m), &net.domain);
            if !clipped.is_empty() {
                if touches_face(&clipped, 0, net.domain.min.x) {
                    e.push((f.id, source));
                }
                if touches_face(&clipped, 0, net.domain.max.x) {
                    e.push((f.id, sink));
                }
            }
            e
        })
        .collect();

    IntersectionGraph::from_edges(n, pair_edges.into_iter().chain(boundary_edges))
}

/// SOURCE and SINK are connected.
pub fn dfn_percolates(graph: &IntersectionGraph) -> bool {
    graph.components().connected(graph.source(), graph.sink())
}

/// Counts of the isolated-fracture removal step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationReport {
    pub total: usize,
    pub retained: usize,
    /// Ids (in the input network) of the retained fractures, ascending.
    pub original_ids: Vec<usize>,
}

impl IsolationReport {
    pub fn retained_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.retained as f64 / self.total as f64
        }
    }
}

/// Keeps only fractures in the component joining SOURCE and SINK.
///
/// The result is renumbered contiguously; it is empty when the network does
/// not percolate.
pub fn remove_isolated<T: Real>(
    net: &FractureNetwork<T>,
    graph: &IntersectionGraph,
) -> (FractureNetwork<T>, IsolationReport) {
    let mut uf = graph.components();
    let keep: Vec<usize> = if uf.connected(graph.source(), graph.sink()) {
        let root = uf.find(graph.source());
        (0..graph.n_fractures).filter(|&i| uf.find(i) == root).collect()
    } else {
        Vec::new()
    };
    let report = IsolationReport {
        total: net.fractures.len(),
        retained: keep.len(),
        original_ids: keep.clone(),
    };
    (net.subset(&keep), report)
}
