//! Fracture connectivity: intersection graph, percolation, isolated-cluster
//! removal and false connections introduced by upscaling.

mod false_connections;
mod graph;
mod mesh_percolation;
mod union_find;

pub use false_connections::{count_false_connections, FalseConnectionReport, PairCounting};
pub use graph::{
    build_intersection_graph, dfn_percolates, remove_isolated, IntersectionGraph, IsolationReport,
};
pub use mesh_percolation::mesh_percolates;
pub use union_find::UnionFind;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::mesh::{build_face_adjacency, build_mesh, MeshParams};
    use crate::network::{generate_network, Fracture, FractureNetwork, GenerationParams};
    use crate::scenarios;

    fn desk(fractures: Vec<Fracture<f64>>) -> FractureNetwork<f64> {
        FractureNetwork::from_fractures(fractures, GenerationParams::desk_defaults())
    }

    fn graph(net: &FractureNetwork<f64>) -> IntersectionGraph {
        build_intersection_graph(net, 1e-9, 32)
    }

    #[test]
    fn empty_network_graph() {
        let g = graph(&desk(vec![]));
        assert_eq!(g.node_count(), 2);
        assert!(g.edges.is_empty());
        assert!(!dfn_percolates(&g));
    }

    #[test]
    fn chain_percolates_and_breaks() {
        let net = scenarios::chain_network::<f64>();
        let g = graph(&net);
        assert!(g.has_edge(0, g.source()));
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2));
        assert!(g.has_edge(2, g.sink()));
        assert!(!g.has_edge(0, 2));
        assert!(dfn_percolates(&g));

        let without_b = net.subset(&[0, 2]);
        assert!(!dfn_percolates(&graph(&without_b)));
    }

    #[test]
    fn disjoint_discs_have_no_edge() {
        let a = Fracture::new(0, Vec3::new(-3.0, 0.0, 0.0), Vec3::unit(0), 1.0, 5e-4);
        let b = Fracture::new(1, Vec3::new(3.0, 0.0, 0.0), Vec3::unit(1), 1.0, 5e-4);
        assert!(graph(&desk(vec![a, b])).edges.is_empty());
    }

    #[test]
    fn remove_isolated_keeps_spanning_cluster() {
        let mut fr = scenarios::chain_network::<f64>().fractures;
        fr.push(Fracture::new(3, Vec3::new(0.0, 8.0, 8.0), Vec3::unit(2), 1.0, 5e-4));
        let net = desk(fr);
        let g = graph(&net);
        let (kept, rep) = remove_isolated(&net, &g);
        assert_eq!(rep.original_ids, vec![0, 1, 2]);
        assert_eq!(kept.len(), 3);
        assert!((rep.retained_fraction() - 0.75).abs() < 1e-15);

        let g2 = graph(&kept);
        let (again, rep2) = remove_isolated(&kept, &g2);
        assert_eq!(again, kept);
        assert_eq!(rep2.original_ids, vec![0, 1, 2]);
        assert_eq!(dfn_percolates(&g2), dfn_percolates(&g));
    }

    #[test]
    fn non_percolating_network_is_emptied() {
        let net = scenarios::chain_network::<f64>().subset(&[0, 2]);
        let (kept, rep) = remove_isolated(&net, &graph(&net));
        assert!(kept.is_empty());
        assert_eq!(rep.retained, 0);
    }

    #[test]
    fn percolation_invariant_under_removal() {
        for seed in 0..6 {
            let mut p = GenerationParams::<f64>::desk_defaults();
            p.n_fractures = 250;
            p.seed = seed;
            let net = generate_network(&p).unwrap();
            let g = graph(&net);
            let (kept, _) = remove_isolated(&net, &g);
            assert_eq!(dfn_percolates(&graph(&kept)), dfn_percolates(&g));
        }
    }

    #[test]
    fn false_connection_counting_modes() {
        // pairs (0,1) intersect, (0,2) and (1,2) do not
        let g = IntersectionGraph::from_edges(3, [(0, 1)]);
        let cells = vec![vec![0, 1], vec![0, 1, 2], vec![0, 2], vec![]];
        let r = count_false_connections(&cells, &g, 4, 10, PairCounting::NetworkUnique);
        assert_eq!(r.num_false_pairs, 2);
        assert_eq!(r.cells_with_false, 2);
        assert_eq!(r.fracture_cells, 3);
        assert!((r.fc_over_vc - 50.0).abs() < 1e-12);
        assert!((r.vc_over_n - 40.0).abs() < 1e-12);
        let r = count_false_connections(&cells, &g, 4, 10, PairCounting::PerCell);
        assert_eq!(r.num_false_pairs, 3);

        let r = count_false_connections(&[vec![0, 1]], &g, 1, 1, PairCounting::NetworkUnique);
        assert_eq!((r.num_false_pairs, r.cells_with_false), (0, 0));
    }

    fn brute_force_shared_cells(net: &FractureNetwork<f64>, edge: f64) -> usize {
        // enumerate every cell of the uniform grid and test both discs
        let polys: Vec<_> = net.fractures.iter().map(|f| f.polygon(32)).collect();
        let n = (net.params.domain_size / edge).round() as u32;
        let lo = net.domain.min;
        let mut shared = 0;
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let min = lo + Vec3::new(i as f64, j as f64, k as f64) * edge;
                    let b = crate::geometry::Aabb::new(min, min + Vec3::new(edge, edge, edge));
                    if polys
                        .iter()
                        .all(|p| crate::geometry::polygon_intersects_box(p, &b))
                    {
                        shared += 1;
                    }
                }
            }
        }
        shared
    }

    #[test]
    fn parallel_pair_false_connection() {
        let net = scenarios::parallel_pair::<f64>();
        let g = graph(&net);
        assert!(g.edges.is_empty());

        let coarse = build_mesh(&net, &MeshParams::new(2.5, 0)).unwrap();
        let cells: Vec<_> = coarse.cells.iter().map(|c| c.fracture_ids.clone()).collect();
        let r = count_false_connections(&cells, &g, coarse.len(), 1, PairCounting::NetworkUnique);
        assert_eq!(r.num_false_pairs, 1);
        assert!(r.cells_with_false >= 1);
        assert_eq!(r.cells_with_false, brute_force_shared_cells(&net, 2.5));

        let fine = build_mesh(&net, &MeshParams::new(5.0, 5)).unwrap();
        let cells: Vec<_> = fine.cells.iter().map(|c| c.fracture_ids.clone()).collect();
        let r = count_false_connections(&cells, &g, fine.len(), 1, PairCounting::NetworkUnique);
        assert_eq!(r.num_false_pairs, 0);
        assert_eq!(brute_force_shared_cells(&net, 0.156_25), 0);
        assert!(r.cells_with_false <= r.total_cells);
    }

    #[test]
    fn mesh_percolation_cases() {
        let empty = desk(vec![]);
        let m = build_mesh(&empty, &MeshParams::new(5.0, 1)).unwrap();
        let adj = build_face_adjacency(&m, true).unwrap();
        assert!(!mesh_percolates(&m, &adj, &vec![false; m.len()]));

        let through = scenarios::through_fracture::<f64>();
        let m = build_mesh(&through, &MeshParams::new(5.0, 2)).unwrap();
        let adj = build_face_adjacency(&m, true).unwrap();
        let flags: Vec<bool> = m.cells.iter().map(|c| c.is_fracture).collect();
        assert!(mesh_percolates(&m, &adj, &flags));
    }

    #[test]
    fn bridged_gap_percolates_only_when_coarse() {
        let net = scenarios::bridged_gap::<f64>();
        assert!(!dfn_percolates(&graph(&net)));
        let verdict = |orl| {
            let m = build_mesh(&net, &MeshParams::new(5.0, orl)).unwrap();
            let adj = build_face_adjacency(&m, true).unwrap();
            let flags: Vec<bool> = m.cells.iter().map(|c| c.is_fracture).collect();
            mesh_percolates(&m, &adj, &flags)
        };
        assert!(verdict(1));
        assert!(!verdict(2));
        assert!(!verdict(3));
    }

    #[test]
    fn false_pairs_non_increasing_under_refinement() {
        let mut p = GenerationParams::<f64>::desk_defaults();
        p.n_fractures = 120;
        p.seed = 4;
        let net = generate_network(&p).unwrap();
        let g = graph(&net);
        let mut last = usize::MAX;
        for orl in 0..=3u8 {
            let m = build_mesh(&net, &MeshParams::new(5.0, orl)).unwrap();
            let cells: Vec<_> = m.cells.iter().map(|c| c.fracture_ids.clone()).collect();
            let r = count_false_connections(&cells, &g, m.len(), 1, PairCounting::NetworkUnique);
            assert!(r.num_false_pairs <= last);
            last = r.num_false_pairs;
        }
    }
}
