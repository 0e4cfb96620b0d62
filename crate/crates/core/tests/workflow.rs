use udfm::flow::{solve_flow, FlowBc, FlowSolverOptions};
use udfm::mesh::{build_face_adjacency, build_mesh};
use udfm::network::io::{read_network, write_network};
use udfm::network::{generate_network, network_intensity, IntensityOptions};
use udfm::pipeline::{report_tables, run_pipeline, PercolationClass, RunConfig, Stage};
use udfm::upscale::{upscale_mesh, MatrixProperties, PorosityMode};
use udfm::{GenerationParams, MeshParams};

#[test]
fn network_file_round_trip_is_exact() {
    let mut params = GenerationParams::desk_defaults();
    params.seed = 11;
    params.n_fractures = 60;
    let net = generate_network(&params).unwrap();
    let mut buf = Vec::new();
    write_network(&net, &mut buf).unwrap();
    let back = read_network::<f64, _>(buf.as_slice()).unwrap();
    assert_eq!(back.fractures, net.fractures);
    let mut again = Vec::new();
    write_network(&back, &mut again).unwrap();
    assert_eq!(buf, again);
}

#[test]
fn single_precision_pipeline_matches_double() {
    let net64 = udfm::scenarios::through_fracture::<f64>();
    let net32 = udfm::scenarios::through_fracture::<f32>();
    let mesh64 = build_mesh(&net64, &MeshParams::new(5.0, 2)).unwrap();
    let mesh32 = build_mesh(&net32, &udfm::f32::MeshParams::new(5.0, 2)).unwrap();
    assert_eq!(mesh64.len(), mesh32.len());
    assert_eq!(mesh64.fracture_cell_count(), mesh32.fracture_cell_count());

    let m64 = MatrixProperties { permeability: 1e-16, porosity: 0.01, porosity_mode: PorosityMode::Blended };
    let m32 = MatrixProperties { permeability: 1e-16f32, porosity: 0.01, porosity_mode: PorosityMode::Blended };
    let p64 = upscale_mesh(&mesh64, &net64, &m64, 32).unwrap();
    let p32 = upscale_mesh(&mesh32, &net32, &m32, 32).unwrap();
    let v64 = p64.summary.fracture_volume;
    let v32 = p32.summary.fracture_volume;
    assert!((v64 - v32).abs() / v64 < 1e-5, "{v64} {v32}");

    let f64_faces = build_face_adjacency(&mesh64, true).unwrap();
    let f32_faces = build_face_adjacency(&mesh32, true).unwrap();
    let bc = FlowBc::default();
    let opts = FlowSolverOptions::default();
    let k64 = solve_flow(&mesh64, &f64_faces, &p64.permeabilities(), &bc, &opts).unwrap().k_eff;
    let k32 = solve_flow(&mesh32, &f32_faces, &p32.permeabilities(), &bc, &opts).unwrap().k_eff;
    assert!((k64 - k32).abs() / k64 < 1e-4, "{k64} {k32}");
}

#[test]
fn intensity_of_clipped_through_fracture() {
    let net = udfm::scenarios::through_fracture::<f64>();
    let opts = IntensityOptions { polygon_vertices: 32, double_sided: false };
    let p32 = network_intensity(&net, opts);
    // a 25 m square in a 25 m cube
    assert!((p32 - 1.0 / 25.0).abs() < 1e-12);
    let both = network_intensity(&net, IntensityOptions { double_sided: true, ..opts });
    assert!((both - 2.0 * p32).abs() < 1e-15);
}

#[test]
fn report_flags_coarse_bridging_as_false_percolation() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig::desk();
    config.seeds = vec![1];
    config.p_primes = vec![1.0];
    config.orls = vec![1, 3];
    config.stop_after = Stage::Mesh;
    config.write_vtk = false;
    config.output_dir = dir.path().to_path_buf();
    let manifest = run_pipeline(&config).unwrap();
    assert!(manifest.verify(dir.path()).unwrap().is_empty());
    // seed 1 at critical density does not span, but its dense coarse mesh does
    let rows = &manifest.summary.meshes;
    assert!(!rows[0].dfn_percolates && rows[0].mesh_percolates);
    assert_eq!(PercolationClass::classify(rows[0].dfn_percolates, rows[0].mesh_percolates), PercolationClass::FalsePercolation);
    let tables = report_tables(&manifest);
    assert!(tables.percolation_csv.contains(PercolationClass::FalsePercolation.name()));
    assert_eq!(report_tables(&manifest), tables);
}
