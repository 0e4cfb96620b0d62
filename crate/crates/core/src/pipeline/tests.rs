use super::*;
use crate::transport::{TimeSchedule, TracerParams};

fn small(dir: &std::path::Path) -> RunConfig {
    let mut c = RunConfig::desk();
    c.p_primes = vec![0.2];
    c.orls = vec![0, 1];
    c.tracers = vec![TracerParams::conservative()];
    c.schedule = TimeSchedule::log_spaced(1e-2, 1e3, 5);
    c.output_dir = dir.to_path_buf();
    c.write_vtk = false;
    c
}

#[test]
fn config_round_trip() {
    let c = RunConfig::full_scale();
    let back: RunConfig = serde_json::from_str(&c.to_json()).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.hash(), c.hash());
    let mut other = c.clone();
    other.output_dir = "elsewhere".into();
    assert_eq!(other.hash(), c.hash());
    other.phi_m = 0.02;
    assert_ne!(other.hash(), c.hash());
}

#[test]
fn config_validation() {
    let mut c = RunConfig::desk();
    assert!(c.validate().is_ok());
    c.seeds.clear();
    assert!(c.validate().is_err());
    let mut c = RunConfig::desk();
    c.k_m = vec![-1.0];
    assert!(c.validate().is_err());
}

#[test]
fn empty_network_gives_matrix_permeability() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small(dir.path());
    c.p_primes.clear();
    c.generation.n_fractures = 0;
    c.orls = vec![1];
    let m = run_pipeline(&c).unwrap();
    assert!(m.summary.failures.is_empty());
    assert_eq!(m.summary.flows.len(), 1);
    let k = m.summary.flows[0].k_eff;
    assert!((k - 1e-16).abs() < 1e-8 * 1e-16);
}

#[test]
fn grid_rows_and_determinism() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let mut c = small(d1.path());
    c.seeds = vec![3, 4];
    let m1 = run_pipeline(&c).unwrap();
    assert_eq!(m1.summary.networks.len(), 2);
    assert_eq!(m1.summary.flows.len(), 4);
    assert_eq!(m1.summary.transports.len(), 4);
    assert!(m1.verify(d1.path()).unwrap().is_empty());

    c.output_dir = d2.path().to_path_buf();
    let m2 = run_pipeline(&c).unwrap();
    assert_eq!(m1, m2);
    let s1 = std::fs::read(d1.path().join(SUMMARY_FILE)).unwrap();
    let s2 = std::fs::read(d2.path().join(SUMMARY_FILE)).unwrap();
    assert_eq!(s1, s2);

    let t1 = report_tables(&m1);
    let t2 = report_tables(&Manifest::load(d1.path()).unwrap());
    assert_eq!(t1, t2);
    assert_eq!(t1.false_connections_csv.lines().count(), 5);
    let files = write_tables(d1.path(), &t1).unwrap();
    assert_eq!(files.len(), 5);
}

#[test]
fn stop_after_mesh_skips_flow() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small(dir.path());
    c.stop_after = Stage::Mesh;
    c.write_vtk = true;
    let m = run_pipeline(&c).unwrap();
    assert_eq!(m.summary.meshes.len(), 2);
    assert!(m.summary.flows.is_empty());
    assert!(m.artifacts.iter().any(|a| a.path.ends_with("mesh.vtk")));
}

#[test]
fn classification_rule() {
    assert_eq!(PercolationClass::classify(false, true), PercolationClass::FalsePercolation);
    assert_eq!(PercolationClass::classify(true, false), PercolationClass::LostPercolation);
    assert_eq!(PercolationClass::classify(true, true), PercolationClass::Match);
    assert_eq!(PercolationClass::classify(false, false), PercolationClass::Match);
}

#[test]
fn empty_manifest_gives_empty_tables() {
    let m = Manifest { config_hash: String::new(), artifacts: vec![], summary: Summary::default() };
    let t = report_tables(&m);
    assert_eq!(t.networks_csv.lines().count(), 1);
    assert_eq!(t.percolation_csv.lines().count(), 1);
}

#[test]
fn mismatch_row_is_flagged() {
    let row = MeshRow {
        seed: 1,
        p_prime: 0.5,
        isolated: IsolatedMode::Retained,
        orl: 1,
        cells: 10,
        fracture_cells: 3,
        false_pairs: 2,
        cells_with_false: 1,
        equivalent_cells: 27,
        fc_over_vc: 10.0,
        vc_over_n: 37.0,
        mesh_percolates: true,
        dfn_percolates: false,
    };
    let mut s = Summary::default();
    s.meshes.push(row.clone());
    s.meshes.push(MeshRow { orl: 3, mesh_percolates: false, ..row });
    let t = report_tables(&Manifest { config_hash: String::new(), artifacts: vec![], summary: s });
    assert!(t.percolation_csv.contains("1,0.5,retained,1,false,true,false_percolation"));
    assert!(t.percolation_csv.contains("1,0.5,retained,3,false,false,match"));
    assert!(t.markdown.contains("+ (mismatch)"));
}
