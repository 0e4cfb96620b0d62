//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints its PASS/FAIL line; the process fails if any check does.

use std::sync::OnceLock;

use udfm::flow::{solve_flow, FlowBc, FlowSolverOptions, FlowField};
use udfm::mesh::{build_face_adjacency, build_mesh, equivalent_hex_count, FaceAdjacency, MeshParams, OctreeMesh};
use udfm::network::{radius_cdf, sample_orientation, sample_radius, FractureNetwork, GenerationParams};
use udfm::pipeline::{run_pipeline, IsolatedMode, RunConfig, Stage, Summary, SUMMARY_FILE};
use udfm::rng::RngStream;
use udfm::topology::mesh_percolates;
use udfm::transport::{
    normalize_by_time, run_transport, BreakthroughCurve, TimeSchedule, TracerParams, TransportOperator,
    DEFAULT_PEAK_PROMINENCE,
};
use udfm::upscale::{upscale_mesh, MatrixProperties, PorosityMode, PropertyField};
use udfm::{Aabb, Vec3};

fn verdict(id: u32, title: &str, ok: bool, detail: &str) -> bool {
    println!("{} criterion {id:>2}: {title} ({detail})", if ok { "PASS" } else { "FAIL" });
    ok
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Mesh, faces, upscaled properties and flow for one network at one orl.
struct Level {
    mesh: OctreeMesh<f64>,
    faces: FaceAdjacency<f64>,
    props: PropertyField<f64>,
    flow: FlowField<f64>,
}

fn solve_level(net: &FractureNetwork<f64>, orl: u8, k_m: f64) -> Level {
    let mesh = build_mesh(net, &MeshParams::new(5.0, orl)).unwrap();
    let faces = build_face_adjacency(&mesh, true).unwrap();
    let matrix = MatrixProperties { permeability: k_m, porosity: 0.01, porosity_mode: PorosityMode::Blended };
    let props = upscale_mesh(&mesh, net, &matrix, net.params.polygon_vertices).unwrap();
    let flow = solve_flow(&mesh, &faces, &props.permeabilities(), &FlowBc::default(), &FlowSolverOptions::default())
        .unwrap();
    Level { mesh, faces, props, flow }
}

fn conservative_btc(level: &Level, schedule: &TimeSchedule) -> BreakthroughCurve {
    let p = level.props.porosities();
    run_transport(&level.mesh, &level.faces, &p, &level.flow.face_flux, &TracerParams::conservative(), schedule)
        .unwrap()
        .btc
}

fn c01_equivalent_hex_counts() -> bool {
    let got: Vec<u64> = (1..=4).map(|orl| equivalent_hex_count(50.0, 5.0, orl)).collect();
    let want = [9261, 68921, 531441, 4173281];
    verdict(1, "equivalent hex counts", got == want, &format!("{got:?}"))
}

fn c02_sampling_fidelity() -> bool {
    const N: usize = 100_000;
    let params = GenerationParams::<f64>::full_scale();
    let mut rng = RngStream::new(2024, 0);
    let mut r: Vec<f64> = (0..N).map(|_| sample_radius(rng.uniform(), &params)).collect();
    r.sort_by(f64::total_cmp);
    let ks = r
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = radius_cdf(x, &params);
            (f - i as f64 / N as f64).abs().max(((i + 1) as f64 / N as f64 - f).abs())
        })
        .fold(0.0, f64::max);

    let mut rng = RngStream::new(2025, 1);
    let mean = Vec3::new(0.0, 0.0, 1.0);
    let mut sum = Vec3::zero();
    for _ in 0..N {
        sum += sample_orientation(&mut rng, 0.1, mean);
    }
    let resultant = sum.norm() / N as f64;
    verdict(
        2,
        "radius KS distance and vMF resultant",
        ks < 0.01 && resultant < 0.05,
        &format!("KS {ks:.2e} < 1e-2, resultant {resultant:.4} < 0.05"),
    )
}

fn c03_single_fracture_upscaling() -> bool {
    let net = udfm::scenarios::through_fracture::<f64>();
    let k_m = 1e-16;
    let f = &net.fractures[0];
    let length = net.params.domain_size;
    let b = f.aperture;
    // the disc covers the whole cross-section: one layer of aperture b in a
    // matrix slab, flow along the layer
    let analytic = ((length - b) * k_m + b * b * b / 12.0) / length;
    let volume_exact = length * length * b;
    let mut ok = true;
    let mut detail = Vec::new();
    let mut volumes = Vec::new();
    for orl in 1..=3 {
        let level = solve_level(&net, orl, k_m);
        let vf = level.props.summary.fracture_volume;
        let e = rel(level.flow.k_eff, analytic);
        ok &= e < 0.05 && rel(vf, volume_exact) < 0.01;
        volumes.push(vf);
        detail.push(format!("orl{orl}: k_eff err {e:.1e}, V_f {vf:.4e}"));
    }
    let spread = volumes.iter().map(|v| rel(*v, volumes[0])).fold(0.0, f64::max);
    ok &= spread < 0.01;
    detail.push(format!("V_f spread {spread:.1e}"));
    verdict(3, "single-fracture upscaling", ok, &detail.join("; "))
}

fn c04_flow_oracles() -> bool {
    let grid = |nx: u32, ny: u32, nz: u32| {
        let d = Aabb::new(Vec3::zero(), Vec3::new(nx as f64, ny as f64, nz as f64));
        let mesh = OctreeMesh::initial_grid(d, 1.0).unwrap();
        let faces = build_face_adjacency(&mesh, true).unwrap();
        (mesh, faces)
    };
    let solve = |m: &OctreeMesh<f64>, f: &FaceAdjacency<f64>, k: &[f64]| {
        solve_flow(m, f, k, &FlowBc::default(), &FlowSolverOptions::default()).unwrap()
    };
    let (k1, k2) = (1e-12, 1e-15);

    let (mesh, faces) = grid(10, 4, 3);
    let homogeneous = rel(solve(&mesh, &faces, &vec![3e-14; mesh.len()]).k_eff, 3e-14);

    let (mesh, faces) = grid(8, 3, 2);
    let k: Vec<f64> = mesh.cells.iter().map(|c| if c.bbox.center().x < 4.0 { k1 } else { k2 }).collect();
    let series_flow = solve(&mesh, &faces, &k);
    let series = rel(series_flow.k_eff, 2.0 / (1.0 / k1 + 1.0 / k2));

    let (mesh, faces) = grid(6, 4, 2);
    let k: Vec<f64> = mesh.cells.iter().map(|c| if c.bbox.center().y < 2.0 { k1 } else { k2 }).collect();
    let parallel_flow = solve(&mesh, &faces, &k);
    let parallel = rel(parallel_flow.k_eff, 0.5 * (k1 + k2));

    // heterogeneous runs: random lognormal blocks and fractured networks
    let mut bounds_ok = series_flow.within_bounds && parallel_flow.within_bounds;
    let (mesh, faces) = grid(9, 6, 5);
    for seed in 0..5 {
        let mut rng = RngStream::new(seed, 0);
        let k: Vec<f64> = (0..mesh.len()).map(|_| 10f64.powf(-18.0 + 6.0 * rng.uniform())).collect();
        bounds_ok &= solve(&mesh, &faces, &k).within_bounds;
    }
    for net in [udfm::scenarios::chain_network::<f64>(), udfm::scenarios::bridged_gap::<f64>()] {
        for orl in 1..=2 {
            bounds_ok &= solve_level(&net, orl, 1e-17).flow.within_bounds;
        }
    }
    verdict(
        4,
        "flow solver oracles",
        homogeneous < 1e-8 && series < 1e-6 && parallel < 1e-6 && bounds_ok,
        &format!("homogeneous {homogeneous:.1e}, series {series:.1e}, parallel {parallel:.1e}, Wiener bounds {bounds_ok}"),
    )
}

/// Desk-scale sweep shared by the trend and cell-count checks.
fn desk_sweep() -> &'static Summary {
    static SWEEP: OnceLock<Summary> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let mut config = RunConfig::desk();
        config.seeds = vec![1, 2, 3];
        config.p_primes = vec![1.0];
        config.orls = vec![1, 2, 3];
        config.k_m = vec![1e-16];
        config.isolated_modes = vec![IsolatedMode::Retained, IsolatedMode::Removed];
        config.write_vtk = false;
        config.stop_after = Stage::Flow;
        config.output_dir = dir.path().to_path_buf();
        let manifest = run_pipeline(&config).unwrap();
        assert!(manifest.summary.failures.is_empty(), "{:?}", manifest.summary.failures);
        manifest.summary
    })
}

fn c05_refinement_trends() -> bool {
    let summary = desk_sweep();
    let mut ok = true;
    let mut detail = Vec::new();
    for seed in [1, 2, 3] {
        let pick = |orl: u8| {
            let m = summary
                .meshes
                .iter()
                .find(|r| r.seed == seed && r.orl == orl && r.isolated == IsolatedMode::Retained)
                .unwrap();
            let f = summary
                .flows
                .iter()
                .find(|r| r.seed == seed && r.orl == orl && r.isolated == IsolatedMode::Retained)
                .unwrap();
            (m.false_pairs, f.k_eff)
        };
        let levels: Vec<(usize, f64)> = (1..=3).map(pick).collect();
        let k_fine = levels[2].1;
        let errors: Vec<f64> = levels.iter().map(|l| rel(l.1, k_fine)).collect();
        let f_ok = levels.windows(2).all(|w| w[1].0 <= w[0].0);
        let k_ok = levels.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9));
        let e_ok = errors.windows(2).all(|w| w[1] < w[0]);
        ok &= f_ok && k_ok && e_ok;
        detail.push(format!(
            "seed {seed}: #f {:?}, k_eff [{:.2e}, {:.2e}, {:.2e}], e [{:.2}, {:.2}, 0]",
            levels.iter().map(|l| l.0).collect::<Vec<_>>(),
            levels[0].1,
            levels[1].1,
            levels[2].1,
            errors[0],
            errors[1]
        ));
    }
    verdict(5, "monotone #f, k_eff and e_i over orl 1-3", ok, &detail.join("; "))
}

/// Gap network at k_m = 1e-18: coarse orl bridges the gap, finer ones do not.
fn bridged_levels() -> &'static Vec<Level> {
    static LEVELS: OnceLock<Vec<Level>> = OnceLock::new();
    LEVELS.get_or_init(|| {
        let net = udfm::scenarios::bridged_gap::<f64>();
        (1..=3).map(|orl| solve_level(&net, orl, 1e-18)).collect()
    })
}

fn percolates(level: &Level) -> bool {
    let flags: Vec<bool> = level.mesh.cells.iter().map(|c| c.is_fracture).collect();
    mesh_percolates(&level.mesh, &level.faces, &flags)
}

fn c06_global_topology_mismatch() -> bool {
    let net = udfm::scenarios::bridged_gap::<f64>();
    let graph = udfm::topology::build_intersection_graph(&net, udfm::geometry::DEFAULT_INTERSECTION_EPS, 32);
    let dfn = udfm::topology::dfn_percolates(&graph);
    let levels = bridged_levels();
    let perc: Vec<bool> = levels.iter().map(percolates).collect();
    let ratio = levels[0].flow.k_eff / levels[2].flow.k_eff;
    let ok = !dfn && perc == [true, false, false] && ratio >= 1e2;
    verdict(
        6,
        "coarse mesh bridges a non-spanning network",
        ok,
        &format!("DFN percolates {dfn}, mesh percolates {perc:?}, k_eff coarse/fine {ratio:.2e} >= 1e2"),
    )
}

fn c07_false_early_breakthrough() -> bool {
    let levels = bridged_levels();
    let schedule = TimeSchedule::log_spaced(1e-2, 1e6, 20);
    let curves: Vec<BreakthroughCurve> = levels.iter().map(|l| conservative_btc(l, &schedule)).collect();
    // time scale of the topology-matched (finest) mesh
    let reference = curves[2].main_peak().unwrap().time;
    let early = |btc: &BreakthroughCurve| -> Vec<f64> {
        let norm = normalize_by_time(btc, reference);
        btc.peaks(DEFAULT_PEAK_PROMINENCE)
            .iter()
            .map(|p| norm.time[p.index])
            .filter(|&t| t < 0.1)
            .collect()
    };
    let coarse = early(&curves[0]);
    let matched: Vec<Vec<f64>> = curves[1..].iter().map(early).collect();
    let ok = !coarse.is_empty() && matched.iter().all(Vec::is_empty);
    verdict(
        7,
        "coarse-mesh early peak absent on matched meshes",
        ok,
        &format!("reference peak {reference:.3e} yr, coarse early peaks {coarse:?}, matched {matched:?}"),
    )
}

fn c08_transport_ledgers() -> bool {
    // heterogeneous fractured case for the ledgers
    let net = udfm::scenarios::through_fracture::<f64>();
    let level = solve_level(&net, 2, 1e-16);
    let phi = level.props.porosities();
    let schedule = TimeSchedule::log_spaced(1e-2, 1e6, 10);
    let ledger = |p: TracerParams| {
        let res = run_transport(&level.mesh, &level.faces, &phi, &level.flow.face_flux, &p, &schedule).unwrap();
        res.btc.ledger_error() / res.btc.injected_mass
    };
    let cons = ledger(TracerParams::conservative());
    let decay = ledger(TracerParams::decaying(100.0));

    // 1D channel: sorbing run at R dt equals the conservative run at dt, scaled by 1/R
    let r = 4000.0;
    let d = Aabb::new(Vec3::zero(), Vec3::new(100.0, 1.0, 1.0));
    let line = OctreeMesh::initial_grid(d, 1.0).unwrap();
    let line_faces = build_face_adjacency(&line, true).unwrap();
    let flow = solve_flow(&line, &line_faces, &vec![1e-12; line.len()], &FlowBc::default(), &FlowSolverOptions::default())
        .unwrap();
    let line_phi = vec![0.1; line.len()];
    let make = |p: TracerParams| TransportOperator::new(&line, &line_faces, &line_phi, &flow.face_flux, &p).unwrap();
    let (a, b) = (make(TracerParams::conservative()), make(TracerParams::sorbing(r)));
    let (mut ca, mut cb) = (a.pulse(1.0).unwrap(), b.pulse(1.0).unwrap());
    let mut dt = 1e6;
    let mut worst: f64 = 0.0;
    for _ in 0..60 {
        a.step(&mut ca, dt).unwrap();
        b.step(&mut cb, r * dt).unwrap();
        let cmax = ca.iter().copied().fold(0.0, f64::max);
        let diff = ca.iter().zip(&cb).map(|(x, y)| (x - r * y).abs()).fold(0.0, f64::max);
        worst = worst.max(diff / cmax);
        dt *= 1.2;
    }

    // homogeneous block: sorbing peak arrives R times later
    let d = Aabb::new(Vec3::zero(), Vec3::new(20.0, 2.0, 2.0));
    let block = OctreeMesh::initial_grid(d, 1.0).unwrap();
    let block_faces = build_face_adjacency(&block, true).unwrap();
    let flow = solve_flow(&block, &block_faces, &vec![1e-12; block.len()], &FlowBc::default(), &FlowSolverOptions::default())
        .unwrap();
    let block_phi = vec![0.05; block.len()];
    let peak = |p: TracerParams, s: TimeSchedule| {
        let res = run_transport(&block, &block_faces, &block_phi, &flow.face_flux, &p, &s).unwrap();
        res.btc.main_peak().unwrap().time
    };
    let tc = peak(TracerParams::conservative(), TimeSchedule::log_spaced(0.01, 1e3, 50));
    let ts = peak(TracerParams::sorbing(r), TimeSchedule::log_spaced(10.0, 1e7, 50));
    let delay = (ts / tc) / r - 1.0;

    let ok = cons <= 1e-6 && decay <= 1e-6 && worst <= 1e-8 && delay.abs() < 0.1;
    verdict(
        8,
        "transport ledgers, rescaling symmetry and retardation delay",
        ok,
        &format!(
            "conservative ledger {cons:.1e}, decay ledger {decay:.1e}, rescaling {worst:.1e}, delay/R - 1 = {delay:+.3}"
        ),
    )
}

fn c09_cell_count_economy() -> bool {
    let summary = desk_sweep();
    let rows: Vec<_> = summary
        .meshes
        .iter()
        .filter(|r| r.orl == 3 && r.isolated == IsolatedMode::Removed && r.dfn_percolates)
        .collect();
    let ok = !rows.is_empty() && rows.iter().all(|r| r.vc_over_n <= 60.0);
    let detail: Vec<String> =
        rows.iter().map(|r| format!("seed {}: {} cells, vc/n {:.1}%", r.seed, r.cells, r.vc_over_n)).collect();
    verdict(9, "cell count with isolated fractures removed at orl 3", ok, &detail.join("; "))
}

fn c10_determinism() -> bool {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let mut config = RunConfig::desk();
        config.seeds = vec![2, 5];
        config.orls = vec![1, 2];
        config.tracers = vec![TracerParams::conservative()];
        config.schedule = TimeSchedule::log_spaced(1e-2, 1e4, 5);
        config.write_vtk = false;
        config.output_dir = dir.path().to_path_buf();
        let manifest = run_pipeline(&config).unwrap();
        let networks: Vec<Vec<u8>> = ["seed2_p1/network.jsonl", "seed5_p1/network.jsonl"]
            .iter()
            .map(|p| std::fs::read(dir.path().join(p)).unwrap())
            .collect();
        let summary = std::fs::read(dir.path().join(SUMMARY_FILE)).unwrap();
        (networks, summary, manifest)
    };
    let (n1, s1, m1) = run();
    let (n2, s2, m2) = run();
    let ok = n1 == n2 && s1 == s2 && m1 == m2 && n1[0] != n1[1] && !m1.summary.transports.is_empty();
    verdict(
        10,
        "byte-identical reruns",
        ok,
        &format!("{} network bytes, {} summary bytes, {} artifacts", n1[0].len() + n1[1].len(), s1.len(), m1.artifacts.len()),
    )
}

fn main() {
    let checks: [fn() -> bool; 10] = [c01_equivalent_hex_counts, c02_sampling_fidelity, c03_single_fracture_upscaling, c04_flow_oracles, c05_refinement_trends, c06_global_topology_mismatch, c07_false_early_breakthrough, c08_transport_ledgers, c09_cell_count_economy, c10_determinism];
    let passed = checks.iter().filter(|check| check()).count();
    println!("acceptance: {passed}/{} criteria passed", checks.len());
    if passed != checks.len() {
        std::process::exit(1);
    }
}
