use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{IsolatedMode, PipelineError, RunConfig, Stage};
use crate::flow::solve_flow;
use crate::mesh::{build_face_adjacency, build_mesh, equivalent_hex_count, write_cells_csv, write_vtk, CellData, MeshParams};
use crate::network::{
    critical_fracture_count, generate_network, io::write_network, network_intensity, FractureNetwork,
    IntensityOptions,
};
use crate::topology::{
    build_intersection_graph, count_false_connections, dfn_percolates, mesh_percolates, remove_isolated, PairCounting,
};
use crate::transport::{normalize_by_time, run_transport, BreakthroughCurve, TracerKind};
use crate::upscale::{upscale_mesh, write_properties_csv, MatrixProperties};

/// One generated network and its cluster statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRow {
    pub seed: u64,
    pub p_prime: f64,
    pub n_generated: usize,
    /// Fractures in the inlet-outlet cluster.
    pub n_retained: usize,
    pub p32: f64,
    pub p32_retained: f64,
    pub dfn_percolates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshRow {
    pub seed: u64,
    pub p_prime: f64,
    pub isolated: IsolatedMode,
    pub orl: u8,
    pub cells: usize,
    pub fracture_cells: usize,
    pub false_pairs: usize,
    pub cells_with_false: usize,
    pub equivalent_cells: u64,
    pub fc_over_vc: f64,
    pub vc_over_n: f64,
    pub mesh_percolates: bool,
    pub dfn_percolates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRow {
    pub seed: u64,
    pub p_prime: f64,
    pub isolated: IsolatedMode,
    pub orl: u8,
    pub k_m: f64,
    pub k_eff: f64,
    pub q_in: f64,
    pub q_out: f64,
    pub iterations: usize,
    pub residual: f64,
    pub within_bounds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportRow {
    pub seed: u64,
    pub p_prime: f64,
    pub isolated: IsolatedMode,
    pub orl: u8,
    pub k_m: f64,
    pub tracer: TracerKind,
    pub peak_time_yr: Option<f64>,
    pub peak_rate: Option<f64>,
    /// Peak times normalized by the reference conservative peak.
    pub normalized_peaks: Vec<f64>,
    pub ledger_error: f64,
    pub btc_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub seed: u64,
    pub p_prime: f64,
    pub isolated: Option<IsolatedMode>,
    pub orl: Option<u8>,
    pub k_m: Option<f64>,
    pub stage: Stage,
    pub message: String,
}

/// Every numeric result of a sweep. Contains no timings, so identical configs
/// give identical summaries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub networks: Vec<NetworkRow>,
    pub meshes: Vec<MeshRow>,
    pub flows: Vec<FlowRow>,
    pub transports: Vec<TransportRow>,
    pub failures: Vec<RunFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub artifacts: Vec<Artifact>,
    pub summary: Summary,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.json";

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Re-hashes every listed file; returns the paths whose content changed.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>, PipelineError> {
        let mut bad = Vec::new();
        for a in &self.artifacts {
            if file_sha256(&dir.join(&a.path))? != a.sha256 {
                bad.push(a.path.clone());
            }
        }
        Ok(bad)
    }
}

pub fn file_sha256(path: &Path) -> Result<String, PipelineError> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

struct Outputs {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn create(&mut self, rel: &Path) -> Result<BufWriter<File>, PipelineError> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        self.files.push(rel.to_path_buf());
        Ok(BufWriter::new(File::create(path)?))
    }

    fn register(&mut self, rel: &Path) -> Result<PathBuf, PipelineError> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        self.files.push(rel.to_path_buf());
        Ok(path)
    }
}

fn fmt_float(x: f64) -> String {
    format!("{x:e}")
}

/// Runs the whole grid, writing artifacts below `config.output_dir` and
/// returning the manifest (also written as `manifest.json`).
pub fn run_pipeline(config: &RunConfig) -> Result<Manifest, PipelineError> {
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir)?;
    let mut out = Outputs { root: config.output_dir.clone(), files: Vec::new() };
    {
        use std::io::Write;
        // stored relative so copies of the directory stay self-consistent
        let mut stored = config.clone();
        stored.output_dir = PathBuf::from(".");
        let mut w = out.create(Path::new(CONFIG_FILE))?;
        w.write_all(stored.to_json().as_bytes())?;
        w.flush()?;
    }
    let mut summary = Summary::default();
    let gen = &config.generation;
    let critical = critical_fracture_count(gen, gen.domain_size);
    let densities: Vec<(f64, usize)> = if config.p_primes.is_empty() {
        vec![(critical.density_of(gen.n_fractures), gen.n_fractures)]
    } else {
        config.p_primes.iter().map(|&p| (p, critical.count_for_density(p))).collect()
    };
    for &seed in &config.seeds {
        for &(p_prime, n) in &densities {
            run_network(config, seed, p_prime, n, &mut out, &mut summary)?;
        }
    }
    let summary_rel = Path::new(SUMMARY_FILE);
    {
        use std::io::Write;
        let mut w = out.create(summary_rel)?;
        serde_json::to_writer_pretty(&mut w, &summary)?;
        w.flush()?;
    }
    let mut artifacts = Vec::with_capacity(out.files.len());
    for rel in &out.files {
        let path = out.root.join(rel);
        artifacts.push(Artifact {
            path: rel.to_string_lossy().replace('\\', "/"),
            sha256: file_sha256(&path)?,
            bytes: std::fs::metadata(&path)?.len(),
        });
    }
    let manifest = Manifest { config_hash: config.hash(), artifacts, summary };
    std::fs::write(out.root.join(MANIFEST_FILE), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest)
}

fn run_network(
    config: &RunConfig,
    seed: u64,
    p_prime: f64,
    n: usize,
    out: &mut Outputs,
    summary: &mut Summary,
) -> Result<(), PipelineError> {
    let fail = |stage: Stage, isolated, orl, k_m, e: String| RunFailure {
        seed,
        p_prime,
        isolated,
        orl,
        k_m,
        stage,
        message: e,
    };
    let mut params = config.generation.clone();
    params.seed = seed;
    params.n_fractures = n;
    let net = match generate_network(&params) {
        Ok(net) => net,
        Err(e) => {
            log::error!("seed {seed}, p' {p_prime}: generation failed: {e}");
            summary.failures.push(fail(Stage::Generate, None, None, None, e.to_string()));
            return Ok(());
        }
    };
    let dir = PathBuf::from(format!("seed{seed}_p{p_prime}"));
    write_network(&net, out.create(&dir.join("network.jsonl"))?)?;

    let m = params.polygon_vertices;
    let graph = build_intersection_graph(&net, config.intersection_eps, m);
    let (cluster, report) = remove_isolated(&net, &graph);
    let percolates = dfn_percolates(&graph);
    let opts = IntensityOptions { polygon_vertices: m, double_sided: false };
    summary.networks.push(NetworkRow {
        seed,
        p_prime,
        n_generated: net.len(),
        n_retained: report.retained,
        p32: network_intensity(&net, opts),
        p32_retained: network_intensity(&cluster, opts),
        dfn_percolates: percolates,
    });
    log::info!(
        "seed {seed}, p' {p_prime}: {} fractures, {} in spanning cluster, DFN percolates: {percolates}",
        net.len(),
        report.retained
    );
    if config.stop_after == Stage::Generate {
        return Ok(());
    }
    for &mode in &config.isolated_modes {
        let (work, work_graph) = match mode {
            IsolatedMode::Retained => (&net, graph.clone()),
            IsolatedMode::Removed => (&cluster, build_intersection_graph(&cluster, config.intersection_eps, m)),
        };
        let ctx = NetworkContext { seed, p_prime, mode, net: work, graph: &work_graph, dir: dir.join(mode.name()) };
        run_mode(config, &ctx, out, summary)?;
    }
    Ok(())
}

struct NetworkContext<'a> {
    seed: u64,
    p_prime: f64,
    mode: IsolatedMode,
    net: &'a FractureNetwork<f64>,
    graph: &'a crate::topology::IntersectionGraph,
    dir: PathBuf,
}

fn run_mode(config: &RunConfig, ctx: &NetworkContext<'_>, out: &mut Outputs, summary: &mut Summary) -> Result<(), PipelineError> {
    let (seed, p_prime, mode) = (ctx.seed, ctx.p_prime, ctx.mode);
    let m = config.generation.polygon_vertices;
    let dfn = dfn_percolates(ctx.graph);
    // curves grouped by matrix permeability, normalized once every orl ran
    let mut curves: BTreeMap<usize, Vec<(u8, BreakthroughCurve, usize)>> = BTreeMap::new();
    for &orl in &config.orls {
        let failure = |stage: Stage, k_m: Option<f64>, message: String| RunFailure {
            seed,
            p_prime,
            isolated: Some(mode),
            orl: Some(orl),
            k_m,
            stage,
            message,
        };
        let mesh_params = MeshParams {
            cell_size: config.mesh.cell_size,
            refinement_levels: orl,
            balance_2to1: config.mesh.balance_2to1,
            polygon_vertices: m,
        };
        let mesh = match build_mesh(ctx.net, &mesh_params) {
            Ok(mesh) => mesh,
            Err(e) => {
                summary.failures.push(failure(Stage::Mesh, None, e.to_string()));
                continue;
            }
        };
        let faces = match build_face_adjacency(&mesh, config.mesh.balance_2to1) {
            Ok(f) => f,
            Err(e) => {
                summary.failures.push(failure(Stage::Mesh, None, e.to_string()));
                continue;
            }
        };
        let cell_lists: Vec<Vec<usize>> = mesh.cells.iter().map(|c| c.fracture_ids.clone()).collect();
        let n_equiv = equivalent_hex_count(
            config.generation.domain_size,
            config.mesh.cell_size,
            u32::from(orl),
        );
        let fc = count_false_connections(&cell_lists, ctx.graph, mesh.len(), n_equiv, PairCounting::NetworkUnique);
        let flags: Vec<bool> = mesh.cells.iter().map(|c| c.is_fracture).collect();
        let mesh_perc = mesh_percolates(&mesh, &faces, &flags);
        summary.meshes.push(MeshRow {
            seed,
            p_prime,
            isolated: mode,
            orl,
            cells: mesh.len(),
            fracture_cells: fc.fracture_cells,
            false_pairs: fc.num_false_pairs,
            cells_with_false: fc.cells_with_false,
            equivalent_cells: n_equiv,
            fc_over_vc: fc.fc_over_vc,
            vc_over_n: fc.vc_over_n,
            mesh_percolates: mesh_perc,
            dfn_percolates: dfn,
        });
        let orl_dir = ctx.dir.join(format!("orl{orl}"));
        write_cells_csv(&mesh, out.create(&orl_dir.join("cells.csv"))?)?;
        if config.write_vtk && config.stop_after == Stage::Mesh {
            write_vtk(&mesh, &[], out.create(&orl_dir.join("mesh.vtk"))?)?;
        }
        if config.stop_after == Stage::Mesh {
            continue;
        }
        for (ki, &k_m) in config.k_m.iter().enumerate() {
            let km_dir = orl_dir.join(format!("km{}", fmt_float(k_m)));
            let matrix = MatrixProperties { permeability: k_m, porosity: config.phi_m, porosity_mode: config.porosity_mode };
            let props = match upscale_mesh(&mesh, ctx.net, &matrix, m) {
                Ok(p) => p,
                Err(e) => {
                    summary.failures.push(failure(Stage::Upscale, Some(k_m), e.to_string()));
                    continue;
                }
            };
            let props_path = out.register(&km_dir.join("properties.csv"))?;
            write_properties_csv(&props_path, &props)?;
            let perm = props.permeabilities();
            let phi = props.porosities();
            let flow = if config.stop_after >= Stage::Flow {
                match solve_flow(&mesh, &faces, &perm, &config.flow_bc, &config.solver) {
                    Ok(f) => Some(f),
                    Err(e) => {
                        summary.failures.push(failure(Stage::Flow, Some(k_m), e.to_string()));
                        None
                    }
                }
            } else {
                None
            };
            if config.write_vtk {
                let is_frac: Vec<f64> = props.cells.iter().map(|c| c.fracture_porosity).collect();
                let mut fields = vec![
                    CellData::Float("permeability", &perm),
                    CellData::Float("porosity", &phi),
                    CellData::Float("fracture_porosity", &is_frac),
                ];
                if let Some(f) = &flow {
                    fields.push(CellData::Float("pressure", &f.pressure));
                }
                write_vtk(&mesh, &fields, out.create(&km_dir.join("mesh.vtk"))?)?;
            }
            let Some(flow) = flow else { continue };
            summary.flows.push(FlowRow {
                seed,
                p_prime,
                isolated: mode,
                orl,
                k_m,
                k_eff: flow.k_eff,
                q_in: flow.q_in,
                q_out: flow.q_out,
                iterations: flow.iterations,
                residual: flow.residual,
                within_bounds: flow.within_bounds,
            });
            if config.stop_after < Stage::Transport {
                continue;
            }
            for tracer in &config.tracers {
                match run_transport(&mesh, &faces, &phi, &flow.face_flux, tracer, &config.schedule) {
                    Ok(res) => curves.entry(ki).or_default().push((orl, res.btc, summary.transports.len())),
                    Err(e) => {
                        summary.failures.push(failure(Stage::Transport, Some(k_m), e.to_string()));
                        continue;
                    }
                }
                let btc = &curves[&ki].last().unwrap().1;
                let peak = btc.main_peak();
                summary.transports.push(TransportRow {
                    seed,
                    p_prime,
                    isolated: mode,
                    orl,
                    k_m,
                    tracer: tracer.kind,
                    peak_time_yr: peak.map(|p| p.time),
                    peak_rate: peak.map(|p| p.rate),
                    normalized_peaks: Vec::new(),
                    ledger_error: btc.ledger_error(),
                    btc_file: km_dir.join(format!("btc_{}.csv", tracer.kind.name())).to_string_lossy().replace('\\', "/"),
                });
            }
        }
    }
    // time axis of every curve: peak of the conservative curve at the
    // coarsest orl of the same matrix permeability
    for (ki, group) in curves {
        let k_m = config.k_m[ki];
        let reference = group
            .iter()
            .filter(|(_, b, _)| b.kind == TracerKind::Conservative)
            .min_by_key(|(orl, _, _)| *orl)
            .and_then(|(_, b, _)| b.main_peak())
            .map(|p| p.time);
        for (orl, btc, row) in group {
            let norm = reference.map(|t| normalize_by_time(&btc, t));
            let tags = [
                ("seed", seed.to_string()),
                ("p_prime", p_prime.to_string()),
                ("orl", orl.to_string()),
                ("k_m", fmt_float(k_m)),
                ("isolated_mode", mode.name().to_string()),
            ];
            let rel = PathBuf::from(&summary.transports[row].btc_file);
            let path = out.register(&rel)?;
            btc.write_csv(&path, norm.as_ref(), &tags)?;
            if let Some(t) = reference {
                summary.transports[row].normalized_peaks =
                    btc.peaks(config.peak_prominence).iter().map(|p| p.time / t).collect();
            }
        }
    }
    Ok(())
}
