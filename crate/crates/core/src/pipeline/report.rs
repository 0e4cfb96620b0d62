use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{IsolatedMode, Manifest, MeshRow, PipelineError};
use crate::flow::keff_error_factor;

/// Agreement between the mesh and DFN percolation verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PercolationClass {
    Match,
    /// Mesh percolates although the DFN does not.
    FalsePercolation,
    /// DFN percolates but the mesh does not.
    LostPercolation,
}

impl PercolationClass {
    pub fn classify(dfn: bool, mesh: bool) -> Self {
        match (dfn, mesh) {
            (false, true) => Self::FalsePercolation,
            (true, false) => Self::LostPercolation,
            _ => Self::Match,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Match => "match",
            Self::FalsePercolation => "false_percolation",
            Self::LostPercolation => "lost_percolation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tables {
    /// Network size and intensity per density.
    pub networks_csv: String,
    /// False connections and cell counts per orl.
    pub false_connections_csv: String,
    /// DFN vs mesh percolation per orl.
    pub percolation_csv: String,
    /// Effective permeability per orl with the error against the finest orl.
    pub permeability_csv: String,
    pub markdown: String,
}

fn sign(b: bool) -> &'static str {
    if b {
        "+"
    } else {
        "-"
    }
}

type GroupKey = (u64, String, IsolatedMode);

fn group_key(r: &MeshRow) -> GroupKey {
    (r.seed, r.p_prime.to_string(), r.isolated)
}

pub fn report_tables(manifest: &Manifest) -> Tables {
    let s = &manifest.summary;
    let mut md = String::new();

    let mut networks_csv = String::from("seed,p_prime,n,n_retained,retained_fraction,p32,p32_retained\n");
    md.push_str("## Networks\n\n| seed | p' | N | N retained | ratio | P32 | P32 retained |\n|---|---|---|---|---|---|---|\n");
    for r in &s.networks {
        let ratio = if r.n_generated > 0 { r.n_retained as f64 / r.n_generated as f64 } else { 0.0 };
        let _ = writeln!(
            networks_csv,
            "{},{},{},{},{ratio:.4},{:.4},{:.4}",
            r.seed, r.p_prime, r.n_generated, r.n_retained, r.p32, r.p32_retained
        );
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {ratio:.2} | {:.3} | {:.3} |",
            r.seed, r.p_prime, r.n_generated, r.n_retained, r.p32, r.p32_retained
        );
    }

    let mut false_connections_csv =
        String::from("seed,p_prime,isolated,orl,num_false,fc,vc,fc_over_vc_pct,n,vc_over_n_pct\n");
    md.push_str("\n## False connections\n\n| seed | p' | isolated | orl | #f | fc | vc | fc/vc % | n | vc/n % |\n|---|---|---|---|---|---|---|---|---|---|\n");
    for r in &s.meshes {
        let _ = writeln!(
            false_connections_csv,
            "{},{},{},{},{},{},{},{:.2},{},{:.2}",
            r.seed,
            r.p_prime,
            r.isolated.name(),
            r.orl,
            r.false_pairs,
            r.cells_with_false,
            r.cells,
            r.fc_over_vc,
            r.equivalent_cells,
            r.vc_over_n
        );
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} | {} | {} | {:.2} | {} | {:.2} |",
            r.seed,
            r.p_prime,
            r.isolated.name(),
            r.orl,
            r.false_pairs,
            r.cells_with_false,
            r.cells,
            r.fc_over_vc,
            r.equivalent_cells,
            r.vc_over_n
        );
    }

    let orls: BTreeSet<u8> = s.meshes.iter().map(|r| r.orl).collect();
    let groups: BTreeSet<GroupKey> = s.meshes.iter().map(group_key).collect();
    let mut percolation_csv = String::from("seed,p_prime,isolated,orl,dfn_percolates,mesh_percolates,class\n");
    md.push_str("\n## Percolation (DFN / mesh)\n\n| seed | p' | isolated | DFN |");
    for o in &orls {
        let _ = write!(md, " orl {o} |");
    }
    md.push_str("\n|---|---|---|---|");
    md.push_str(&"---|".repeat(orls.len()));
    md.push('\n');
    for g in &groups {
        let rows: Vec<&MeshRow> = s.meshes.iter().filter(|r| group_key(r) == *g).collect();
        let dfn = rows.first().is_some_and(|r| r.dfn_percolates);
        let _ = write!(md, "| {} | {} | {} | {} |", g.0, g.1, g.2.name(), sign(dfn));
        for o in &orls {
            match rows.iter().find(|r| r.orl == *o) {
                Some(r) => {
                    let class = PercolationClass::classify(r.dfn_percolates, r.mesh_percolates);
                    let _ = writeln!(
                        percolation_csv,
                        "{},{},{},{},{},{},{}",
                        r.seed,
                        r.p_prime,
                        r.isolated.name(),
                        r.orl,
                        r.dfn_percolates,
                        r.mesh_percolates,
                        class.name()
                    );
                    let mark = if class == PercolationClass::Match { "" } else { " (mismatch)" };
                    let _ = write!(md, " {}{mark} |", sign(r.mesh_percolates));
                }
                None => md.push_str(" |"),
            }
        }
        md.push('\n');
    }

    let mut permeability_csv = String::from("seed,p_prime,isolated,k_m,orl,k_eff,error_vs_finest,within_bounds\n");
    md.push_str("\n## Effective permeability\n\n| seed | p' | isolated | k_m | orl | k_eff | error vs finest |\n|---|---|---|---|---|---|---|\n");
    for r in &s.flows {
        let finest = s
            .flows
            .iter()
            .filter(|o| o.seed == r.seed && o.p_prime == r.p_prime && o.isolated == r.isolated && o.k_m == r.k_m)
            .max_by_key(|o| o.orl)
            .map_or(r.k_eff, |o| o.k_eff);
        let e = keff_error_factor(r.k_eff, finest);
        let _ = writeln!(
            permeability_csv,
            "{},{},{},{:e},{},{:e},{e:.4},{}",
            r.seed,
            r.p_prime,
            r.isolated.name(),
            r.k_m,
            r.orl,
            r.k_eff,
            r.within_bounds
        );
        let _ = writeln!(
            md,
            "| {} | {} | {} | {:.0e} | {} | {:.3e} | {e:.3} |",
            r.seed,
            r.p_prime,
            r.isolated.name(),
            r.k_m,
            r.orl,
            r.k_eff
        );
    }
    if !s.failures.is_empty() {
        md.push_str("\n## Failures\n\n");
        for f in &s.failures {
            let _ = writeln!(md, "- seed {} p' {} stage {}: {}", f.seed, f.p_prime, f.stage.name(), f.message);
        }
    }
    Tables { networks_csv, false_connections_csv, percolation_csv, permeability_csv, markdown: md }
}

/// Writes the tables next to the manifest and returns the file paths.
pub fn write_tables(dir: &Path, tables: &Tables) -> Result<Vec<PathBuf>, PipelineError> {
    let files = [
        ("table_networks.csv", &tables.networks_csv),
        ("table_false_connections.csv", &tables.false_connections_csv),
        ("table_percolation.csv", &tables.percolation_csv),
        ("table_permeability.csv", &tables.permeability_csv),
        ("report.md", &tables.markdown),
    ];
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for (name, text) in files {
        let p = dir.join(name);
        std::fs::write(&p, text)?;
        out.push(p);
    }
    Ok(out)
}
