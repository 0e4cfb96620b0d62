use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::IntersectionGraph;

/// How `#f` counts a non-intersecting pair that shares several cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairCounting {
    /// Each unordered pair once, network-wide.
    #[default]
    NetworkUnique,
    /// Every (pair, cell) incidence.
    PerCell,
}

/// False-connection diagnostics of one mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalseConnectionReport {
    /// `#f`: non-intersecting fracture pairs sharing a control volume.
    pub num_false_pairs: usize,
    /// `fc`: cells holding at least one such pair.
    pub cells_with_false: usize,
    pub fracture_cells: usize,
    /// `vc`: all control volumes.
    pub total_cells: usize,
    /// `n`: equivalent uniform hexahedral count.
    pub equivalent_cells: u64,
    /// `fc / vc` in percent.
    pub fc_over_vc: f64,
    /// `vc / n` in percent.
    pub vc_over_n: f64,
}

impl FalseConnectionReport {
    pub const CSV_HEADER: &'static str = "p_prime,num_false,fc,vc,fc_over_vc_pct,vc_over_n_pct";

    pub fn csv_row(&self, p_prime: f64) -> String {
        format!(
            "{p_prime},{},{},{},{:.2},{:.2}",
            self.num_false_pairs, self.cells_with_false, self.total_cells, self.fc_over_vc, self.vc_over_n
        )
    }
}

/// Counts fracture pairs that co-occupy a cell without intersecting.
///
/// `cell_fractures[c]` lists the fractures crossing cell `c`; `total_cells`
/// and `equivalent_cells` feed the percentage columns.
pub fn count_false_connections(
    cell_fractures: &[Vec<usize>],
    graph: &IntersectionGraph,
    total_cells: usize,
    equivalent_cells: u64,
    counting: PairCounting,
) -> FalseConnectionReport {
    let mut pairs = HashSet::new();
    let mut incidences = 0usize;
    let mut cells_with_false = 0usize;
    for ids in cell_fractures {
        let mut any = false;
        for (x, &a) in ids.iter().enumerate() {
            for &b in &ids[x + 1..] {
                if !graph.has_edge(a, b) {
                    any = true;
                    incidences += 1;
                    pairs.insert((a.min(b), a.max(b)));
                }
            }
        }
        if any {
            cells_with_false += 1;
        }
    }
    let num_false_pairs = match counting {
        PairCounting::NetworkUnique => pairs.len(),
        PairCounting::PerCell => incidences,
    };
    let pct = |a: f64, b: f64| if b > 0.0 { 100.0 * a / b } else { 0.0 };
    FalseConnectionReport {
        num_false_pairs,
        cells_with_false,
        fracture_cells: cell_fractures.iter().filter(|c| !c.is_empty()).count(),
        total_cells,
        equivalent_cells,
        fc_over_vc: pct(cells_with_false as f64, total_cells as f64),
        vc_over_n: pct(total_cells as f64, equivalent_cells as f64),
    }
}
