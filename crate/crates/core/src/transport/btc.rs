use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{TracerKind, TransportError};

/// Outflow history sampled at the output times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakthroughCurve {
    pub kind: TracerKind,
    pub injected_mass: f64,
    pub times_yr: Vec<f64>,
    /// mol/yr through the outlet plane.
    pub mass_rate: Vec<f64>,
    /// mol through the outlet plane up to each time.
    pub cumulative: Vec<f64>,
    /// mol still in the domain (dissolved and sorbed).
    pub in_domain: Vec<f64>,
    /// mol removed by decay.
    pub decayed: Vec<f64>,
    /// mol that left against the mean flow through the inlet plane.
    pub backflow: Vec<f64>,
}

impl BreakthroughCurve {
    pub fn len(&self) -> usize {
        self.times_yr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_yr.is_empty()
    }

    /// Largest `|out + in_domain + decayed + backflow - M0| / M0` over all
    /// outputs.
    pub fn ledger_error(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let total = self.cumulative[i] + self.in_domain[i] + self.decayed[i] + self.backflow[i];
                (total - self.injected_mass).abs()
            })
            .fold(0.0, f64::max)
            / self.injected_mass
    }

    pub fn peaks(&self, min_prominence: f64) -> Vec<Peak> {
        find_peaks(&self.times_yr, &self.mass_rate, min_prominence)
    }

    /// Highest sample of the curve.
    pub fn main_peak(&self) -> Option<Peak> {
        let (i, &rate) = self.mass_rate.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
        (rate > 0.0).then(|| Peak { index: i, time: self.times_yr[i], rate, prominence: rate })
    }

    /// Writes `time_yr,mass_rate_mol_per_yr,cumulative_mol,normalized_time,
    /// normalized_rate` plus the run labels in `tags` as trailing columns.
    pub fn write_csv(
        &self,
        path: &Path,
        normalized: Option<&NormalizedCurve>,
        tags: &[(&str, String)],
    ) -> Result<(), TransportError> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(w, "time_yr,mass_rate_mol_per_yr,cumulative_mol,normalized_time,normalized_rate,tracer_kind")?;
        for (k, _) in tags {
            write!(w, ",{k}")?;
        }
        writeln!(w)?;
        for i in 0..self.len() {
            let (nt, nr) = normalized.map_or((f64::NAN, f64::NAN), |n| (n.time[i], n.rate[i]));
            write!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{}",
                self.times_yr[i],
                self.mass_rate[i],
                self.cumulative[i],
                nt,
                nr,
                self.kind.name()
            )?;
            for (_, v) in tags {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    pub time: f64,
    pub rate: f64,
    /// Height above the higher of the two flanking minima.
    pub prominence: f64,
}

/// Default prominence threshold relative to the curve maximum.
pub const DEFAULT_PEAK_PROMINENCE: f64 = 0.05;

/// Local maxima whose prominence is at least `min_prominence` times the
/// global maximum, in time order.
pub fn find_peaks(times: &[f64], rates: &[f64], min_prominence: f64) -> Vec<Peak> {
    let n = rates.len();
    let top = rates.iter().copied().fold(0.0, f64::max);
    if n == 0 || !(top > 0.0) {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < n {
        // a plateau counts once, at its first sample
        let mut j = i;
        while j + 1 < n && rates[j + 1] == rates[i] {
            j += 1;
        }
        let left_lower = i == 0 || rates[i - 1] < rates[i];
        let right_lower = j + 1 == n || rates[j + 1] < rates[i];
        if left_lower && right_lower && rates[i] > 0.0 {
            let h = rates[i];
            let mut left_min = h;
            for k in (0..i).rev() {
                if rates[k] > h {
                    break;
                }
                left_min = left_min.min(rates[k]);
            }
            let mut right_min = h;
            for &r in &rates[j + 1..] {
                if r > h {
                    break;
                }
                right_min = right_min.min(r);
            }
            // a flank running off the end of the record bottoms out at zero
            if i == 0 {
                left_min = 0.0;
            }
            if j + 1 == n {
                right_min = 0.0;
            }
            let prominence = h - left_min.max(right_min);
            if prominence >= min_prominence * top {
                peaks.push(Peak { index: i, time: times[i], rate: h, prominence });
            }
        }
        i = j + 1;
    }
    peaks
}

/// Rates over `M0` against time over a reference peak time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedCurve {
    pub reference_peak_yr: f64,
    pub time: Vec<f64>,
    /// 1/yr.
    pub rate: Vec<f64>,
}

pub fn normalize_btc(btc: &BreakthroughCurve, reference: &BreakthroughCurve) -> Result<NormalizedCurve, TransportError> {
    let peak = reference.main_peak().ok_or(TransportError::FlatReference)?;
    Ok(normalize_by_time(btc, peak.time))
}

pub fn normalize_by_time(btc: &BreakthroughCurve, reference_peak_yr: f64) -> NormalizedCurve {
    NormalizedCurve {
        reference_peak_yr,
        time: btc.times_yr.iter().map(|t| t / reference_peak_yr).collect(),
        rate: btc.mass_rate.iter().map(|r| r / btc.injected_mass).collect(),
    }
}
