//! Figures of merit: heavy-output generation, cross-entropy difference and
//! ℓ1 distance, all scored against an ideal probability table.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{ProbabilityTable, SampleSet};

/// Outcomes whose ideal probability is strictly above the median of all
/// `2^n` ideal probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct HeavySet {
    pub median: f64,
    heavy: Vec<bool>,
}

impl HeavySet {
    pub fn contains(&self, x: u64) -> bool {
        self.heavy.get(x as usize).copied().unwrap_or(false)
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.heavy.iter().enumerate().filter(|(_, &h)| h).map(|(x, _)| x as u64)
    }

    pub fn len(&self) -> usize {
        self.heavy.iter().filter(|&&h| h).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Median of a non-empty slice; even lengths average the two central values.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

pub fn heavy_set(table: &ProbabilityTable) -> HeavySet {
    let median = median(table.probs());
    HeavySet {
        median,
        heavy: table.probs().iter().map(|&p| p > median).collect(),
    }
}

fn check_widths(samples: &SampleSet, table: &ProbabilityTable) -> Result<()> {
    if samples.n_qubits() != table.n_qubits() {
        return Err(Error::WidthMismatch {
            left: samples.n_qubits(),
            right: table.n_qubits(),
        });
    }
    if samples.shots() == 0 {
        return Err(Error::EmptyInput("sample set has no shots"));
    }
    Ok(())
}

/// Fraction of samples that are heavy outputs of `table`.
pub fn hog_probability(samples: &SampleSet, table: &ProbabilityTable) -> Result<f64> {
    check_widths(samples, table)?;
    let heavy = heavy_set(table);
    let hits: u64 = samples.iter().filter(|&(x, _)| heavy.contains(x)).map(|(_, c)| c).sum();
    Ok(hits as f64 / samples.shots() as f64)
}

/// Total ideal probability carried by the heavy outputs.
pub fn ideal_hog(table: &ProbabilityTable) -> f64 {
    let heavy = heavy_set(table);
    heavy.members().map(|x| table.prob(x)).sum()
}

/// `ln(1 / max(p, 2^{-n²}))`, evaluated without forming the clamp value.
#[inline]
fn surprise(p: f64, n: usize) -> f64 {
    let floor_log = (n * n) as f64 * LN_2;
    if p > 0. && -p.ln() < floor_log {
        -p.ln()
    } else {
        floor_log
    }
}

/// Sample estimate of the cross entropy `CE(D, p)`.
pub fn cross_entropy(samples: &SampleSet, table: &ProbabilityTable) -> Result<f64> {
    check_widths(samples, table)?;
    let n = table.n_qubits();
    let total: f64 = samples.iter().map(|(x, c)| c as f64 * surprise(table.prob(x), n)).sum();
    Ok(total / samples.shots() as f64)
}

/// Exact `CE(U, p)` for the uniform distribution `U`, by enumeration.
pub fn uniform_cross_entropy(table: &ProbabilityTable) -> f64 {
    let n = table.n_qubits();
    table.probs().iter().map(|&p| surprise(p, n)).sum::<f64>() / table.dim() as f64
}

/// Cross-entropy difference `CE(U, p) − CE(D, p)`.
pub fn ced(samples: &SampleSet, table: &ProbabilityTable) -> Result<f64> {
    Ok(uniform_cross_entropy(table) - cross_entropy(samples, table)?)
}

/// `Σ_x |s_x / k − p(x)|` over every bitstring, observed or not.
pub fn l1_distance(samples: &SampleSet, table: &ProbabilityTable) -> Result<f64> {
    check_widths(samples, table)?;
    let k = samples.shots() as f64;
    let mut unobserved_mass: f64 = table.probs().iter().sum();
    let mut observed = 0.;
    for (x, c) in samples.iter() {
        let p = table.prob(x);
        unobserved_mass -= p;
        observed += (c as f64 / k - p).abs();
    }
    Ok(observed + unobserved_mass.max(0.))
}

pub fn l1_between(a: &ProbabilityTable, b: &ProbabilityTable) -> Result<f64> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::WidthMismatch {
            left: a.n_qubits(),
            right: b.n_qubits(),
        });
    }
    Ok(a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).abs()).sum())
}

/// Device heavy-output probability relative to the ideal circuit's.
pub fn normalized_hog(device_hog: f64, ideal: f64) -> Result<f64> {
    if ideal <= 0. {
        return Err(Error::DivisionByZero("ideal heavy output probability is zero"));
    }
    Ok(device_hog / ideal)
}

/// One scored circuit execution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub circuit_id: String,
    pub class: String,
    pub n_qubits: usize,
    pub strategy: String,
    pub backend: String,
    pub hog: f64,
    pub ideal_hog: f64,
    pub ced: f64,
    pub l1: f64,
    pub shots: u64,
}

impl MetricRecord {
    /// Normalized HOG, or `None` when the ideal heavy set is empty.
    pub fn normalized_hog(&self) -> Option<f64> {
        normalized_hog(self.hog, self.ideal_hog).ok()
    }
}

/// Scores `samples` against `table`.
pub fn score(samples: &SampleSet, table: &ProbabilityTable) -> Result<(f64, f64, f64, f64)> {
    Ok((
        hog_probability(samples, table)?,
        ideal_hog(table),
        ced(samples, table)?,
        l1_distance(samples, table)?,
    ))
}
