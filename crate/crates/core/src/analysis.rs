//! Distribution fitting, convergence studies and summary statistics.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gen::CircuitClass;
use crate::rng::{derive_seed, BenchRng};
use crate::sim::{output_probabilities, ProbabilityTable};

pub const DEFAULT_BINS: usize = 50;

/// ℓ1 distance between the histogram of all probabilities in `tables` and
/// the exponential density `N e^{-N x}`, `N = 2^n`, using `bins` equal-width
/// bins over `[0, max]`.
pub fn exponential_l1_fit(tables: &[ProbabilityTable], bins: usize) -> Result<f64> {
    let first = tables.first().ok_or(Error::EmptyInput("tables"))?;
    let n = first.n_qubits();
    if let Some(t) = tables.iter().find(|t| t.n_qubits() != n) {
        return Err(Error::WidthMismatch {
            left: n,
            right: t.n_qubits(),
        });
    }
    if bins == 0 {
        return Err(Error::OutOfRange("bin count must be positive".into()));
    }
    let values = tables.iter().flat_map(|t| t.probs().iter().copied());
    exponential_l1_of_values(values, n, bins)
}

fn exponential_l1_of_values(values: impl Iterator<Item = f64> + Clone, n: usize, bins: usize) -> Result<f64> {
    let max = values.clone().fold(0., f64::max);
    let total = values.clone().count();
    if total == 0 {
        return Err(Error::EmptyInput("probabilities"));
    }
    let big_n = (n as f64).exp2();
    let mut counts = vec![0usize; bins];
    if max > 0. {
        let width = max / bins as f64;
        for v in values {
            let k = ((v / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
    } else {
        counts[0] = total;
    }
    let width = max / bins as f64;
    let dist = counts
        .iter()
        .enumerate()
        .map(|(k, &cnt)| {
            let (lo, hi) = (k as f64 * width, (k + 1) as f64 * width);
            let model = (-big_n * lo).exp() - (-big_n * hi).exp();
            (cnt as f64 / total as f64 - model).abs()
        })
        .sum();
    Ok(dist)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitCurve {
    pub n_qubits: usize,
    pub layer_counts: Vec<usize>,
    pub distances: Vec<f64>,
}

/// Exponential-fit distance of ideal output tables as a function of layer
/// count. Circuit `i` at layer count `l` uses seed
/// `derive_seed(seed, [class tag, n, l, i])`.
pub fn layer_convergence(
    class: CircuitClass,
    n: usize,
    layer_range: &[usize],
    circuits_per_point: usize,
    seed: u64,
) -> Result<FitCurve> {
    if class == CircuitClass::Shallow {
        return Err(Error::Config("shallow circuits have no layer parameter".into()));
    }
    if circuits_per_point == 0 {
        return Err(Error::EmptyInput("circuits per point"));
    }
    let mut distances = Vec::with_capacity(layer_range.len());
    for &layers in layer_range {
        let tables = (0..circuits_per_point)
            .into_par_iter()
            .map(|i| {
                let s = derive_seed(seed, &[class.seed_tag(), n as u64, layers as u64, i as u64]);
                let c = class.generate(n, Some(layers), &mut BenchRng::from_seed(s))?;
                output_probabilities(&c)
            })
            .collect::<Result<Vec<_>>>()?;
        distances.push(exponential_l1_fit(&tables, DEFAULT_BINS)?);
    }
    Ok(FitCurve {
        n_qubits: n,
        layer_counts: layer_range.to_vec(),
        distances,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub mean: f64,
    pub count: usize,
}

/// Inclusive linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Quartiles, 1.5·IQR whiskers (at the furthest data point inside the
/// fence), mean and count.
pub fn box_stats(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::EmptyInput("values"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::OutOfRange("NaN in box statistics input".into()));
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let (q1, median, q3) = (quantile(&s, 0.25), quantile(&s, 0.5), quantile(&s, 0.75));
    let iqr = q3 - q1;
    let whisker_lo = s.iter().copied().find(|&v| v >= q1 - 1.5 * iqr).unwrap_or(q1).min(q1);
    let whisker_hi = s
        .iter()
        .rev()
        .copied()
        .find(|&v| v <= q3 + 1.5 * iqr)
        .unwrap_or(q3)
        .max(q3);
    Ok(BoxStats {
        q1,
        median,
        q3,
        whisker_lo,
        whisker_hi,
        mean: s.iter().sum::<f64>() / s.len() as f64,
        count: s.len(),
    })
}

pub const PASS_THRESHOLD: f64 = 2. / 3.;

/// Largest width whose mean HOG reaches `threshold`.
pub fn largest_passing_width(mean_hog_by_n: &BTreeMap<usize, f64>, threshold: f64) -> Option<usize> {
    mean_hog_by_n
        .iter()
        .rev()
        .find(|(_, &h)| h >= threshold)
        .map(|(&n, _)| n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub r: f64,
    pub slope: f64,
    pub intercept: f64,
}

/// Pearson correlation and least-squares line `y = slope·x + intercept`.
pub fn correlation_regression(xs: &[f64], ys: &[f64]) -> Result<Regression> {
    if xs.len() != ys.len() {
        return Err(Error::WidthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(Error::OutOfRange(format!("need at least 3 points, got {}", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0., 0., 0.);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0. || syy <= 0. {
        return Err(Error::DegenerateVariance);
    }
    let slope = sxy / sxx;
    Ok(Regression {
        r: sxy / (sxx * syy).sqrt(),
        slope,
        intercept: my - slope * mx,
    })
}

/// Ranks starting at 1, ties sharing their average rank.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2. + 1.;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    Ok(correlation_regression(&ranks(xs), &ranks(ys))?.r)
}
