//! CSV plot data with optional minimal SVG renderings.
//!
//! Column orders:
//! - `box.csv`: class, width, strategy, backend, metric, q1, median, q3,
//!   whisker_lo, whisker_hi, mean, count
//! - `scatter.csv`: l1, normalized_hog, class, width, then `#` footer lines
//!   with the regression parameters
//! - `convergence.csv`: width, layers, distance

use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{correlation_regression, FitCurve, Regression};
use crate::error::Result;
use crate::harness::{GroupSummary, ResultRow};

pub enum PlotData<'a> {
    Box(&'a [GroupSummary]),
    Scatter(&'a [ResultRow]),
    Convergence(&'a [FitCurve]),
}

pub fn box_csv(summary: &[GroupSummary]) -> String {
    let mut s = String::from("class,width,strategy,backend,metric,q1,median,q3,whisker_lo,whisker_hi,mean,count\n");
    for g in summary {
        for (m, b) in g.metrics() {
            writeln!(
                s,
                "{},{},{},{},{m},{},{},{},{},{},{},{}",
                g.class,
                g.width,
                g.strategy,
                g.backend,
                b.q1,
                b.median,
                b.q3,
                b.whisker_lo,
                b.whisker_hi,
                b.mean,
                b.count
            )
            .unwrap();
        }
    }
    s
}

fn scatter_points(rows: &[ResultRow]) -> Vec<(f64, f64, String, usize)> {
    rows.iter()
        .filter_map(|r| {
            let m = r.metrics.as_ref()?;
            Some((m.l1, m.normalized_hog()?, m.class.clone(), r.width))
        })
        .collect()
}

/// Scatter points plus the regression footer; the footer reads `none` when
/// the fit is undefined.
pub fn scatter_csv(rows: &[ResultRow]) -> String {
    let pts = scatter_points(rows);
    let mut s = String::from("l1,normalized_hog,class,width\n");
    for (x, y, c, w) in &pts {
        writeln!(s, "{x},{y},{c},{w}").unwrap();
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    match correlation_regression(&xs, &ys) {
        Ok(Regression { r, slope, intercept }) => {
            writeln!(s, "# r,{r}\n# slope,{slope}\n# intercept,{intercept}").unwrap()
        }
        Err(_) => s.push_str("# r,none\n# slope,none\n# intercept,none\n"),
    }
    s
}

pub fn convergence_csv(curves: &[FitCurve]) -> String {
    let mut s = String::from("width,layers,distance\n");
    for c in curves {
        for (l, d) in c.layer_counts.iter().zip(&c.distances) {
            writeln!(s, "{},{l},{d}", c.n_qubits).unwrap();
        }
    }
    s
}

const W: f64 = 640.;
const H: f64 = 400.;
const PAD: f64 = 50.;

fn svg_frame(body: &str, title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\">{title}</text>\n\
         <line x1=\"{PAD}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{}\" stroke=\"black\"/>\n{body}</svg>\n",
        W / 2.,
        H - PAD,
        W - PAD,
        H - PAD,
        H - PAD
    )
}

fn scale(v: f64, lo: f64, hi: f64, out_lo: f64, out_hi: f64) -> f64 {
    if hi > lo {
        out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo)
    } else {
        (out_lo + out_hi) / 2.
    }
}

/// Boxes of the HOG distribution per group, with the mean as a circle.
pub fn box_svg(summary: &[GroupSummary]) -> String {
    let mut body = String::new();
    let k = summary.len().max(1) as f64;
    let slot = (W - 2. * PAD) / k;
    let y = |v: f64| scale(v, 0., 1., H - PAD, PAD);
    for (i, g) in summary.iter().enumerate() {
        let b = &g.hog;
        let cx = PAD + slot * (i as f64 + 0.5);
        let half = slot * 0.3;
        writeln!(
            body,
            "<line x1=\"{cx}\" y1=\"{}\" x2=\"{cx}\" y2=\"{}\" stroke=\"black\"/>\n\
             <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#9ecae1\" stroke=\"black\"/>\n\
             <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"2\"/>\n\
             <circle cx=\"{cx}\" cy=\"{}\" r=\"3\" fill=\"white\" stroke=\"black\"/>\n\
             <text x=\"{cx}\" y=\"{}\" text-anchor=\"middle\">{} n={}</text>",
            y(b.whisker_lo),
            y(b.whisker_hi),
            cx - half,
            y(b.q3),
            2. * half,
            (y(b.q1) - y(b.q3)).max(0.5),
            cx - half,
            y(b.median),
            cx + half,
            y(b.median),
            y(b.mean),
            H - PAD + 15.,
            g.strategy,
            g.width
        )
        .unwrap();
    }
    let pass = y(2. / 3.);
    writeln!(
        body,
        "<line x1=\"{PAD}\" y1=\"{pass}\" x2=\"{}\" y2=\"{pass}\" stroke=\"red\" stroke-dasharray=\"4\"/>",
        W - PAD
    )
    .unwrap();
    svg_frame(&body, "heavy output probability")
}

/// Normalised HOG against ℓ1 with the least-squares line.
pub fn scatter_svg(rows: &[ResultRow]) -> String {
    let pts = scatter_points(rows);
    let (xmax, ymax) = pts.iter().fold((0.0f64, 0.0f64), |(a, b), p| (a.max(p.0), b.max(p.1)));
    let (xmax, ymax) = (xmax.max(1e-9), ymax.max(1e-9));
    let sx = |v: f64| scale(v, 0., xmax, PAD, W - PAD);
    let sy = |v: f64| scale(v, 0., ymax, H - PAD, PAD);
    let mut body = String::new();
    for (x, y, _, _) in &pts {
        writeln!(
            body,
            "<circle cx=\"{}\" cy=\"{}\" r=\"2\" fill=\"#3182bd\"/>",
            sx(*x),
            sy(*y)
        )
        .unwrap();
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    if let Ok(r) = correlation_regression(&xs, &ys) {
        writeln!(
            body,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"red\"/>",
            sx(0.),
            sy(r.intercept),
            sx(xmax),
            sy(r.intercept + r.slope * xmax)
        )
        .unwrap();
    }
    svg_frame(&body, "normalised HOG vs l1 distance")
}

/// Writes the CSV for `data` into `dir`, plus an SVG for box and scatter
/// data when `svg` is set. Returns the written paths.
pub fn emit_plot_data(dir: impl AsRef<Path>, data: &PlotData, svg: bool) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let (stem, csv, pic) = match data {
        PlotData::Box(s) => ("box", box_csv(s), svg.then(|| box_svg(s))),
        PlotData::Scatter(r) => ("scatter", scatter_csv(r), svg.then(|| scatter_svg(r))),
        PlotData::Convergence(c) => ("convergence", convergence_csv(c), None),
    };
    let mut out = vec![dir.join(format!("{stem}.csv"))];
    fs::write(&out[0], csv)?;
    if let Some(p) = pic {
        let path = dir.join(format!("{stem}.svg"));
        fs::write(&path, p)?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::CircuitClass;
    use crate::harness::summarize;
    use crate::metrics::MetricRecord;

    fn rows() -> Vec<ResultRow> {
        (0..6)
            .map(|i| ResultRow {
                class: CircuitClass::Square,
                width: 3 + i % 2,
                index: i,
                strategy: "noise_aware".into(),
                backend: "ideal".into(),
                experiment_seed: 0,
                circuit_seed: i as u64,
                device: None,
                swaps: None,
                cx_count: None,
                metrics: Some(MetricRecord {
                    circuit_id: i.to_string(),
                    class: "square".into(),
                    n_qubits: 3 + i % 2,
                    strategy: "noise_aware".into(),
                    backend: "ideal".into(),
                    hog: 0.5 + 0.05 * i as f64,
                    ideal_hog: 0.8,
                    ced: 0.5,
                    l1: 0.6 - 0.1 * i as f64,
                    shots: 100,
                }),
                error: None,
            })
            .collect()
    }

    #[test]
    fn box_rows_per_group_and_metric() {
        let s = summarize(&rows()).unwrap();
        let csv = box_csv(&s);
        assert_eq!(csv.lines().count(), 1 + 2 * 5);
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("square,3,noise_aware,ideal,hog,"));
    }

    #[test]
    fn scatter_has_footer() {
        let csv = scatter_csv(&rows());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "l1,normalized_hog,class,width");
        assert_eq!(lines.len(), 1 + 6 + 3);
        let r: f64 = lines[7].trim_start_matches("# r,").parse().unwrap();
        assert!((r + 1.).abs() < 1e-12);
    }

    #[test]
    fn convergence_pairs() {
        let c = FitCurve {
            n_qubits: 3,
            layer_counts: vec![1, 2],
            distances: vec![0.5, 0.2],
        };
        assert_eq!(convergence_csv(&[c]), "width,layers,distance\n3,1,0.5\n3,2,0.2\n");
    }

    #[test]
    fn files_written() {
        let dir = tempfile::tempdir().unwrap();
        let r = rows();
        let s = summarize(&r).unwrap();
        let p = emit_plot_data(dir.path(), &PlotData::Box(&s), true).unwrap();
        assert_eq!(p.len(), 2);
        assert!(fs::read_to_string(&p[1]).unwrap().starts_with("<svg"));
        let p = emit_plot_data(dir.path(), &PlotData::Scatter(&r), false).unwrap();
        assert_eq!(p.len(), 1);
    }
}
