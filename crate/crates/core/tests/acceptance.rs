//! Acceptance suite. Runs every criterion in sequence, prints one
//! `PASS`/`FAIL` line each, and exits non-zero if any failed.
//!
//! Reference values are recomputed here with small independent routines
//! rather than taken from the library under test.

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use qbench::analysis::{exponential_l1_fit, DEFAULT_BINS};
use qbench::compile::{compile, equivalence_error, kak_decompose, Strategy};
use qbench::device::{graph_properties, DeviceModel, Ratio};
use qbench::gen::{haar_su4, CircuitClass};
use qbench::metrics::{ced, cross_entropy, hog_probability, ideal_hog, l1_distance};
use qbench::rng::derive_seed;
use qbench::sim::{
    output_probabilities, sample_ideal, sample_noisy, sample_uniform, NoiseModel, ProbabilityTable, SampleSet,
};
use qbench::{BenchRng, Circuit};

const EULER_GAMMA: f64 = 0.5772156649;
const SHOTS: u64 = 8192;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn seed(criterion: u64, parts: &[u64]) -> BenchRng {
    let mut all = vec![criterion];
    all.extend_from_slice(parts);
    BenchRng::from_seed(derive_seed(0xACCE_9700, &all))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Output table from the first column of the dense unitary, not the
/// statevector kernels.
fn dense_table(c: &Circuit) -> ProbabilityTable {
    let u = c.unitary().unwrap();
    let probs = (0..u.dim()).map(|r| u.matrix()[(r, 0)].norm_sqr()).collect();
    ProbabilityTable::new(c.n_qubits(), probs).unwrap()
}

/// Heavy-output mass by sorting.
fn oracle_ideal_hog(p: &[f64]) -> f64 {
    let med = oracle_median(p);
    p.iter().filter(|&&x| x > med).sum()
}

fn oracle_median(p: &[f64]) -> f64 {
    let mut s = p.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = s.len();
    if m % 2 == 1 {
        s[m / 2]
    } else {
        (s[m / 2 - 1] + s[m / 2]) / 2.
    }
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

fn square_circuits(criterion: u64, n: usize, count: usize) -> Vec<Circuit> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            CircuitClass::Square
                .generate(n, None, &mut seed(criterion, &[i as u64]))
                .unwrap()
        })
        .collect()
}

fn ideal_hog_constant() -> Outcome {
    let tables: Vec<ProbabilityTable> = square_circuits(1, 5, 100).par_iter().map(dense_table).collect();
    let lib: Vec<f64> = tables.iter().map(ideal_hog).collect();
    let oracle: Vec<f64> = tables.iter().map(|t| oracle_ideal_hog(t.probs())).collect();
    let agree = lib.iter().zip(&oracle).all(|(a, b)| (a - b).abs() < 1e-12);
    let m = mean(&lib);
    let target = (1. + LN_2) / 2.;
    check(
        agree && (target - 0.846574).abs() < 1e-6 && (m - 0.846574).abs() <= 0.02,
        format!("mean ideal_hog {m:.6} (target 0.846574 ± 0.02), oracle agreement {agree}"),
    )
}

fn deep_fit(layers: usize) -> (f64, Vec<ProbabilityTable>) {
    let tables: Vec<ProbabilityTable> = (0..100)
        .into_par_iter()
        .map(|i| {
            let c = CircuitClass::Deep
                .generate(4, Some(layers), &mut seed(2, &[layers as u64, i]))
                .unwrap();
            output_probabilities(&c).unwrap()
        })
        .collect();
    (exponential_l1_fit(&tables, DEFAULT_BINS).unwrap(), tables)
}

fn deep_exponential() -> Outcome {
    let (shallow_fit, _) = deep_fit(2);
    let (fit, tables) = deep_fit(13);
    let hog = mean(&tables.iter().map(|t| oracle_ideal_hog(t.probs())).collect::<Vec<_>>());
    check(
        fit <= 0.5 * shallow_fit && (hog - 0.846574).abs() <= 0.03,
        format!("fit(13) {fit:.4} vs fit(2) {shallow_fit:.4}, mean ideal_hog {hog:.4} (target 0.846574 ± 0.03)"),
    )
}

fn shallow_not_exponential() -> Outcome {
    let tables = |class: CircuitClass| -> Vec<ProbabilityTable> {
        (0..100)
            .into_par_iter()
            .map(|i| {
                let layers = (class == CircuitClass::Square).then_some(5);
                output_probabilities(&class.generate(5, layers, &mut seed(3, &[class.seed_tag(), i])).unwrap()).unwrap()
            })
            .collect()
    };
    let shallow = exponential_l1_fit(&tables(CircuitClass::Shallow), DEFAULT_BINS).unwrap();
    let square = exponential_l1_fit(&tables(CircuitClass::Square), DEFAULT_BINS).unwrap();
    check(
        shallow >= 2. * square,
        format!("shallow fit {shallow:.4}, square fit {square:.4}"),
    )
}

/// Brute-force CED, with the same `2^{-n²}` probability floor.
fn oracle_ced(samples: &SampleSet, p: &[f64], n: usize) -> f64 {
    let floor = (-((n * n) as f64) * LN_2).exp();
    let s = |x: f64| -(x.max(floor)).ln();
    let uniform = p.iter().map(|&x| s(x)).sum::<f64>() / p.len() as f64;
    let k = samples.shots() as f64;
    let empirical: f64 = (0..p.len() as u64)
        .map(|x| samples.count(x) as f64 / k * s(p[x as usize]))
        .sum();
    uniform - empirical
}

fn ced_endpoints() -> Outcome {
    let rows: Vec<(f64, f64)> = square_circuits(4, 5, 50)
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let t = output_probabilities(c).unwrap();
            let ideal = sample_ideal(&t, SHOTS, &mut seed(4, &[i as u64, 0]));
            let uni = sample_uniform(5, SHOTS, &mut seed(4, &[i as u64, 1]));
            (ced(&ideal, &t).unwrap(), ced(&uni, &t).unwrap())
        })
        .collect();
    let ideal = mean(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let uni = mean(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    check(
        (0.9..=1.1).contains(&ideal) && (-0.05..=0.05).contains(&uni),
        format!("ideal CED {ideal:.4} in [0.9, 1.1], uniform CED {uni:.4} in [-0.05, 0.05]"),
    )
}

fn uniform_hog() -> Outcome {
    let hogs: Vec<f64> = square_circuits(5, 5, 50)
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let t = output_probabilities(c).unwrap();
            hog_probability(&sample_uniform(5, SHOTS, &mut seed(5, &[i as u64])), &t).unwrap()
        })
        .collect();
    let m = mean(&hogs);
    check((m - 0.5).abs() <= 0.02, format!("mean HOG {m:.4} (target 0.5 ± 0.02)"))
}

fn entropy_identity() -> Outcome {
    let ces: Vec<f64> = square_circuits(6, 5, 50)
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let t = output_probabilities(c).unwrap();
            cross_entropy(&sample_ideal(&t, SHOTS, &mut seed(6, &[i as u64])), &t).unwrap()
        })
        .collect();
    let m = mean(&ces);
    let target = 32f64.ln() + EULER_GAMMA - 1.;
    check(
        (m - target).abs() <= 0.05,
        format!("mean cross entropy {m:.4} (target {target:.4} ± 0.05)"),
    )
}

fn l1_scaling() -> Outcome {
    let c = &square_circuits(7, 4, 1)[0];
    let t = output_probabilities(c).unwrap();
    let at = |k: u64| -> f64 {
        let v: Vec<f64> = (0..20)
            .map(|s| l1_distance(&sample_ideal(&t, k, &mut seed(7, &[k, s])), &t).unwrap())
            .collect();
        mean(&v)
    };
    let (small, large) = (at(1024), at(65536));
    let ratio = small / large;
    check(
        (ratio - 8.).abs() <= 2.4,
        format!("l1(1024) {small:.5} / l1(65536) {large:.5} = {ratio:.3} (target 8 ± 2.4)"),
    )
}

fn compiler_soundness() -> Outcome {
    let devices = DeviceModel::builtins();
    let cases: Vec<(usize, Circuit)> = (0..200)
        .map(|i| {
            let mut rng = seed(8, &[i]);
            let class = CircuitClass::ALL[rng.random_range(0..3)];
            let n = rng.random_range(2..=6);
            (i as usize, class.generate(n, None, &mut rng).unwrap())
        })
        .collect();
    let results: Vec<(bool, usize, f64)> = cases
        .par_iter()
        .flat_map(|(_, c)| {
            devices
                .iter()
                .filter(|d| d.n_qubits() >= c.n_qubits())
                .flat_map(|d| Strategy::ALL.map(|s| (d, s)))
                .map(|(d, s)| match compile(c, d, s) {
                    Ok(k) => {
                        let native = k.check_native(d).is_ok();
                        let e = equivalence_error(c, &k).unwrap_or(f64::INFINITY);
                        (native && e <= 1e-7, 1, e)
                    }
                    Err(_) => (false, 1, f64::INFINITY),
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let total: usize = results.iter().map(|r| r.1).sum();
    let passed = results.iter().filter(|r| r.0).count();
    let worst = results.iter().map(|r| r.2).fold(0., f64::max);
    check(
        passed == total && total > 0,
        format!("{passed}/{total} compilations equivalent, worst error {worst:.2e}"),
    )
}

fn two_qubit_unitary(gates: &[qbench::Gate]) -> nalgebra::DMatrix<Complex64> {
    Circuit::from_gates(2, gates.iter().cloned())
        .unwrap()
        .unitary()
        .unwrap()
        .matrix()
        .clone()
}

/// `min_φ ‖U − e^{iφ} V‖_max`, with the phase taken from `tr(V†U)`.
fn phase_error(u: &nalgebra::DMatrix<Complex64>, v: &nalgebra::DMatrix<Complex64>) -> f64 {
    let tr: Complex64 = (v.adjoint() * u).trace();
    let ph = if tr.norm() > 0. {
        tr / tr.norm()
    } else {
        Complex64::new(1., 0.)
    };
    (u - v * ph).iter().map(|z| z.norm()).fold(0., f64::max)
}

fn kak() -> Outcome {
    let results: Vec<(f64, usize)> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let u = haar_su4(&mut seed(9, &[i]));
            let k = kak_decompose(&u).unwrap();
            let target = nalgebra::DMatrix::from_fn(4, 4, |r, c| u[(r, c)]);
            (phase_error(&target, &two_qubit_unitary(&k.gates)), k.cx_count)
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(0., f64::max);
    let max_cx = results.iter().map(|r| r.1).max().unwrap();
    let id = kak_decompose(&nalgebra::Matrix4::identity()).unwrap();
    let id_cx = id.gates.iter().filter(|g| g.qubits.len() == 2).count();
    check(
        worst <= 1e-7 && max_cx <= 3 && id.cx_count == 0 && id_cx == 0,
        format!(
            "worst reconstruction {worst:.2e}, max CX {max_cx}, identity CX {}",
            id.cx_count
        ),
    )
}

/// Radius by Floyd–Warshall on the undirected skeleton.
fn oracle_radius(n: usize, edges: &[(usize, usize)]) -> usize {
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
    }
    for &(a, b) in edges {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    d.iter().map(|r| *r.iter().max().unwrap()).min().unwrap()
}

fn table_one() -> Outcome {
    let expected = [
        ("ibmqx2", 5, 2.4, 1, Some(3)),
        ("ibmq_16_melbourne", 15, 2.667, 4, Some(4)),
        ("ibmq_ourense", 5, 1.6, 2, None),
        ("ibmq_singapore", 20, 2.3, 4, Some(6)),
    ];
    let mut bad = Vec::new();
    for (name, v, deg, radius, girth) in expected {
        let d = DeviceModel::builtin(name).unwrap();
        let p = graph_properties(&d.coupling).unwrap();
        let edges: Vec<(usize, usize)> = d.coupling.undirected_edges().into_iter().collect();
        let shown = (p.average_degree.to_f64() * 1000.).round() / 1000.;
        let ok = p.vertices == v
            && shown == deg
            && Ratio::new(2 * edges.len(), v) == p.average_degree
            && p.radius == radius
            && oracle_radius(v, &edges) == radius
            && p.min_cycle_length == girth;
        if !ok {
            bad.push(format!("{name}: {p:?}"));
        }
    }
    check(
        bad.is_empty(),
        if bad.is_empty() {
            "4/4 devices match".into()
        } else {
            bad.join("; ")
        },
    )
}

fn correlation() -> Outcome {
    let circuits = square_circuits(11, 4, 20);
    let eps = [0., 0.02, 0.05, 0.1, 0.2];
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .enumerate()
        .flat_map(|(j, &e)| circuits.iter().enumerate().map(move |(i, c)| (j, e, i, c)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(j, e, i, c)| {
            let native = qbench::compile::rebase(c).unwrap();
            let t = output_probabilities(c).unwrap();
            let noise = NoiseModel::uniform(4, 0., e, 0.);
            let s = sample_noisy(&native, &noise, SHOTS, &mut seed(11, &[j as u64, i as u64])).unwrap();
            let hog = hog_probability(&s, &t).unwrap();
            (l1_distance(&s, &t).unwrap(), hog / oracle_ideal_hog(t.probs()))
        })
        .collect();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let r = pearson(&xs, &ys);
    check(
        r < -0.5,
        format!("Pearson r {r:.4} over {} points (target < -0.5)", pts.len()),
    )
}

fn metric_oracles() -> Outcome {
    let mut worst: f64 = 0.;
    let mut rng = seed(12, &[]);
    for case in 0..50 {
        let n = 1 + case % 4;
        let dim = 1usize << n;
        let mut p: Vec<f64> = (0..dim).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
        if case % 5 == 0 {
            p[rng.random_range(0..dim)] = 0.;
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        let t = ProbabilityTable::new(n, p.clone()).unwrap();
        let shots = rng.random_range(1..=500u64);
        let s = SampleSet::from_outcomes(n, (0..shots).map(|_| rng.random_range(0..dim as u64)));

        let med = oracle_median(&p);
        let k = shots as f64;
        let hog: f64 = (0..dim)
            .filter(|&x| p[x] > med)
            .map(|x| s.count(x as u64) as f64 / k)
            .sum();
        let l1: f64 = (0..dim).map(|x| (s.count(x as u64) as f64 / k - p[x]).abs()).sum();
        let c = oracle_ced(&s, &p, n);

        worst = worst
            .max((hog - hog_probability(&s, &t).unwrap()).abs())
            .max((l1 - l1_distance(&s, &t).unwrap()).abs())
            .max((c - ced(&s, &t).unwrap()).abs());
    }
    check(
        worst <= 1e-12,
        format!("worst deviation {worst:.2e} over 50 pairs (limit 1e-12)"),
    )
}

type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("ideal HOG constant", 60, ideal_hog_constant),
        ("deep-circuit exponentiality", 300, deep_exponential),
        ("shallow non-exponentiality", 120, shallow_not_exponential),
        ("CED endpoints", 120, ced_endpoints),
        ("HOG under uniform sampling", 60, uniform_hog),
        ("entropy identity", 60, entropy_identity),
        ("l1 finite-sample scaling", 60, l1_scaling),
        ("compiler soundness", 300, compiler_soundness),
        ("KAK decomposition", 10, kak),
        ("device graph properties", 1, table_one),
        ("l1 / normalized HOG correlation", 180, correlation),
        ("metric oracles", 10, metric_oracles),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*limit);
        let pass = out.pass && in_time;
        failed += !pass as usize;
        println!(
            "{} {:>2} {name}: {} [{:.2}s, limit {limit}s{}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            took.as_secs_f64(),
            if in_time { "" } else { ", too slow" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
