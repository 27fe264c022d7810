//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qwalk_core::classify::{evaluate, xor_distance, xor_mismatch, Dataset, XorMode};
use qwalk_core::ctqw::{avg_density_finite, avg_density_infinite, avg_density_quadrature, evolve, DensityMatrix, WalkState};
use qwalk_core::graph::{perturb, synth_prototype, Graph, InterEdges};
use qwalk_core::matching::hungarian;
use qwalk_core::qjsd::{graph_qjsd, qjsd, WalkConfig, WalkPair};
use qwalk_core::spectral::eig_sym;
use qwalk_core::Horizon;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random graph with `lo..=hi` nodes and edge probability in [0.2, 0.7).
fn random_graph(r: &mut ChaCha8Rng, lo: usize, hi: usize) -> Graph {
    let n = r.gen_range(lo..=hi);
    let p = r.gen_range(0.2..0.7);
    synth_prototype(n, p, r.gen()).unwrap()
}

fn random_permutation(r: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(r);
    perm
}

fn in_unit_interval(x: f64) -> bool {
    (-1e-9..=1.0 + 1e-9).contains(&x)
}

/// Density-operator invariants: trace, Hermiticity, positivity.
fn density_ok(rho: &DensityMatrix) -> Result<(), String> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(format!("trace {tr}"));
    }
    let herm = rho.hermiticity_error();
    if herm > 1e-10 {
        return Err(format!("hermiticity error {herm:e}"));
    }
    let min = rho.min_eigenvalue().map_err(|e| e.to_string())?;
    if min < -1e-9 {
        return Err(format!("min eigenvalue {min:e}"));
    }
    Ok(())
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let elapsed = start.elapsed();
    if elapsed > limit {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

// Operator generators shared by criteria 1-6.

fn c1_walks() -> Vec<WalkPair> {
    let mut r = rng(1);
    let cfg = WalkConfig::default();
    (0..200)
        .map(|_| {
            let g1 = random_graph(&mut r, 1, 12);
            let g2 = random_graph(&mut r, 1, 12);
            WalkPair::new(&g1, &g2, InterEdges::Full, &cfg).unwrap()
        })
        .collect()
}

fn c2_walks() -> Vec<WalkPair> {
    let mut r = rng(2);
    let cfg = WalkConfig::default();
    (0..20)
        .map(|_| {
            let g = random_graph(&mut r, 2, 10);
            let h = g.permuted(&random_permutation(&mut r, g.n())).unwrap();
            WalkPair::new(&g, &h, InterEdges::Full, &cfg).unwrap()
        })
        .collect()
}

fn c3_operators() -> Vec<DensityMatrix> {
    let mut r = rng(3);
    let cfg = WalkConfig::default();
    (0..50)
        .map(|i| {
            let g1 = random_graph(&mut r, 1, 8);
            let g2 = random_graph(&mut r, 1, 8);
            let walk = WalkPair::new(&g1, &g2, InterEdges::Full, &cfg).unwrap();
            let h = if i % 2 == 0 { Horizon::Infinite } else { Horizon::Finite(r.gen_range(0.5..20.0)) };
            walk.densities(h).unwrap().0
        })
        .collect()
}

fn c4_walks() -> Vec<WalkPair> {
    let mut r = rng(4);
    let cfg = WalkConfig::default();
    (0..20)
        .map(|_| {
            let n1 = r.gen_range(1..=5);
            let n2 = r.gen_range(1..=10 - n1);
            let g1 = synth_prototype(n1, 0.5, r.gen()).unwrap();
            let g2 = synth_prototype(n2, 0.5, r.gen()).unwrap();
            WalkPair::new(&g1, &g2, InterEdges::Full, &cfg).unwrap()
        })
        .collect()
}

fn c5_walks() -> Vec<WalkPair> {
    let mut r = rng(5);
    let cfg = WalkConfig::default();
    (0..10)
        .map(|_| {
            let g1 = synth_prototype(4, 0.5, r.gen()).unwrap();
            let g2 = synth_prototype(4, 0.5, r.gen()).unwrap();
            WalkPair::new(&g1, &g2, InterEdges::Full, &cfg).unwrap()
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, walk) in c1_walks().iter().enumerate() {
        let v = walk.divergence(Horizon::Infinite).map_err(|e| e.to_string())?.value;
        if !in_unit_interval(v) {
            return Err(format!("pair {i}: QJSD {v} outside [0, 1]"));
        }
        worst = (worst.0.min(v), worst.1.max(v));
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("200 pairs, range [{:.6}, {:.12}], {:?}", worst.0, worst.1, start.elapsed()))
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, walk) in c2_walks().iter().enumerate() {
        let v = walk.divergence(Horizon::Infinite).map_err(|e| e.to_string())?.value;
        worst = worst.max((v - 1.0).abs());
        if (v - 1.0).abs() > 1e-6 {
            return Err(format!("graph {i}: QJSD {v} against its permuted copy"));
        }
    }
    Ok(format!("20 permuted copies, max |QJSD - 1| = {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, rho) in c3_operators().iter().enumerate() {
        let v = qjsd(rho, rho).map_err(|e| e.to_string())?.value;
        worst = worst.max(v.abs());
        if v.abs() > 1e-10 {
            return Err(format!("operator {i}: qjsd(rho, rho) = {v:e}"));
        }
    }
    Ok(format!("50 operators, max |qjsd(rho, rho)| = {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (i, walk) in c4_walks().iter().enumerate() {
        let (minus, plus) = walk.states();
        for psi in [minus, plus] {
            let exact = avg_density_finite(walk.spectrum(), psi, 10.0).map_err(|e| e.to_string())?;
            let quad = avg_density_quadrature(walk.spectrum(), psi, 10.0, 1e-3).map_err(|e| e.to_string())?;
            let d = exact.max_abs_diff(&quad);
            worst = worst.max(d);
            if d > 1e-6 {
                return Err(format!("merged graph {i}: analytic vs quadrature differ by {d:e}"));
            }
        }
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("20 merged graphs, max entry gap {worst:.2e}, {:?}", start.elapsed()))
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, walk) in c5_walks().iter().enumerate() {
        let (minus, plus) = walk.states();
        for psi in [minus, plus] {
            let finite = avg_density_finite(walk.spectrum(), psi, 1e4).map_err(|e| e.to_string())?;
            let infinite = avg_density_infinite(walk.spectrum(), psi).map_err(|e| e.to_string())?;
            let d = finite.max_abs_diff(&infinite);
            worst = worst.max(d);
            if d > 1e-3 {
                return Err(format!("merged graph {i}: T=1e4 vs infinite differ by {d:e}"));
            }
        }
    }
    Ok(format!("10 eight-node merged graphs, max entry gap {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let mut operators: Vec<DensityMatrix> = Vec::new();
    for walk in c1_walks().iter().chain(&c2_walks()) {
        let (rho, sigma) = walk.densities(Horizon::Infinite).map_err(|e| e.to_string())?;
        operators.push(rho.midpoint(&sigma).map_err(|e| e.to_string())?);
        operators.extend([rho, sigma]);
    }
    operators.extend(c3_operators());
    for walk in c4_walks() {
        let (minus, plus) = walk.states();
        for psi in [minus, plus] {
            operators.push(avg_density_finite(walk.spectrum(), psi, 10.0).map_err(|e| e.to_string())?);
            operators.push(avg_density_quadrature(walk.spectrum(), psi, 10.0, 1e-3).map_err(|e| e.to_string())?);
        }
    }
    for walk in c5_walks() {
        let (minus, plus) = walk.states();
        for psi in [minus, plus] {
            operators.push(avg_density_finite(walk.spectrum(), psi, 1e4).map_err(|e| e.to_string())?);
            operators.push(avg_density_infinite(walk.spectrum(), psi).map_err(|e| e.to_string())?);
        }
    }
    for (i, rho) in operators.iter().enumerate() {
        density_ok(rho).map_err(|e| format!("operator {i}: {e}"))?;
    }
    Ok(format!("{} operators valid", operators.len()))
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let g = random_graph(&mut r, 2, 16);
        let spec = eig_sym(&g.laplacian()).map_err(|e| e.to_string())?;
        let raw = DVector::from_fn(g.n(), |_, _| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
        let psi = WalkState::new(raw.normalize()).map_err(|e| e.to_string())?;
        let t = r.gen_range(0.0..100.0);
        let norm = evolve(&spec, &psi, t).map_err(|e| e.to_string())?.norm();
        worst = worst.max((norm - 1.0).abs());
        if (norm - 1.0).abs() > 1e-10 {
            return Err(format!("case {i}: norm {norm} at t = {t}"));
        }
    }
    Ok(format!("200 evolutions, max |norm - 1| = {worst:.2e}"))
}

/// Minimum over all injections of rows into columns (rows <= cols).
fn brute_force_min(cost: &DMatrix<f64>) -> f64 {
    fn go(cost: &DMatrix<f64>, row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if row == cost.nrows() {
            *best = best.min(acc);
            return;
        }
        for c in 0..cost.ncols() {
            if !used[c] {
                used[c] = true;
                go(cost, row + 1, used, acc + cost[(row, c)], best);
                used[c] = false;
            }
        }
    }
    let cost = if cost.nrows() > cost.ncols() { cost.transpose() } else { cost.clone() };
    let mut best = f64::INFINITY;
    go(&cost, 0, &mut vec![false; cost.ncols()], 0.0, &mut best);
    best
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut r = rng(8);
    for i in 0..500 {
        let (n, m) = (r.gen_range(1..=7), r.gen_range(1..=7));
        let cost = DMatrix::from_fn(n, m, |_, _| r.gen_range(0.0..10.0));
        let got = hungarian(&cost).map_err(|e| e.to_string())?;
        let want = brute_force_min(&cost);
        if got.pairs.len() != n.min(m) || (got.total_cost - want).abs() > 1e-12 {
            return Err(format!("case {i} ({n}x{m}): hungarian {} vs brute force {want}", got.total_cost));
        }
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("500 matrices up to 7x7 agree, {:?}", start.elapsed()))
}

fn criterion_9() -> Outcome {
    let g = synth_prototype(20, 0.3, 9).unwrap();
    let cfg = WalkConfig::default();
    let mut means = Vec::new();
    let mut errors = Vec::new();
    for k in 0..=3usize {
        // one seed per trial, shared across k: each k extends the k-1 flips
        let values: Vec<f64> = (0..20u64)
            .map(|trial| {
                let noisy = perturb(&g, k, trial).unwrap();
                graph_qjsd(&g, &noisy, Horizon::Infinite, &cfg).unwrap().value
            })
            .collect();
        let mean = values.iter().sum::<f64>() / 20.0;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 19.0;
        means.push(mean);
        errors.push((var / 20.0).sqrt());
    }
    if (means[0] - 1.0).abs() > 1e-6 {
        return Err(format!("k = 0 mean {} is not 1", means[0]));
    }
    if means.windows(2).any(|w| w[1] > w[0]) {
        return Err(format!("means not nonincreasing: {means:?}"));
    }
    let min_step = means.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    let max_se = errors.iter().copied().fold(0.0, f64::max);
    Ok(format!(
        "means by k: {}; smallest step {min_step:.1e} vs standard error {max_se:.1e}",
        means.iter().map(|m| format!("{m:.6}")).collect::<Vec<_>>().join(", ")
    ))
}

fn synthetic_dataset(seed: u64) -> Dataset {
    let mut items = Vec::new();
    for (class, n) in [10usize, 20, 40].into_iter().enumerate() {
        let proto = synth_prototype(n, 0.3, seed * 31 + class as u64).unwrap();
        for i in 0..20u64 {
            items.push((perturb(&proto, 2, seed * 1_000 + class as u64 * 100 + i).unwrap(), format!("n{n}")));
        }
    }
    Dataset::new(format!("synthetic-{seed}"), items).unwrap()
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let mut accuracies = Vec::new();
    for seed in 0..10u64 {
        let report = evaluate(&synthetic_dataset(seed), 0.5, 1, seed).map_err(|e| e.to_string())?;
        accuracies.push(report.accuracy);
    }
    within(start, Duration::from_secs(60))?;
    let good = accuracies.iter().filter(|&&a| a >= 0.9).count();
    if good < 9 {
        return Err(format!("only {good}/10 seeds reach 0.9: {accuracies:?}"));
    }
    let min = accuracies.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!("{good}/10 seeds >= 0.9 (min {min:.3}), {:?}", start.elapsed()))
}

fn criterion_11() -> Outcome {
    let mut r = rng(11);
    let mode = XorMode::Binary;
    for i in 0..500 {
        // mixed sizes for the Hamming count, which stays a metric under padding
        let [a, b, c] = [0; 3].map(|_| synth_prototype(r.gen_range(0..=9), r.gen_range(0.1..0.9), r.gen()).unwrap());
        let (ab, ba) = (xor_mismatch(&a, &b, mode), xor_mismatch(&b, &a, mode));
        let (bc, ac) = (xor_mismatch(&b, &c, mode), xor_mismatch(&a, &c, mode));
        if ab != ba || xor_distance(&a, &b) != xor_distance(&b, &a) {
            return Err(format!("triple {i}: asymmetric"));
        }
        if xor_mismatch(&a, &a, mode) != 0.0 || xor_distance(&a, &a) != 0.0 {
            return Err(format!("triple {i}: d(G, G) != 0"));
        }
        if [ab, bc, ac].iter().any(|&d| d < 0.0) {
            return Err(format!("triple {i}: negative count"));
        }
        if [(&a, &b), (&b, &c), (&a, &c)].iter().any(|(x, y)| !(0.0..=1.0).contains(&xor_distance(x, y))) {
            return Err(format!("triple {i}: normalised distance outside [0, 1]"));
        }
        // counts are small integers, so this comparison is exact
        if ac > ab + bc {
            return Err(format!("triple {i}: triangle violated {ac} > {ab} + {bc}"));
        }
    }
    Ok("500 triples: symmetric, nonnegative, d(G,G)=0, triangle inequality on mismatch counts".into())
}

fn qwalk(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("qwalk {args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).display().to_string();
    let out1 = path("gen1");
    let out2 = path("gen2");
    let gen = |out: &str| {
        qwalk(&["gen", "--n", "6,10", "--p", "0.4", "--noise", "2", "--count", "4", "--seed", "12", "--out", out])
    };
    gen(&out1)?;
    gen(&out2)?;
    for entry in std::fs::read_dir(&out1).map_err(|e| e.to_string())? {
        let name = entry.map_err(|e| e.to_string())?.file_name();
        let a = std::fs::read(Path::new(&out1).join(&name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(Path::new(&out2).join(&name)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("gen output {name:?} differs between runs"));
        }
    }

    let a = format!("{out1}/n6_prototype.edges");
    let b = format!("{out1}/n6_001.edges");
    let manifest = format!("{out1}/manifest.csv");
    let commands: Vec<Vec<&str>> = vec![
        vec!["sim", &a, &b],
        vec!["sim", &a, &b, "--time", "3.5", "--format", "csv"],
        vec!["match", &a, &b, "--times", "1,5,10"],
        vec!["match", &a, &b, "--format", "csv"],
        vec!["noise-curve", &a, "--max-k", "3", "--trials", "5", "--seed", "4"],
        vec!["classify", &manifest, "--k", "1", "--split", "0.5", "--seed", "7"],
    ];
    for args in &commands {
        let first = qwalk(args)?;
        let second = qwalk(args)?;
        if first != second {
            return Err(format!("qwalk {args:?} is not deterministic"));
        }
    }
    let gen_stdout = gen(&out1)?;
    if gen_stdout != gen(&out1)? {
        return Err("gen stdout differs".into());
    }
    Ok(format!("gen + {} commands byte-identical across runs", commands.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("C1  QJSD bound on 200 random pairs", criterion_1),
        ("C2  isomorphic copies reach QJSD 1", criterion_2),
        ("C3  self-divergence vanishes", criterion_3),
        ("C4  analytic vs quadrature average", criterion_4),
        ("C5  T=1e4 approaches infinite average", criterion_5),
        ("C6  density-operator invariants", criterion_6),
        ("C7  unitarity of evolution", criterion_7),
        ("C8  Hungarian vs brute force", criterion_8),
        ("C9  noise monotonicity", criterion_9),
        ("C10 synthetic kNN classification", criterion_10),
        ("C11 XOR distance metric suite", criterion_11),
        ("C12 CLI determinism", criterion_12),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
