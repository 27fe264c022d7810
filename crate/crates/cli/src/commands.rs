use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use qwalk_core::classify::{evaluate_with, Dataset, Metric, XorMode};
use qwalk_core::io::{load_attributes, load_graph, write_edge_list, GraphFormat};
use qwalk_core::matching::{hungarian, CostTransform};
use qwalk_core::qjsd::{graph_qjsd_batch, node_pair_qjsd_multi, PairTopology, WalkConfig};
use qwalk_core::rng::child_seed;
use qwalk_core::{graph_qjsd, perturb, synth_prototype, Execution, Graph, Hamiltonian, Horizon};
use serde::Serialize;

use crate::error::CliError;
use crate::output::{json, num};
use crate::{Cost, Format, HamiltonianArg, HorizonArgs, MetricArg, Topology, WalkArgs};

const NOISE_STREAM: u64 = 1;
const PROTOTYPE_STREAM: u64 = 2;
const VARIANT_STREAM_BASE: u64 = 100;

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

pub fn read_graph(path: &Path, attributes: Option<&Path>) -> Result<Graph, CliError> {
    let graph = load_graph(open(path)?, GraphFormat::from_path(path)).map_err(|e| CliError::reading(path, e))?;
    match attributes {
        None => Ok(graph),
        Some(attr_path) => {
            let attrs = load_attributes(open(attr_path)?, graph.n()).map_err(|e| CliError::reading(attr_path, e))?;
            graph.with_attributes(attrs).map_err(|e| CliError::reading(attr_path, e))
        }
    }
}

fn walk_config(walk: &WalkArgs) -> Result<WalkConfig, CliError> {
    let config = WalkConfig {
        hamiltonian: match walk.hamiltonian {
            HamiltonianArg::Laplacian => Hamiltonian::Laplacian,
            HamiltonianArg::Adjacency => Hamiltonian::Adjacency,
        },
        sigma: walk.sigma,
        ..WalkConfig::default()
    };
    config.validate()?;
    Ok(config)
}

fn horizon(args: &HorizonArgs) -> Result<Horizon, CliError> {
    match args.time {
        Some(t) => finite(t),
        None => Ok(Horizon::Infinite),
    }
}

fn finite(t: f64) -> Result<Horizon, CliError> {
    if t > 0.0 && t.is_finite() {
        Ok(Horizon::Finite(t))
    } else {
        Err(CliError::domain(format!("time horizon must be positive and finite, got {t}")))
    }
}

fn horizon_label(h: Horizon) -> String {
    match h {
        Horizon::Finite(t) => num(t),
        Horizon::Infinite => "inf".into(),
    }
}

pub fn sim(a: &Path, b: &Path, walk: &WalkArgs, h: &HorizonArgs, format: Format) -> Result<String, CliError> {
    let g1 = read_graph(a, walk.attr_a.as_deref())?;
    let g2 = read_graph(b, walk.attr_b.as_deref())?;
    let report = graph_qjsd(&g1, &g2, horizon(h)?, &walk_config(walk)?)?;
    match format {
        Format::Json => json(&report),
        Format::Csv => Ok(format!(
            "value,entropy_mixture,entropy_rho,entropy_sigma,time_horizon\n{},{},{},{},{}\n",
            num(report.value),
            num(report.entropy_mixture),
            num(report.entropy_rho),
            num(report.entropy_sigma),
            horizon_label(report.time_horizon)
        )),
    }
}

pub struct MatchArgs<'a> {
    pub graph_a: &'a Path,
    pub graph_b: &'a Path,
    pub walk: &'a WalkArgs,
    pub times: Option<&'a [String]>,
    pub horizon: &'a HorizonArgs,
    pub cost: Cost,
    pub topology: Topology,
    pub boost: f64,
    pub format: Format,
}

#[derive(Serialize)]
struct MatchResult {
    time_horizon: Horizon,
    qjsd: Vec<Vec<f64>>,
    assignment: qwalk_core::Assignment,
}

#[derive(Serialize)]
struct MatchOutput {
    n_left: usize,
    n_right: usize,
    cost: CostTransform,
    results: Vec<MatchResult>,
}

fn parse_times(times: &[String]) -> Result<Vec<Horizon>, CliError> {
    times
        .iter()
        .map(|t| match t.trim() {
            "inf" | "infinite" => Ok(Horizon::Infinite),
            s => s
                .parse::<f64>()
                .map_err(|_| CliError::domain(format!("invalid time '{s}'")))
                .and_then(finite),
        })
        .collect()
}

pub fn matching(args: MatchArgs<'_>) -> Result<String, CliError> {
    let g1 = read_graph(args.graph_a, args.walk.attr_a.as_deref())?;
    let g2 = read_graph(args.graph_b, args.walk.attr_b.as_deref())?;
    let mut config = walk_config(args.walk)?;
    config.pair_topology = match args.topology {
        Topology::Single => PairTopology::Single,
        Topology::Full => PairTopology::FullBoosted { boost: args.boost },
    };
    let transform = match args.cost {
        Cost::OneMinusQjsd => CostTransform::OneMinusQjsd,
        Cost::Raw => CostTransform::Raw,
    };
    let horizons = match args.times {
        Some(times) => parse_times(times)?,
        None => vec![horizon(args.horizon)?],
    };

    let tables = node_pair_qjsd_multi(&g1, &g2, &horizons, &config)?;
    let mut results = Vec::with_capacity(tables.len());
    for (h, table) in horizons.iter().zip(tables) {
        let assignment = hungarian(&transform.apply(&table))?;
        let qjsd = table.row_iter().map(|r| r.iter().copied().collect()).collect();
        results.push(MatchResult { time_horizon: *h, qjsd, assignment });
    }

    match args.format {
        Format::Json => json(&MatchOutput {
            n_left: g1.n(),
            n_right: g2.n(),
            cost: transform,
            results,
        }),
        Format::Csv => {
            let mut out = String::from("time_horizon,u,v,qjsd,assigned\n");
            for r in &results {
                let matched = r.assignment.row_to_col(g1.n());
                for (u, row) in r.qjsd.iter().enumerate() {
                    for (v, x) in row.iter().enumerate() {
                        let assigned = matched[u] == Some(v);
                        writeln!(out, "{},{u},{v},{},{}", horizon_label(r.time_horizon), num(*x), assigned as u8)
                            .unwrap();
                    }
                }
            }
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct NoiseRow {
    k: usize,
    mean_qjsd: f64,
    stddev: f64,
}

pub fn noise_curve(
    path: &Path,
    max_k: usize,
    trials: usize,
    seed: u64,
    walk: &WalkArgs,
    h: &HorizonArgs,
    format: Format,
) -> Result<String, CliError> {
    let g = read_graph(path, walk.attr_a.as_deref())?;
    if trials == 0 {
        return Err(CliError::domain("--trials must be at least 1"));
    }
    let pairs = g.n() * g.n().saturating_sub(1) / 2;
    if max_k > pairs {
        return Err(CliError::domain(format!("--max-k {max_k} exceeds the {pairs} node pairs")));
    }
    let config = walk_config(walk)?;
    let horizon = horizon(h)?;

    let mut rows = Vec::with_capacity(max_k + 1);
    for k in 0..=max_k {
        let variants = (0..trials)
            .map(|i| perturb(&g, k, child_seed(seed, NOISE_STREAM, i as u64)))
            .collect::<qwalk_core::Result<Vec<_>>>()?;
        let pairs: Vec<(&Graph, &Graph)> = variants.iter().map(|v| (&g, v)).collect();
        let values: Vec<f64> = graph_qjsd_batch(&pairs, horizon, &config)?
            .into_iter()
            .map(|r| r.value)
            .collect();
        let mean = values.iter().sum::<f64>() / trials as f64;
        let stddev = if trials > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt()
        } else {
            0.0
        };
        rows.push(NoiseRow { k, mean_qjsd: mean, stddev });
    }

    match format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut out = String::from("k,mean_qjsd,stddev\n");
            for r in &rows {
                writeln!(out, "{},{},{}", r.k, num(r.mean_qjsd), num(r.stddev)).unwrap();
            }
            Ok(out)
        }
    }
}

fn read_manifest(path: &Path) -> Result<Dataset, CliError> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let headers = reader
        .headers()
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["path", "label"] {
        return Err(CliError::input(format!(
            "{}: line 1: expected header 'path,label'",
            path.display()
        )));
    }
    let mut items = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| CliError::input(format!("{}: line {line}: {e}", path.display())))?;
        let (file, label) = (&record[0], &record[1]);
        let file_path: PathBuf = base.join(file);
        let graph = read_graph(&file_path, None)
            .map_err(|e| CliError { code: e.code, message: format!("manifest row {line} ({file}): {}", e.message) })?;
        items.push((graph, label.to_string()));
    }
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Dataset::new(name, items)?)
}

#[allow(clippy::too_many_arguments)]
pub fn classify(
    manifest: &Path,
    k: usize,
    split: f64,
    seed: u64,
    metric: MetricArg,
    walk: &WalkArgs,
    h: &HorizonArgs,
    confusion_csv: Option<&Path>,
) -> Result<String, CliError> {
    let data = read_manifest(manifest)?;
    let metric = match metric {
        MetricArg::Xor => Metric::Xor(XorMode::Binary),
        MetricArg::WeightedXor => Metric::Xor(XorMode::Weighted),
        MetricArg::Qjsd => Metric::Qjsd {
            horizon: horizon(h)?,
            config: walk_config(walk)?,
        },
    };
    let report = evaluate_with(&data, split, k, seed, &metric, Execution::Parallel)?;
    if let Some(path) = confusion_csv {
        fs::write(path, report.confusion_csv())
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    }
    json(&report)
}

fn write_graph(path: &Path, g: &Graph) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_edge_list(g, &mut buf)?;
    fs::write(path, buf).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

pub fn gen(sizes: &[usize], p: f64, noise: usize, count: usize, seed: u64, out: &Path) -> Result<String, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(format!("cannot create {}: {e}", out.display())))?;
    let mut manifest = String::from("path,label\n");
    let mut written = 0usize;
    for (class, &n) in sizes.iter().enumerate() {
        let duplicate = sizes[..class].contains(&n);
        let label = if duplicate { format!("n{n}-{class}") } else { format!("n{n}") };
        let prototype = synth_prototype(n, p, child_seed(seed, PROTOTYPE_STREAM, class as u64))?;
        let proto_file = format!("{label}_prototype.edges");
        write_graph(&out.join(&proto_file), &prototype)?;
        writeln!(manifest, "{proto_file},{label}").unwrap();
        written += 1;
        for i in 0..count {
            let variant = perturb(&prototype, noise, child_seed(seed, VARIANT_STREAM_BASE + class as u64, i as u64))?;
            let file = format!("{label}_{i:03}.edges");
            write_graph(&out.join(&file), &variant)?;
            writeln!(manifest, "{file},{label}").unwrap();
            written += 1;
        }
    }
    let manifest_path = out.join("manifest.csv");
    fs::write(&manifest_path, &manifest)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", manifest_path.display())))?;
    json(&serde_json::json!({
        "manifest": manifest_path.display().to_string(),
        "graphs": written,
    }))
}
