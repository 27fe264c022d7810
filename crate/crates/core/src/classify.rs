//! XOR graph distance and k-nearest-neighbour classification.

use std::collections::BTreeMap;

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::ctqw::Horizon;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par::{map_indices, try_map_indices, Execution};
use crate::qjsd::{graph_qjsd, WalkConfig};
use crate::rng::seeded_rng;

const SPLIT_STREAM: u64 = 0x5711;

/// Labelled collection of graphs.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub items: Vec<(Graph, String)>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, items: Vec<(Graph, String)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Domain("dataset is empty".into()));
        }
        Ok(Dataset {
            name: name.into(),
            items,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Distinct labels in lexicographic order.
    pub fn labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.items.iter().map(|(_, l)| l.clone()).collect();
        labels.sort();
        labels.dedup();
        labels
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XorMode {
    /// Count of node pairs whose edge presence differs.
    #[default]
    Binary,
    /// Sum of absolute weight differences.
    Weighted,
}

/// Distance between two graphs on their aligned, zero-padded upper
/// triangles, normalised by the number of node pairs of the larger graph.
pub fn xor_distance(g1: &Graph, g2: &Graph) -> f64 {
    xor_distance_with(g1, g2, XorMode::Binary)
}

pub fn xor_distance_with(g1: &Graph, g2: &Graph, mode: XorMode) -> f64 {
    let n = g1.n().max(g2.n());
    if n <= 1 {
        return 0.0;
    }
    xor_mismatch(g1, g2, mode) / (n * (n - 1) / 2) as f64
}

/// Unnormalised form: the number of node pairs whose edge presence differs
/// (or the summed weight difference). Unlike the normalised distance this is
/// a metric across graphs of different sizes.
pub fn xor_mismatch(g1: &Graph, g2: &Graph, mode: XorMode) -> f64 {
    let n = g1.n().max(g2.n());
    let weight = |g: &Graph, u: usize, v: usize| if u < g.n() && v < g.n() { g.weight(u, v) } else { 0.0 };
    let mut total = 0.0;
    for u in 0..n {
        for v in (u + 1)..n {
            let (a, b) = (weight(g1, u, v), weight(g2, u, v));
            total += match mode {
                XorMode::Binary => ((a > 0.0) != (b > 0.0)) as u8 as f64,
                XorMode::Weighted => (a - b).abs(),
            };
        }
    }
    total
}

/// Graph distance used by the nearest-neighbour rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Metric {
    Xor(XorMode),
    /// `1 - QJSD` on the fully connected merge.
    Qjsd { horizon: Horizon, config: WalkConfig },
}

impl Default for Metric {
    fn default() -> Self {
        Metric::Xor(XorMode::Binary)
    }
}

impl Metric {
    pub fn distance(&self, g1: &Graph, g2: &Graph) -> Result<f64> {
        match self {
            Metric::Xor(mode) => Ok(xor_distance_with(g1, g2, *mode)),
            Metric::Qjsd { horizon, config } => {
                let cfg = WalkConfig {
                    execution: Execution::Sequential,
                    ..*config
                };
                Ok(1.0 - graph_qjsd(g1, g2, *horizon, &cfg)?.value)
            }
        }
    }
}

/// Picks the modal label among the `k` nearest `(distance, label)` entries.
///
/// Neighbours are ranked by distance and then label, so the result does not
/// depend on training order. Label ties go to the smaller mean distance, then
/// the lexicographically smaller label.
fn vote(mut scored: Vec<(f64, &str)>, k: usize) -> String {
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let mut tally: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for &(d, label) in scored.iter().take(k) {
        let e = tally.entry(label).or_default();
        e.0 += 1;
        e.1 += d;
    }
    tally
        .into_iter()
        .map(|(label, (count, sum))| (label, count, sum / count as f64))
        .min_by(|a, b| {
            b.1.cmp(&a.1)
                .then_with(|| a.2.total_cmp(&b.2))
                .then_with(|| a.0.cmp(b.0))
        })
        .map(|(label, _, _)| label.to_string())
        .unwrap_or_default()
}

fn check_k(k: usize, train: usize) -> Result<()> {
    if train == 0 {
        return Err(Error::Domain("training set is empty".into()));
    }
    if k == 0 || k > train {
        return Err(Error::Parameter(format!("k = {k} must lie in 1..={train}")));
    }
    Ok(())
}

/// kNN label for `query` under the XOR distance.
pub fn knn_classify(train: &Dataset, query: &Graph, k: usize) -> Result<String> {
    knn_classify_with(train, query, k, &Metric::default())
}

pub fn knn_classify_with(train: &Dataset, query: &Graph, k: usize, metric: &Metric) -> Result<String> {
    check_k(k, train.len())?;
    let scored = train
        .items
        .iter()
        .map(|(g, label)| Ok((metric.distance(query, g)?, label.as_str())))
        .collect::<Result<Vec<_>>>()?;
    Ok(vote(scored, k))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset: String,
    pub accuracy: f64,
    /// Row = true label, column = predicted label, both in `labels` order.
    pub confusion: Vec<Vec<usize>>,
    pub labels: Vec<String>,
    pub k: usize,
    pub seed: u64,
    pub split_fraction: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub stratified: bool,
}

impl EvaluationReport {
    pub fn misclassified(&self) -> usize {
        self.test_size - (0..self.labels.len()).map(|i| self.confusion[i][i]).sum::<usize>()
    }

    /// Confusion matrix as CSV with a `true\predicted` corner cell.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.confusion) {
            out.push_str(l);
            for c in row {
                out.push(',');
                out.push_str(&c.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Seeded train/test split; stratified by label unless some class has fewer
/// than two members. Returns `(train, test, stratified)` index lists.
pub fn split_indices(data: &Dataset, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>, bool)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Parameter(format!("split fraction {fraction} outside (0, 1)")));
    }
    let mut rng = seeded_rng(seed, SPLIT_STREAM);
    let take = |count: usize| ((fraction * count as f64).round() as usize).clamp(1, count - 1);

    let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, (_, label)) in data.items.iter().enumerate() {
        by_label.entry(label).or_default().push(i);
    }

    let stratified = by_label.values().all(|idx| idx.len() >= 2);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    if stratified {
        for mut idx in by_label.into_values() {
            idx.shuffle(&mut rng);
            let n_train = take(idx.len());
            train.extend_from_slice(&idx[..n_train]);
            test.extend_from_slice(&idx[n_train..]);
        }
    } else {
        warn!("a class has fewer than 2 items; falling back to an unstratified split");
        if data.len() < 2 {
            return Err(Error::Parameter("need at least two items to split".into()));
        }
        let mut idx: Vec<usize> = (0..data.len()).collect();
        idx.shuffle(&mut rng);
        let n_train = take(idx.len());
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test, stratified))
}

pub fn evaluate(data: &Dataset, split_fraction: f64, k: usize, seed: u64) -> Result<EvaluationReport> {
    evaluate_with(data, split_fraction, k, seed, &Metric::default(), Execution::Parallel)
}

pub fn evaluate_with(
    data: &Dataset,
    split_fraction: f64,
    k: usize,
    seed: u64,
    metric: &Metric,
    execution: Execution,
) -> Result<EvaluationReport> {
    let (train_idx, test_idx, stratified) = split_indices(data, split_fraction, seed)?;
    check_k(k, train_idx.len())?;

    let predictions = try_map_indices(execution, test_idx.len(), |t| {
        let query = &data.items[test_idx[t]].0;
        let scored = train_idx
            .iter()
            .map(|&i| {
                let (g, label) = &data.items[i];
                Ok((metric.distance(query, g)?, label.as_str()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok::<_, Error>(vote(scored, k))
    })?;

    let labels = data.labels();
    let pos = |l: &str| labels.binary_search_by(|x| x.as_str().cmp(l)).expect("known label");
    let mut confusion = vec![vec![0usize; labels.len()]; labels.len()];
    for (t, predicted) in test_idx.iter().zip(&predictions) {
        confusion[pos(&data.items[*t].1)][pos(predicted)] += 1;
    }
    let correct: usize = (0..labels.len()).map(|i| confusion[i][i]).sum();

    Ok(EvaluationReport {
        dataset: data.name.clone(),
        accuracy: correct as f64 / test_idx.len() as f64,
        confusion,
        labels,
        k,
        seed,
        split_fraction,
        train_size: train_idx.len(),
        test_size: test_idx.len(),
        stratified,
    })
}

/// Full `rows × cols` XOR distance table.
pub fn distance_table(rows: &[Graph], cols: &[Graph], execution: Execution) -> Vec<Vec<f64>> {
    map_indices(execution, rows.len(), |i| {
        cols.iter().map(|g| xor_distance(&rows[i], g)).collect()
    })
}
