//! Weighted undirected graphs, merged two-graph structures, and seeded
//! generators for prototypes and edge-noise variants.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Weighted undirected graph without self-loops.
///
/// The weight matrix is symmetric with a zero diagonal and nonnegative
/// entries; a zero entry means "no edge". Attributes, when present, hold one
/// vector per node, all of the same dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    weights: DMatrix<f64>,
    attributes: Option<Vec<Vec<f64>>>,
    label: Option<String>,
}

impl Graph {
    /// Edgeless graph on `n` nodes.
    pub fn empty(n: usize) -> Self {
        Graph {
            weights: DMatrix::zeros(n, n),
            attributes: None,
            label: None,
        }
    }

    /// Builds a graph from a weight matrix, checking every invariant.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        if weights.nrows() != weights.ncols() {
            return Err(Error::Shape(format!(
                "weight matrix is {}x{}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        let n = weights.nrows();
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::Format(format!("self-loop at node {i}")));
            }
            for j in 0..n {
                let w = weights[(i, j)];
                if !w.is_finite() {
                    return Err(Error::Format(format!("non-finite weight at ({i}, {j})")));
                }
                if w < 0.0 {
                    return Err(Error::Format(format!("negative weight {w} at ({i}, {j})")));
                }
                if w != weights[(j, i)] {
                    return Err(Error::Format(format!(
                        "asymmetric weights at ({i}, {j}): {w} vs {}",
                        weights[(j, i)]
                    )));
                }
            }
        }
        Ok(Graph {
            weights,
            attributes: None,
            label: None,
        })
    }

    /// Builds a graph from undirected `(u, v, w)` triples, each listed once.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(u, v, w) in edges {
            g.insert_edge(u, v, w)?;
        }
        Ok(g)
    }

    fn insert_edge(&mut self, u: usize, v: usize, w: f64) -> Result<()> {
        let n = self.n();
        for idx in [u, v] {
            if idx >= n {
                return Err(Error::Index { index: idx, len: n });
            }
        }
        if u == v {
            return Err(Error::Format(format!("self-loop at node {u}")));
        }
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Format(format!("invalid weight {w} on edge ({u}, {v})")));
        }
        self.weights[(u, v)] = w;
        self.weights[(v, u)] = w;
        Ok(())
    }

    /// Attaches per-node attribute vectors.
    pub fn with_attributes(mut self, attributes: Vec<Vec<f64>>) -> Result<Self> {
        if attributes.len() != self.n() {
            return Err(Error::Attribute(format!(
                "{} attribute vectors for {} nodes",
                attributes.len(),
                self.n()
            )));
        }
        if let Some(first) = attributes.first() {
            let d = first.len();
            if let Some((u, a)) = attributes.iter().enumerate().find(|(_, a)| a.len() != d) {
                return Err(Error::Attribute(format!(
                    "node {u} has dimension {}, expected {d}",
                    a.len()
                )));
            }
        }
        self.attributes = Some(attributes);
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weights[(u, v)]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weights[(u, v)] > 0.0
    }

    pub fn attributes(&self) -> Option<&[Vec<f64>]> {
        self.attributes.as_deref()
    }

    /// Common attribute dimension, if the graph carries attributes.
    pub fn attribute_dim(&self) -> Option<usize> {
        self.attributes
            .as_ref()
            .map(|a| a.first().map_or(0, Vec::len))
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Edges `(u, v, w)` with `u < v` in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |u| {
            ((u + 1)..n).filter_map(move |v| {
                let w = self.weights[(u, v)];
                (w > 0.0).then_some((u, v, w))
            })
        })
    }

    /// Weighted degree of every node.
    pub fn degree_vector(&self) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.weights.row_iter().map(|r| r.sum()))
    }

    /// Combinatorial Laplacian `D - W` with weighted degrees on the diagonal.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = -self.weights.clone();
        for (i, d) in self.degree_vector().iter().enumerate() {
            l[(i, i)] = *d;
        }
        l
    }

    /// Relabels nodes so that old node `u` becomes `perm[u]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Parameter("not a permutation of the node set".into()));
        }
        let mut weights = DMatrix::zeros(n, n);
        for u in 0..n {
            for v in 0..n {
                weights[(perm[u], perm[v])] = self.weights[(u, v)];
            }
        }
        let attributes = self.attributes.as_ref().map(|attrs| {
            let mut out = vec![Vec::new(); n];
            for (u, a) in attrs.iter().enumerate() {
                out[perm[u]] = a.clone();
            }
            out
        });
        Ok(Graph {
            weights,
            attributes,
            label: self.label.clone(),
        })
    }
}

/// Free function form of [`Graph::laplacian`].
pub fn laplacian(g: &Graph) -> DMatrix<f64> {
    g.laplacian()
}

/// Free function form of [`Graph::degree_vector`].
pub fn degree_vector(g: &Graph) -> DVector<f64> {
    g.degree_vector()
}

/// Which inter-graph edges a merge creates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InterEdges {
    /// Every `(u, v)` with `u` in the first graph and `v` in the second.
    Full,
    /// Exactly one inter-graph edge.
    Single(usize, usize),
    /// Every pair, with the `(u, v)` edge weight multiplied by `boost`.
    FullBoosted { u: usize, v: usize, boost: f64 },
}

/// How inter-graph edge weights are assigned.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InterWeight {
    /// Constant weight 1.
    Unit,
    /// Gaussian kernel on node attributes with the given bandwidth.
    Gaussian { sigma: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergePolicy {
    pub edges: InterEdges,
    pub weight: InterWeight,
}

impl MergePolicy {
    pub fn full() -> Self {
        MergePolicy {
            edges: InterEdges::Full,
            weight: InterWeight::Unit,
        }
    }

    pub fn single(u: usize, v: usize) -> Self {
        MergePolicy {
            edges: InterEdges::Single(u, v),
            weight: InterWeight::Unit,
        }
    }

    pub fn with_weight(mut self, weight: InterWeight) -> Self {
        self.weight = weight;
        self
    }
}

/// Gaussian similarity `exp(-|a_u - a_v|^2 / (2 sigma^2))` between two
/// attribute vectors.
pub fn inter_edge_weight(a_u: &[f64], a_v: &[f64], sigma: f64) -> Result<f64> {
    if a_u.len() != a_v.len() {
        return Err(Error::Attribute(format!(
            "attribute dimensions differ: {} vs {}",
            a_u.len(),
            a_v.len()
        )));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    let sq: f64 = a_u.iter().zip(a_v).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((-sq / (2.0 * sigma * sigma)).exp())
}

/// Disjoint union of two graphs joined by inter-graph edges.
///
/// Nodes `0..n1` come from the first graph, `n1..n1+n2` from the second.
#[derive(Clone, Debug)]
pub struct MergedGraph {
    graph: Graph,
    n_left: usize,
    inter_edges: Vec<(usize, usize, f64)>,
}

impl MergedGraph {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.graph.n() - self.n_left
    }

    pub fn left_indices(&self) -> std::ops::Range<usize> {
        0..self.n_left
    }

    pub fn right_indices(&self) -> std::ops::Range<usize> {
        self.n_left..self.graph.n()
    }

    /// Inter-graph edges as `(left index, merged right index, weight)`.
    pub fn inter_edges(&self) -> &[(usize, usize, f64)] {
        &self.inter_edges
    }

    /// Whether merged node `u` belongs to the first graph.
    pub fn is_left(&self, u: usize) -> bool {
        u < self.n_left
    }

    /// Weight matrix restricted to one side.
    pub fn restrict(&self, left: bool) -> DMatrix<f64> {
        let r = if left { self.left_indices() } else { self.right_indices() };
        self.graph
            .weights()
            .view((r.start, r.start), (r.len(), r.len()))
            .into_owned()
    }
}

pub fn merge_graphs(g1: &Graph, g2: &Graph, policy: MergePolicy) -> Result<MergedGraph> {
    let (n1, n2) = (g1.n(), g2.n());
    let n = n1 + n2;

    let pairs: Vec<(usize, usize, f64)> = match policy.edges {
        InterEdges::Full => (0..n1)
            .flat_map(|u| (0..n2).map(move |v| (u, v, 1.0)))
            .collect(),
        InterEdges::Single(u, v) => {
            check_index(u, n1)?;
            check_index(v, n2)?;
            vec![(u, v, 1.0)]
        }
        InterEdges::FullBoosted { u, v, boost } => {
            check_index(u, n1)?;
            check_index(v, n2)?;
            if !(boost > 0.0) || !boost.is_finite() {
                return Err(Error::Parameter(format!("boost must be positive, got {boost}")));
            }
            (0..n1)
                .flat_map(|a| (0..n2).map(move |b| (a, b, if (a, b) == (u, v) { boost } else { 1.0 })))
                .collect()
        }
    };

    let kernel = match policy.weight {
        InterWeight::Unit => None,
        InterWeight::Gaussian { sigma } => {
            let (a1, a2) = match (g1.attributes(), g2.attributes()) {
                (Some(a1), Some(a2)) => (a1, a2),
                _ => {
                    return Err(Error::Attribute(
                        "attribute-kernel weighting needs attributes on both graphs".into(),
                    ))
                }
            };
            if g1.attribute_dim() != g2.attribute_dim() {
                return Err(Error::Attribute(format!(
                    "attribute dimensions differ: {:?} vs {:?}",
                    g1.attribute_dim(),
                    g2.attribute_dim()
                )));
            }
            Some((a1, a2, sigma))
        }
    };

    let mut weights = DMatrix::zeros(n, n);
    weights.view_mut((0, 0), (n1, n1)).copy_from(g1.weights());
    weights.view_mut((n1, n1), (n2, n2)).copy_from(g2.weights());

    let mut inter_edges = Vec::with_capacity(pairs.len());
    for (u, v, scale) in pairs {
        let base = match kernel {
            None => 1.0,
            Some((a1, a2, sigma)) => inter_edge_weight(&a1[u], &a2[v], sigma)?,
        };
        let w = base * scale;
        weights[(u, n1 + v)] = w;
        weights[(n1 + v, u)] = w;
        inter_edges.push((u, n1 + v, w));
    }

    let attributes = match (g1.attributes(), g2.attributes()) {
        (Some(a1), Some(a2)) if g1.attribute_dim() == g2.attribute_dim() => {
            Some(a1.iter().chain(a2).cloned().collect())
        }
        _ => None,
    };

    Ok(MergedGraph {
        graph: Graph {
            weights,
            attributes,
            label: None,
        },
        n_left: n1,
        inter_edges,
    })
}

fn check_index(index: usize, len: usize) -> Result<()> {
    if index >= len {
        Err(Error::Index { index, len })
    } else {
        Ok(())
    }
}

/// Flips exactly `k` distinct node pairs chosen uniformly at random: present
/// edges are deleted, absent ones are added with weight 1.
///
/// Pairs are drawn by a partial Fisher-Yates shuffle, so for a fixed seed the
/// pairs flipped for `k` are a superset of those flipped for `k - 1`.
pub fn perturb(g: &Graph, k: usize, seed: u64) -> Result<Graph> {
    let n = g.n();
    let pairs = n * n.saturating_sub(1) / 2;
    if k > pairs {
        return Err(Error::Parameter(format!(
            "cannot flip {k} pairs in a graph with {pairs} node pairs"
        )));
    }
    let mut out = g.clone();
    if k == 0 {
        return Ok(out);
    }
    let mut candidates: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .collect();
    let mut rng = seeded_rng(seed, 0);
    let (chosen, _) = candidates.partial_shuffle(&mut rng, k);
    for &(u, v) in chosen.iter() {
        let w = if out.has_edge(u, v) { 0.0 } else { 1.0 };
        out.weights[(u, v)] = w;
        out.weights[(v, u)] = w;
    }
    Ok(out)
}

/// Erdős–Rényi graph: each pair independently present with probability `p`,
/// unit weights.
pub fn synth_prototype(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = seeded_rng(seed, 0);
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                g.weights[(u, v)] = 1.0;
                g.weights[(v, u)] = 1.0;
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> Graph {
        Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap()
    }

    fn p3() -> Graph {
        Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn c3() -> Graph {
        Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn laplacian_small_graphs() {
        assert_eq!(k2().laplacian(), DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        assert_eq!(Graph::empty(0).laplacian().shape(), (0, 0));
        assert_eq!(
            p3().laplacian(),
            DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0])
        );
    }

    #[test]
    fn degrees() {
        assert_eq!(k2().degree_vector().as_slice(), &[1.0, 1.0]);
        let star = Graph::from_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        assert_eq!(star.degree_vector().as_slice(), &[3.0, 1.0, 1.0, 1.0]);
        let wk2 = Graph::from_edges(2, &[(0, 1, 2.5)]).unwrap();
        assert_eq!(wk2.degree_vector().as_slice(), &[2.5, 2.5]);
    }

    #[test]
    fn invalid_weights_rejected() {
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(matches!(Graph::from_weights(asym), Err(Error::Format(_))));
        let looped = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(Graph::from_weights(looped).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert!(Graph::from_weights(neg).is_err());
        assert!(Graph::from_edges(2, &[(0, 0, 1.0)]).is_err());
        assert!(matches!(Graph::from_edges(2, &[(0, 2, 1.0)]), Err(Error::Index { .. })));
    }

    #[test]
    fn merge_counts() {
        let m = merge_graphs(&k2(), &k2(), MergePolicy::full()).unwrap();
        assert_eq!(m.graph().n(), 4);
        assert_eq!(m.graph().edge_count(), 6);
        assert_eq!(m.inter_edges().len(), 4);
        assert!(m.graph().edges().all(|(_, _, w)| w == 1.0));

        let s = merge_graphs(&k2(), &k2(), MergePolicy::single(0, 0)).unwrap();
        assert_eq!(s.graph().edge_count(), 3);
        assert_eq!(s.inter_edges(), &[(0, 2, 1.0)]);

        let pc = merge_graphs(&p3(), &c3(), MergePolicy::full()).unwrap();
        assert_eq!(pc.graph().n(), 6);
        assert_eq!(pc.graph().edge_count(), 2 + 3 + 9);
        assert_eq!(pc.restrict(true), *p3().weights());
        assert_eq!(pc.restrict(false), *c3().weights());
        assert!(pc.inter_edges().iter().all(|&(u, v, _)| pc.is_left(u) && !pc.is_left(v)));
    }

    #[test]
    fn merge_errors() {
        assert!(matches!(
            merge_graphs(&k2(), &k2(), MergePolicy::single(2, 0)),
            Err(Error::Index { index: 2, len: 2 })
        ));
        let gauss = MergePolicy::full().with_weight(InterWeight::Gaussian { sigma: 1.0 });
        assert!(matches!(merge_graphs(&k2(), &k2(), gauss), Err(Error::Attribute(_))));
        let a = k2().with_attributes(vec![vec![0.0], vec![1.0]]).unwrap();
        let b = k2().with_attributes(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(merge_graphs(&a, &b, gauss), Err(Error::Attribute(_))));
    }

    #[test]
    fn gaussian_inter_weights() {
        assert_eq!(inter_edge_weight(&[0.3, 2.0], &[0.3, 2.0], 0.1).unwrap(), 1.0);
        let w = inter_edge_weight(&[0.0], &[1.0], 1.0).unwrap();
        assert!((w - (-0.5f64).exp()).abs() < 1e-15);
        assert!((w - 0.60653).abs() < 1e-5);
        assert!(inter_edge_weight(&[0.0], &[1e4], 1.0).unwrap() < 1e-300);
        assert!(inter_edge_weight(&[0.0], &[1.0, 2.0], 1.0).is_err());

        let a = k2().with_attributes(vec![vec![0.0], vec![1.0]]).unwrap();
        let m = merge_graphs(&a, &a, MergePolicy::full().with_weight(InterWeight::Gaussian { sigma: 1.0 }))
            .unwrap();
        assert_eq!(m.graph().weight(0, 2), 1.0);
        assert!((m.graph().weight(0, 3) - (-0.5f64).exp()).abs() < 1e-15);
        // intra weights untouched
        assert_eq!(m.graph().weight(0, 1), 1.0);
    }

    fn flips(a: &Graph, b: &Graph) -> usize {
        let n = a.n();
        (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .filter(|&(u, v)| a.has_edge(u, v) != b.has_edge(u, v))
            .count()
    }

    #[test]
    fn perturb_flips_exactly_k() {
        let g = synth_prototype(12, 0.4, 3).unwrap();
        assert_eq!(perturb(&g, 0, 9).unwrap(), g);
        for seed in 0..20 {
            assert_eq!(flips(&g, &perturb(&g, 3, seed).unwrap()), 3);
        }
        assert_eq!(perturb(&g, 5, 1).unwrap(), perturb(&g, 5, 1).unwrap());
        // larger k extends the flip set of smaller k
        for k in 1..6 {
            let prev = perturb(&g, k - 1, 8).unwrap();
            assert_eq!(flips(&prev, &perturb(&g, k, 8).unwrap()), 1);
        }

        let e = perturb(&k2(), 1, 42).unwrap();
        assert_eq!(e.edge_count(), 0);
        assert_eq!(e.n(), 2);
        assert!(matches!(perturb(&k2(), 2, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn prototypes() {
        let k10 = synth_prototype(10, 1.0, 7).unwrap();
        assert_eq!(k10.edge_count(), 45);
        assert_eq!(synth_prototype(5, 0.0, 7).unwrap().edge_count(), 0);
        assert!(synth_prototype(5, 1.5, 7).is_err());

        let mean = (0..1000u64)
            .map(|s| synth_prototype(10, 0.3, s).unwrap().edge_count() as f64)
            .sum::<f64>()
            / 1000.0;
        // p * n(n-1)/2 = 13.5
        assert!((mean - 13.5).abs() <= 1.0, "mean edge count {mean}");
    }

    #[test]
    fn permutation_relabels() {
        let g = p3();
        let h = g.permuted(&[1, 0, 2]).unwrap();
        assert!(h.has_edge(1, 0) && h.has_edge(0, 2) && !h.has_edge(1, 2));
        assert!(g.permuted(&[0, 0, 1]).is_err());
    }
}
