//! Graph and dataset representation, file loaders, and synthetic generators.
//!
//! Graphs are stored as per-node sorted in/out neighbor lists over dense
//! 0-based node ids. Self-loops are never stored; the encoder injects them
//! transiently where the math needs them. All types are immutable after
//! construction.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Unweighted graph with per-node sorted in- and out-neighbor lists.
///
/// For undirected graphs every edge is stored in both directions, so the
/// in- and out-neighbor lists of a node coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    directed: bool,
    out_nbrs: Vec<Vec<usize>>,
    in_nbrs: Vec<Vec<usize>>,
}

impl Graph {
    /// Build a graph from an edge list. Duplicate edges are collapsed and
    /// self-loops stripped, both with a warning. Undirected graphs are
    /// symmetrized.
    pub fn from_edges(
        n: usize,
        directed: bool,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut out_nbrs = vec![Vec::new(); n];
        let mut self_loops = 0usize;
        for (src, dst) in edges {
            if src >= n || dst >= n {
                return Err(Error::schema(format!(
                    "edge ({src}, {dst}) references a node outside [0, {n})"
                )));
            }
            if src == dst {
                self_loops += 1;
                continue;
            }
            out_nbrs[src].push(dst);
            if !directed {
                out_nbrs[dst].push(src);
            }
        }
        if self_loops > 0 {
            log::warn!("stripped {self_loops} self-loop(s)");
        }
        let mut duplicates = 0usize;
        for list in &mut out_nbrs {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            duplicates += before - list.len();
        }
        if duplicates > 0 {
            log::warn!("collapsed {duplicates} duplicate edge(s)");
        }
        let in_nbrs = if directed {
            let mut rev = vec![Vec::new(); n];
            for (src, list) in out_nbrs.iter().enumerate() {
                for &dst in list {
                    rev[dst].push(src);
                }
            }
            // src iteration is ascending, so each rev list is already sorted
            rev
        } else {
            out_nbrs.clone()
        };
        Ok(Graph {
            n,
            directed,
            out_nbrs,
            in_nbrs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_nbrs[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_nbrs[v]
    }

    /// Sorted union of in- and out-neighbors, i.e. the neighborhood when
    /// edge orientation is ignored.
    pub fn undirected_neighbors(&self, v: usize) -> Vec<usize> {
        let mut merged: Vec<usize> = self.out_nbrs[v]
            .iter()
            .chain(self.in_nbrs[v].iter())
            .copied()
            .collect();
        merged.sort_unstable();
        merged.dedup();
        merged
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.out_nbrs[src].binary_search(&dst).is_ok()
    }

    /// Number of stored directed arcs.
    pub fn num_arcs(&self) -> usize {
        self.out_nbrs.iter().map(Vec::len).sum()
    }

    /// Edge count: undirected edges counted once, directed arcs individually.
    pub fn num_edges(&self) -> usize {
        if self.directed {
            self.num_arcs()
        } else {
            self.num_arcs() / 2
        }
    }

    /// Iterate edges as (src, dst). Undirected edges are yielded once with
    /// src < dst; directed graphs yield every arc.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_nbrs.iter().enumerate().flat_map(move |(src, list)| {
            list.iter()
                .copied()
                .filter(move |&dst| self.directed || src < dst)
                .map(move |dst| (src, dst))
        })
    }
}

/// A graph plus node features, optional labels, and optional named splits.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: Graph,
    pub features: DMatrix<f64>,
    pub labels: Option<Vec<usize>>,
    pub splits: Option<BTreeMap<String, Vec<usize>>>,
}

impl Dataset {
    pub fn new(
        graph: Graph,
        features: DMatrix<f64>,
        labels: Option<Vec<usize>>,
        splits: Option<BTreeMap<String, Vec<usize>>>,
    ) -> Result<Self> {
        let n = graph.n();
        if features.nrows() != n {
            return Err(Error::schema(format!(
                "feature matrix has {} rows but the graph has {n} nodes",
                features.nrows()
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::schema(format!(
                    "label vector has {} entries but the graph has {n} nodes",
                    labels.len()
                )));
            }
        }
        if let Some(splits) = &splits {
            let mut seen = vec![false; n];
            for (name, indices) in splits {
                for &idx in indices {
                    if idx >= n {
                        return Err(Error::schema(format!(
                            "split '{name}' contains node {idx} outside [0, {n})"
                        )));
                    }
                    if seen[idx] {
                        return Err(Error::schema(format!(
                            "splits are not disjoint: node {idx} appears twice"
                        )));
                    }
                    seen[idx] = true;
                }
            }
        }
        Ok(Dataset {
            graph,
            features,
            labels,
            splits,
        })
    }

    /// Number of label classes (max label + 1); 0 when unlabeled.
    pub fn num_classes(&self) -> usize {
        self.labels
            .as_ref()
            .and_then(|l| l.iter().max().map(|&m| m + 1))
            .unwrap_or(0)
    }
}

/// Node-induced subgraph: original node ids plus a local graph over them.
#[derive(Debug, Clone)]
pub struct Subgraph {
    /// Original node ids, sorted ascending; position = local id.
    pub nodes: Vec<usize>,
    pub local: Graph,
}

impl Subgraph {
    /// Induce the subgraph on `nodes` (deduplicated and sorted here).
    pub fn induced(graph: &Graph, nodes: &[usize]) -> Self {
        let mut nodes: Vec<usize> = nodes.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        let local_of: BTreeMap<usize, usize> =
            nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges = Vec::new();
        for (local_src, &orig_src) in nodes.iter().enumerate() {
            for &orig_dst in graph.out_neighbors(orig_src) {
                if let Some(&local_dst) = local_of.get(&orig_dst) {
                    edges.push((local_src, local_dst));
                }
            }
        }
        // Edges inherited from a valid host graph, so construction cannot fail.
        let local = Graph::from_edges(nodes.len(), graph.is_directed(), edges)
            .expect("induced edges are in range");
        Subgraph { nodes, local }
    }
}

// ---------------------------------------------------------------------------
// On-disk format
// ---------------------------------------------------------------------------

/// Load a dataset directory: `edges.tsv` (+`features.csv`, optional
/// `labels.txt`, `splits.json`).
///
/// `edges.tsv` starts with a `directed`/`undirected` header line; node count
/// is the largest referenced id + 1 and ids must be gap-free. The feature
/// matrix must have exactly one row per node.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let edges_path = dir.join("edges.tsv");
    if !edges_path.is_file() {
        return Err(Error::NotFound(edges_path.display().to_string()));
    }
    let features_path = dir.join("features.csv");
    if !features_path.is_file() {
        return Err(Error::NotFound(features_path.display().to_string()));
    }

    let edges_text = fs::read_to_string(&edges_path)?;
    let mut lines = edges_text.lines();
    let directed = match lines.next().map(str::trim) {
        Some("directed") => true,
        Some("undirected") => false,
        other => {
            return Err(Error::schema(format!(
                "edges.tsv must start with 'directed' or 'undirected', got {other:?}"
            )))
        }
    };
    let mut edges = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let (src, dst) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (parse_index(a)?, parse_index(b)?),
            _ => {
                return Err(Error::schema(format!(
                    "edges.tsv line {}: expected 'src<TAB>dst'",
                    lineno + 2
                )))
            }
        };
        edges.push((src, dst));
    }
    if edges.is_empty() {
        return Err(Error::schema("edges.tsv contains no edges".to_string()));
    }
    let n = edges.iter().map(|&(s, d)| s.max(d)).max().unwrap() + 1;
    let mut present = vec![false; n];
    for &(s, d) in &edges {
        present[s] = true;
        present[d] = true;
    }
    if let Some(gap) = present.iter().position(|&p| !p) {
        return Err(Error::schema(format!(
            "node ids are not dense: id {gap} never appears in edges.tsv"
        )));
    }
    let graph = Graph::from_edges(n, directed, edges)?;

    let features = read_features(&features_path, n)?;

    let labels_path = dir.join("labels.txt");
    let labels = if labels_path.is_file() {
        let text = fs::read_to_string(&labels_path)?;
        let mut labels = Vec::with_capacity(n);
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let value: i64 = line
                .parse()
                .map_err(|_| Error::schema(format!("labels.txt: bad label '{line}'")))?;
            if value < 0 {
                return Err(Error::schema(format!("labels.txt: negative label {value}")));
            }
            labels.push(value as usize);
        }
        Some(labels)
    } else {
        None
    };

    let splits_path = dir.join("splits.json");
    let splits = if splits_path.is_file() {
        let text = fs::read_to_string(&splits_path)?;
        Some(serde_json::from_str::<BTreeMap<String, Vec<usize>>>(&text)?)
    } else {
        None
    };

    Dataset::new(graph, features, labels, splits)
}

/// Write a dataset in the directory format accepted by [`load_dataset`].
pub fn save_dataset(dir: &Path, dataset: &Dataset) -> Result<()> {
    fs::create_dir_all(dir)?;
    let graph = &dataset.graph;
    let mut edges_out = String::new();
    edges_out.push_str(if graph.is_directed() {
        "directed\n"
    } else {
        "undirected\n"
    });
    for (src, dst) in graph.edges() {
        edges_out.push_str(&format!("{src}\t{dst}\n"));
    }
    fs::write(dir.join("edges.tsv"), edges_out)?;

    let mut feat_out = String::new();
    for i in 0..dataset.features.nrows() {
        let row: Vec<String> = (0..dataset.features.ncols())
            .map(|j| format!("{}", dataset.features[(i, j)]))
            .collect();
        feat_out.push_str(&row.join(","));
        feat_out.push('\n');
    }
    fs::write(dir.join("features.csv"), feat_out)?;

    if let Some(labels) = &dataset.labels {
        let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
        fs::write(dir.join("labels.txt"), text)?;
    }
    if let Some(splits) = &dataset.splits {
        fs::write(dir.join("splits.json"), serde_json::to_string_pretty(splits)?)?;
    }
    Ok(())
}

fn parse_index(text: &str) -> Result<usize> {
    text.parse()
        .map_err(|_| Error::schema(format!("bad node index '{text}'")))
}

fn read_features(path: &Path, n: usize) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>> = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::schema(format!("features.csv: bad value '{cell}'")))
            })
            .collect();
        rows.push(row?);
    }
    if rows.len() != n {
        return Err(Error::schema(format!(
            "features.csv has {} rows but the edge list implies {n} nodes",
            rows.len()
        )));
    }
    let cols = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::schema("features.csv rows have unequal lengths".to_string()));
    }
    Ok(DMatrix::from_fn(n, cols, |i, j| rows[i][j]))
}

// ---------------------------------------------------------------------------
// Synthetic generators
// ---------------------------------------------------------------------------

/// Barbell graph: two `m1`-cliques joined by a path of `m2` bridge nodes.
///
/// Nodes `0..m1` form the first clique, `m1..m1+m2` the bridge path, and the
/// rest the second clique. The bridging edges attach to nodes `m1-1` and
/// `m1+m2`.
pub fn barbell(m1: usize, m2: usize) -> Result<Graph> {
    if m1 < 3 {
        return Err(Error::invalid(format!("barbell requires m1 >= 3, got {m1}")));
    }
    let n = 2 * m1 + m2;
    let mut edges = Vec::new();
    for clique_start in [0, m1 + m2] {
        for a in clique_start..clique_start + m1 {
            for b in a + 1..clique_start + m1 {
                edges.push((a, b));
            }
        }
    }
    // chain: clique A attachment -> bridge nodes -> clique B attachment
    let mut prev = m1 - 1;
    for bridge in m1..m1 + m2 {
        edges.push((prev, bridge));
        prev = bridge;
    }
    edges.push((prev, m1 + m2));
    Graph::from_edges(n, false, edges)
}

/// Assortative planted-partition dataset: an SBM graph with class-centroid
/// features plus Gaussian noise. Deterministic given `seed`.
#[allow(clippy::too_many_arguments)]
pub fn planted_partition(
    classes: usize,
    per_class: usize,
    p_in: f64,
    p_out: f64,
    feat_dim: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) {
        return Err(Error::invalid("edge probabilities must lie in [0, 1]"));
    }
    if p_in < p_out {
        return Err(Error::invalid(format!(
            "assortative generator requires p_in >= p_out, got p_in={p_in} < p_out={p_out}"
        )));
    }
    if feat_dim < classes {
        return Err(Error::invalid(format!(
            "feat_dim ({feat_dim}) must be at least the class count ({classes})"
        )));
    }
    let n = classes * per_class;
    let labels: Vec<usize> = (0..n).map(|v| v / per_class).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if labels[i] == labels[j] { p_in } else { p_out };
            if p > 0.0 && rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    let graph = Graph::from_edges(n, false, edges)?;

    let noise = Normal::new(0.0, noise_sd)
        .map_err(|e| Error::invalid(format!("bad noise_sd: {e}")))?;
    let mut features = DMatrix::zeros(n, feat_dim);
    for i in 0..n {
        for j in 0..feat_dim {
            let centroid = if j == labels[i] { 1.0 } else { 0.0 };
            features[(i, j)] = centroid + noise.sample(&mut rng);
        }
    }

    Dataset::new(graph, features, Some(labels), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use tempfile::tempdir;

    #[test]
    fn undirected_edge_is_symmetrized() {
        let g = Graph::from_edges(2, false, [(0, 1)]).unwrap();
        assert_eq!(g.in_neighbors(0), &[1]);
        assert_eq!(g.out_neighbors(0), &[1]);
        assert_eq!(g.in_neighbors(1), &[0]);
    }

    #[test]
    fn duplicates_collapse_and_self_loops_drop() {
        let g = Graph::from_edges(3, true, [(0, 1), (0, 1), (2, 2), (0, 2)]).unwrap();
        assert_eq!(g.out_neighbors(0), &[1, 2]);
        assert_eq!(g.out_neighbors(2), &[] as &[usize]);
        assert_eq!(g.num_arcs(), 2);
    }

    #[test]
    fn out_of_range_edge_rejected() {
        let err = Graph::from_edges(2, true, [(0, 5)]).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn directed_in_neighbors_are_reversed_arcs() {
        let g = Graph::from_edges(3, true, [(0, 2), (1, 2)]).unwrap();
        assert_eq!(g.in_neighbors(2), &[0, 1]);
        assert_eq!(g.in_neighbors(0), &[] as &[usize]);
    }

    #[test]
    fn load_requires_files() {
        let dir = tempdir().unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        assert!(matches!(err, Error::NotFound(_)));
    }

    #[test]
    fn feature_row_mismatch_is_schema_error() {
        let dir = tempdir().unwrap();
        fs::write(dir.path().join("edges.tsv"), "undirected\n0\t1\n").unwrap();
        fs::write(dir.path().join("features.csv"), "1.0\n2.0\n3.0\n").unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn id_gap_is_schema_error() {
        let dir = tempdir().unwrap();
        fs::write(dir.path().join("edges.tsv"), "undirected\n0\t2\n").unwrap();
        fs::write(dir.path().join("features.csv"), "1.0\n2.0\n3.0\n").unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn minimal_undirected_load() {
        let dir = tempdir().unwrap();
        fs::write(dir.path().join("edges.tsv"), "undirected\n0\t1\n").unwrap();
        fs::write(dir.path().join("features.csv"), "1.0,0.0\n0.0,1.0\n").unwrap();
        let ds = load_dataset(dir.path()).unwrap();
        assert_eq!(ds.graph.in_neighbors(0), &[1]);
        assert!(!ds.graph.is_directed());
    }

    /// Round-trip oracle: the dataset built in memory is the expected value
    /// for save-then-load.
    #[test]
    fn save_load_round_trip_matches_in_memory_construction() {
        let graph = Graph::from_edges(5, false, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let features = DMatrix::from_fn(5, 3, |i, j| (i * 3 + j) as f64 * 0.25 - 1.0);
        let mut splits = BTreeMap::new();
        splits.insert("train".to_string(), vec![0, 1]);
        splits.insert("test".to_string(), vec![3, 4]);
        let expected = Dataset::new(
            graph,
            features,
            Some(vec![0, 0, 1, 1, 1]),
            Some(splits),
        )
        .unwrap();

        let dir = tempdir().unwrap();
        save_dataset(dir.path(), &expected).unwrap();
        let loaded = load_dataset(dir.path()).unwrap();
        assert_eq!(loaded, expected);

        // save(load(d)) is byte-identical to the first save
        let dir2 = tempdir().unwrap();
        save_dataset(dir2.path(), &loaded).unwrap();
        for file in ["edges.tsv", "features.csv", "labels.txt", "splits.json"] {
            assert_eq!(
                fs::read(dir.path().join(file)).unwrap(),
                fs::read(dir2.path().join(file)).unwrap(),
                "{file} not byte-identical"
            );
        }
    }

    #[test]
    fn barbell_6_2_counts() {
        let g = barbell(6, 2).unwrap();
        assert_eq!(g.n(), 14);
        // two K6 cliques (15 edges each) plus a 3-edge bridge chain
        assert_eq!(g.num_edges(), 33);
    }

    #[test]
    fn barbell_3_0_is_two_triangles_with_one_edge() {
        let g = barbell(3, 0).unwrap();
        assert_eq!(g.n(), 6);
        assert_eq!(g.num_edges(), 7);
        assert!(g.has_edge(2, 3));
    }

    #[test]
    fn barbell_rejects_small_cliques() {
        assert!(matches!(barbell(2, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn planted_partition_extremes_give_disjoint_cliques() {
        let ds = planted_partition(2, 3, 1.0, 0.0, 4, 0.5, 7).unwrap();
        assert_eq!(ds.graph.n(), 6);
        assert_eq!(ds.graph.num_edges(), 6); // two triangles
        let labels = ds.labels.as_ref().unwrap();
        for (u, v) in ds.graph.edges() {
            assert_eq!(labels[u], labels[v]);
        }
    }

    #[test]
    fn planted_partition_zero_noise_repeats_class_rows() {
        let ds = planted_partition(2, 3, 1.0, 0.0, 5, 0.0, 3).unwrap();
        assert_eq!(ds.features.row(0), ds.features.row(1));
        assert_eq!(ds.features.row(3), ds.features.row(5));
        assert_ne!(ds.features.row(0), ds.features.row(3));
    }

    #[test]
    fn planted_partition_is_deterministic() {
        let a = planted_partition(3, 10, 0.4, 0.05, 6, 1.0, 42).unwrap();
        let b = planted_partition(3, 10, 0.4, 0.05, 6, 1.0, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn planted_partition_rejects_disassortative_probs() {
        let err = planted_partition(2, 3, 0.1, 0.5, 4, 0.0, 0).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn planted_partition_intra_degree_within_binomial_bounds() {
        // Total intra-class edge count over 20 seeds is Binomial(M, p_in)
        // with M = seeds * classes * C(per_class, 2).
        let (classes, per_class, p_in) = (3usize, 20usize, 0.3f64);
        let trials_per_seed = classes * per_class * (per_class - 1) / 2;
        let mut intra_total = 0usize;
        for seed in 0..20u64 {
            let ds = planted_partition(classes, per_class, p_in, 0.0, 4, 0.0, seed).unwrap();
            intra_total += ds.graph.num_edges();
        }
        let m = (20 * trials_per_seed) as f64;
        let mean = m * p_in;
        let sd = (m * p_in * (1.0 - p_in)).sqrt();
        let diff = (intra_total as f64 - mean).abs();
        assert!(diff <= 5.0 * sd, "|{intra_total} - {mean}| > 5sd ({sd})");
    }

    #[test]
    fn induced_subgraph_keeps_exactly_host_edges() {
        let g = barbell(3, 0).unwrap();
        let sub = Subgraph::induced(&g, &[0, 1, 2, 3]);
        assert_eq!(sub.nodes, vec![0, 1, 2, 3]);
        // triangle 0-1-2 plus bridge 2-3
        assert_eq!(sub.local.num_edges(), 4);
        assert!(sub.local.has_edge(2, 3));
        assert!(!sub.local.has_edge(0, 3));
    }

    proptest! {
        #[test]
        fn undirected_in_equals_out(edges in proptest::collection::vec((0usize..12, 0usize..12), 0..40)) {
            let g = Graph::from_edges(12, false, edges).unwrap();
            for v in 0..12 {
                prop_assert_eq!(g.in_neighbors(v), g.out_neighbors(v));
            }
        }

        #[test]
        fn neighbor_lists_sorted_and_unique(edges in proptest::collection::vec((0usize..10, 0usize..10), 0..40), directed in any::<bool>()) {
            let g = Graph::from_edges(10, directed, edges).unwrap();
            for v in 0..10 {
                let list = g.out_neighbors(v);
                prop_assert!(list.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(!list.contains(&v));
            }
        }
    }
}
