//! Isolation trees and forests, usable on raw features (the classic iForest
//! score) or on ensemble representations, where the score is inverted so
//! that points that are hard to isolate score high.

use std::borrow::Cow;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_seed, write_file, Dataset, Execution, IserConfig, RngStream};
use crate::partitioning::PartitionSet;
use crate::scoring::{transform_prepared, Method, ScoreVector};

const EULER_GAMMA: f64 = 0.577_215_664_9;

/// Format tag written into serialized forests.
pub const FOREST_FORMAT: &str = "iser-forest/v1";

pub const DEFAULT_TREES: usize = 100;
pub const DEFAULT_MAX_SUBSAMPLE: usize = 256;

/// Salt separating the tree streams from the partitioning streams when both
/// are derived from one user seed.
const TREE_SEED_SALT: u64 = 0x1F0_4E57;

/// Average path length of an unsuccessful BST search over `n` points.
pub fn average_path_length(n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let n = n as f64;
    2.0 * ((n - 1.0).ln() + EULER_GAMMA) - 2.0 * (n - 1.0) / n
}

/// Maximum depth grown for a tree trained on `subsample` points.
pub fn height_limit(subsample: usize) -> usize {
    (subsample.max(2) as f64).log2().ceil() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Internal {
        feature: usize,
        split: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        size: usize,
        depth: usize,
    },
}

/// Arena-allocated isolation tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationTree {
    nodes: Vec<Node>,
    dim: usize,
}

impl IsolationTree {
    fn grow<R: Rng>(data: &Dataset, mut idx: Vec<usize>, limit: usize, rng: &mut R) -> Self {
        let mut tree = IsolationTree {
            nodes: Vec::new(),
            dim: data.d(),
        };
        tree.split(data, &mut idx, 0, limit, rng);
        tree
    }

    fn split<R: Rng>(
        &mut self,
        data: &Dataset,
        idx: &mut [usize],
        depth: usize,
        limit: usize,
        rng: &mut R,
    ) -> usize {
        let id = self.nodes.len();
        let leaf = Node::Leaf {
            size: idx.len(),
            depth,
        };
        self.nodes.push(leaf);
        if depth >= limit || idx.len() <= 1 {
            return id;
        }

        // Features with zero spread are redrawn up to `dim` times.
        let mut chosen = None;
        for _ in 0..self.dim {
            let f = rng.random_range(0..self.dim);
            let (lo, hi) = idx
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    let v = data.row(i)[f];
                    (lo.min(v), hi.max(v))
                });
            if hi > lo {
                chosen = Some((f, lo, hi));
                break;
            }
        }
        let Some((feature, lo, hi)) = chosen else {
            return id;
        };
        let split = loop {
            let v = rng.random_range(lo..hi);
            if v > lo {
                break v;
            }
        };

        let mut mid = 0;
        for k in 0..idx.len() {
            if data.row(idx[k])[feature] < split {
                idx.swap(k, mid);
                mid += 1;
            }
        }
        let (l, r) = idx.split_at_mut(mid);
        let left = self.split(data, l, depth + 1, limit, rng);
        let right = self.split(data, r, depth + 1, limit, rng);
        self.nodes[id] = Node::Internal {
            feature,
            split,
            left,
            right,
        };
        id
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Deepest leaf.
    pub fn height(&self) -> usize {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { depth, .. } => Some(*depth),
                Node::Internal { .. } => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// The leaf `x` routes to, as `(size, depth)`.
    pub fn leaf_for(&self, x: &[f64]) -> (usize, usize) {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Internal {
                    feature,
                    split,
                    left,
                    right,
                } => id = if x[*feature] < *split { *left } else { *right },
                Node::Leaf { size, depth } => return (*size, *depth),
            }
        }
    }

    /// Depth of the leaf `x` reaches plus the expected remaining depth for the
    /// points that leaf still holds.
    pub fn path_length(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.path_length_unchecked(x))
    }

    fn path_length_unchecked(&self, x: &[f64]) -> f64 {
        let (size, depth) = self.leaf_for(x);
        depth as f64 + average_path_length(size)
    }
}

/// Which feature space the forest was trained in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Raw,
    Phi,
}

impl Space {
    fn name(self) -> &'static str {
        match self {
            Space::Raw => "raw",
            Space::Phi => "phi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationForestModel {
    trees: Vec<IsolationTree>,
    subsample: usize,
    space: Space,
    /// Present iff `space == Phi`.
    iser_model: Option<PartitionSet>,
}

#[derive(Serialize, Deserialize)]
struct ForestDocument<'a> {
    format: Cow<'a, str>,
    #[serde(flatten)]
    model: Cow<'a, IsolationForestModel>,
}

/// Trees built on `features`; tree `i` uses stream `(seed, i)` to draw its
/// subsample without replacement and to pick splits.
pub fn build_forest(
    features: &Dataset,
    n_trees: usize,
    subsample: usize,
    seed: u64,
    execution: Execution,
) -> Result<IsolationForestModel> {
    let trees = grow_trees(features, n_trees, subsample, seed, execution)?;
    Ok(IsolationForestModel {
        trees,
        subsample,
        space: Space::Raw,
        iser_model: None,
    })
}

fn grow_trees(
    features: &Dataset,
    n_trees: usize,
    subsample: usize,
    seed: u64,
    execution: Execution,
) -> Result<Vec<IsolationTree>> {
    if n_trees == 0 {
        return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
    }
    if subsample < 2 {
        return Err(Error::InvalidParameter(format!(
            "subsample must be at least 2, got {subsample}"
        )));
    }
    if subsample > features.n() {
        return Err(Error::SubsampleExceedsN {
            subsample,
            n: features.n(),
        });
    }
    let limit = height_limit(subsample);
    let n = features.n();
    Ok(execution.map_indexed(n_trees, |i| {
        let mut rng = RngStream::new(seed, i as u64).rng();
        let idx = index::sample(&mut rng, n, subsample).into_vec();
        IsolationTree::grow(features, idx, limit, &mut rng)
    }))
}

/// Fits the ISER partitions on `data`, maps every row to its ensemble
/// representation and grows the forest in that space. Trees use a seed
/// derived from `config.seed`.
pub fn fit_iser_forest(
    data: &Dataset,
    config: &IserConfig,
    n_trees: usize,
    subsample: usize,
) -> Result<IsolationForestModel> {
    let iser = PartitionSet::fit(data, config)?;
    let phi = phi_features(&iser, data, config.execution)?;
    let trees = grow_trees(
        &phi,
        n_trees,
        subsample,
        derive_seed(config.seed, TREE_SEED_SALT),
        config.execution,
    )?;
    Ok(IsolationForestModel {
        trees,
        subsample,
        space: Space::Phi,
        iser_model: Some(iser),
    })
}

/// The `n x t` matrix of ensemble representations.
pub fn phi_features(model: &PartitionSet, data: &Dataset, execution: Execution) -> Result<Dataset> {
    if data.d() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: data.d(),
        });
    }
    let rows = execution.map_indexed(data.n(), |i| {
        let x = model.prepare(data.row(i)).expect("dimension checked");
        transform_prepared(model, &x)
    });
    Dataset::new(rows.concat(), data.n(), model.t())
}

impl IsolationForestModel {
    pub fn trees(&self) -> &[IsolationTree] {
        &self.trees
    }

    pub fn subsample(&self) -> usize {
        self.subsample
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn iser_model(&self) -> Option<&PartitionSet> {
        self.iser_model.as_ref()
    }

    /// Dimension of the points the forest scores (before any mapping).
    pub fn input_dim(&self) -> usize {
        match &self.iser_model {
            Some(m) => m.dim(),
            None => self.trees[0].dim(),
        }
    }

    fn expect_space(&self, expected: Space) -> Result<()> {
        if self.space != expected {
            return Err(Error::SpaceMismatch {
                expected: expected.name(),
                actual: self.space.name(),
            });
        }
        Ok(())
    }

    /// Mean path length over the trees for a point already in the forest's
    /// feature space. Trees are summed in a fixed order.
    pub fn mean_path_length(&self, features: &[f64]) -> Result<f64> {
        let dim = self.trees[0].dim();
        if features.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: features.len(),
            });
        }
        let total: f64 = self
            .trees
            .iter()
            .map(|t| t.path_length_unchecked(features))
            .sum();
        Ok(total / self.trees.len() as f64)
    }

    /// Classic isolation score `2^(-E(h)/c(subsample))` of a point given in
    /// the forest's own feature space.
    pub fn isolation_score(&self, features: &[f64]) -> Result<f64> {
        let mean = self.mean_path_length(features)?;
        Ok(isolation_score_from_path(mean, self.subsample))
    }

    /// Ensemble representation of `x` (Phi-space forests only).
    pub fn map_to_phi(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.expect_space(Space::Phi)?;
        let iser = self
            .iser_model
            .as_ref()
            .expect("phi forest carries partitions");
        let x = iser.prepare(x)?;
        Ok(transform_prepared(iser, &x))
    }

    /// Raw-space iForest anomaly score.
    pub fn score_iforest(&self, x: &[f64]) -> Result<f64> {
        self.expect_space(Space::Raw)?;
        self.isolation_score(x)
    }

    /// Inverted score on ensemble representations: long paths (hard to
    /// isolate) mean anomalous.
    pub fn score_iser_if(&self, x: &[f64]) -> Result<f64> {
        let phi = self.map_to_phi(x)?;
        let mean = self.mean_path_length(&phi)?;
        Ok(inverted_score_from_path(mean, self.subsample))
    }

    /// Scores with whichever formula matches the forest's space.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        match self.space {
            Space::Raw => self.score_iforest(x),
            Space::Phi => self.score_iser_if(x),
        }
    }

    pub fn score_dataset(&self, data: &Dataset, execution: Execution) -> Result<ScoreVector> {
        let scores = execution
            .map_indexed(data.n(), |i| self.score(data.row(i)))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let method = match self.space {
            Space::Raw => Method::IForest,
            Space::Phi => Method::IserIf,
        };
        Ok(ScoreVector { scores, method })
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ForestDocument {
            format: Cow::Borrowed(FOREST_FORMAT),
            model: Cow::Borrowed(self),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ForestDocument<'static> = serde_json::from_str(s)?;
        if doc.format != FOREST_FORMAT {
            return Err(Error::UnsupportedFormat(doc.format.into_owned()));
        }
        Ok(doc.model.into_owned())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json()?.as_bytes())
    }
}

pub fn isolation_score_from_path(mean_path: f64, subsample: usize) -> f64 {
    (-mean_path / average_path_length(subsample)).exp2()
}

pub fn inverted_score_from_path(mean_path: f64, subsample: usize) -> f64 {
    1.0 - isolation_score_from_path(mean_path, subsample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn gaussianish(seed: u64, n: usize, d: usize) -> Dataset {
        let mut rng = RngStream::new(seed, 0).rng();
        let vals: Vec<f64> = (0..n * d)
            .map(|_| (0..4).map(|_| rng.random::<f64>()).sum::<f64>() - 2.0)
            .collect();
        Dataset::new(vals, n, d).unwrap()
    }

    #[test]
    fn c_values() {
        assert_eq!(average_path_length(0), 0.0);
        assert_eq!(average_path_length(1), 0.0);
        assert!((average_path_length(2) - 0.1544).abs() < 1e-3);
        assert!((average_path_length(256) - 10.244).abs() < 1e-2);
        let c5 = 2.0 * (4f64.ln() + 0.57722) - 8.0 / 5.0;
        assert!((average_path_length(5) - c5).abs() < 1e-4);
    }

    #[test]
    fn c_is_monotone() {
        for n in 2..5000 {
            assert!(average_path_length(n + 1) > average_path_length(n));
        }
    }

    #[test]
    fn two_points_split_at_depth_one() {
        let data = Dataset::from_rows(&[[0.0], [10.0]]).unwrap();
        let f = build_forest(&data, 1, 2, 3, Execution::Sequential).unwrap();
        let tree = &f.trees()[0];
        assert_eq!(tree.leaf_for(&[0.0]), (1, 1));
        assert_eq!(tree.leaf_for(&[10.0]), (1, 1));
        assert_eq!(tree.path_length(&[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn identical_points_give_root_leaves() {
        let data = Dataset::from_rows(&vec![[3.0, 3.0]; 16]).unwrap();
        let f = build_forest(&data, 5, 8, 0, Execution::Parallel).unwrap();
        for t in f.trees() {
            assert_eq!(t.nodes(), &[Node::Leaf { size: 8, depth: 0 }]);
            assert_eq!(t.path_length(&[3.0, 3.0]).unwrap(), average_path_length(8));
        }
    }

    #[test]
    fn path_length_adds_leaf_correction() {
        let tree = IsolationTree {
            dim: 1,
            nodes: vec![
                Node::Internal {
                    feature: 0,
                    split: 0.0,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { size: 1, depth: 1 },
                Node::Internal {
                    feature: 0,
                    split: 5.0,
                    left: 3,
                    right: 4,
                },
                Node::Leaf { size: 5, depth: 2 },
                Node::Internal {
                    feature: 0,
                    split: 8.0,
                    left: 5,
                    right: 6,
                },
                Node::Leaf { size: 1, depth: 3 },
                Node::Leaf { size: 2, depth: 3 },
            ],
        };
        assert_eq!(tree.path_length(&[6.0]).unwrap(), 3.0);
        assert!((tree.path_length(&[1.0]).unwrap() - 4.327).abs() < 1e-3);
        assert!(tree.path_length(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn rejects_bad_subsample() {
        let data = gaussianish(0, 10, 2);
        assert!(matches!(
            build_forest(&data, 10, 11, 0, Execution::Parallel),
            Err(Error::SubsampleExceedsN { .. })
        ));
        assert!(build_forest(&data, 10, 1, 0, Execution::Parallel).is_err());
    }

    #[test]
    fn score_limits() {
        assert_eq!(
            isolation_score_from_path(average_path_length(256), 256),
            0.5
        );
        assert_eq!(inverted_score_from_path(average_path_length(256), 256), 0.5);
        assert_eq!(isolation_score_from_path(0.0, 64), 1.0);
        assert_eq!(inverted_score_from_path(0.0, 64), 0.0);
        assert!(isolation_score_from_path(1e4, 64) < 1e-100);
    }

    #[test]
    fn space_is_enforced() {
        let data = gaussianish(4, 100, 2);
        let raw = build_forest(&data, 10, 32, 1, Execution::Parallel).unwrap();
        assert!(matches!(
            raw.score_iser_if(&[0.0, 0.0]),
            Err(Error::SpaceMismatch { .. })
        ));
        let phi = fit_iser_forest(&data, &IserConfig::new(8, 20, 1), 10, 32).unwrap();
        assert!(matches!(
            phi.score_iforest(&[0.0, 0.0]),
            Err(Error::SpaceMismatch { .. })
        ));
        assert!(matches!(
            phi.score_iser_if(&[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(phi.trees()[0].dim(), 20);
        assert_eq!(phi.input_dim(), 2);
    }

    #[test]
    fn inversion_identity() {
        let data = gaussianish(6, 300, 3);
        let model = fit_iser_forest(&data, &IserConfig::new(16, 40, 2), 50, 128).unwrap();
        for row in data.rows().take(100) {
            let phi = model.map_to_phi(row).unwrap();
            let direct = model.isolation_score(&phi).unwrap();
            let inverted = model.score_iser_if(row).unwrap();
            assert!((inverted - (1.0 - direct)).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_across_modes() {
        let data = gaussianish(8, 400, 4);
        let a = build_forest(&data, 30, 64, 5, Execution::Parallel).unwrap();
        let b = build_forest(&data, 30, 64, 5, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        let sa = a.score_dataset(&data, Execution::Parallel).unwrap();
        let sb = b.score_dataset(&data, Execution::Sequential).unwrap();
        assert_eq!(sa, sb);
    }

    #[test]
    fn outlier_scores_higher_in_raw_space() {
        let mut rows: Vec<Vec<f64>> = gaussianish(1, 300, 2).rows().map(|r| r.to_vec()).collect();
        rows.push(vec![8.0, 8.0]);
        let data = Dataset::from_rows(&rows).unwrap();
        let f = build_forest(&data, 100, 256, 0, Execution::Parallel).unwrap();
        let out = f.score_iforest(&[8.0, 8.0]).unwrap();
        let inner = f.score_iforest(&[0.0, 0.0]).unwrap();
        assert!(out > 0.6 && inner < 0.5, "{out} {inner}");
    }

    #[test]
    fn json_round_trip() {
        let data = gaussianish(2, 60, 2);
        let f = fit_iser_forest(&data, &IserConfig::new(4, 6, 3), 4, 16).unwrap();
        let json = f.to_json().unwrap();
        assert!(json.contains(FOREST_FORMAT));
        assert_eq!(IsolationForestModel::from_json(&json).unwrap(), f);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn height_and_routing_invariants(seed in any::<u64>(), n in 4usize..200, sub_frac in 0.0f64..1.0) {
            let data = gaussianish(seed, n, 3);
            let subsample = 2 + ((n - 2) as f64 * sub_frac) as usize;
            let f = build_forest(&data, 5, subsample, seed, Execution::Sequential).unwrap();
            for t in f.trees() {
                prop_assert!(t.height() <= height_limit(subsample));
                let leaf_total: usize = t.nodes().iter().map(|n| match n {
                    Node::Leaf { size, .. } => *size,
                    _ => 0,
                }).sum();
                prop_assert_eq!(leaf_total, subsample);
            }
            for row in data.rows() {
                let s = f.score_iforest(row).unwrap();
                prop_assert!(s > 0.0 && s <= 1.0);
            }
        }
    }
}
