//! One entry point for fitting any supported method on a dataset and scoring
//! points with it.

use serde::{Deserialize, Serialize};

use crate::baselines::{IdkModel, InneModel};
use crate::error::Result;
use crate::iforest::{self, build_forest, fit_iser_forest, IsolationForestModel};
use crate::model::{Dataset, Execution, IserConfig};
use crate::partitioning::PartitionSet;
use crate::scoring::{score_avg, score_sim, transform, Method, ScoreVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Hypersphere subset size for the ISER family, iNNE and IDK.
    pub psi: usize,
    /// Number of partitionings.
    pub t: usize,
    /// Trees in iForest / ISER-IF.
    pub n_trees: usize,
    /// Tree subsample; `None` means `min(256, n)`.
    pub subsample: Option<usize>,
    pub seed: u64,
    pub normalize: bool,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            psi: 16,
            t: 200,
            n_trees: iforest::DEFAULT_TREES,
            subsample: None,
            seed: 0,
            normalize: false,
            execution: Execution::Parallel,
        }
    }
}

impl DetectorParams {
    pub fn new(psi: usize, t: usize, seed: u64) -> Self {
        DetectorParams {
            psi,
            t,
            seed,
            ..Default::default()
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_subsample(mut self, subsample: Option<usize>) -> Self {
        self.subsample = subsample;
        self
    }

    pub fn with_trees(mut self, n_trees: usize) -> Self {
        self.n_trees = n_trees;
        self
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn iser_config(&self) -> IserConfig {
        IserConfig::new(self.psi, self.t, self.seed)
            .with_normalize(self.normalize)
            .with_execution(self.execution)
    }

    fn subsample_for(&self, n: usize) -> usize {
        self.subsample
            .unwrap_or_else(|| n.min(iforest::DEFAULT_MAX_SUBSAMPLE))
    }
}

/// A fitted model for any [`Method`].
#[derive(Debug, Clone)]
pub enum Detector {
    Iser {
        model: PartitionSet,
        similarity: bool,
    },
    Inne(InneModel),
    Idk(IdkModel),
    Forest(IsolationForestModel),
}

impl Detector {
    pub fn fit(method: Method, data: &Dataset, params: &DetectorParams) -> Result<Self> {
        let config = params.iser_config();
        Ok(match method {
            Method::IserA | Method::IserS => Detector::Iser {
                model: PartitionSet::fit(data, &config)?,
                similarity: method == Method::IserS,
            },
            Method::Inne => Detector::Inne(InneModel::new(PartitionSet::fit(data, &config)?)),
            Method::Idk => {
                let set = PartitionSet::fit(data, &config)?;
                Detector::Idk(IdkModel::fit(set, data, params.execution)?)
            }
            Method::IserIf => Detector::Forest(fit_iser_forest(
                data,
                &config,
                params.n_trees,
                params.subsample_for(data.n()),
            )?),
            Method::IForest => Detector::Forest(build_forest(
                data,
                params.n_trees,
                params.subsample_for(data.n()),
                params.seed,
                params.execution,
            )?),
        })
    }

    pub fn method(&self) -> Method {
        match self {
            Detector::Iser {
                similarity: false, ..
            } => Method::IserA,
            Detector::Iser {
                similarity: true, ..
            } => Method::IserS,
            Detector::Inne(_) => Method::Inne,
            Detector::Idk(_) => Method::Idk,
            Detector::Forest(f) => match f.space() {
                iforest::Space::Raw => Method::IForest,
                iforest::Space::Phi => Method::IserIf,
            },
        }
    }

    /// Anomaly score of one point; higher means more anomalous.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        match self {
            Detector::Iser { model, similarity } => {
                let rep = transform(model, x)?;
                Ok(if *similarity {
                    score_sim(&rep)
                } else {
                    score_avg(&rep)
                })
            }
            Detector::Inne(m) => m.score(x),
            Detector::Idk(m) => m.score(x),
            Detector::Forest(f) => f.score(x),
        }
    }

    /// Scores arbitrary points, preserving their order.
    pub fn score_points<R: AsRef<[f64]> + Sync>(
        &self,
        points: &[R],
        execution: Execution,
    ) -> Result<Vec<f64>> {
        execution
            .map_indexed(points.len(), |i| self.score(points[i].as_ref()))
            .into_iter()
            .collect()
    }

    pub fn score_dataset(&self, data: &Dataset, execution: Execution) -> Result<ScoreVector> {
        let scores = execution
            .map_indexed(data.n(), |i| self.score(data.row(i)))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(ScoreVector {
            scores,
            method: self.method(),
        })
    }
}

/// Unsupervised protocol: fit on `data` and score the same rows.
pub fn detect(method: Method, data: &Dataset, params: &DetectorParams) -> Result<ScoreVector> {
    Detector::fit(method, data, params)?.score_dataset(data, params.execution)
}
