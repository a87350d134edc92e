//! Ensemble representations and the two ISER scores.
//!
//! Each partitioning contributes `phi = 1 - 1/r` when a point lies inside its
//! nearest hypersphere of radius `r`, and exactly `1` otherwise. The average
//! score is the mean of those components; the similarity score is their
//! cosine with the all-ones pattern of a point isolated everywhere.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{write_file, Dataset, Execution};
use crate::partitioning::{PartitionSet, Partitioning};

/// Detection methods exposed by the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    IserA,
    IserS,
    IserIf,
    Inne,
    Idk,
    IForest,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::IserA,
        Method::IserS,
        Method::IserIf,
        Method::Inne,
        Method::Idk,
        Method::IForest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::IserA => "iser-a",
            Method::IserS => "iser-s",
            Method::IserIf => "iser-if",
            Method::Inne => "inne",
            Method::Idk => "idk",
            Method::IForest => "iforest",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// `Phi(x)`: one component per partitioning, each at most 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleVector(pub Vec<f64>);

impl EnsembleVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-row scores in input order; higher means more anomalous.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub scores: Vec<f64>,
    pub method: Method,
}

impl ScoreVector {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Component for one partitioning.
pub fn phi(partition: &Partitioning, x: &[f64]) -> Result<f64> {
    let (covered, r) = partition.radius_of_nearest(x)?;
    Ok(phi_value(covered, r))
}

#[inline]
fn phi_value(covered: bool, radius: f64) -> f64 {
    if covered {
        1.0 - 1.0 / radius
    } else {
        1.0
    }
}

/// Ensemble representation of `x` under every partitioning of `model`.
pub fn transform(model: &PartitionSet, x: &[f64]) -> Result<EnsembleVector> {
    let x = model.prepare(x)?;
    Ok(EnsembleVector(transform_prepared(model, &x)))
}

pub(crate) fn transform_prepared(model: &PartitionSet, x: &[f64]) -> Vec<f64> {
    model
        .partitions()
        .iter()
        .map(|p| {
            let (j, dist) = p.nearest_unchecked(x);
            let r = p.radii()[j];
            phi_value(dist <= r, r)
        })
        .collect()
}

/// Arithmetic mean of the components.
pub fn score_avg(rep: &EnsembleVector) -> f64 {
    let v = rep.values();
    v.iter().sum::<f64>() / v.len() as f64
}

/// Cosine similarity with the all-ones vector; 0 for the zero vector.
pub fn score_sim(rep: &EnsembleVector) -> f64 {
    let v = rep.values();
    let norm_sq: f64 = v.iter().map(|c| c * c).sum();
    if norm_sq == 0.0 {
        return 0.0;
    }
    let cos = v.iter().sum::<f64>() / (norm_sq * v.len() as f64).sqrt();
    cos.clamp(-1.0, 1.0)
}

/// Ensemble representations for every row of `data`.
pub fn transform_dataset(
    model: &PartitionSet,
    data: &Dataset,
    execution: Execution,
) -> Result<Vec<EnsembleVector>> {
    check_dim(model, data)?;
    execution
        .map_indexed(data.n(), |i| transform(model, data.row(i)))
        .into_iter()
        .collect()
}

/// Scores every row with ISER-A or ISER-S.
pub fn score_dataset(
    model: &PartitionSet,
    data: &Dataset,
    method: Method,
    execution: Execution,
) -> Result<ScoreVector> {
    let reduce: fn(&EnsembleVector) -> f64 = match method {
        Method::IserA => score_avg,
        Method::IserS => score_sim,
        other => {
            return Err(Error::InvalidParameter(format!(
                "{other} is not a partition-set scoring method"
            )))
        }
    };
    check_dim(model, data)?;
    let scores = execution
        .map_indexed(data.n(), |i| {
            transform(model, data.row(i)).map(|r| reduce(&r))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreVector { scores, method })
}

fn check_dim(model: &PartitionSet, data: &Dataset) -> Result<()> {
    if data.d() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: data.d(),
        });
    }
    Ok(())
}

/// Renders `row_index,score[,label]`.
pub fn scores_csv(scores: &[f64], labels: Option<&[u8]>) -> String {
    let mut out = String::from(if labels.is_some() {
        "row_index,score,label\n"
    } else {
        "row_index,score\n"
    });
    for (i, s) in scores.iter().enumerate() {
        out.push_str(&format!("{i},{s}"));
        if let Some(l) = labels {
            out.push_str(&format!(",{}", l[i]));
        }
        out.push('\n');
    }
    out
}

pub fn write_scores_csv(
    path: impl AsRef<Path>,
    scores: &[f64],
    labels: Option<&[u8]>,
) -> Result<()> {
    write_file(path.as_ref(), scores_csv(scores, labels).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{IserConfig, RngStream};
    use proptest::prelude::*;
    use rand::Rng;

    fn four_center() -> Partitioning {
        Partitioning::from_centers(&[[0.0], [2.0], [10.0], [15.0]]).unwrap()
    }

    #[test]
    fn phi_examples() {
        let p = four_center();
        assert_eq!(phi(&p, &[0.5]).unwrap(), 0.5);
        assert_eq!(phi(&p, &[11.0]).unwrap(), 0.8);
        assert_eq!(phi(&p, &[100.0]).unwrap(), 1.0);
        let tight = Partitioning::from_centers(&[[0.0], [0.5]]).unwrap();
        assert_eq!(phi(&tight, &[0.1]).unwrap(), -1.0);
        assert!(phi(&p, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn transform_examples() {
        let set = PartitionSet::from_partitions(vec![four_center()]).unwrap();
        assert_eq!(transform(&set, &[1.5]).unwrap().values(), &[0.5]);
        let set = PartitionSet::from_partitions(vec![four_center(), four_center(), four_center()])
            .unwrap();
        assert_eq!(
            transform(&set, &[-50.0]).unwrap().values(),
            &[1.0, 1.0, 1.0]
        );
        assert!(matches!(
            transform(&set, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reference_vectors() {
        let a = EnsembleVector(vec![0.2, 0.3, 0.3, 0.2, 0.3]);
        let b = EnsembleVector(vec![0.9, 0.9, 0.8, 0.9, 0.1]);
        assert!((score_avg(&a) - 0.26).abs() < 1e-15);
        assert!((score_avg(&b) - 0.72).abs() < 1e-15);
        assert!((score_sim(&a) - 0.98).abs() < 0.005);
        assert!((score_sim(&b) - 0.92).abs() < 0.005);
        let ones = EnsembleVector(vec![1.0; 7]);
        assert_eq!(score_avg(&ones), 1.0);
        assert_eq!(score_sim(&ones), 1.0);
        assert_eq!(score_sim(&EnsembleVector(vec![0.0; 4])), 0.0);
    }

    #[test]
    fn four_center_density_ordering() {
        let set = PartitionSet::from_partitions(vec![four_center()]).unwrap();
        let x1 = transform(&set, &[1.0]).unwrap();
        let x2 = transform(&set, &[12.0]).unwrap();
        assert!(score_avg(&x2) > score_avg(&x1));
        // With t = 1 the cosine of any positive component with 1 is exactly 1.
        assert_eq!(score_sim(&x1), 1.0);
        assert_eq!(score_sim(&x2), 1.0);

        // A second partitioning that leaves both points uncovered separates them.
        let far = Partitioning::from_centers(&[[100.0], [101.0], [102.0], [103.0]]).unwrap();
        let set = PartitionSet::from_partitions(vec![four_center(), far]).unwrap();
        let x1 = transform(&set, &[1.0]).unwrap();
        let x2 = transform(&set, &[12.0]).unwrap();
        assert_eq!(x1.values(), &[0.5, 1.0]);
        assert_eq!(x2.values(), &[0.8, 1.0]);
        assert!(score_avg(&x2) > score_avg(&x1));
        assert!(score_sim(&x2) > score_sim(&x1));
    }

    fn random_data(seed: u64, n: usize) -> Dataset {
        let mut rng = RngStream::new(seed, 7).rng();
        let rows: Vec<[f64; 2]> = (0..n)
            .map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
            .collect();
        Dataset::from_rows(&rows).unwrap()
    }

    #[test]
    fn batch_matches_per_point_loop() {
        let data = random_data(3, 200);
        let model = PartitionSet::fit(&data, &IserConfig::new(16, 30, 9)).unwrap();
        for method in [Method::IserA, Method::IserS] {
            let batch = score_dataset(&model, &data, method, Execution::Parallel).unwrap();
            assert_eq!(batch.len(), 200);
            for (i, row) in data.rows().enumerate() {
                // independent per-partition loop
                let comps: Vec<f64> = model
                    .partitions()
                    .iter()
                    .map(|p| {
                        let (covered, r) = p.radius_of_nearest(row).unwrap();
                        if covered {
                            1.0 - 1.0 / r
                        } else {
                            1.0
                        }
                    })
                    .collect();
                let expected = match method {
                    Method::IserA => comps.iter().sum::<f64>() / comps.len() as f64,
                    _ => {
                        let norm = comps.iter().map(|c| c * c).sum::<f64>().sqrt();
                        comps.iter().sum::<f64>() / (norm * (comps.len() as f64).sqrt())
                    }
                };
                assert!((batch.scores[i] - expected).abs() < 1e-12);
            }
            let again = score_dataset(&model, &data, method, Execution::Sequential).unwrap();
            assert_eq!(batch, again);
        }
        assert!(score_dataset(&model, &data, Method::Idk, Execution::Parallel).is_err());
    }

    #[test]
    fn single_row_batch() {
        let set = PartitionSet::from_partitions(vec![four_center()]).unwrap();
        let data = Dataset::from_rows(&[[11.0]]).unwrap();
        let s = score_dataset(&set, &data, Method::IserA, Execution::Parallel).unwrap();
        assert_eq!(s.scores, vec![0.8]);
    }

    #[test]
    fn method_names_parse() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("ISER_S".parse::<Method>().unwrap(), Method::IserS);
        assert!("lof".parse::<Method>().is_err());
    }

    #[test]
    fn scores_csv_layout() {
        assert_eq!(
            scores_csv(&[0.5, 1.0], Some(&[0, 1])),
            "row_index,score,label\n0,0.5,0\n1,1,1\n"
        );
        assert_eq!(scores_csv(&[0.25], None), "row_index,score\n0,0.25\n");
    }

    proptest! {
        #[test]
        fn components_bounded_and_scores_in_range(seed in any::<u64>(), qx in -4.0f64..4.0, qy in -4.0f64..4.0) {
            let data = random_data(seed, 40);
            let model = PartitionSet::fit(&data, &IserConfig::new(8, 12, seed)).unwrap();
            let rep = transform(&model, &[qx, qy]).unwrap();
            for (c, p) in rep.values().iter().zip(model.partitions()) {
                prop_assert!(*c <= 1.0);
                let (covered, _) = p.radius_of_nearest(&[qx, qy]).unwrap();
                prop_assert_eq!(*c == 1.0, !covered);
            }
            let avg = score_avg(&rep);
            prop_assert!(avg <= 1.0);
            prop_assert_eq!(avg == 1.0, rep.values().iter().all(|&c| c == 1.0));
            let sim = score_sim(&rep);
            prop_assert!((-1.0..=1.0).contains(&sim));
        }

        #[test]
        fn cosine_is_scale_invariant(c in 1e-6f64..1e6, t in 1usize..300) {
            let v = EnsembleVector(vec![c; t]);
            prop_assert!((score_sim(&v) - 1.0).abs() < 1e-12);
        }
    }
}
