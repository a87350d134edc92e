//! iNNE and IDK scorers built on the same hypersphere partitionings as ISER.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, Execution};
use crate::partitioning::PartitionSet;
use crate::scoring::{Method, ScoreVector};

/// iNNE: each partitioning compares the radius of the covering hypersphere
/// with the radius of that hypersphere's nearest neighboring hypersphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InneModel {
    partition_set: PartitionSet,
    /// Per partitioning, entry `j` is the radius of center `j`'s nearest
    /// other center.
    neighbor_radius: Vec<Vec<f64>>,
}

impl InneModel {
    pub fn new(partition_set: PartitionSet) -> Self {
        let neighbor_radius = partition_set
            .partitions()
            .iter()
            .map(|p| {
                p.nearest_neighbor_centers()
                    .into_iter()
                    .map(|k| p.radii()[k])
                    .collect()
            })
            .collect();
        InneModel {
            partition_set,
            neighbor_radius,
        }
    }

    pub fn partition_set(&self) -> &PartitionSet {
        &self.partition_set
    }

    pub fn neighbor_radius(&self) -> &[Vec<f64>] {
        &self.neighbor_radius
    }

    /// Per-partitioning values: `1` when uncovered, otherwise one minus the
    /// ratio of the neighboring radius to the covering radius.
    pub fn partition_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = self.partition_set.prepare(x)?;
        Ok(self
            .partition_set
            .partitions()
            .iter()
            .zip(&self.neighbor_radius)
            .map(|(p, nbr)| match p.covering_center(&x) {
                Some(j) => 1.0 - nbr[j] / p.radii()[j],
                None => 1.0,
            })
            .collect())
    }

    /// Mean of the per-partitioning values.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        let v = self.partition_values(x)?;
        Ok(v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn score_dataset(&self, data: &Dataset, execution: Execution) -> Result<ScoreVector> {
        let scores = execution
            .map_indexed(data.n(), |i| self.score(data.row(i)))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(ScoreVector {
            scores,
            method: Method::Inne,
        })
    }
}

pub fn inne_score(model: &InneModel, x: &[f64]) -> Result<f64> {
    model.score(x)
}

/// Point-scoring isolation kernel: binary hypersphere-membership feature map
/// compared against the kernel mean embedding of the training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdkModel {
    partition_set: PartitionSet,
    /// Length `t * psi`; block `i` holds the fraction of training points
    /// covered by each center of partitioning `i`.
    kme: Vec<f64>,
}

impl IdkModel {
    /// Averages the feature maps of every row of `data`.
    pub fn fit(partition_set: PartitionSet, data: &Dataset, execution: Execution) -> Result<Self> {
        if data.d() != partition_set.dim() {
            return Err(Error::DimensionMismatch {
                expected: partition_set.dim(),
                got: data.d(),
            });
        }
        let psi = partition_set.psi();
        let t = partition_set.t();
        // Per-row covering indices, then counted in row order.
        let hits =
            execution.map_indexed(data.n(), |i| covering_indices(&partition_set, data.row(i)));
        let mut counts = vec![0usize; t * psi];
        for row in hits {
            for (block, j) in row?.into_iter().enumerate() {
                if let Some(j) = j {
                    counts[block * psi + j] += 1;
                }
            }
        }
        let n = data.n() as f64;
        let kme = counts.into_iter().map(|c| c as f64 / n).collect();
        Ok(IdkModel { partition_set, kme })
    }

    pub fn partition_set(&self) -> &PartitionSet {
        &self.partition_set
    }

    pub fn kme(&self) -> &[f64] {
        &self.kme
    }

    /// One-hot block per partitioning at the covering center, zero block when
    /// uncovered.
    pub fn feature_map(&self, x: &[f64]) -> Result<Vec<u8>> {
        let psi = self.partition_set.psi();
        let mut out = vec![0u8; self.kme.len()];
        for (block, j) in covering_indices(&self.partition_set, x)?
            .into_iter()
            .enumerate()
        {
            if let Some(j) = j {
                out[block * psi + j] = 1;
            }
        }
        Ok(out)
    }

    /// Dot product of the feature map with the embedding (a normality score).
    pub fn similarity(&self, x: &[f64]) -> Result<f64> {
        let psi = self.partition_set.psi();
        Ok(covering_indices(&self.partition_set, x)?
            .into_iter()
            .enumerate()
            .filter_map(|(block, j)| j.map(|j| self.kme[block * psi + j]))
            .sum())
    }

    /// Negated similarity, so higher means more anomalous.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(-self.similarity(x)?)
    }

    pub fn score_dataset(&self, data: &Dataset, execution: Execution) -> Result<ScoreVector> {
        let scores = execution
            .map_indexed(data.n(), |i| self.score(data.row(i)))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(ScoreVector {
            scores,
            method: Method::Idk,
        })
    }
}

pub fn idk_feature_map(model: &IdkModel, x: &[f64]) -> Result<Vec<u8>> {
    model.feature_map(x)
}

pub fn idk_score(model: &IdkModel, x: &[f64]) -> Result<f64> {
    model.score(x)
}

fn covering_indices(set: &PartitionSet, x: &[f64]) -> Result<Vec<Option<usize>>> {
    let x = set.prepare(x)?;
    Ok(set
        .partitions()
        .iter()
        .map(|p| p.covering_center(&x))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{IserConfig, RngStream};
    use crate::partitioning::Partitioning;
    use crate::scoring::{score_avg, transform};
    use rand::Rng;

    /// Centers A=0, B=2 (radius 2) and C=10, D=15 (radius 5).
    fn four_center_set() -> PartitionSet {
        let p = Partitioning::from_centers(&[[0.0], [2.0], [10.0], [15.0]]).unwrap();
        PartitionSet::from_partitions(vec![p]).unwrap()
    }

    /// 5 points in A, 3 in B, 3 in C, 2 in D and one outside every sphere.
    fn four_center_points() -> Dataset {
        let xs = [
            -1.5, -0.5, 0.0, 0.4, 0.9, // A
            1.8, 2.5, 3.5, // B
            8.0, 10.0, 12.0, // C
            15.0, 17.0, // D
            30.0, // uncovered
        ];
        let rows: Vec<[f64; 1]> = xs.iter().map(|&x| [x]).collect();
        Dataset::from_rows(&rows).unwrap()
    }

    #[test]
    fn inne_equal_radii_give_zero() {
        let m = InneModel::new(four_center_set());
        assert_eq!(m.neighbor_radius(), &[vec![2.0, 2.0, 5.0, 5.0]]);
        assert_eq!(m.partition_values(&[1.5]).unwrap(), vec![0.0]);
        assert_eq!(m.partition_values(&[9.0]).unwrap(), vec![0.0]);
        assert_eq!(inne_score(&m, &[40.0]).unwrap(), 1.0);
        assert!(inne_score(&m, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn inne_neighbor_radius_matches_brute_force() {
        let mut rng = RngStream::new(3, 3).rng();
        let rows: Vec<[f64; 2]> = (0..80).map(|_| [rng.random(), rng.random()]).collect();
        let data = Dataset::from_rows(&rows).unwrap();
        let set = PartitionSet::fit(&data, &IserConfig::new(10, 5, 0)).unwrap();
        let m = InneModel::new(set.clone());
        for (p, nbr) in set.partitions().iter().zip(m.neighbor_radius()) {
            for j in 0..p.psi() {
                let k = (0..p.psi())
                    .filter(|&k| k != j)
                    .min_by(|&a, &b| {
                        let da = crate::partitioning::squared_distance(p.center(j), p.center(a));
                        let db = crate::partitioning::squared_distance(p.center(j), p.center(b));
                        da.total_cmp(&db)
                    })
                    .unwrap();
                assert_eq!(nbr[j], p.radii()[k]);
                // The neighbor is no farther than the center's own radius.
                assert!(nbr[j] <= p.radii()[j]);
            }
        }
        for row in data.rows() {
            for v in m.partition_values(row).unwrap() {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn idk_feature_maps() {
        let m = IdkModel::fit(
            four_center_set(),
            &four_center_points(),
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(idk_feature_map(&m, &[2.5]).unwrap(), vec![0, 1, 0, 0]);
        assert_eq!(idk_feature_map(&m, &[11.0]).unwrap(), vec![0, 0, 1, 0]);
        assert_eq!(idk_feature_map(&m, &[-9.0]).unwrap(), vec![0, 0, 0, 0]);
    }

    #[test]
    fn idk_kme_reconstruction() {
        let m = IdkModel::fit(
            four_center_set(),
            &four_center_points(),
            Execution::Parallel,
        )
        .unwrap();
        let expected = [5.0 / 14.0, 3.0 / 14.0, 3.0 / 14.0, 2.0 / 14.0];
        assert_eq!(m.kme(), &expected);
        let rounded: Vec<f64> = m
            .kme()
            .iter()
            .map(|v| (v * 100.0).round() / 100.0)
            .collect();
        assert_eq!(rounded, vec![0.36, 0.21, 0.21, 0.14]);

        // Equal-count blind spot: B and C interiors score the same.
        assert_eq!(
            idk_score(&m, &[2.5]).unwrap(),
            idk_score(&m, &[11.0]).unwrap()
        );
        assert_eq!(m.similarity(&[-9.0]).unwrap(), 0.0);
        assert!(idk_score(&m, &[-9.0]).unwrap() > idk_score(&m, &[0.0]).unwrap());

        // ISER-A separates them by radius.
        let set = four_center_set();
        let a1 = score_avg(&transform(&set, &[2.5]).unwrap());
        let a2 = score_avg(&transform(&set, &[11.0]).unwrap());
        assert_eq!((a1, a2), (0.5, 0.8));
    }

    #[test]
    fn kme_is_column_mean_of_feature_maps() {
        let mut rng = RngStream::new(4, 4).rng();
        let rows: Vec<[f64; 2]> = (0..150)
            .map(|_| [rng.random(), rng.random::<f64>() * 3.0])
            .collect();
        let data = Dataset::from_rows(&rows).unwrap();
        let set = PartitionSet::fit(&data, &IserConfig::new(12, 7, 8)).unwrap();
        let m = IdkModel::fit(set, &data, Execution::Parallel).unwrap();
        let mut sums = vec![0.0; m.kme().len()];
        for row in data.rows() {
            let fm = m.feature_map(row).unwrap();
            for block in fm.chunks(12) {
                assert!(block.iter().map(|&b| b as usize).sum::<usize>() <= 1);
            }
            for (s, b) in sums.iter_mut().zip(fm) {
                *s += b as f64;
            }
        }
        for (k, s) in m.kme().iter().zip(sums) {
            assert!((k - s / 150.0).abs() < 1e-15);
            assert!((0.0..=1.0).contains(k));
        }
        for block in m.kme().chunks(12) {
            assert!(block.iter().sum::<f64>() <= 1.0 + 1e-12);
        }
    }
}
