//! Hypersphere partitionings: each one samples `psi` points as centers and
//! gives every center a radius equal to the distance to its nearest fellow
//! center. The ensemble of `t` such partitionings is the fitted ISER model.

use std::borrow::Cow;
use std::path::Path;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{write_file, Dataset, IserConfig, MinMaxScaler, RngStream};

/// Lower bound applied to radii so `1 - 1/r` stays finite when the sample
/// contains duplicate points.
pub const RADIUS_FLOOR: f64 = 1e-12;

/// Format tag written into serialized partition sets.
pub const PARTITION_FORMAT: &str = "iser-partitions/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partitioning {
    d: usize,
    /// Row-major `psi x d` center coordinates.
    centers: Vec<f64>,
    radii: Vec<f64>,
    /// Dataset rows the centers were drawn from.
    sample: Vec<usize>,
}

impl Partitioning {
    /// Builds a partitioning from explicit centers; radii follow the
    /// nearest-other-center rule.
    pub fn from_centers<R: AsRef<[f64]>>(centers: &[R]) -> Result<Self> {
        if centers.len() < 2 {
            return Err(Error::InvalidParameter(
                "a partitioning needs at least 2 centers".into(),
            ));
        }
        let d = centers[0].as_ref().len();
        let mut flat = Vec::with_capacity(centers.len() * d);
        for c in centers {
            let c = c.as_ref();
            if c.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: c.len(),
                });
            }
            flat.extend_from_slice(c);
        }
        let radii = nearest_other_distances(&flat, d);
        Ok(Partitioning {
            d,
            centers: flat,
            radii,
            sample: (0..centers.len()).collect(),
        })
    }

    fn from_sample(data: &Dataset, sample: Vec<usize>) -> Self {
        let d = data.d();
        let mut centers = Vec::with_capacity(sample.len() * d);
        for &i in &sample {
            centers.extend_from_slice(data.row(i));
        }
        let radii = nearest_other_distances(&centers, d);
        Partitioning {
            d,
            centers,
            radii,
            sample,
        }
    }

    pub fn psi(&self) -> usize {
        self.radii.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn center(&self, j: usize) -> &[f64] {
        &self.centers[j * self.d..(j + 1) * self.d]
    }

    pub fn centers(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.centers.chunks_exact(self.d)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn sample_indices(&self) -> &[usize] {
        &self.sample
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Index of and Euclidean distance to the closest center; ties go to the
    /// lowest index.
    pub fn nearest_center(&self, x: &[f64]) -> Result<(usize, f64)> {
        self.check_dim(x)?;
        Ok(self.nearest_unchecked(x))
    }

    pub(crate) fn nearest_unchecked(&self, x: &[f64]) -> (usize, f64) {
        let mut best = 0;
        let mut best_sq = f64::INFINITY;
        for (j, c) in self.centers.chunks_exact(self.d).enumerate() {
            let sq = squared_distance(c, x);
            if sq < best_sq {
                best_sq = sq;
                best = j;
            }
        }
        (best, best_sq.sqrt())
    }

    /// Whether `x` lies inside (boundary included) its nearest hypersphere,
    /// together with that hypersphere's radius.
    pub fn radius_of_nearest(&self, x: &[f64]) -> Result<(bool, f64)> {
        self.check_dim(x)?;
        let (j, dist) = self.nearest_unchecked(x);
        Ok((dist <= self.radii[j], self.radii[j]))
    }

    /// Nearest center index when `x` is covered by it, `None` otherwise.
    pub(crate) fn covering_center(&self, x: &[f64]) -> Option<usize> {
        let (j, dist) = self.nearest_unchecked(x);
        (dist <= self.radii[j]).then_some(j)
    }

    /// Index of the closest other center for every center (lowest index on ties).
    pub fn nearest_neighbor_centers(&self) -> Vec<usize> {
        let psi = self.psi();
        (0..psi)
            .map(|j| {
                let cj = self.center(j);
                let mut best = usize::MAX;
                let mut best_sq = f64::INFINITY;
                for k in (0..psi).filter(|&k| k != j) {
                    let sq = squared_distance(cj, self.center(k));
                    if sq < best_sq {
                        best_sq = sq;
                        best = k;
                    }
                }
                best
            })
            .collect()
    }

    fn heap_bytes(&self) -> usize {
        (self.centers.capacity() + self.radii.capacity()) * std::mem::size_of::<f64>()
            + self.sample.capacity() * std::mem::size_of::<usize>()
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

fn nearest_other_distances(centers: &[f64], d: usize) -> Vec<f64> {
    let psi = centers.len() / d;
    let rows: Vec<&[f64]> = centers.chunks_exact(d).collect();
    (0..psi)
        .map(|j| {
            let min_sq = (0..psi)
                .filter(|&k| k != j)
                .map(|k| squared_distance(rows[j], rows[k]))
                .fold(f64::INFINITY, f64::min);
            min_sq.sqrt().max(RADIUS_FLOOR)
        })
        .collect()
}

/// The fitted ensemble of `t` partitionings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSet {
    partitions: Vec<Partitioning>,
    config: IserConfig,
    fitted_on_n: usize,
    /// Present when the model was fitted with `normalize`; applied to every
    /// query point before the nearest-center search.
    scaler: Option<MinMaxScaler>,
}

#[derive(Serialize, Deserialize)]
struct PartitionDocument<'a> {
    format: Cow<'a, str>,
    #[serde(flatten)]
    model: Cow<'a, PartitionSet>,
}

impl PartitionSet {
    /// Samples `t` independent partitionings. Partitioning `i` draws its
    /// `psi` centers without replacement from stream `(seed, i)`, so the
    /// result does not depend on the execution mode.
    pub fn fit(data: &Dataset, config: &IserConfig) -> Result<Self> {
        config.validate()?;
        if config.psi > data.n() {
            return Err(Error::PsiExceedsN {
                psi: config.psi,
                n: data.n(),
            });
        }
        let (scaler, owned);
        let data = if config.normalize {
            let s = MinMaxScaler::fit(data);
            owned = s.transform(data);
            scaler = Some(s);
            &owned
        } else {
            scaler = None;
            data
        };
        let n = data.n();
        let partitions = config.execution.map_indexed(config.t, |i| {
            let mut rng = RngStream::new(config.seed, i as u64).rng();
            let sample = index::sample(&mut rng, n, config.psi).into_vec();
            Partitioning::from_sample(data, sample)
        });
        Ok(PartitionSet {
            partitions,
            config: *config,
            fitted_on_n: n,
            scaler,
        })
    }

    /// Wraps hand-built partitionings (no scaling).
    pub fn from_partitions(partitions: Vec<Partitioning>) -> Result<Self> {
        let first = partitions
            .first()
            .ok_or_else(|| Error::InvalidParameter("need at least one partitioning".into()))?;
        let (psi, d) = (first.psi(), first.dim());
        for p in &partitions {
            if p.psi() != psi {
                return Err(Error::InvalidParameter(
                    "all partitionings must share psi".into(),
                ));
            }
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.dim(),
                });
            }
        }
        let config = IserConfig::new(psi, partitions.len(), 0);
        Ok(PartitionSet {
            partitions,
            config,
            fitted_on_n: psi,
            scaler: None,
        })
    }

    pub fn partitions(&self) -> &[Partitioning] {
        &self.partitions
    }

    pub fn config(&self) -> &IserConfig {
        &self.config
    }

    pub fn t(&self) -> usize {
        self.partitions.len()
    }

    pub fn psi(&self) -> usize {
        self.config.psi
    }

    pub fn dim(&self) -> usize {
        self.partitions[0].dim()
    }

    pub fn fitted_on_n(&self) -> usize {
        self.fitted_on_n
    }

    pub fn scaler(&self) -> Option<&MinMaxScaler> {
        self.scaler.as_ref()
    }

    /// Checks the dimension of `x` and maps it into the model's space.
    pub fn prepare<'a>(&self, x: &'a [f64]) -> Result<Cow<'a, [f64]>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(match &self.scaler {
            Some(s) => {
                let mut out = vec![0.0; x.len()];
                s.transform_point(x, &mut out);
                Cow::Owned(out)
            }
            None => Cow::Borrowed(x),
        })
    }

    /// Bytes held by the fitted model's buffers; depends on `t`, `psi` and
    /// `d` only.
    pub fn heap_bytes(&self) -> usize {
        self.partitions
            .iter()
            .map(Partitioning::heap_bytes)
            .sum::<usize>()
            + self.partitions.capacity() * std::mem::size_of::<Partitioning>()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = PartitionDocument {
            format: Cow::Borrowed(PARTITION_FORMAT),
            model: Cow::Borrowed(self),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: PartitionDocument<'static> = serde_json::from_str(s)?;
        if doc.format != PARTITION_FORMAT {
            return Err(Error::UnsupportedFormat(doc.format.into_owned()));
        }
        Ok(doc.model.into_owned())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}
